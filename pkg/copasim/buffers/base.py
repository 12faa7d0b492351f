from abc import ABC, abstractmethod
from collections import OrderedDict
from enum import IntEnum

from .. import glob
from .. import tools
from ..loaders import parse_capacity


class Error(Exception):
    pass


class HitKind(IntEnum):
    NONE = 0
    DRAM_HIT = 1
    NVM_HIT = 2
    MISS = 3

    def to_str(self):
        return self.name.lower()


class FlushCause(IntEnum):
    PJA_EVICTION = 0
    DRAM_EVICTION = 1
    NVM_EVICTION = 2
    PDFLUSH = 3

    def to_str(self):
        return self.name.lower()


class RefreshSource(IntEnum):
    # rewrite from the DRAM replica
    DISTANT = 0
    # read the journal copy back, then rewrite it
    CONVENTIONAL = 1

    @staticmethod
    def from_str(source):
        source_lower = source.lower()

        if source_lower == "distant":
            return RefreshSource.DISTANT
        if source_lower == "conventional":
            return RefreshSource.CONVENTIONAL

        raise Error(f"Bad refresh source: {source}")

    def to_str(self):
        return self.name.lower()


class PageMeta:
    __slots__ = ("page", "dirty", "last_write_s", "in_pja")

    def __init__(self, page, dirty=False, last_write_s=None, in_pja=False):
        self.page = page
        self.dirty = dirty
        self.last_write_s = last_write_s
        self.in_pja = in_pja


class PjaEntry:
    __slots__ = ("page", "last_pja_write_s", "pja_write_count", "dirty")

    def __init__(self, page, last_pja_write_s, pja_write_count=0, dirty=True):
        self.page = page
        self.last_pja_write_s = last_pja_write_s
        self.pja_write_count = pja_write_count
        self.dirty = dirty


class AccessOutcome:
    """
    Memory and storage traffic caused by one access or one maintenance
    operation (flush, refresh)
    """

    def __init__(self, hit=HitKind.NONE, kind=None):
        self.hit = hit
        # AccessKind of the request, None for maintenance work
        self.kind = kind
        self.dram_reads = 0
        self.dram_writes = 0
        self.pja_reads = 0
        self.pja_writes = 0
        self.storage_reads = 0
        self.storage_writes = 0
        self.refreshes = 0
        # (PageId, FlushCause) per storage write
        self.flushes = []

    def merge(self, other):
        self.dram_reads += other.dram_reads
        self.dram_writes += other.dram_writes
        self.pja_reads += other.pja_reads
        self.pja_writes += other.pja_writes
        self.storage_reads += other.storage_reads
        self.storage_writes += other.storage_writes
        self.refreshes += other.refreshes
        self.flushes.extend(other.flushes)
        return self


class Buffer(ABC):
    mode = None

    def __init__(self, dram_pages, pja_pages, page_size, ledger):
        """
        Generic attributes common to all Buffer subclasses

        ### Attributes ###
        dram_pages (int): DRAM buffer capacity in pages
        pja_pages (int): NVM capacity in pages (the PJA in NVB mode)
        page_size (int): bytes per page
        ledger (IdleLedger): receives every NVM write and interval end
        dram (OrderedDict): PageId -> PageMeta, LRU first
        pja (OrderedDict): PageId -> PjaEntry, LRU first
        clock (float): simulated time of the last event, in seconds
        """
        if dram_pages < 1 or pja_pages < 1:
            raise Error(f"Capacities must be >= 1 page, got "
                        f"dram={dram_pages} pja={pja_pages}")
        if not tools.is_power_of_two(page_size):
            raise Error(f"Page size must be a power of two, got {page_size}")

        self.dram_pages = dram_pages
        self.pja_pages = pja_pages
        self.page_size = page_size
        self.ledger = ledger
        self.dram = OrderedDict()
        self.pja = OrderedDict()
        self.clock = 0.0
        self.listeners = []
        self.stale_refreshes = 0

    @staticmethod
    def _load_args(buffer_dict):
        buffer_dict = buffer_dict or {}
        page_size = buffer_dict.get('page_size', glob.PAGE_SIZE)
        dram_pages = parse_capacity(
            buffer_dict.get('dram_pages', glob.DRAM_PAGES), page_size)
        pja_pages = parse_capacity(
            buffer_dict.get('pja_pages', glob.PJA_PAGES), page_size)

        return dram_pages, pja_pages, page_size

    @staticmethod
    @abstractmethod
    def load(buffer_dict, ledger):
        """
        ### Description ###
        Creates a XXXBuffer object from the `buffer` section of a run descriptor

        ### Parameters ###
        buffer_dict (dict): buffer section (capacities, page size)
        ledger (IdleLedger): ledger the buffer reports NVM writes to

        ### Returns ###
        An instance of the XXXBuffer class
        """

    def dump(self):
        return {
            "mode": self.mode.to_str(),
            "page_size": self.page_size,
            "dram_pages": self.dram_pages,
            "pja_pages": self.pja_pages
        }

    @abstractmethod
    def access(self, access):
        """
        ### Description ###
        Replays one page access through the buffer

        ### Parameters ###
        access (PageAccess): the access; its timestamp must not precede the clock

        ### Returns ###
        `AccessOutcome`: traffic and hit classification of the access
        """

    def subscribe(self, listener):
        """
        ### Description ###
        Registers a journal listener. Listeners implement
        `on_pja_write(page, now)` and `on_dirty_eviction(page, now)`

        ### Parameters ###
        listener: object notified of journal events

        ### Returns ###
        """
        self.listeners.append(listener)

    def advance(self, now):
        assert now >= self.clock, \
            f"Time goes backwards: {now} < {self.clock}"
        self.clock = now

    def snapshot_dirty_set(self):
        return [(page, meta.last_write_s)
                for page, meta in self.dram.items() if meta.dirty]

    def journal_pages(self):
        return list(self.pja)

    def _notify_write(self, page):
        for listener in self.listeners:
            listener.on_pja_write(page, self.clock)

    def _notify_dirty_eviction(self, page):
        for listener in self.listeners:
            listener.on_dirty_eviction(page, self.clock)

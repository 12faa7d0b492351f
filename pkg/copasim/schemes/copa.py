"""
CoPA: refreshes only the journal pages that stayed idle for a whole
time-step, from their DRAM replica.

Two address queues alternate between the Sleepy role (pages due for refresh
at the end of the period) and the Awake role (pages written recently enough
to skip this period's refresh). A 2-bit state counter advances once per
time-step: its high bit (QI) says which queue is Sleepy and its low bit (DC)
says where new writes go and whether the period ends now.
"""
import logging
from collections import deque

from .base import Scheme, RefreshReport
from ..buffers import NvbBuffer, AccessOutcome, RefreshSource

WRITE = "write"
DIRTY_EVICTION = "dirty_eviction"


class StateCounter:
    __slots__ = ("value",)

    def __init__(self, value=0):
        self.value = value

    @property
    def qi(self):
        return (self.value >> 1) & 1

    @property
    def dc(self):
        return self.value & 1

    def increment(self):
        self.value = (self.value + 1) % 4

    def sleepy(self):
        return self.qi

    def awake(self):
        return 1 - self.qi


class QueueEntry:
    __slots__ = ("page", "queue_id", "valid")

    def __init__(self, page, queue_id):
        self.page = page
        self.queue_id = queue_id
        self.valid = True


class CopaQueues:
    def __init__(self):
        """
        ### Attributes ###
        queues (list): the two queues (Q1, Q2) of QueueEntry, oldest first
        index (dict): PageId -> its valid QueueEntry
        """
        self.queues = [deque(), deque()]
        self.index = {}

    def push(self, page, queue_id):
        self.invalidate(page)
        entry = QueueEntry(page, queue_id)
        self.queues[queue_id].append(entry)
        self.index[page] = entry

    def invalidate(self, page):
        entry = self.index.pop(page, None)
        if entry is not None:
            entry.valid = False

    def drain(self, queue_id):
        """
        Empties a queue and returns the pages of its valid entries, in
        insertion order
        """
        queue = self.queues[queue_id]
        pages = []

        while queue:
            entry = queue.popleft()
            if entry.valid:
                del self.index[entry.page]
                pages.append(entry.page)

        return pages

    def contents(self, queue_id):
        return [e.page for e in self.queues[queue_id] if e.valid]

    def __contains__(self, page):
        return page in self.index


def copa_req_management(queues, counter, page, event):
    """
    A journal write (re)inserts the page: into the Sleepy queue while DC=0,
    the Awake queue while DC=1. A dirty eviction only drops its entry.
    """
    if event == WRITE:
        queue_id = counter.sleepy() if counter.dc == 0 else counter.awake()
        queues.push(page, queue_id)
    elif event == DIRTY_EVICTION:
        queues.invalidate(page)
    else:
        raise ValueError(f"Unknown queue event {event}")


def copa_pja_refreshing(queues, counter, buffer, now, requeue=True,
                        source=RefreshSource.DISTANT):
    """
    End of a time-step. When the period ends (DC=1) the Sleepy queue is
    drained and its pages refreshed; with `requeue` they move to the Awake
    queue, which is Sleepy for the next period. The counter then advances.
    """
    outcome = AccessOutcome()
    pages = []

    if counter.dc == 1:
        pages = queues.drain(counter.sleepy())
        for page in pages:
            outcome.merge(buffer.refresh_pja_page(page, source))
            if requeue:
                queues.push(page, counter.awake())

        logging.debug(f"CoPA at {now}: {len(pages)} pages refreshed")

    counter.increment()

    return RefreshReport(now, pages, outcome)


class CopaScheme(Scheme):
    type = "copa"

    def __init__(self, name, timestep_s, requeue, refresh_source):
        """
        ### Attributes ###
        timestep_s (float): T, half the refresh period
        requeue (bool): re-enqueue refreshed pages so they keep being
                        refreshed every period
        refresh_source (RefreshSource): DRAM replica or journal copy
        counter (StateCounter): starts at 0
        queues (CopaQueues): Q1 and Q2
        """
        super().__init__(name)
        self.timestep_s = timestep_s
        self.requeue = requeue
        self.refresh_source = refresh_source
        self.counter = StateCounter()
        self.queues = CopaQueues()

    @staticmethod
    def load(scheme_dict):
        timestep_s = float(scheme_dict['timestep_s'])
        source = RefreshSource.from_str(
            scheme_dict.get('refresh_source', "distant"))

        return CopaScheme(scheme_dict.get('name') or f"copa_t{timestep_s:g}",
                          timestep_s,
                          scheme_dict.get('requeue', True),
                          source)

    def dump(self):
        return {
            "type": self.type,
            "name": self.name,
            "timestep_s": self.timestep_s,
            "requeue": self.requeue,
            "refresh_source": self.refresh_source.to_str()
        }

    @staticmethod
    def get_supported_buffers():
        return [NvbBuffer]

    @property
    def period_s(self):
        return self.timestep_s

    def on_pja_write(self, page, now):
        copa_req_management(self.queues, self.counter, page, WRITE)

    def on_dirty_eviction(self, page, now):
        copa_req_management(self.queues, self.counter, page, DIRTY_EVICTION)

    def on_timer(self, now):
        return copa_pja_refreshing(self.queues, self.counter, self.buffer, now,
                                   self.requeue, self.refresh_source)

    def check_invariants(self):
        journal = set(self.buffer.journal_pages())
        queued = set(self.queues.index)

        # evicted pages never keep a valid entry
        assert queued <= journal, f"Stale entries: {queued - journal}"
        if self.requeue:
            assert queued == journal, f"Unqueued pages: {journal - queued}"

        for page, entry in self.queues.index.items():
            assert entry.valid and entry.page == page

import logging

from .base import Buffer, AccessOutcome, PageMeta, PjaEntry, HitKind, \
    FlushCause, RefreshSource
from .. import glob
from ..trace import AccessKind


class NvbBuffer(Buffer):
    """
    DRAM buffer backed by a persistent journal area (PJA) that mirrors every
    dirty DRAM page. The PJA never serves hits; its pages are only needed for
    recovery. Both tiers use LRU replacement.
    """
    mode = glob.BufferMode.NVB

    @staticmethod
    def load(buffer_dict, ledger):
        return NvbBuffer(*Buffer._load_args(buffer_dict), ledger)

    def access(self, access):
        self.advance(access.timestamp_s)
        page = access.page
        meta = self.dram.get(page)

        if meta is not None:
            self.dram.move_to_end(page)
            outcome = AccessOutcome(HitKind.DRAM_HIT, access.kind)
        else:
            outcome = AccessOutcome(HitKind.MISS, access.kind)

        if access.kind == AccessKind.READ:
            if meta is not None:
                outcome.dram_reads += 1
                # recency only: the journal page stays idle
                if meta.in_pja:
                    self.pja.move_to_end(page)
            else:
                outcome.storage_reads += 1
                self._admit(page, outcome)
                outcome.dram_writes += 1
            return outcome

        # evictions happen PJA first, then DRAM
        if page not in self.pja and len(self.pja) >= self.pja_pages:
            victim = next(iter(self.pja))
            outcome.merge(self.flush_page(victim, FlushCause.PJA_EVICTION))

        if meta is None:
            meta = self._admit(page, outcome)

        meta.dirty = True
        meta.in_pja = True
        meta.last_write_s = self.clock
        outcome.dram_writes += 1
        self._journal(page, outcome)

        return outcome

    def _admit(self, page, outcome):
        if len(self.dram) >= self.dram_pages:
            victim, victim_meta = next(iter(self.dram.items()))
            if victim_meta.dirty:
                outcome.merge(self.flush_page(victim, FlushCause.DRAM_EVICTION))
            del self.dram[victim]

        meta = PageMeta(page)
        self.dram[page] = meta
        return meta

    def _journal(self, page, outcome):
        entry = self.pja.get(page)
        if entry is None:
            entry = PjaEntry(page, self.clock)
            self.pja[page] = entry
        else:
            self.pja.move_to_end(page)

        entry.pja_write_count += 1
        entry.last_pja_write_s = self.clock
        outcome.pja_writes += 1

        self.ledger.record_write(page, self.clock)
        self._notify_write(page)

    def flush_page(self, page, cause=FlushCause.PDFLUSH):
        """
        Writes a dirty page back to storage: the DRAM copy becomes clean and
        the journal copy is discarded
        """
        meta = self.dram.get(page)
        assert meta is not None and meta.dirty and page in self.pja, \
            f"Flushing {page}, which is not a dirty journaled page"

        outcome = AccessOutcome()
        outcome.storage_writes += 1
        outcome.flushes.append((page, cause))

        meta.dirty = False
        meta.in_pja = False
        del self.pja[page]

        self.ledger.close(page, self.clock)
        self._notify_dirty_eviction(page)

        return outcome

    def refresh_pja_page(self, page, source=RefreshSource.DISTANT):
        """
        Rewrites a journal page in place, restarting its retention clock.
        Recency in both tiers is left untouched and storage is not involved.
        """
        outcome = AccessOutcome()
        entry = self.pja.get(page)

        if entry is None:
            self.stale_refreshes += 1
            logging.warning(f"Refresh of {page} skipped: no longer journaled")
            return outcome

        if source == RefreshSource.DISTANT:
            outcome.dram_reads += 1
        else:
            outcome.pja_reads += 1
        outcome.pja_writes += 1
        outcome.refreshes += 1

        entry.pja_write_count += 1
        entry.last_pja_write_s = self.clock
        self.ledger.record_write(page, self.clock, refresh=True)

        return outcome

    def check_invariants(self):
        assert len(self.dram) <= self.dram_pages
        assert len(self.pja) <= self.pja_pages

        for page, meta in self.dram.items():
            assert meta.dirty == meta.in_pja == (page in self.pja), \
                f"{page}: dirty={meta.dirty} in_pja={meta.in_pja}"

        for page, entry in self.pja.items():
            assert page in self.dram, f"{page} journaled but not buffered"
            assert entry.pja_write_count >= 1
            assert entry.last_pja_write_s <= self.clock

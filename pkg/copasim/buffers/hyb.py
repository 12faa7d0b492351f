from .base import Buffer, AccessOutcome, PageMeta, PjaEntry, HitKind, \
    FlushCause
from .. import glob
from ..trace import AccessKind


class HybBuffer(Buffer):
    """
    One-tier hybrid buffer: DRAM and NVM form a single buffer space. Writes go
    to both memories, DRAM victims are admitted to the NVM and an NVM hit
    migrates the page back to DRAM (a dirty page keeps its NVM copy).

    Invariant: a dirty DRAM page always has a dirty NVM copy.
    """
    mode = glob.BufferMode.HYB

    @staticmethod
    def load(buffer_dict, ledger):
        return HybBuffer(*Buffer._load_args(buffer_dict), ledger)

    def access(self, access):
        self.advance(access.timestamp_s)
        page = access.page
        meta = self.dram.get(page)
        entry = self.pja.get(page)

        if meta is not None:
            self.dram.move_to_end(page)
            outcome = AccessOutcome(HitKind.DRAM_HIT, access.kind)
        elif entry is not None:
            outcome = AccessOutcome(HitKind.NVM_HIT, access.kind)
        else:
            outcome = AccessOutcome(HitKind.MISS, access.kind)

        if access.kind == AccessKind.READ:
            if meta is not None:
                outcome.dram_reads += 1
            elif entry is not None:
                outcome.pja_reads += 1
                if entry.dirty:
                    self.pja.move_to_end(page)
                else:
                    del self.pja[page]
                meta = self._admit(page, outcome)
                # the NVM copy may have been evicted to make room
                meta.dirty = meta.in_pja = entry.dirty and page in self.pja
                if meta.dirty:
                    meta.last_write_s = entry.last_pja_write_s
                outcome.dram_writes += 1
            else:
                outcome.storage_reads += 1
                self._admit(page, outcome)
                outcome.dram_writes += 1
            return outcome

        if meta is None:
            if entry is not None and not entry.dirty:
                # migrating clean copy is superseded by the write
                del self.pja[page]
            meta = self._admit(page, outcome)

        meta.dirty = True
        meta.in_pja = True
        meta.last_write_s = self.clock
        outcome.dram_writes += 1
        self._nvm_write(page, outcome)

        return outcome

    def _admit(self, page, outcome):
        if len(self.dram) >= self.dram_pages:
            victim, victim_meta = next(iter(self.dram.items()))
            del self.dram[victim]
            self._admit_victim(victim, victim_meta, outcome)

        meta = PageMeta(page)
        self.dram[page] = meta
        return meta

    def _admit_victim(self, page, meta, outcome):
        if page in self.pja:
            self.pja.move_to_end(page)
            return

        assert not meta.dirty, f"Dirty {page} has no NVM copy"
        self._make_room(outcome)
        self.pja[page] = PjaEntry(page, self.clock, 1, dirty=False)
        outcome.pja_writes += 1

    def _make_room(self, outcome):
        if len(self.pja) < self.pja_pages:
            return

        victim, entry = self.pja.popitem(last=False)
        if not entry.dirty:
            return

        outcome.storage_writes += 1
        outcome.flushes.append((victim, FlushCause.NVM_EVICTION))
        victim_meta = self.dram.get(victim)
        if victim_meta is not None:
            victim_meta.dirty = False
            victim_meta.in_pja = False
        self.ledger.close(victim, self.clock)
        self._notify_dirty_eviction(victim)

    def _nvm_write(self, page, outcome):
        entry = self.pja.get(page)
        if entry is None:
            self._make_room(outcome)
            entry = PjaEntry(page, self.clock)
            self.pja[page] = entry
        else:
            self.pja.move_to_end(page)

        entry.dirty = True
        entry.pja_write_count += 1
        entry.last_pja_write_s = self.clock
        outcome.pja_writes += 1

        self.ledger.record_write(page, self.clock)
        self._notify_write(page)

    def check_invariants(self):
        assert len(self.dram) <= self.dram_pages
        assert len(self.pja) <= self.pja_pages

        for page, meta in self.dram.items():
            if meta.dirty:
                entry = self.pja.get(page)
                assert entry is not None and entry.dirty, \
                    f"Dirty {page} has no dirty NVM copy"

        for page, entry in self.pja.items():
            assert entry.dirty or page not in self.dram, \
                f"Clean NVM copy of DRAM-resident {page}"

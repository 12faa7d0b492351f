import random
from collections import OrderedDict

import pytest

from copasim.buffers import NvbBuffer, HybBuffer, HitKind, FlushCause, \
    RefreshSource
from copasim.buffers import base
from copasim.ledger import IdleLedger
from copasim.trace import PageAccess, PageId, AccessKind

from conftest import page, read, write


def walkthrough_trace():
    return [write(1, "A"), write(2, "B"), read(3, "A"), write(4, "C"),
            read(5, "D"), read(6, "E"), read(7, "A"), read(8, "F")]


def replay_buffer(buffer, accesses):
    outcomes = []
    for a in accesses:
        outcomes.append(buffer.access(a))
        buffer.check_invariants()
    return outcomes


def test_capacities_validated(ledger):
    with pytest.raises(base.Error):
        NvbBuffer(0, 2, 4096, ledger)
    with pytest.raises(base.Error):
        NvbBuffer(4, 2, 4000, ledger)


def test_load_accepts_byte_sizes(ledger):
    buffer = NvbBuffer.load({"dram_pages": "8GB", "pja_pages": "512MB"},
                            ledger)
    assert buffer.dram_pages == 2097152
    assert buffer.pja_pages == 131072
    assert buffer.dump()["mode"] == "nvb"


def test_walkthrough_idleness(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    accesses = walkthrough_trace()
    outcomes = replay_buffer(buffer, accesses[:4])

    # access 4 evicts B from the journal; B stays in DRAM, clean
    assert outcomes[3].flushes == [(page("B"), FlushCause.PJA_EVICTION)]
    assert not buffer.dram[page("B")].dirty
    assert not buffer.dram[page("B")].in_pja

    outcomes += replay_buffer(buffer, accesses[4:])
    assert page("B") not in buffer.dram

    # access 8 evicts dirty C from DRAM
    assert outcomes[7].flushes == [(page("C"), FlushCause.DRAM_EVICTION)]
    assert page("C") not in buffer.pja

    assert sum(o.storage_writes for o in outcomes) == 2
    assert buffer.snapshot_dirty_set() == [(page("A"), 1.0)]
    assert buffer.journal_pages() == [page("A")]

    # the read hit at t=7 leaves A idle in the journal
    ledger.finalize(8.0)
    assert ledger.intervals[page("A")] == [(1.0, 8.0)]


def test_read_hit_updates_both_recency_orders(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    replay_buffer(buffer, [write(1, "A"), write(2, "B"), read(3, "A")])

    assert list(buffer.dram) == [page("B"), page("A")]
    assert list(buffer.pja) == [page("B"), page("A")]
    assert buffer.pja[page("A")].pja_write_count == 1


def test_cold_read_miss(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    outcome = buffer.access(read(0, "A"))

    assert outcome.hit == HitKind.MISS
    assert outcome.storage_reads == 1
    assert outcome.pja_writes == 0
    assert outcome.dram_writes == 1


def test_rewrite_same_page(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    outcomes = replay_buffer(buffer, [write(1, "A"), write(3, "A")])

    assert sum(o.pja_writes for o in outcomes) == 2
    assert buffer.pja[page("A")].pja_write_count == 2

    ledger.finalize(5.0)
    assert ledger.intervals[page("A")] == [(1.0, 3.0), (3.0, 5.0)]
    assert ledger.write_counts[page("A")] == 2


def test_flush_page(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    buffer.access(write(1, "A"))
    buffer.advance(2.0)
    outcome = buffer.flush_page(page("A"))

    assert outcome.storage_writes == 1
    assert outcome.flushes == [(page("A"), FlushCause.PDFLUSH)]
    meta = buffer.dram[page("A")]
    assert not meta.dirty and not meta.in_pja
    assert page("A") not in buffer.pja
    assert ledger.intervals[page("A")] == [(1.0, 2.0)]
    buffer.check_invariants()


def test_flush_then_rewrite_resets_write_count(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    buffer.access(write(1, "A"))
    buffer.access(write(2, "A"))
    buffer.flush_page(page("A"))
    buffer.access(write(3, "A"))

    assert buffer.pja[page("A")].pja_write_count == 1
    # the ledger keeps the page's cumulative history
    assert ledger.write_counts[page("A")] == 3


def test_flush_clean_page_is_a_logic_error(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    buffer.access(read(1, "A"))

    with pytest.raises(AssertionError):
        buffer.flush_page(page("A"))


def test_refresh_restarts_idle_interval(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    buffer.access(write(0, "A"))
    buffer.advance(100.0)
    outcome = buffer.refresh_pja_page(page("A"))

    assert outcome.dram_reads == 1
    assert outcome.pja_writes == 1
    assert outcome.pja_reads == 0
    assert outcome.storage_writes == 0
    assert ledger.intervals[page("A")] == [(0.0, 100.0)]
    assert ledger.open[page("A")] == 100.0

    buffer.refresh_pja_page(page("A"))
    assert ledger.intervals[page("A")] == [(0.0, 100.0), (100.0, 100.0)]
    assert buffer.pja[page("A")].pja_write_count == 3
    assert ledger.refresh_counts[page("A")] == 2


def test_conventional_refresh_reads_the_journal(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    buffer.access(write(0, "A"))
    outcome = buffer.refresh_pja_page(page("A"), RefreshSource.CONVENTIONAL)

    assert outcome.pja_reads == 1
    assert outcome.dram_reads == 0
    assert outcome.pja_writes == 1


def test_refresh_keeps_recency(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    replay_buffer(buffer, [write(1, "A"), write(2, "B")])
    buffer.refresh_pja_page(page("A"))

    assert list(buffer.dram) == [page("A"), page("B")]
    assert list(buffer.pja) == [page("A"), page("B")]


def test_refresh_of_evicted_page_is_skipped(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    buffer.access(read(1, "A"))
    outcome = buffer.refresh_pja_page(page("A"))

    assert outcome.refreshes == 0
    assert buffer.stale_refreshes == 1


def test_time_cannot_go_backwards(ledger):
    buffer = NvbBuffer(4, 2, 4096, ledger)
    buffer.access(write(5, "A"))

    with pytest.raises(AssertionError):
        buffer.access(write(4, "B"))


def test_snapshot_dirty_set(ledger):
    buffer = NvbBuffer(8, 8, 4096, ledger)
    assert buffer.snapshot_dirty_set() == []

    replay_buffer(buffer, [write(i, chr(ord("A") + i)) for i in range(5)])
    assert len(buffer.snapshot_dirty_set()) == 5


def random_trace(seed, count=1000, universe=24):
    rng = random.Random(seed)
    return [PageAccess(float(t), PageId(0, rng.randrange(universe)),
                       AccessKind.WRITE if rng.random() < 0.4
                       else AccessKind.READ)
            for t in range(count)]


def lru_hits(accesses, capacity):
    cache = OrderedDict()
    hits = []

    for a in accesses:
        hit = a.page in cache
        hits.append(hit)
        if hit:
            cache.move_to_end(a.page)
        else:
            if len(cache) >= capacity:
                cache.popitem(last=False)
            cache[a.page] = True

    return hits


@pytest.mark.parametrize("seed", range(50))
def test_hits_match_plain_lru(seed):
    accesses = random_trace(seed)
    buffer = NvbBuffer(8, 3, 4096, IdleLedger())

    outcomes = replay_buffer(buffer, accesses)

    assert [o.hit == HitKind.DRAM_HIT for o in outcomes] == \
        lru_hits(accesses, 8)


def test_hyb_write_goes_to_both_memories(ledger):
    buffer = HybBuffer(3, 2, 4096, ledger)
    outcome = buffer.access(write(1, "A"))

    assert outcome.dram_writes == 1
    assert outcome.pja_writes == 1
    assert buffer.dram[page("A")].dirty
    assert buffer.pja[page("A")].dirty
    buffer.check_invariants()


def test_hyb_nvm_hit_migrates_clean_page(ledger):
    buffer = HybBuffer(1, 2, 4096, ledger)
    replay_buffer(buffer, [read(1, "A"), read(2, "B")])

    # A was admitted to the NVM when B pushed it out of DRAM
    assert not buffer.pja[page("A")].dirty

    outcome = buffer.access(read(3, "A"))
    assert outcome.hit == HitKind.NVM_HIT
    assert outcome.storage_reads == 0
    assert outcome.pja_reads == 1
    assert page("A") in buffer.dram
    assert page("A") not in buffer.pja
    buffer.check_invariants()


def test_hyb_nvm_hit_keeps_dirty_copy(ledger):
    buffer = HybBuffer(1, 3, 4096, ledger)
    replay_buffer(buffer, [write(1, "A"), read(2, "B")])

    outcome = buffer.access(read(3, "A"))
    assert outcome.hit == HitKind.NVM_HIT
    assert buffer.dram[page("A")].dirty
    assert buffer.pja[page("A")].dirty
    buffer.check_invariants()


def test_hyb_nvm_eviction_writes_back(ledger):
    buffer = HybBuffer(3, 2, 4096, ledger)
    outcomes = replay_buffer(buffer, [write(1, "A"), write(2, "B")])
    assert sum(o.storage_writes for o in outcomes) == 0

    outcome = buffer.access(write(3, "C"))
    assert outcome.storage_writes == 1
    assert outcome.flushes == [(page("A"), FlushCause.NVM_EVICTION)]
    assert not buffer.dram[page("A")].dirty
    assert ledger.intervals[page("A")] == [(1.0, 3.0)]
    buffer.check_invariants()


def test_hyb_readmission_is_recency_update(ledger):
    buffer = HybBuffer(1, 3, 4096, ledger)
    outcomes = replay_buffer(buffer, [write(1, "A"), write(2, "B"),
                                      read(3, "C")])

    # A and B were already in the NVM when they left DRAM
    assert list(buffer.pja) == [page("A"), page("B")]
    assert all(buffer.pja[p].dirty for p in buffer.pja)
    assert outcomes[2].pja_writes == 0


@pytest.mark.parametrize("seed", range(10))
def test_hyb_invariants_on_random_traces(seed):
    buffer = HybBuffer(6, 4, 4096, IdleLedger())
    outcomes = replay_buffer(buffer, random_trace(seed, count=500))

    assert all(o.storage_reads <= 1 for o in outcomes)

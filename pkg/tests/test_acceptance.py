"""
End-to-end properties of the simulator: the worked examples, the idle-time
bounds of each scheme and the orderings between schemes.
"""
import pytest
import yaml

from copasim import config, grid, reliability
from copasim.buffers import FlushCause
from copasim.reliability import FailureParams
from copasim.simulator import Simulation, report_json, simulate

from conftest import page, read, write, run_dict
from test_buffers import walkthrough_trace, lru_hits, random_trace
from test_reliability import enumerated_page_loss, enumerated_word_loss


def synthetic_run(scheme, seed, count=300, universe=40, inter_arrival_s=1.0,
                  arrival="fixed", dram_pages=64, pja_pages=64):
    return run_dict(scheme=scheme, dram_pages=dram_pages, pja_pages=pja_pages,
                    synthetic={"access_count": count,
                               "page_universe": universe,
                               "pattern": "uniform",
                               "write_fraction": 0.5,
                               "inter_arrival_s": inter_arrival_s,
                               "arrival": arrival,
                               "seed": seed})


def run(d, check_invariants=False):
    sim = Simulation(config.load_dict(d), check_invariants)
    sim.run()
    return sim


def record_timers(sim):
    reports = []
    on_timer = sim.scheme.on_timer

    def _record(now):
        report = on_timer(now)
        reports.append(report)
        return report

    sim.scheme.on_timer = _record
    return reports


@pytest.mark.parametrize("timestep", [30.0, 90.0, 150.0, 300.0])
def test_copa_idle_bound(replay, timestep):
    # written just after the first timer, in an Awake window
    sim = replay([write(timestep + 1, "A")],
                 scheme={"type": "copa", "timestep_s": timestep},
                 end_s=8 * timestep)

    longest = sim.ledger.max_interval()
    assert timestep < longest < 3 * timestep
    assert longest == pytest.approx(3 * timestep - 1)
    # requeued afterwards: one refresh per period
    assert sim.ledger.durations(page("A"))[1:3] == [2 * timestep] * 2


def test_copa_idle_bound_on_a_timer_tick(replay):
    # timers fire first, so a write at T lands after the first tick
    sim = replay([write(30, "A")],
                 scheme={"type": "copa", "timestep_s": 30},
                 end_s=240.0)

    assert sim.ledger.max_interval() == 90.0
    assert sim.ledger.durations(page("A")) == [90.0, 60.0, 60.0]


def test_refresh_at_the_end_leaves_no_empty_interval(replay):
    sim = replay([write(31, "A")],
                 scheme={"type": "copa", "timestep_s": 30},
                 end_s=240.0)

    assert sim.ledger.durations(page("A")) == [89.0, 60.0, 60.0]
    assert sim.ledger.refresh_counts[page("A")] == 3
    assert sim.report.failure.interval_count == 3
    assert sim.report.failure.total_writes == 4


def test_no_pdflush_idle_grows_with_the_run(replay):
    sim = replay([write(0, "A")], end_s=600.0)

    assert sim.report.max_idle_s == 600.0
    assert sim.ledger.intervals[page("A")] == [(0.0, 600.0)]


@pytest.mark.parametrize("end_s", [600.0, 3600.0])
def test_copa_bounds_the_same_write(replay, end_s):
    no_pdflush = replay([write(0, "A")], end_s=end_s).report
    copa = replay([write(0, "A")],
                  scheme={"type": "copa", "timestep_s": 300},
                  end_s=end_s).report

    assert no_pdflush.max_idle_s == end_s
    assert copa.max_idle_s < 3 * 300
    assert copa.max_idle_s <= no_pdflush.max_idle_s


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("scheme", [
    {"type": "copa", "timestep_s": 30},
    {"type": "copa", "timestep_s": 90, "requeue": False},
    {"type": "conv", "period_s": 20},
    {"type": "conv", "period_s": 60, "refresh_source": "conventional"}
])
def test_refresh_never_changes_hits(seed, scheme):
    def _run(s):
        return run(synthetic_run(s, seed, inter_arrival_s=30.0,
                                 dram_pages=8, pja_pages=4)).report

    plain = _run({"type": "no_pdflush"})
    refreshed = _run(scheme)

    assert refreshed.refreshes > 0
    assert (refreshed.dram_hits, refreshed.misses) == \
        (plain.dram_hits, plain.misses)
    assert refreshed.hit_ratio == plain.hit_ratio
    assert refreshed.storage_writes == plain.storage_writes


@pytest.mark.parametrize("timestep", [30.0, 300.0])
def test_copa_idle_bound_in_sleepy_window(replay, timestep):
    sim = replay([write(1, "A")],
                 scheme={"type": "copa", "timestep_s": timestep},
                 end_s=4 * timestep)

    assert sim.ledger.durations(page("A"))[0] == 2 * timestep - 1


def test_queue_example_end_to_end():
    d = run_dict(scheme={"type": "copa", "timestep_s": 10, "requeue": False},
                 dram_pages=8, pja_pages=8, end_s=40.0)
    sim = Simulation(config.load_dict(d), check_invariants=True)
    reports = record_timers(sim)

    sim.run(iter([write(1, "A"), write(2, "B"), write(11, "C"),
                  write(12, "B"), write(21, "D"), write(31, "E")]))

    assert [r.now for r in reports] == [10.0, 20.0, 30.0, 40.0]
    assert reports[1].pages == [page("A")]
    assert reports[3].pages == [page("C"), page("B"), page("D")]
    assert sim.ledger.refresh_counts.get(page("E"), 0) == 0


def test_walkthrough_end_to_end(replay):
    sim = replay(walkthrough_trace())
    report = sim.report

    assert report.storage_writes == 2
    assert report.storage_writes_by_cause["pja_eviction"] == 1
    assert report.storage_writes_by_cause["dram_eviction"] == 1
    assert sim.buffer.snapshot_dirty_set() == [(page("A"), 1.0)]
    assert sim.ledger.intervals[page("A")] == [(1.0, 8.0)]
    assert report.end_s == 8.0


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("words", [1, 2, 3])
@pytest.mark.parametrize("p", [0.5, 0.1, 1e-3])
def test_failure_formulas_match_enumeration(k, words, p):
    params = FailureParams(k=k, words=words, p_wf_cell=p)
    expected = enumerated_page_loss(p, k, words)

    assert reliability.p_dl_wf_page(params, 1) == \
        pytest.approx(expected, rel=1e-12)
    assert reliability.word_survival(p, k) == \
        pytest.approx(1 - enumerated_word_loss(p, k), rel=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_baseline_idle_ceiling(seed):
    sim = run(synthetic_run({"type": "baseline"}, seed, universe=200,
                            inter_arrival_s=0.5, arrival="exponential",
                            dram_pages=64, pja_pages=32))

    assert sim.ledger.interval_count > 0
    assert sim.ledger.max_interval() <= 35.0


def storage_writes(d):
    return simulate(config.load_dict(d)).storage_writes


def test_traffic_ordering_without_evictions():
    schemes = [{"type": "baseline"}, {"type": "no_pdflush"},
               {"type": "copa", "timestep_s": 30}]
    baseline, no_pdflush, copa = [
        storage_writes(synthetic_run(s, 0, count=400)) for s in schemes]

    assert no_pdflush == copa == 0
    assert baseline > 0


@pytest.mark.parametrize("seed", range(5))
def test_traffic_ordering_with_evictions(seed):
    def writes(scheme):
        return storage_writes(synthetic_run(
            scheme, seed, count=2000, inter_arrival_s=5.0, dram_pages=16,
            pja_pages=8))

    no_pdflush = writes({"type": "no_pdflush"})

    assert writes({"type": "baseline"}) > no_pdflush
    for timestep in (30, 150):
        assert writes({"type": "copa", "timestep_s": timestep}) == no_pdflush


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("timestep", [30.0, 90.0])
def test_refresh_dominance(seed, timestep):
    copa = simulate(config.load_dict(synthetic_run(
        {"type": "copa", "timestep_s": timestep}, seed)))
    conv = simulate(config.load_dict(synthetic_run(
        {"type": "conv", "period_s": 2 * timestep}, seed)))

    assert copa.refreshes < conv.refreshes
    assert copa.storage_writes == conv.storage_writes


def test_refresh_dominance_with_evictions():
    for seed in range(5):
        copa = simulate(config.load_dict(synthetic_run(
            {"type": "copa", "timestep_s": 30}, seed, dram_pages=16,
            pja_pages=8)))
        conv = simulate(config.load_dict(synthetic_run(
            {"type": "conv", "period_s": 60}, seed, dram_pages=16,
            pja_pages=8)))

        assert copa.refreshes <= conv.refreshes


@pytest.mark.parametrize("seed", range(5))
def test_lru_hits_end_to_end(replay, seed):
    accesses = random_trace(seed)
    sim = replay(accesses, dram_pages=8, pja_pages=3)

    assert sim.report.dram_hits == sum(lru_hits(accesses, 8))
    assert sim.report.accesses == len(accesses)


def test_failure_rate_ordering(replay):
    accesses = [write(7 * i, chr(ord("A") + i)) for i in range(20)]

    def retention(scheme):
        sim = replay(accesses, scheme=scheme, dram_pages=64, pja_pages=64,
                     end_s=3600.0)
        return sim.report.failure.retention_loss

    losses = [retention({"type": "copa", "timestep_s": t})
              for t in (30, 90, 150, 300)]
    losses.append(retention({"type": "no_pdflush"}))

    assert all(loss > 0 for loss in losses)
    assert losses == sorted(losses)
    assert len(set(losses)) == len(losses)


def test_same_config_same_report():
    d = synthetic_run({"type": "copa", "timestep_s": 30}, 7, dram_pages=16,
                      pja_pages=8)

    first = report_json(simulate(config.load_dict(d)))
    second = report_json(simulate(config.load_dict(d)))

    assert first == second


def test_grid_order_does_not_change_reports(tmp_path):
    schemes = [{"type": "no_pdflush"}, {"type": "baseline"},
               {"type": "copa", "timestep_s": 30}]
    traces = [synthetic_run(None, seed)["trace"] for seed in (1, 2)]

    outputs = []
    for i, (order, jobs) in enumerate([(schemes, 1),
                                       (schemes[::-1], 1),
                                       (schemes[1:] + schemes[:1], 2)]):
        path = tmp_path / f"grid{i}.yaml"
        path.write_text(yaml.safe_dump({
            "traces": traces[::-1] if i else traces,
            "schemes": order,
            "baseline": "no_pdflush",
            "buffer": {"dram_pages": 16, "pja_pages": 8}
        }))
        out = tmp_path / f"out{i}"
        cells = grid.cmd_grid(str(path), str(out), jobs)
        outputs.append({c.name: (out / f"{c.name}.json").read_text()
                        for c in cells})

    assert len(outputs[0]) == 6
    assert outputs[0] == outputs[1] == outputs[2]


def test_pdflush_causes_only_flush_traffic(replay):
    sim = replay([write(0, "A"), read(40, "A")], scheme={"type": "baseline"},
                 end_s=60.0)

    assert sim.report.storage_writes_by_cause[FlushCause.PDFLUSH.to_str()] \
        == 1
    assert sim.report.storage_reads == 0

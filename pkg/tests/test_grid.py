import csv
import json

import pytest
import yaml

from copasim import config, grid

SCHEMES = [
    {"type": "no_pdflush"},
    {"type": "baseline"},
    {"type": "copa", "timestep_s": 30}
]


def synthetic(seed):
    return {"synthetic": {"access_count": 300, "page_universe": 40,
                          "pattern": "uniform", "inter_arrival_s": 1.0,
                          "seed": seed}}


def grid_dict(**kwargs):
    d = {
        "traces": [synthetic(1), synthetic(2)],
        "schemes": SCHEMES,
        "baseline": "no_pdflush",
        "buffer": {"dram_pages": 16, "pja_pages": 8}
    }
    d.update(kwargs)
    return d


def grid_file(tmp_path, d):
    path = tmp_path / "grid.yaml"
    path.write_text(yaml.safe_dump(d))
    return str(path)


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_cells_are_the_cross_product():
    cells, baseline = grid.load_cells(grid_dict())

    assert baseline == "no_pdflush"
    assert [c.name for c in cells] == [
        "uniform_1-no_pdflush", "uniform_1-baseline", "uniform_1-copa_t30",
        "uniform_2-no_pdflush", "uniform_2-baseline", "uniform_2-copa_t30"]
    assert cells[2].run_dict["buffer"] == {"dram_pages": 16, "pja_pages": 8}
    assert cells[2].run_dict["scheme"] == SCHEMES[2]


def test_duplicate_cells_get_unique_names():
    cells, baseline = grid.load_cells(grid_dict(
        traces=[synthetic(1)], schemes=[{"type": "baseline"}] * 3,
        baseline="baseline"))

    assert baseline == "baseline"
    assert [c.name for c in cells] == [
        "uniform_1-baseline", "uniform_1-baseline_2", "uniform_1-baseline_3"]
    assert [c.scheme for c in cells] == [
        "baseline", "baseline_2", "baseline_3"]


def test_duplicate_cells_give_identical_rows_and_columns(tmp_path):
    d = grid_dict(traces=[synthetic(1)] * 2,
                  schemes=[SCHEMES[0], SCHEMES[2], SCHEMES[2]])
    out = tmp_path / "out"

    cells = grid.cmd_grid(grid_file(tmp_path, d), str(out))

    assert [c.trace for c in cells[::3]] == ["uniform_1", "uniform_1_2"]
    rows = read_csv(out / "fig_refreshes.csv")
    assert rows[0] == ["trace", "no_pdflush", "copa_t30", "copa_t30_2"]
    assert rows[1][1:] == rows[2][1:]
    assert rows[1][2] == rows[1][3]
    assert len(read_csv(out / grid.COMPARISON_FILE)) == 7


def test_distinct_traces_sharing_a_name_get_their_own_rows(tmp_path):
    def zipf(theta):
        return {"synthetic": {"access_count": 200, "page_universe": 40,
                              "pattern": "zipf", "theta": theta,
                              "inter_arrival_s": 1.0, "seed": 0}}

    d = grid_dict(traces=[zipf(0.9), zipf(1.3)])
    out = tmp_path / "out"

    cells = grid.cmd_grid(grid_file(tmp_path, d), str(out))

    assert [c.name for c in cells[::3]] == ["zipf_0-no_pdflush",
                                            "zipf_0_2-no_pdflush"]
    assert cells[0].report.trace_id != cells[3].report.trace_id
    rows = read_csv(out / "fig_storage_writes.csv")
    assert [r[0] for r in rows[1:]] == ["zipf_0", "zipf_0_2"]
    comparison = read_csv(out / grid.COMPARISON_FILE)
    assert [r[0] for r in comparison[1:]] == ["zipf_0"] * 3 + ["zipf_0_2"] * 3


def test_baseline_by_index():
    _, baseline = grid.load_cells(grid_dict(baseline=2))
    assert baseline == "copa_t30"


@pytest.mark.parametrize("baseline", ["conv_p60", 3])
def test_unknown_baseline(baseline):
    with pytest.raises(grid.Error):
        grid.load_cells(grid_dict(baseline=baseline))


@pytest.mark.parametrize("broken", [
    {"schemes": []},
    {"traces": "hm_1.csv"},
    {"jobs": 4}
])
def test_broken_grid(broken):
    with pytest.raises(config.Error):
        grid.load_cells(grid_dict(**broken))


def test_bad_cell_fails_the_whole_grid():
    with pytest.raises(config.Error):
        grid.load_cells(grid_dict(schemes=[{"type": "copa"}]))


def test_overrides_apply_to_every_cell():
    cells, _ = grid.load_cells(grid_dict(), ["buffer.dram_pages=32"])
    assert all(c.run_dict["buffer"]["dram_pages"] == 32 for c in cells)


def test_cmd_grid_outputs(tmp_path):
    out = tmp_path / "out"

    cells = grid.cmd_grid(grid_file(tmp_path, grid_dict()), str(out))

    assert all(c.error is None for c in cells)
    manifest = json.loads((out / grid.MANIFEST_FILE).read_text())
    assert [c["status"] for c in manifest["cells"]] == ["done"] * 6

    report = json.loads((out / "uniform_2-copa_t30.json").read_text())
    assert report["name"] == "uniform_2-copa_t30"
    assert report["accesses"] == 300

    comparison = read_csv(out / grid.COMPARISON_FILE)
    assert comparison[0][:2] == ["trace", "name"]
    assert len(comparison) == 7
    # the baseline row compares with itself
    assert comparison[1][1] == "uniform_1-no_pdflush"
    assert comparison[1][2] == "1.0"

    for figure in grid.FIGURES:
        rows = read_csv(out / f"{figure}.csv")
        assert [r[0] for r in rows[1:]] == ["uniform_1", "uniform_2"]

    header = read_csv(out / "fig_refreshes.csv")[0]
    assert header == ["trace", "no_pdflush", "baseline", "copa_t30"]


def test_failed_cell_is_reported(tmp_path):
    d = grid_dict(traces=[synthetic(1), {"file": str(tmp_path / "nope.csv")}])
    out = tmp_path / "out"

    with pytest.raises(grid.GridError) as e:
        grid.cmd_grid(grid_file(tmp_path, d), str(out))

    assert len(e.value.failed) == 3
    assert isinstance(e.value.failed[0].error, OSError)
    manifest = json.loads((out / grid.MANIFEST_FILE).read_text())
    statuses = {c["name"]: c["status"] for c in manifest["cells"]}
    assert statuses["uniform_1-baseline"] == "done"
    assert statuses["nope-baseline"] == "failed"
    assert (out / "uniform_1-baseline.json").exists()
    assert not (out / grid.COMPARISON_FILE).exists()


def test_grid_output_dir_from_descriptor(tmp_path):
    d = grid_dict(traces=[synthetic(1)], schemes=[{"type": "no_pdflush"}],
                  output={"dir": str(tmp_path / "from_grid")})

    grid.cmd_grid(grid_file(tmp_path, d))

    assert (tmp_path / "from_grid" / "uniform_1-no_pdflush.json").exists()

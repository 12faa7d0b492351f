import asyncio
import copy
import logging
import os
from concurrent.futures import ProcessPoolExecutor

from . import config as run_config
from . import metrics
from . import tools
from .descriptor import DescriptorType
from .loaders import apply_override, parse_override
from .simulator import simulate, report_json
from . import glob

COMPARISON_FILE = "comparison.csv"
MANIFEST_FILE = "manifest.json"

# figure file -> (RunReport metrics, normalized to the baseline scheme)
FIGURES = {
    "fig_hit_traffic": (["hit_ratio", "storage_read_bytes",
                         "storage_write_bytes"], False),
    "fig_failure_rate": (["retention_loss"], True),
    "fig_max_idle": (["max_idle_s"], False),
    "fig_refreshes": (["refreshes"], False),
    "fig_response_time": (["mean_response_us"], False),
    "fig_storage_writes": (["storage_writes"], False)
}


class Error(Exception):
    pass


class GridError(Error):
    def __init__(self, failed, manifest):
        super().__init__()
        self.failed = failed
        self.manifest = manifest

    def __str__(self):
        return f"{len(self.failed)} grid cell(s) failed, partial results " \
               f"listed in {self.manifest}"


class Cell:
    def __init__(self, name, trace, scheme, run_dict):
        """
        One (trace, scheme) run of a grid

        ### Attributes ###
        name (str): unique cell name, also the report file name
        trace (str): trace name (table row)
        scheme (str): scheme column name, unique within the trace row
        run_dict (dict): complete run descriptor of the cell
        """
        self.name = name
        self.trace = trace
        self.scheme = scheme
        self.run_dict = run_dict
        self.report = None
        self.error = None


def load_cells(grid_dict, overrides=None):
    """
    ### Description ###
    Expands a grid descriptor into the cross product traces x schemes. Each
    cell's run descriptor is validated. Each trace entry gets its own row
    name and each scheme entry its own column name (name_2, name_3, ...
    for repeats), so duplicate cells stay apart in every table

    ### Parameters ###
    grid_dict (dict): grid descriptor
    overrides (list): "section.key=value" strings applied to every cell

    ### Returns ###
    `tuple`: (list of Cell, baseline scheme name)
    """
    run_config.evaluate_rules(os.path.join("default", "grid.yaml"), grid_dict)

    common = {key: grid_dict[key]
              for key in ("buffer", "failure", "latency", "seed")
              if key in grid_dict}
    cells = []
    names = set()
    traces = set()

    for trace_dict in grid_dict['traces']:
        trace = None
        columns = []

        for scheme_dict in grid_dict['schemes']:
            run_dict = copy.deepcopy(common)
            run_dict['trace'] = copy.deepcopy(trace_dict)
            run_dict['scheme'] = copy.deepcopy(scheme_dict)
            for item in overrides or []:
                apply_override(run_dict, *parse_override(item))

            config = run_config.load_dict(run_dict)
            # every trace entry is its own table row
            if trace is None:
                trace = tools.unique_name(config.trace.name, traces)
                traces.add(trace)
            run_dict['trace']['name'] = trace

            scheme = tools.unique_name(config.new_scheme().name, columns)
            columns.append(scheme)

            name = tools.unique_name(f"{trace}-{scheme}", names)
            names.add(name)

            run_dict['name'] = name
            cells.append(Cell(name, trace, scheme, run_dict))

    baseline = grid_dict.get('baseline', 0)
    if isinstance(baseline, int):
        if not 0 <= baseline < len(columns):
            raise Error(f"Baseline index {baseline} out of range")
        baseline = columns[baseline]
    elif baseline not in columns:
        raise Error(f"Baseline scheme {baseline} is not part of the grid")

    return cells, baseline


def run_cell(run_dict):
    """
    Runs one cell from its plain descriptor (picklable for worker processes)
    """
    return simulate(run_config.load_dict(run_dict))


async def run_cells_async(cells, out_dir, jobs=1):
    loop = asyncio.get_event_loop()
    lock = asyncio.Lock()
    executor = ProcessPoolExecutor(jobs) if jobs > 1 else None

    async def _run(cell):
        try:
            if executor is None:
                cell.report = run_cell(cell.run_dict)
            else:
                cell.report = await loop.run_in_executor(
                    executor, run_cell, cell.run_dict)
        except Exception as e:
            logging.error(f"Cell {cell.name} failed: {e}")
            cell.error = e
            return

        # report writing is serialized
        async with lock:
            await tools.write_async(os.path.join(out_dir, f"{cell.name}.json"),
                                    report_json(cell.report))
        logging.info(f"Cell {cell.name} done")

    try:
        await asyncio.gather(*map(_run, cells))
    finally:
        if executor is not None:
            executor.shutdown()


def cmd_grid(grid_file, out_dir=None, jobs=1, overrides=None):
    """
    ### Description ###
    Runs every cell of a grid and writes per-cell reports, the normalized
    comparison table and the per-figure plot data

    ### Parameters ###
    grid_file (str): grid descriptor (JSON or YAML)
    out_dir (str): output directory (None: descriptor, environment, default)
    jobs (int): worker processes, 1 runs the cells in-process
    overrides (list): "section.key=value" strings applied to every cell

    ### Returns ###
    `list`: the Cell objects, with their reports
    """
    grid_dict, _ = DescriptorType.load_any(grid_file)
    if not isinstance(grid_dict, dict):
        raise run_config.Error(f"{grid_file}: a grid must be a mapping")

    cells, baseline = load_cells(grid_dict, overrides)
    out_dir = out_dir or glob.get_output_dir(
        (grid_dict.get('output') or {}).get('dir'))
    tools.ensure_dir(out_dir)

    logging.info(f"Running {len(cells)} cells with {jobs} job(s)")
    asyncio.run(run_cells_async(cells, out_dir, jobs))

    manifest = write_manifest(cells, out_dir)
    failed = [c for c in cells if c.error is not None]
    if failed:
        raise GridError(failed, manifest)

    write_tables(cells, baseline, out_dir)
    return cells


def write_manifest(cells, out_dir):
    path = os.path.join(out_dir, MANIFEST_FILE)
    DescriptorType.JSON.dump(path, {
        "cells": [{
            "name": c.name,
            "trace": c.trace,
            "scheme": c.scheme,
            "status": "failed" if c.error is not None else "done",
            "report": f"{c.name}.json" if c.error is None else None,
            "error": str(c.error) if c.error is not None else None
        } for c in cells]
    })

    return path


def write_tables(cells, baseline, out_dir):
    tables = []
    for trace in dict.fromkeys(c.trace for c in cells):
        trace_cells = [c for c in cells if c.trace == trace]
        index = next(i for i, c in enumerate(trace_cells)
                     if c.scheme == baseline)
        tables.append((trace, metrics.compare([c.report for c in trace_cells],
                                              index)))

    metrics.write_comparison_csv(os.path.join(out_dir, COMPARISON_FILE),
                                 tables)

    triples = [(c.trace, c.scheme, c.report) for c in cells]
    for figure, (names, normalized) in FIGURES.items():
        header, rows = metrics.figure_table(
            triples, names, baseline if normalized else None)
        metrics.write_csv(os.path.join(out_dir, f"{figure}.csv"), header, rows)

    logging.info(f"Tables written to {out_dir}")

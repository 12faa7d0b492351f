import csv
import functools
import logging
import os
from collections import Counter

from .buffers import AccessOutcome, HitKind, FlushCause
from .schemes import RefreshReport, FlushReport
from .reliability import aggregate_pja_failure
from .trace import AccessKind
from . import tools

INF = "inf"

# metrics normalized by compare(), in table column order
COMPARED_METRICS = [
    "hit_ratio",
    "storage_reads",
    "storage_writes",
    "pja_writes",
    "refreshes",
    "mean_response_us",
    "max_response_us",
    "max_idle_s",
    "retention_loss",
    "write_loss",
    "combined_loss"
]


class Error(Exception):
    pass


class CompareError(Error):
    pass


class LatencyModel:
    def __init__(self, dram_read=1.0, dram_write=1.0, pja_read=2.0,
                 pja_write=2.0, storage_read=100.0, storage_write=100.0,
                 serialize_refresh=False):
        """
        Per-page latencies in microseconds

        ### Attributes ###
        serialize_refresh (bool): charge refresh work to the next request
                                  instead of running it in the background
        """
        self.dram_read = dram_read
        self.dram_write = dram_write
        self.pja_read = pja_read
        self.pja_write = pja_write
        self.storage_read = storage_read
        self.storage_write = storage_write
        self.serialize_refresh = serialize_refresh

        for key, value in self.latencies().items():
            if value < 0:
                raise Error(f"Latency {key} must be non-negative, got {value}")

    @staticmethod
    def load(latency_dict):
        latency_dict = latency_dict or {}
        defaults = LatencyModel()

        return LatencyModel(
            *[float(latency_dict.get(key, value))
              for key, value in defaults.latencies().items()],
            serialize_refresh=latency_dict.get('serialize_refresh', False))

    def latencies(self):
        return {
            "dram_read": self.dram_read,
            "dram_write": self.dram_write,
            "pja_read": self.pja_read,
            "pja_write": self.pja_write,
            "storage_read": self.storage_read,
            "storage_write": self.storage_write
        }

    def dump(self):
        d = self.latencies()
        d["serialize_refresh"] = self.serialize_refresh
        return d

    def cost(self, outcome):
        return outcome.dram_reads * self.dram_read + \
            outcome.dram_writes * self.dram_write + \
            outcome.pja_reads * self.pja_read + \
            outcome.pja_writes * self.pja_write + \
            outcome.storage_reads * self.storage_read + \
            outcome.storage_writes * self.storage_write


class RunReport:
    def __init__(self):
        self.name = None
        self.trace_id = None
        self.trace_stats = None
        self.config = None
        self.end_s = 0.0
        self.accesses = 0
        self.reads = 0
        self.writes = 0
        self.dram_hits = 0
        self.nvm_hits = 0
        self.misses = 0
        self.hit_ratio = 0.0
        self.dram_reads = 0
        self.dram_writes = 0
        self.pja_reads = 0
        self.pja_writes = 0
        self.storage_reads = 0
        self.storage_writes = 0
        self.storage_read_bytes = 0
        self.storage_write_bytes = 0
        self.storage_writes_by_cause = {}
        self.refreshes = 0
        self.stale_refreshes = 0
        self.timer_events = 0
        self.mean_response_us = 0.0
        self.max_response_us = 0.0
        self.max_idle_s = 0.0
        self.failure = None

    @property
    def hits(self):
        return self.dram_hits + self.nvm_hits

    def value(self, metric):
        """
        Looks a compared metric up, failure metrics included
        """
        if hasattr(self.failure, metric):
            return getattr(self.failure, metric)

        return getattr(self, metric)

    def dump(self):
        return {
            "name": self.name,
            "trace_id": self.trace_id,
            "trace_stats": self.trace_stats,
            "config": self.config,
            "end_s": self.end_s,
            "accesses": self.accesses,
            "reads": self.reads,
            "writes": self.writes,
            "hits": self.hits,
            "dram_hits": self.dram_hits,
            "nvm_hits": self.nvm_hits,
            "misses": self.misses,
            "hit_ratio": self.hit_ratio,
            "dram_reads": self.dram_reads,
            "dram_writes": self.dram_writes,
            "pja_reads": self.pja_reads,
            "pja_writes": self.pja_writes,
            "storage_reads": self.storage_reads,
            "storage_writes": self.storage_writes,
            "storage_read_bytes": self.storage_read_bytes,
            "storage_write_bytes": self.storage_write_bytes,
            "storage_writes_by_cause": self.storage_writes_by_cause,
            "refreshes": self.refreshes,
            "stale_refreshes": self.stale_refreshes,
            "timer_events": self.timer_events,
            "mean_response_us": self.mean_response_us,
            "max_response_us": self.max_response_us,
            "max_idle_s": self.max_idle_s,
            "failure": self.failure.dump() if self.failure else None
        }


class Metrics:
    def __init__(self, latency, page_size):
        """
        Event accounting of one simulation

        ### Attributes ###
        latency (LatencyModel): per-page latencies
        page_size (int): bytes per page, for traffic in bytes
        pending_us (float): background work waiting to be charged to the
                            next request
        """
        self.latency = latency
        self.page_size = page_size
        self.report = RunReport()
        self.causes = Counter()
        self.pending_us = 0.0
        self.response_total_us = 0.0

    @functools.singledispatchmethod
    def record(self, event):
        raise Error(f"Cannot record {type(event).__name__}")

    @record.register(AccessOutcome)
    def _(self, outcome):
        r = self.report
        r.accesses += 1

        if outcome.hit == HitKind.DRAM_HIT:
            r.dram_hits += 1
        elif outcome.hit == HitKind.NVM_HIT:
            r.nvm_hits += 1
        else:
            assert outcome.hit == HitKind.MISS, "Access without hit kind"
            r.misses += 1

        if outcome.kind == AccessKind.WRITE:
            r.writes += 1
        else:
            r.reads += 1

        self._traffic(outcome)

        response = self.latency.cost(outcome) + self.pending_us
        self.pending_us = 0.0
        self.response_total_us += response
        r.max_response_us = max(r.max_response_us, response)

    @record.register(RefreshReport)
    def _(self, refresh):
        self.report.timer_events += 1
        self._traffic(refresh.outcome)
        if self.latency.serialize_refresh:
            self.pending_us += self.latency.cost(refresh.outcome)

    @record.register(FlushReport)
    def _(self, flush):
        self.report.timer_events += 1
        self._traffic(flush.outcome)
        # write-back competes with the requests
        self.pending_us += self.latency.cost(flush.outcome)

    def _traffic(self, outcome):
        r = self.report
        r.dram_reads += outcome.dram_reads
        r.dram_writes += outcome.dram_writes
        r.pja_reads += outcome.pja_reads
        r.pja_writes += outcome.pja_writes
        r.storage_reads += outcome.storage_reads
        r.storage_writes += outcome.storage_writes
        r.refreshes += outcome.refreshes
        self.causes.update(cause for _, cause in outcome.flushes)

    def finalize(self, ledger, params, end_s, stale_refreshes=0):
        """
        ### Description ###
        Closes the ledger at end_s and completes the report: hit ratio,
        traffic in bytes, response times, idle statistics and the PJA
        failure summary

        ### Parameters ###
        ledger (IdleLedger): the run's ledger
        params (FailureParams): failure model parameters
        end_s (float): simulated end time
        stale_refreshes (int): refreshes skipped by the buffer

        ### Returns ###
        `RunReport`
        """
        if not ledger.finalized:
            ledger.finalize(end_s)

        r = self.report
        r.end_s = end_s
        r.stale_refreshes = stale_refreshes

        if r.accesses:
            r.hit_ratio = r.hits / r.accesses
            r.mean_response_us = self.response_total_us / r.accesses

        r.storage_read_bytes = r.storage_reads * self.page_size
        r.storage_write_bytes = r.storage_writes * self.page_size
        r.storage_writes_by_cause = {
            cause.to_str(): self.causes[cause] for cause in FlushCause}

        assert r.hits + r.misses == r.accesses
        assert sum(self.causes.values()) == r.storage_writes, \
            "Storage writes without a flush cause"
        assert 0.0 <= r.hit_ratio <= 1.0

        r.failure = aggregate_pja_failure(ledger, params)
        r.max_idle_s = ledger.max_interval()

        logging.info(f"{r.accesses} accesses, hit ratio {r.hit_ratio:.4f}, "
                     f"{r.storage_writes} storage writes, "
                     f"{r.refreshes} refreshes")

        return r


def ratio(value, baseline):
    """
    value / baseline; 0/0 is 1.0 and x/0 is the string "inf"
    """
    if baseline == 0:
        return 1.0 if value == 0 else INF

    return value / baseline


def compare(reports, baseline=0):
    """
    ### Description ###
    Normalizes every compared metric of each report against the baseline
    report. All reports must come from the same trace

    ### Parameters ###
    reports (list): RunReport objects
    baseline (int): index of the baseline report

    ### Returns ###
    `list`: one row (dict) per report, with a `flagged` list of the metrics
            whose baseline value was zero
    """
    if not reports:
        raise CompareError("Nothing to compare")
    if not 0 <= baseline < len(reports):
        raise CompareError(f"Baseline index {baseline} out of range")

    base = reports[baseline]
    rows = []

    for report in reports:
        if report.trace_id != base.trace_id:
            raise CompareError(f"{report.name} and {base.name} were run on "
                               f"different traces")

        row = {"name": report.name, "trace_id": report.trace_id}
        flagged = []
        for metric in COMPARED_METRICS:
            row[metric] = ratio(report.value(metric), base.value(metric))
            if row[metric] == INF:
                flagged.append(metric)

        row["flagged"] = flagged
        rows.append(row)

    return rows


def write_comparison_csv(path, tables):
    """
    tables: (trace name, rows returned by compare()) per trace
    """
    header = ["trace", "name"] + COMPARED_METRICS + ["flagged"]
    rows = [[trace, row["name"]] + [row[m] for m in COMPARED_METRICS] +
            [";".join(row["flagged"])]
            for trace, table in tables for row in table]

    write_csv(path, header, rows)


def figure_table(cells, metrics, normalize_to=None):
    """
    ### Description ###
    Plot data for one figure: one row per trace, one column per scheme
    (per scheme and metric when several metrics share a figure)

    ### Parameters ###
    cells (list): (trace name, scheme name, RunReport), in grid order
    metrics (list): RunReport metric names
    normalize_to (str): scheme whose value divides each row, if any

    ### Returns ###
    `tuple`: (header, rows)
    """
    traces = list(dict.fromkeys(t for t, _, _ in cells))
    schemes = list(dict.fromkeys(s for _, s, _ in cells))
    by_cell = {(t, s): r for t, s, r in cells}

    if len(metrics) == 1:
        header = ["trace"] + schemes
    else:
        header = ["trace"] + [f"{s}.{m}" for s in schemes for m in metrics]

    rows = []
    for t in traces:
        row = [t]
        for s in schemes:
            report = by_cell.get((t, s))
            for m in metrics:
                if report is None:
                    row.append("")
                    continue

                value = report.value(m)
                if normalize_to is not None:
                    base = by_cell.get((t, normalize_to))
                    value = ratio(value, base.value(m)) if base else ""
                row.append(value)
        rows.append(row)

    return header, rows


def write_csv(path, header, rows):
    tools.ensure_dir(os.path.dirname(os.path.abspath(path)))

    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

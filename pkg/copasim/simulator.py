"""
Replay engine: merges a run's page accesses with its scheme's timers in
simulated time and drives buffer, scheme and metrics.
"""
import logging
import math
import os

from .ledger import IdleLedger
from .metrics import Metrics
from .schemes import schedule_timers
from .trace import TraceStats
from .dumpers import dump
from .descriptor import DescriptorType
from . import tools


class Simulation:
    def __init__(self, config, check_invariants=False):
        """
        State of one run

        ### Attributes ###
        config (RunConfig): the validated run configuration
        check_invariants (bool): assert buffer and scheme invariants after
                                 every event
        ledger (IdleLedger): idle history of the journal pages
        buffer (Buffer): fresh buffer of the configured mode
        scheme (Scheme): fresh scheme attached to the buffer
        metrics (Metrics): event accounting
        stats (TraceStats): loader statistics
        """
        self.config = config
        self.check_invariants = check_invariants
        self.ledger = IdleLedger()
        self.buffer = config.new_buffer(self.ledger)
        self.scheme = config.new_scheme()
        self.scheme.attach(self.buffer)
        self.metrics = Metrics(config.latency, self.buffer.page_size)
        self.stats = TraceStats()
        self.report = None

    def run(self, accesses=None):
        """
        ### Description ###
        Replays the trace (or the given access stream) to its end. Timers
        fire before requests with the same timestamp.

        ### Parameters ###
        accesses (iterable): PageAccess stream replacing the configured trace

        ### Returns ###
        `RunReport`
        """
        if accesses is None:
            accesses = self.config.trace.accesses(self.buffer.page_size,
                                                  self.stats)

        end_s = self.config.trace.end_s
        timers = schedule_timers(self.scheme,
                                 end_s if end_s is not None else math.inf)
        next_timer = next(timers, None)
        last_s = 0.0

        try:
            for access in accesses:
                if end_s is not None and access.timestamp_s > end_s:
                    logging.warning(f"Trace continues past end_s={end_s}, "
                                    f"stopping at {access.timestamp_s}")
                    self.stats.truncated = True
                    break

                while next_timer is not None and \
                        next_timer <= access.timestamp_s:
                    self._fire(next_timer)
                    next_timer = next(timers, None)

                self.metrics.record(self.buffer.access(access))
                self._check()
                last_s = access.timestamp_s
        finally:
            close = getattr(accesses, "close", None)
            if close is not None:
                close()

        end = end_s if end_s is not None else last_s
        while next_timer is not None and next_timer <= end:
            self._fire(next_timer)
            next_timer = next(timers, None)

        self.buffer.advance(max(end, self.buffer.clock))
        self.report = self._finalize(self.buffer.clock)

        return self.report

    def _fire(self, now):
        self.buffer.advance(now)
        report = self.scheme.on_timer(now)
        if report is not None:
            self.metrics.record(report)
        self._check()

    def _check(self):
        if self.check_invariants:
            self.buffer.check_invariants()
            self.scheme.check_invariants()

    def _finalize(self, end):
        report = self.metrics.finalize(self.ledger, self.config.failure, end,
                                       self.buffer.stale_refreshes)
        report.name = self.config.name
        report.trace_id = self.config.trace.identity()
        report.trace_stats = self.stats.dump()
        report.config = dump(self.config)

        logging.info(f"{self.config.name}: simulated {end} s")
        return report


def simulate(config, check_invariants=False):
    """
    ### Description ###
    Runs one configuration. Deterministic: the same configuration always
    yields the same report

    ### Parameters ###
    config (RunConfig): validated run configuration
    check_invariants (bool): assert invariants after every event

    ### Returns ###
    `RunReport`
    """
    return Simulation(config, check_invariants).run()


def report_json(report):
    return DescriptorType.JSON.dumps(dump(report.dump()))


def write_outputs(simulation, out_dir=None):
    """
    Writes the report JSON and, when configured, the ledger CSVs.
    Returns the report path
    """
    output = simulation.config.output
    out_dir = out_dir or output.resolve_dir()
    tools.ensure_dir(out_dir)

    report_path = os.path.join(out_dir, output.report)
    with open(report_path, "w") as f:
        f.write(report_json(simulation.report))
    logging.info(f"Report written to {report_path}")

    if output.ledger:
        prefix = os.path.join(out_dir, output.ledger)
        simulation.ledger.export_csv(*ledger_paths(prefix))

    return report_path


def ledger_paths(prefix):
    return f"{prefix}_intervals.csv", f"{prefix}_writes.csv"

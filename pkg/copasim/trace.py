"""
MSRC block-trace ingestion and synthetic trace generation.

Everything downstream works on PageAccess streams: one page-granular read or
write with a trace-relative timestamp in seconds.
"""
import csv
import logging
import os
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from . import tools

# Windows FILETIME ticks are 100 ns
TICKS_PER_SECOND = 10**7
MSRC_FIELDS = 7
# synthetic draws are made in fixed-size blocks so a seed always maps to the
# same stream regardless of how the consumer iterates
_BLOCK = 65536


class Error(Exception):
    pass


class TraceParseError(Error):
    def __init__(self, line_number, reason):
        super().__init__()
        self.line_number = line_number
        self.reason = reason

    def __str__(self):
        return f"line {self.line_number}: {self.reason}"


class AccessKind(IntEnum):
    READ = 0
    WRITE = 1

    @staticmethod
    def from_str(kind):
        kind_lower = kind.strip().lower()

        if kind_lower == "read":
            return AccessKind.READ
        if kind_lower == "write":
            return AccessKind.WRITE

        raise Error(f"Bad access kind: {kind}")

    def to_str(self):
        if self == AccessKind.READ:
            return "Read"
        if self == AccessKind.WRITE:
            return "Write"

        raise Error("AccessKind::to_str failed: this should never happen")


class PageId(NamedTuple):
    disk: int
    index: int

    def __str__(self):
        return f"{self.disk}:{self.index}"

    @staticmethod
    def from_str(s):
        try:
            disk, index = s.split(":")
            return PageId(int(disk), int(index))
        except ValueError:
            raise Error(f"Bad page id: {s}")


class Request(NamedTuple):
    timestamp_s: float
    disk: int
    kind: AccessKind
    offset_bytes: int
    size_bytes: int
    response_time_us: int
    timestamp_ticks: int = 0


class PageAccess(NamedTuple):
    timestamp_s: float
    page: PageId
    kind: AccessKind


class Pattern(IntEnum):
    SEQUENTIAL = 0
    UNIFORM = 1
    ZIPF = 2

    @staticmethod
    def from_str(pattern):
        pattern_lower = pattern.lower()

        if pattern_lower == "sequential":
            return Pattern.SEQUENTIAL
        if pattern_lower in ("uniform", "uniform-random", "random"):
            return Pattern.UNIFORM
        if pattern_lower == "zipf":
            return Pattern.ZIPF

        raise Error(f"Bad access pattern: {pattern}")

    def to_str(self):
        if self == Pattern.SEQUENTIAL:
            return "sequential"
        if self == Pattern.UNIFORM:
            return "uniform"
        if self == Pattern.ZIPF:
            return "zipf"

        raise Error("Pattern::to_str failed: this should never happen")


class TraceSpec:
    def __init__(self, access_count, page_universe, pattern, theta=None,
                 write_fraction=0.5, inter_arrival_s=0.01, arrival="fixed",
                 seed=0):
        """
        Synthetic workload description

        ### Attributes ###
        access_count (int): number of page accesses to emit
        page_universe (int): number of distinct pages the accesses draw from
        pattern (Pattern): sequential, uniform or zipf
        theta (float): zipf exponent (> 0), only for zipf
        write_fraction (float): probability that an access is a write
        inter_arrival_s (float): fixed gap or exponential mean, in seconds
        arrival (str): "fixed" or "exponential"
        seed (int): RNG seed
        """
        self.access_count = access_count
        self.page_universe = page_universe
        self.pattern = pattern
        self.theta = theta
        self.write_fraction = write_fraction
        self.inter_arrival_s = inter_arrival_s
        self.arrival = arrival
        self.seed = seed

    @staticmethod
    def load(spec_dict):
        theta = spec_dict.get('theta')
        return TraceSpec(
            spec_dict['access_count'],
            spec_dict['page_universe'],
            Pattern.from_str(spec_dict['pattern']),
            float(theta) if theta is not None else None,
            float(spec_dict.get('write_fraction', 0.5)),
            float(spec_dict.get('inter_arrival_s', 0.01)),
            spec_dict.get('arrival', 'fixed').lower(),
            spec_dict.get('seed', 0))

    def dump(self):
        return {
            "access_count": self.access_count,
            "page_universe": self.page_universe,
            "pattern": self.pattern.to_str(),
            "theta": self.theta,
            "write_fraction": self.write_fraction,
            "inter_arrival_s": self.inter_arrival_s,
            "arrival": self.arrival,
            "seed": self.seed
        }

    def validate(self):
        if self.page_universe <= 0:
            raise Error("Synthetic trace needs a non-empty page universe")
        if not 0 <= self.write_fraction <= 1:
            raise Error(f"write_fraction out of range: {self.write_fraction}")
        if self.pattern == Pattern.ZIPF and \
                (self.theta is None or self.theta <= 0):
            raise Error(f"zipf needs theta > 0, got {self.theta}")
        if self.arrival not in ("fixed", "exponential"):
            raise Error(f"Bad arrival law: {self.arrival}")


class TraceStats:
    def __init__(self):
        self.requests = 0
        self.accesses = 0
        self.skipped_lines = 0
        self.resorted = False
        self.truncated = False

    def dump(self):
        return {
            "requests": self.requests,
            "accesses": self.accesses,
            "skipped_lines": self.skipped_lines,
            "resorted": self.resorted,
            "truncated": self.truncated
        }


def parse_msrc_line(line, epoch_ticks=None, line_number=None):
    """
    Parses one MSRC record:
        Timestamp,Hostname,DiskNumber,Type,Offset,Size,ResponseTime

    The timestamp is a FILETIME tick count; it is converted to seconds
    relative to epoch_ticks (the first record of the trace). Without an
    epoch the record is its own epoch.
    """
    fields = line.strip().split(",")
    if len(fields) != MSRC_FIELDS:
        raise TraceParseError(line_number,
                              f"expected {MSRC_FIELDS} fields, got {len(fields)}")

    try:
        ticks = int(fields[0])
        disk = int(fields[2])
        offset = int(fields[4])
        size = int(fields[5])
        response_time = int(fields[6])
    except ValueError as e:
        raise TraceParseError(line_number, f"non-numeric field ({e})")

    try:
        kind = AccessKind.from_str(fields[3])
    except Error:
        raise TraceParseError(line_number, f"unknown type {fields[3]!r}")

    if size <= 0:
        raise TraceParseError(line_number, f"non-positive size {size}")
    if offset < 0:
        raise TraceParseError(line_number, f"negative offset {offset}")

    if epoch_ticks is None:
        epoch_ticks = ticks

    return Request((ticks - epoch_ticks) / TICKS_PER_SECOND, disk, kind,
                   offset, size, response_time, ticks)


def expand_to_pages(req, page_size):
    """
    One PageAccess per page overlapped by [offset, offset + size),
    in ascending page order
    """
    assert tools.is_power_of_two(page_size), f"Bad page size {page_size}"

    first = req.offset_bytes // page_size
    last = (req.offset_bytes + req.size_bytes - 1) // page_size

    return [PageAccess(req.timestamp_s, PageId(req.disk, index), req.kind)
            for index in range(first, last + 1)]


def read_msrc_requests(path, abort_on_error=False, stats=None):
    """
    Loads all requests of an MSRC trace, normalized and sorted by time.

    Malformed lines are logged and skipped unless abort_on_error is set, in
    which case the first TraceParseError propagates.
    """
    stats = stats if stats is not None else TraceStats()
    records = []

    with tools.open_text(path) as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue

            try:
                records.append(parse_msrc_line(line, 0, line_number))
            except TraceParseError as e:
                if abort_on_error:
                    raise
                stats.skipped_lines += 1
                logging.warning(f"{path}: skipping {e}")

    if any(a.timestamp_ticks > b.timestamp_ticks
           for a, b in zip(records, records[1:])):
        logging.warning(f"{path}: timestamps out of order, sorting")
        records.sort(key=lambda r: r.timestamp_ticks)
        stats.resorted = True

    if not records:
        return []

    epoch = records[0].timestamp_ticks
    stats.requests = len(records)

    return [r._replace(timestamp_s=(r.timestamp_ticks - epoch) / TICKS_PER_SECOND)
            for r in records]


def load_msrc(path, page_size, abort_on_error=False, max_accesses=None,
              stats=None):
    """
    Page-granular access stream of an MSRC trace file (plain or gzip)
    """
    stats = stats if stats is not None else TraceStats()
    requests = read_msrc_requests(path, abort_on_error, stats)
    logging.info(f"Loaded {len(requests)} requests from {path}")

    return _limit((a for r in requests for a in expand_to_pages(r, page_size)),
                  max_accesses, stats)


def _limit(accesses, max_accesses, stats):
    for access in accesses:
        if max_accesses is not None and stats.accesses >= max_accesses:
            stats.truncated = True
            return
        stats.accesses += 1
        yield access


def _zipf_probabilities(universe, theta):
    ranks = np.arange(1, universe + 1, dtype=np.float64)
    weights = ranks ** -theta
    return weights / weights.sum()


def generate_synthetic(spec, disk=0):
    """
    Deterministic PageAccess stream for a TraceSpec.

    Pages are drawn block-wise from numpy's PCG64 generator; zipf ranks map to
    page indices (rank 1 is page 0). Timestamps are quantized to FILETIME
    ticks so an MSRC round trip reproduces them exactly.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    probabilities = _zipf_probabilities(spec.page_universe, spec.theta) \
        if spec.pattern == Pattern.ZIPF else None

    emitted = 0
    elapsed_s = 0.0

    while emitted < spec.access_count:
        n = min(_BLOCK, spec.access_count - emitted)

        if spec.pattern == Pattern.SEQUENTIAL:
            pages = (np.arange(emitted, emitted + n) % spec.page_universe)
        elif spec.pattern == Pattern.UNIFORM:
            pages = rng.integers(0, spec.page_universe, size=n)
        else:
            pages = rng.choice(spec.page_universe, size=n, p=probabilities)

        writes = rng.random(n) < spec.write_fraction

        if spec.arrival == "exponential":
            gaps = rng.exponential(spec.inter_arrival_s, size=n)
        else:
            gaps = np.full(n, spec.inter_arrival_s)

        for i in range(n):
            if emitted > 0:
                elapsed_s += float(gaps[i])
            ticks = int(round(elapsed_s * TICKS_PER_SECOND))
            kind = AccessKind.WRITE if writes[i] else AccessKind.READ
            yield PageAccess(ticks / TICKS_PER_SECOND,
                             PageId(disk, int(pages[i])), kind)
            emitted += 1


def write_msrc(accesses, path, page_size, hostname="synth", epoch_ticks=0):
    """
    Writes page accesses as MSRC records (one page-sized request each), so a
    synthetic trace flows through the same loader as a real one
    """
    count = 0
    tools.ensure_dir(os.path.dirname(os.path.abspath(path)))

    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for a in accesses:
            ticks = epoch_ticks + int(round(a.timestamp_s * TICKS_PER_SECOND))
            writer.writerow([ticks, hostname, a.page.disk, a.kind.to_str(),
                             a.page.index * page_size, page_size, 0])
            count += 1

    return count


class TraceSource:
    def __init__(self, name, file=None, synthetic=None, max_accesses=None,
                 end_s=None, abort_on_parse_error=False):
        """
        Where a run's access stream comes from

        ### Attributes ###
        name (str): workload name used in reports and grid tables
        file (str): absolute path of an MSRC trace (plain or gzip)
        synthetic (TraceSpec): generator spec, exclusive with file
        max_accesses (int): truncate the stream after this many page accesses
        end_s (float): simulated end time (None: last access timestamp)
        abort_on_parse_error (bool): fail on the first malformed line
        """
        if (file is None) == (synthetic is None):
            raise Error("A trace needs exactly one of file or synthetic")

        self.name = name
        self.file = file
        self.synthetic = synthetic
        self.max_accesses = max_accesses
        self.end_s = end_s
        self.abort_on_parse_error = abort_on_parse_error

    @staticmethod
    def load(trace_dict, seed=None):
        file = trace_dict.get('file')
        synthetic = trace_dict.get('synthetic')

        if synthetic is not None:
            synthetic = dict(synthetic)
            if 'seed' not in synthetic and seed is not None:
                synthetic['seed'] = seed
            synthetic = TraceSpec.load(synthetic)
            synthetic.validate()

        if file is not None:
            file = os.path.abspath(file)
            name = os.path.basename(file).split(".")[0]
        else:
            name = f"{synthetic.pattern.to_str()}_{synthetic.seed}"

        end_s = trace_dict.get('end_s')

        return TraceSource(
            trace_dict.get('name') or name,
            file,
            synthetic,
            trace_dict.get('max_accesses'),
            float(end_s) if end_s is not None else None,
            trace_dict.get('abort_on_parse_error', False))

    def dump(self):
        return {
            "name": self.name,
            "file": self.file,
            "synthetic": self.synthetic.dump() if self.synthetic else None,
            "max_accesses": self.max_accesses,
            "end_s": self.end_s,
            "abort_on_parse_error": self.abort_on_parse_error
        }

    def identity(self):
        """
        Fingerprint of everything that shapes the access stream; runs are
        comparable only when their identities match
        """
        d = self.dump()
        del d["name"]
        del d["abort_on_parse_error"]
        return tools.fingerprint(d)

    def accesses(self, page_size, stats=None):
        stats = stats if stats is not None else TraceStats()

        if self.file is not None:
            return load_msrc(self.file, page_size, self.abort_on_parse_error,
                             self.max_accesses, stats)

        # one synthetic request per page access
        stats.requests = self.synthetic.access_count
        if self.max_accesses is not None:
            stats.requests = min(stats.requests, self.max_accesses)
        return _limit(generate_synthetic(self.synthetic), self.max_accesses,
                      stats)

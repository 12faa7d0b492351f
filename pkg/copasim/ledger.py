import csv
import logging
import os
from collections import defaultdict

from .trace import PageId
from . import trace

INTERVALS_HEADER = ["page_id", "interval_start_s", "interval_end_s"]
WRITES_HEADER = ["page_id", "write_count", "refresh_count"]


class Error(Exception):
    pass


class FormatError(Error):
    def __init__(self, file, row_number, reason):
        super().__init__()
        self.file = file
        self.row_number = row_number
        self.reason = reason

    def __str__(self):
        return f"{self.file}, row {self.row_number}: {self.reason}"


class IdleLedger:
    def __init__(self):
        """
        Idle history of journal pages

        ### Attributes ###
        intervals (dict): PageId -> list of closed (start_s, end_s) intervals
        write_counts (dict): PageId -> cumulative journal writes (N)
        refresh_counts (dict): PageId -> refreshes among those writes
        open (dict): PageId -> start of the currently open interval
        """
        self.intervals = defaultdict(list)
        self.write_counts = defaultdict(int)
        self.refresh_counts = defaultdict(int)
        self.open = {}
        self.finalized = False

    def record_write(self, page, now, refresh=False):
        """
        A journal write ends the page's current idle interval (if any) and
        starts a new one
        """
        self.close(page, now)
        self.open[page] = now
        self.write_counts[page] += 1
        if refresh:
            self.refresh_counts[page] += 1

    def close(self, page, now):
        start = self.open.pop(page, None)
        if start is None:
            return

        assert now >= start, f"Interval of {page} ends before it starts"
        intervals = self.intervals[page]
        assert not intervals or intervals[-1][1] <= start, \
            f"Overlapping intervals for {page}"
        intervals.append((start, now))

    def finalize(self, end_s):
        """
        Closes every open interval at end_s. An interval opened at end_s
        (a write or refresh on the last instant) is dropped
        """
        for page in sorted(self.open):
            if self.open[page] == end_s:
                del self.open[page]
            else:
                self.close(page, end_s)
        self.finalized = True

    def pages(self):
        return sorted(set(self.intervals) | set(self.write_counts))

    def durations(self, page):
        return [end - start for start, end in self.intervals.get(page, [])]

    def all_durations(self):
        return [end - start
                for page in self.pages()
                for start, end in self.intervals.get(page, [])]

    @property
    def interval_count(self):
        return sum(len(v) for v in self.intervals.values())

    @property
    def total_refreshes(self):
        return sum(self.refresh_counts.values())

    @property
    def total_writes(self):
        return sum(self.write_counts.values())

    def max_interval(self):
        return max(self.all_durations(), default=0.0)

    def export_csv(self, intervals_path, writes_path):
        for path in (intervals_path, writes_path):
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

        with open(intervals_path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(INTERVALS_HEADER)
            for page in self.pages():
                for start, end in self.intervals.get(page, []):
                    writer.writerow([str(page), repr(start), repr(end)])

        with open(writes_path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(WRITES_HEADER)
            for page in self.pages():
                writer.writerow([str(page), self.write_counts.get(page, 0),
                                 self.refresh_counts.get(page, 0)])

        logging.info(f"Ledger written to {intervals_path} and {writes_path}")

    @staticmethod
    def import_csv(intervals_path, writes_path=None):
        ledger = IdleLedger()

        for row_number, row in _rows(intervals_path, INTERVALS_HEADER):
            page = _page(intervals_path, row_number, row[0])
            try:
                start, end = float(row[1]), float(row[2])
            except ValueError:
                raise FormatError(intervals_path, row_number,
                                  "non-numeric interval bound")
            if end < start:
                raise FormatError(intervals_path, row_number,
                                  "interval ends before it starts")
            ledger.intervals[page].append((start, end))

        if writes_path is not None:
            for row_number, row in _rows(writes_path, WRITES_HEADER, min_fields=2):
                page = _page(writes_path, row_number, row[0])
                try:
                    ledger.write_counts[page] = int(row[1])
                    if len(row) > 2:
                        ledger.refresh_counts[page] = int(row[2])
                except ValueError:
                    raise FormatError(writes_path, row_number,
                                      "non-integer count")

        for page, intervals in ledger.intervals.items():
            intervals.sort()

        ledger.finalized = True
        return ledger


def _rows(path, header, min_fields=None):
    min_fields = min_fields or len(header)

    with open(path, newline="") as f:
        for row_number, row in enumerate(csv.reader(f), start=1):
            if not row or (row_number == 1 and row[0] == header[0]):
                continue
            if len(row) < min_fields:
                raise FormatError(path, row_number,
                                  f"expected {len(header)} fields, got {len(row)}")
            yield row_number, row


def _page(path, row_number, text):
    try:
        return PageId.from_str(text)
    except trace.Error:
        raise FormatError(path, row_number, f"bad page id {text!r}")

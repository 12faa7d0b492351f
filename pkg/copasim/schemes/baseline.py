import logging

from .base import Scheme, FlushReport
from ..buffers import NvbBuffer, AccessOutcome, FlushCause

DEFAULT_INTERVAL_S = 5.0
DEFAULT_IDLE_THRESHOLD_S = 30.0


class BaselineScheme(Scheme):
    type = "baseline"

    def __init__(self, name, interval_s, idle_threshold_s):
        """
        pdflush-style write-back: every `interval_s` the dirty set is scanned
        and pages dirty for at least `idle_threshold_s` are flushed
        """
        super().__init__(name)
        self.interval_s = interval_s
        self.idle_threshold_s = idle_threshold_s

    @staticmethod
    def load(scheme_dict):
        return BaselineScheme(
            scheme_dict.get('name') or "baseline",
            float(scheme_dict.get('interval_s', DEFAULT_INTERVAL_S)),
            float(scheme_dict.get('idle_threshold_s',
                                  DEFAULT_IDLE_THRESHOLD_S)))

    def dump(self):
        return {
            "type": self.type,
            "name": self.name,
            "interval_s": self.interval_s,
            "idle_threshold_s": self.idle_threshold_s
        }

    @staticmethod
    def get_supported_buffers():
        return [NvbBuffer]

    @property
    def period_s(self):
        return self.interval_s

    def on_timer(self, now):
        return pdflush_tick(self.buffer, self.idle_threshold_s, now)


def pdflush_tick(buffer, idle_threshold_s, now):
    """
    Flushes every dirty page whose time since its last write reached the
    threshold
    """
    outcome = AccessOutcome()
    pages = []

    for page, last_write_s in buffer.snapshot_dirty_set():
        if now - last_write_s >= idle_threshold_s:
            outcome.merge(buffer.flush_page(page, FlushCause.PDFLUSH))
            pages.append(page)

    if pages:
        logging.debug(f"pdflush at {now}: {len(pages)} pages flushed")

    return FlushReport(now, pages, outcome, buffer.page_size)

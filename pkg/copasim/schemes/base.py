import itertools
import logging
import math

from abc import ABC, abstractmethod


class Error(Exception):
    pass


class RefreshReport:
    def __init__(self, now, pages, outcome):
        """
        Result of one refresh timer

        ### Attributes ###
        now (float): simulated time of the timer
        pages (list): refreshed PageIds, in refresh order
        outcome (AccessOutcome): memory traffic of the refreshes
        """
        self.now = now
        self.pages = pages
        self.outcome = outcome

    @property
    def count(self):
        return self.outcome.refreshes


class FlushReport:
    def __init__(self, now, pages, outcome, page_size):
        self.now = now
        self.pages = pages
        self.outcome = outcome
        self.bytes = outcome.storage_writes * page_size

    @property
    def count(self):
        return self.outcome.storage_writes


class Scheme(ABC):
    type = None

    def __init__(self, name):
        """
        Generic attributes common to all Scheme subclasses

        ### Attributes ###
        name (str): name of the scheme, used as column name in grid tables
        buffer (Buffer): the buffer managed by the scheme, set by attach()
        """
        self.name = name
        self.buffer = None

    @staticmethod
    @abstractmethod
    def load(scheme_dict):
        """
        ### Description ###
        Creates a XXXScheme object from the `scheme` section of a run descriptor

        ### Parameters ###
        scheme_dict (dict): dictionary containing the definition of the scheme

        ### Returns ###
        An instance of the XXXScheme class
        """

    @abstractmethod
    def dump(self):
        """
        ### Description ###
        Creates a dict from the XXXScheme object (opposite procedure wrt. load)
        Every default is written out, so the dict echoed in the RunReport
        fully describes the scheme

        ### Parameters ###
        self: Scheme object

        ### Returns ###
        `dict`: description of the object
        """

    @staticmethod
    @abstractmethod
    def get_supported_buffers():
        """
        ### Description ###
        Static method that returns the Buffer classes this scheme can manage

        ### Parameters ###

        ### Returns ###
        `list`: list of Buffer classes
        """

    @property
    def period_s(self):
        """
        Timer period in simulated seconds, None for schemes without timers
        """
        return None

    def attach(self, buffer):
        if buffer.__class__ not in self.get_supported_buffers():
            raise Error(f"Scheme {self.name} does not support "
                        f"{buffer.__class__.__name__}")

        self.buffer = buffer
        buffer.subscribe(self)

    def on_pja_write(self, page, now):
        pass

    def on_dirty_eviction(self, page, now):
        pass

    def on_timer(self, now):
        """
        ### Description ###
        Runs the scheme's periodic work at simulated time `now`

        ### Parameters ###
        now (float): timer time, in seconds

        ### Returns ###
        `RefreshReport`, `FlushReport` or None
        """
        return None

    def check_invariants(self):
        pass


def schedule_timers(scheme, trace_end_s):
    """
    Timer times k * period for k >= 1, up to and including trace_end_s.
    The generator is lazy, so trace_end_s may be math.inf
    """
    period = scheme.period_s
    if period is None:
        return

    if period <= 0 or math.isnan(period):
        raise Error(f"Timer period must be positive, got {period}")

    for k in itertools.count(1):
        t = k * period
        if t > trace_end_s:
            return

        logging.debug(f"{scheme.name}: timer at {t}")
        yield t

"""
Closed-form failure model of an STT-MRAM journal whose 64-bit words are
protected by SEC-DED.

A word is lost once two or more of its bits flip, so its survival is the
binomial CDF at one flip; page and PJA losses are complements of products of
survivals and are accumulated as sums of log-survivals to keep probabilities
far below machine epsilon meaningful.
"""
import math

import numpy as np
from scipy import constants
from scipy.stats import binom

# smallest probability reported as-is; anything below is reported as 0
TINY = 1e-300

DEFAULT_DELTA = 40.0
DEFAULT_K = 64
DEFAULT_WORDS = 512
DEFAULT_P_WF_CELL = 1e-8


class Error(Exception):
    pass


class WriteFailurePhysical:
    def __init__(self, t_write, mu_b, p, i_write, i_c0, c, m, delta=None):
        """
        Device constants of the write-error model

        ### Attributes ###
        t_write (float): write pulse width (s)
        mu_b (float): Bohr magneton
        p (float): tunneling spin polarization
        i_write (float): write current
        i_c0 (float): critical switching current
        c (float): Euler constant term
        m (float): magnetic momentum of the free layer
        delta (float): thermal stability factor (None: use FailureParams.delta)
        """
        self.t_write = t_write
        self.mu_b = mu_b
        self.p = p
        self.i_write = i_write
        self.i_c0 = i_c0
        self.c = c
        self.m = m
        self.delta = delta

    @staticmethod
    def load(phys_dict):
        return WriteFailurePhysical(
            float(phys_dict['t_write']),
            float(phys_dict['mu_b']),
            float(phys_dict['p']),
            float(phys_dict['i_write']),
            float(phys_dict['i_c0']),
            float(phys_dict['c']),
            float(phys_dict['m']),
            phys_dict.get('delta'))

    def dump(self):
        return {
            "t_write": self.t_write,
            "mu_b": self.mu_b,
            "p": self.p,
            "i_write": self.i_write,
            "i_c0": self.i_c0,
            "c": self.c,
            "m": self.m,
            "delta": self.delta
        }


class FailureParams:
    def __init__(self, delta=DEFAULT_DELTA, k=DEFAULT_K, words=DEFAULT_WORDS,
                 p_wf_cell=DEFAULT_P_WF_CELL, physical=None):
        if delta <= 0:
            raise Error(f"Thermal stability must be positive, got {delta}")
        if k < 2:
            raise Error(f"SEC-DED words need k >= 2 bits, got {k}")
        if words < 1:
            raise Error(f"A page needs at least one word, got {words}")
        if not 0 <= p_wf_cell <= 1:
            raise Error(f"p_wf_cell is not a probability: {p_wf_cell}")

        self.delta = delta
        self.k = k
        self.words = words
        self.p_wf_cell = p_wf_cell
        self.physical = physical

    @staticmethod
    def load(params_dict):
        params_dict = params_dict or {}
        physical = params_dict.get('physical')

        return FailureParams(
            float(params_dict.get('delta', DEFAULT_DELTA)),
            int(params_dict.get('k', DEFAULT_K)),
            int(params_dict.get('words', DEFAULT_WORDS)),
            float(params_dict.get('p_wf_cell', DEFAULT_P_WF_CELL)),
            WriteFailurePhysical.load(physical) if physical else None)

    def dump(self):
        return {
            "delta": self.delta,
            "k": self.k,
            "words": self.words,
            "p_wf_cell": self.p_wf_cell,
            "physical": self.physical.dump() if self.physical else None
        }

    def write_error_probability(self):
        """
        Per-cell write error: the physical model when constants are supplied,
        the direct assumption otherwise
        """
        if self.physical is None:
            return self.p_wf_cell

        return p_wf_cell_physical(self.physical, self.delta)


class FailureSummary:
    def __init__(self):
        self.retention_loss = 0.0
        self.write_loss = 0.0
        self.combined_loss = 0.0
        self.retention_to_write = None
        self.underflow = False
        self.pages = 0
        self.interval_count = 0
        self.max_interval_s = 0.0
        self.mean_interval_s = 0.0
        self.total_refreshes = 0
        self.total_writes = 0
        self.per_page = None

    def dump(self):
        d = {
            "retention_loss": self.retention_loss,
            "write_loss": self.write_loss,
            "combined_loss": self.combined_loss,
            "retention_to_write": self.retention_to_write,
            "underflow": self.underflow,
            "pages": self.pages,
            "interval_count": self.interval_count,
            "max_interval_s": self.max_interval_s,
            "mean_interval_s": self.mean_interval_s,
            "total_refreshes": self.total_refreshes,
            "total_writes": self.total_writes
        }
        if self.per_page is not None:
            d["per_page"] = self.per_page

        return d


def p_rf_cell(t, delta):
    """
    Retention failure probability of one idle cell after t seconds
    """
    if t < 0:
        raise Error(f"Idle time must be non-negative, got {t}")

    return -math.expm1(-t / math.exp(delta))


def word_survival(p, k):
    """
    SEC-DED word survives with at most one flipped bit out of k
    """
    return float(binom.cdf(1, k, p))


def word_loss(p, k):
    return float(binom.sf(1, k, p))


def _loss_from_log_survival(log_survival):
    return max(0.0, -math.expm1(log_survival))


def _log1m(q):
    if q >= 1.0:
        return -math.inf
    return math.log1p(-q)


def _retention_log_survivals(durations, params):
    """
    Vectorized log page-survival for each idle interval
    """
    d = np.asarray(durations, dtype=np.float64)
    if d.size == 0:
        return d
    if (d < 0).any():
        raise Error("Idle time must be non-negative")

    p = -np.expm1(-d / math.exp(params.delta))
    q = binom.sf(1, params.k, p)

    with np.errstate(divide="ignore"):
        return params.words * np.log1p(-q)


def p_dl_rf_page(t, params):
    """
    Page data loss from retention failure over one idle interval of t seconds
    """
    q = word_loss(p_rf_cell(t, params.delta), params.k)
    return _loss_from_log_survival(params.words * _log1m(q))


def p_dl_rf_intervals(durations, params):
    """
    Page data loss from retention failure over all of its idle intervals
    """
    log_survivals = _retention_log_survivals(durations, params)
    return _loss_from_log_survival(float(np.sum(log_survivals)))


def p_wf_cell_physical(phys, delta=None):
    """
    Per-cell write error probability from the pulse width and device constants
    """
    delta = phys.delta if phys.delta is not None else delta
    if delta is None or delta <= 0:
        raise Error("The write-error model needs a positive thermal stability")
    if phys.t_write <= 0:
        raise Error(f"Write pulse width must be positive, got {phys.t_write}")

    denominator = phys.c + (constants.e * phys.m * (1 + phys.p ** 2)) * \
        math.log(math.pi ** 2 * delta / 4)
    if denominator == 0:
        raise Error("Degenerate write-error model: zero denominator")

    exponent = -phys.t_write * 2 * phys.mu_b * phys.p * \
        (phys.i_write - phys.i_c0) / denominator

    # no overdrive (or underdrive) never switches reliably
    if exponent >= 0:
        return 1.0

    return math.exp(exponent)


def _write_log_survival(params, n):
    if n == 0:
        return 0.0

    q = word_loss(params.write_error_probability(), params.k)
    return n * params.words * _log1m(q)


def p_dl_wf_page(params, n):
    """
    Page data loss from write failure after n journal writes
    """
    if n < 0:
        raise Error(f"Write count must be non-negative, got {n}")

    return _loss_from_log_survival(_write_log_survival(params, n))


def combine_probabilities(probabilities):
    """
    Probability that at least one of several independent events occurs
    """
    return _loss_from_log_survival(sum(_log1m(p) for p in probabilities))


def _report(p):
    if 0 < p < TINY:
        return 0.0, True
    return p, False


def aggregate_pja_failure(ledger, params, per_page=False):
    """
    Retention, write and combined data-loss probability of the whole PJA
    over the ledger's history
    """
    summary = FailureSummary()
    pages = ledger.pages()
    durations = ledger.all_durations()

    log_retention = 0.0
    log_write = 0.0
    rows = [] if per_page else None

    for page in pages:
        page_durations = ledger.durations(page)
        page_log_rf = float(np.sum(_retention_log_survivals(page_durations,
                                                             params)))
        page_log_wf = _write_log_survival(params,
                                          ledger.write_counts.get(page, 0))
        log_retention += page_log_rf
        log_write += page_log_wf

        if rows is not None:
            rows.append({
                "page_id": str(page),
                "intervals": len(page_durations),
                "writes": ledger.write_counts.get(page, 0),
                "retention_loss": _report(
                    _loss_from_log_survival(page_log_rf))[0],
                "write_loss": _report(_loss_from_log_survival(page_log_wf))[0]
            })

    retention = _loss_from_log_survival(log_retention)
    write = _loss_from_log_survival(log_write)
    combined = _loss_from_log_survival(log_retention + log_write)

    summary.retention_loss, uf_r = _report(retention)
    summary.write_loss, uf_w = _report(write)
    summary.combined_loss, uf_c = _report(combined)
    summary.underflow = uf_r or uf_w or uf_c
    if write > 0:
        summary.retention_to_write = retention / write

    summary.pages = len(pages)
    summary.interval_count = len(durations)
    summary.max_interval_s = max(durations, default=0.0)
    summary.mean_interval_s = float(np.mean(durations)) if durations else 0.0
    summary.total_refreshes = ledger.total_refreshes
    summary.total_writes = ledger.total_writes
    summary.per_page = rows

    return summary

import pytest

from copasim import config
from copasim.ledger import IdleLedger
from copasim.simulator import Simulation
from copasim.trace import PageAccess, PageId, AccessKind


def page(name):
    """
    Letter pages of the worked examples: "A" is page 0 of disk 0
    """
    return PageId(0, ord(name) - ord("A"))


def read(t, name):
    return PageAccess(float(t), page(name), AccessKind.READ)


def write(t, name):
    return PageAccess(float(t), page(name), AccessKind.WRITE)


def run_dict(scheme=None, dram_pages=4, pja_pages=2, mode="nvb", end_s=None,
             synthetic=None, failure=None, latency=None):
    """
    Run descriptor with small capacities. Without a synthetic spec the trace
    is empty, for runs fed with scripted accesses
    """
    trace = {"synthetic": synthetic or {"access_count": 0,
                                        "page_universe": 1,
                                        "pattern": "sequential"}}
    if end_s is not None:
        trace["end_s"] = end_s

    d = {
        "trace": trace,
        "buffer": {"mode": mode, "dram_pages": dram_pages,
                   "pja_pages": pja_pages},
        "scheme": scheme or {"type": "no_pdflush"}
    }
    if failure is not None:
        d["failure"] = failure
    if latency is not None:
        d["latency"] = latency

    return d


@pytest.fixture
def ledger():
    return IdleLedger()


@pytest.fixture
def make_config():
    def _make(**kwargs):
        return config.load_dict(run_dict(**kwargs))

    return _make


@pytest.fixture
def replay():
    """
    Runs scripted accesses through a fresh simulation with invariant checks
    on; returns the finished Simulation
    """
    def _replay(accesses, **kwargs):
        sim = Simulation(config.load_dict(run_dict(**kwargs)),
                         check_invariants=True)
        sim.run(iter(accesses))
        return sim

    return _replay

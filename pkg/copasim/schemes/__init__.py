from .base import Scheme, RefreshReport, FlushReport, schedule_timers
from .no_pdflush import NoPdflushScheme
from .baseline import BaselineScheme
from .conv import ConvScheme
from .copa import CopaScheme

scheme_rules = {
    "no_pdflush": "no_pdflush.yaml",
    "baseline": "baseline.yaml",
    "conv": "conv.yaml",
    "copa": "copa.yaml"
}

scheme_funcs = {
    "no_pdflush": NoPdflushScheme.load,
    "baseline": BaselineScheme.load,
    "conv": ConvScheme.load,
    "copa": CopaScheme.load
}

from .base import Buffer, AccessOutcome, HitKind, FlushCause, RefreshSource
from .nvb import NvbBuffer
from .hyb import HybBuffer

buffer_rules = {
    "nvb": "nvb.yaml",
    "hyb": "hyb.yaml"
}

buffer_funcs = {
    "nvb": NvbBuffer.load,
    "hyb": HybBuffer.load
}

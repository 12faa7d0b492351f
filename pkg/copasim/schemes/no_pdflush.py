from .base import Scheme
from ..buffers import NvbBuffer, HybBuffer


class NoPdflushScheme(Scheme):
    """
    Periodic flushing disabled: pages leave the PJA only on eviction
    """
    type = "no_pdflush"

    @staticmethod
    def load(scheme_dict):
        return NoPdflushScheme(scheme_dict.get('name') or "no_pdflush")

    def dump(self):
        return {
            "type": self.type,
            "name": self.name
        }

    @staticmethod
    def get_supported_buffers():
        return [NvbBuffer, HybBuffer]

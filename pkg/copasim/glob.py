from enum import IntEnum
import os

OUTPUT_DIR_ENV = "COPASIM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"

PAGE_SIZE = 4096
# 8 GB DRAM buffer and 512 MB PJA in 4 KB pages
DRAM_PAGES = 2097152
PJA_PAGES = 131072


class Error(Exception):
    pass


class BufferMode(IntEnum):
    NVB = 0
    HYB = 1

    @staticmethod
    def from_str(mode):
        mode_lower = mode.lower()

        if mode_lower == "nvb":
            return BufferMode.NVB
        if mode_lower == "hyb":
            return BufferMode.HYB

        raise Error(f"Bad BufferMode: {mode}")

    def to_str(self):
        if self == BufferMode.NVB:
            return "nvb"
        if self == BufferMode.HYB:
            return "hyb"

        raise Error("BufferMode::to_str failed: this should never happen")


def get_output_dir(override=None):
    """
    Output directory resolution: explicit override (flag or descriptor),
    then the environment variable, then the default
    """
    if override:
        return override

    return os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR

import gzip
import hashlib
import json
import logging
import os

import aiofile

GZIP_MAGIC = b"\x1f\x8b"


def is_power_of_two(n):
    return isinstance(n, int) and not isinstance(n, bool) and n > 0 \
        and (n & (n - 1)) == 0


def is_gzip(path):
    with open(path, "rb") as f:
        return f.read(2) == GZIP_MAGIC


def open_text(path):
    """
    Opens a trace for reading, transparently decompressing gzip files
    (detected by magic bytes, not by extension). Undecodable bytes become
    U+FFFD so the parser rejects the line instead of the whole file
    """
    if is_gzip(path):
        logging.debug(f"{path}: gzip-compressed input")
        return gzip.open(path, "rt", newline="", errors="replace")

    return open(path, "r", newline="", errors="replace")


def fingerprint(data):
    """
    Stable short digest of a JSON-serializable object
    """
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def ensure_dir(path):
    if path:
        os.makedirs(path, exist_ok=True)


async def write_async(path, text):
    ensure_dir(os.path.dirname(path))

    async with aiofile.AIOFile(path, "w") as f:
        await f.write(text)
        await f.fsync()


def unique_name(name, taken):
    """
    `name`, or the first of name_2, name_3, ... not in `taken`.
    Used to keep grid rows, columns and cells apart
    """
    candidate = name
    suffix = 2
    while candidate in taken:
        candidate = f"{name}_{suffix}"
        suffix += 1

    return candidate

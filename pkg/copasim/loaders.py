import re

import yaml

_SIZE_RE = re.compile(r"^\s*([0-9]+)\s*([KMGT]?)B?\s*$", re.IGNORECASE)
_SIZE_UNITS = {"": 1, "K": 2**10, "M": 2**20, "G": 2**30, "T": 2**40}


class Error(Exception):
    pass


def parse_size(value):
    """
    Byte sizes may be given as plain integers or as strings such as "8GB"
    or "512M"
    """
    if value is None or isinstance(value, int):
        return value

    match = _SIZE_RE.match(str(value))
    if not match:
        raise Error(f"Bad size: {value}")

    return int(match.group(1)) * _SIZE_UNITS[match.group(2).upper()]


def parse_capacity(value, page_size):
    """
    A capacity is a page count (int) or a byte size string ("512MB")
    """
    if value is None or isinstance(value, int):
        return value

    return parse_size(value) // page_size


def parse_override(item):
    """
    Parses a "section.key=value" flag into (["section", "key"], value);
    the value is read as a YAML scalar so numbers and booleans keep their type
    """
    if "=" not in item:
        raise Error(f"Bad override (expected key=value): {item}")

    key, raw = item.split("=", 1)
    path = [k for k in key.strip().split(".") if k]
    if not path:
        raise Error(f"Bad override key: {item}")

    return path, yaml.safe_load(raw)


def apply_override(dict_, path, value):
    node = dict_
    for key in path[:-1]:
        if node.get(key) is None:
            node[key] = {}
        node = node[key]

    node[path[-1]] = value

import functools
import math
from enum import Enum, IntEnum


@functools.singledispatch
def dump(obj):
    assert False, f'No dumper for {type(obj)}'


@dump.register(list)
@dump.register(tuple)
def _(l):
    return [dump(e) for e in l]


@dump.register(str)
@dump.register(int)
@dump.register(bool)
@dump.register(type(None))
def _(x):
    return x


@dump.register(float)
def _(x):
    # JSON has no infinities
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dump.register(Enum)
@dump.register(IntEnum)
def _(e):
    return e.to_str()


@dump.register(dict)
def _(dict_):
    return {str(k): dump(v) for k, v in dict_.items()}

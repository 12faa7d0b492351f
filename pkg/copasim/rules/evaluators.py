import os
import logging

from ..descriptor import DescriptorType


def is_present(dict_, key):
    return key in dict_ and dict_[key] is not None


def has_value(dict_, key, value):
    return is_present(dict_, key) and dict_[key] == value


def is_int(val):
    return isinstance(val, int) and not isinstance(val, bool)


def is_number(val):
    return isinstance(val, (int, float)) and not isinstance(val, bool)


def is_positive_number(val):
    return is_number(val) and val > 0


def is_non_negative_number(val):
    return is_number(val) and val >= 0


def is_positive_int(val):
    return is_int(val) and val >= 1


def is_probability(val):
    return is_number(val) and 0 <= val <= 1


def is_one_of(val, choices):
    return isinstance(val, str) and val.lower() in choices


def is_size(val):
    """
    Byte sizes are either ints or strings like "512MB" (see loaders.parse_size)
    """
    return is_positive_int(val) or isinstance(val, str)


def is_str(val):
    return isinstance(val, str)


def is_bool(val):
    return isinstance(val, bool)


def is_dict(val):
    return isinstance(val, dict)


def is_int_at_least(val, minimum):
    return is_int(val) and val >= minimum


def is_name_or_index(val):
    return is_str(val) or is_int(val)


def optional(dict_, key, check, *args):
    """
    True if `key` is absent or its value passes `check(value, *args)`
    """
    return not is_present(dict_, key) or check(dict_[key], *args)


def authorized_keys(dict_, keys):
    for key in dict_:
        if key not in keys:
            return False

    return True


# file: relative path of the file from the "rules" directory
# e.g., to load the rules of copa.yaml under the schemes folder:
#       file == "schemes/copa.yaml"
def load_rules(file):
    try:
        path = os.path.join(os.path.dirname(__file__), file)
        data = DescriptorType.YAML.load(path)
        return data if data is not None else {}
    except Exception as e:
        logging.warning(f"Something went wrong during load of {file}")
        logging.debug(e)
        return {}

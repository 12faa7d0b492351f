import copy
import logging
import os

from .buffers import Buffer
from .buffers import buffer_rules, buffer_funcs
from .schemes import Scheme
from .schemes import scheme_rules, scheme_funcs
from .trace import TraceSource
from .ledger import IdleLedger
from .reliability import FailureParams
from .metrics import LatencyModel
from .dumpers import dump
from .descriptor import DescriptorType
from .loaders import apply_override, parse_override
from .rules import evaluators
from . import buffers, glob, loaders, metrics, reliability, trace

# value errors raised while building the run objects
VALUE_ERRORS = (buffers.base.Error, glob.Error, loaders.Error, metrics.Error,
                reliability.Error, trace.Error)


class Error(Exception):
    pass


class OutputConfig:
    def __init__(self, dir_, report, ledger):
        """
        ### Attributes ###
        dir_ (str): output directory (None: COPASIM_OUTPUT_DIR, then default)
        report (str): report file name, relative to the output directory
        ledger (str): ledger file prefix (None: ledger not exported)
        """
        self.dir = dir_
        self.report = report
        self.ledger = ledger

    @staticmethod
    def load(output_dict, name):
        output_dict = output_dict or {}
        return OutputConfig(output_dict.get('dir'),
                            output_dict.get('report') or f"{name}.json",
                            output_dict.get('ledger'))

    def dump(self):
        return {
            "dir": self.dir,
            "report": self.report,
            "ledger": self.ledger
        }

    def resolve_dir(self):
        return glob.get_output_dir(self.dir)


class RunConfig:
    def __init__(self):
        self.name = None
        self.trace = None
        self.buffer_dict = None
        self.scheme_dict = None
        self.failure = None
        self.latency = None
        self.output = None
        self.seed = 0
        self.output_type = DescriptorType.JSON

    @property
    def mode(self):
        return glob.BufferMode.from_str(self.buffer_dict.get('mode', "nvb"))

    def new_buffer(self, ledger=None):
        ledger = ledger if ledger is not None else IdleLedger()
        return buffer_funcs[self.mode.to_str()](self.buffer_dict, ledger)

    def new_scheme(self):
        return scheme_funcs[self.scheme_dict['type'].lower()](self.scheme_dict)


def load(file_name, overrides=None):
    """
    ### Description ###
    Loads and validates a run descriptor (JSON or YAML)

    ### Parameters ###
    file_name (str): path of the descriptor
    overrides (list): "section.key=value" strings applied before validation

    ### Returns ###
    `RunConfig`
    """
    contents, input_type = DescriptorType.load_any(file_name)
    if not isinstance(contents, dict):
        raise Error(f"{file_name}: a run descriptor must be a mapping")

    config = load_dict(contents, overrides)
    config.output_type = input_type

    return config


def load_dict(contents, overrides=None):
    contents = copy.deepcopy(contents)

    for item in overrides or []:
        path, value = parse_override(item)
        logging.debug(f"Override {'.'.join(path)} = {value!r}")
        apply_override(contents, path, value)

    evaluate_rules(os.path.join("default", "run.yaml"), contents)

    try:
        return _load_run(contents)
    except VALUE_ERRORS as e:
        raise Error(str(e)) from e


def _load_run(contents):
    config = RunConfig()
    config.seed = contents.get('seed', 0)
    config.trace = _load_trace(contents['trace'], config.seed)
    config.buffer_dict = _load_buffer(contents.get('buffer') or {})
    config.scheme_dict = _load_scheme(contents.get('scheme') or
                                      {"type": "no_pdflush"})
    config.failure = _load_failure(contents.get('failure') or {})
    config.latency = _load_latency(contents.get('latency') or {})

    # builds both objects once: catches value errors and checks the pairing
    buffer = config.new_buffer()
    scheme = config.new_scheme()
    if buffer.__class__ not in scheme.get_supported_buffers():
        raise Error(f"Scheme {scheme.name} ({scheme.type}) is not supported "
                    f"in {buffer.mode.to_str()} mode")

    config.name = contents.get('name') or f"{config.trace.name}-{scheme.name}"
    output_dict = contents.get('output') or {}
    evaluate_rules(os.path.join("default", "output.yaml"), output_dict)
    config.output = OutputConfig.load(output_dict, config.name)

    return config


def _load_trace(trace_dict, seed):
    evaluate_rules(os.path.join("default", "trace.yaml"), trace_dict)
    if 'synthetic' in trace_dict:
        evaluate_rules(os.path.join("default", "synthetic.yaml"),
                       trace_dict['synthetic'])

    return TraceSource.load(trace_dict, seed)


def _load_buffer(buffer_dict):
    # Basic rules common to all buffers
    evaluate_rules(os.path.join("default", "buffer.yaml"), buffer_dict)
    # Specific rules for a specific buffer mode
    evaluate_rules(os.path.join(
        "buffers", buffer_rules[buffer_dict.get('mode', "nvb").lower()]),
        buffer_dict)

    return buffer_dict


def _load_scheme(scheme_dict):
    # Basic rules common to all schemes
    evaluate_rules(os.path.join("default", "scheme.yaml"), scheme_dict)
    # Specific rules for a specific scheme type
    evaluate_rules(os.path.join(
        "schemes", scheme_rules[scheme_dict['type'].lower()]), scheme_dict)

    return scheme_dict


def _load_failure(failure_dict):
    evaluate_rules(os.path.join("default", "failure.yaml"), failure_dict)
    if failure_dict.get('physical') is not None:
        evaluate_rules(os.path.join("default", "physical.yaml"),
                       failure_dict['physical'])

    params = FailureParams.load(failure_dict)
    # surfaces a degenerate write-error model now rather than after the run
    params.write_error_probability()

    return params


def _load_latency(latency_dict):
    evaluate_rules(os.path.join("default", "latency.yaml"), latency_dict)
    return LatencyModel.load(latency_dict)


def evaluate_rules(rules_file, dict_):
    rules = evaluators.load_rules(rules_file)
    scope = dict(vars(evaluators), dict_=dict_)

    ok = True

    for r in rules:
        try:
            result = eval(rules[r], scope)
        except Exception:
            result = False

        if not result:
            logging.error(f"{rules_file} - Broken rule: {r}")
            ok = False

    if not ok:
        raise Error("Bad run descriptor")


def dump_config(config, file_name):
    config.output_type.dump(file_name, dump(config))


@dump.register(RunConfig)
def _(config):
    return {
        'name': config.name,
        'seed': config.seed,
        'trace': config.trace.dump(),
        'buffer': dump(config.new_buffer()),
        'scheme': dump(config.new_scheme()),
        'failure': config.failure.dump(),
        'latency': config.latency.dump(),
        'output': config.output.dump()
    }


@dump.register(Buffer)
def _(buffer):
    return buffer.dump()


@dump.register(Scheme)
def _(scheme):
    return scheme.dump()

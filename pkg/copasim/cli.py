import argparse
import logging
import os
import sys

from . import config
from . import grid
from . import ledger
from . import reliability
from . import simulator
from . import tools
from . import trace
from .descriptor import DescriptorType
from .dumpers import dump

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_INTERNAL = 3

IO_ERRORS = (OSError, trace.Error, ledger.Error)


class Error(Exception):
    pass


def _setup_logging(args):
    if args.debug:
        level = logging.DEBUG
    elif args.verbose:
        level = logging.INFO
    else:
        level = logging.WARNING

    logging.basicConfig(format='%(levelname)s: %(message)s', level=level)


def _add_overrides(parser):
    parser.add_argument(
        '--set',
        help='Override a descriptor value, e.g. --set buffer.dram_pages=1024',
        action='append',
        default=[],
        metavar='SECTION.KEY=VALUE')


def _parse_args(args):
    parser = argparse.ArgumentParser(
        description='Trace-driven simulator of NVM-backed I/O buffers')

    parser.add_argument(
        '--verbose',
        help='Verbose output',
        action='store_true')
    parser.add_argument(
        '--debug',
        help='Debug output',
        action='store_true')

    subparsers = parser.add_subparsers(dest='command')
    # Workaround a Python bug. See http://bugs.python.org/issue9253#msg186387
    subparsers.required = True

    # run
    run_parser = subparsers.add_parser(
        'run',
        help='Simulate one run descriptor')
    run_parser.set_defaults(command_handler=_handle_run)
    run_parser.add_argument(
        'config',
        help='Run descriptor (JSON or YAML)')
    _add_overrides(run_parser)
    run_parser.add_argument(
        '--scheme',
        help='Scheme type, replacing the descriptor scheme section',
        choices=['no_pdflush', 'baseline', 'conv', 'copa'],
        default=None)
    run_parser.add_argument(
        '--timestep',
        help='CoPA time-step T in seconds',
        type=float,
        default=None)
    run_parser.add_argument(
        '--max-accesses',
        help='Truncate the trace after this many page accesses',
        type=int,
        default=None)
    run_parser.add_argument(
        '--serialize-refresh',
        help='Charge refresh work to the request timeline',
        action='store_true')
    run_parser.add_argument(
        '--abort-on-parse-error',
        help='Fail on the first malformed trace line instead of skipping it',
        action='store_true')
    run_parser.add_argument(
        '--out-dir',
        help='Output directory (default: $COPASIM_OUTPUT_DIR or ./results)',
        default=None)
    run_parser.add_argument(
        '--result',
        help='File to write the effective configuration to',
        default=None)
    run_parser.add_argument(
        '--check-invariants',
        help='Assert buffer and scheme invariants after every event',
        action='store_true')

    # grid
    grid_parser = subparsers.add_parser(
        'grid',
        help='Run every trace x scheme cell of a grid descriptor')
    grid_parser.set_defaults(command_handler=_handle_grid)
    grid_parser.add_argument(
        'config',
        help='Grid descriptor (JSON or YAML)')
    _add_overrides(grid_parser)
    grid_parser.add_argument(
        '--jobs',
        help='Worker processes (1 runs the cells in-process)',
        type=int,
        default=1)
    grid_parser.add_argument(
        '--out-dir',
        help='Output directory (default: $COPASIM_OUTPUT_DIR or ./results)',
        default=None)

    # calc
    calc_parser = subparsers.add_parser(
        'calc',
        help='Evaluate the failure model on an exported ledger')
    calc_parser.set_defaults(command_handler=_handle_calc)
    calc_parser.add_argument(
        'intervals',
        help='Ledger intervals CSV (page_id,interval_start_s,interval_end_s)')
    calc_parser.add_argument(
        '--writes',
        help='Ledger write counts CSV (page_id,write_count,refresh_count)',
        default=None)
    calc_parser.add_argument(
        '--failure',
        help='Descriptor holding failure parameters (JSON or YAML)',
        default=None)
    calc_parser.add_argument(
        '--delta',
        help='Thermal stability factor',
        type=float,
        default=None)
    calc_parser.add_argument(
        '--k',
        help='Bits per SEC-DED word',
        type=int,
        default=None)
    calc_parser.add_argument(
        '--words',
        help='Words per page',
        type=int,
        default=None)
    calc_parser.add_argument(
        '--p-wf-cell',
        help='Per-cell write error probability',
        type=float,
        default=None)

    # synth
    synth_parser = subparsers.add_parser(
        'synth',
        help='Generate a synthetic trace in MSRC format')
    synth_parser.set_defaults(command_handler=_handle_synth)
    synth_parser.add_argument(
        'out',
        help='Output trace file')
    synth_parser.add_argument(
        '--count',
        help='Number of page accesses',
        type=int,
        required=True)
    synth_parser.add_argument(
        '--pages',
        help='Number of distinct pages',
        type=int,
        required=True)
    synth_parser.add_argument(
        '--pattern',
        help='Access pattern',
        choices=['sequential', 'uniform', 'zipf'],
        default='uniform')
    synth_parser.add_argument(
        '--theta',
        help='zipf exponent',
        type=float,
        default=None)
    synth_parser.add_argument(
        '--write-fraction',
        help='Probability that an access is a write',
        type=float,
        default=0.5)
    synth_parser.add_argument(
        '--inter-arrival',
        help='Gap between accesses in seconds (mean for exponential)',
        type=float,
        default=0.01)
    synth_parser.add_argument(
        '--arrival',
        help='Inter-arrival law',
        choices=['fixed', 'exponential'],
        default='fixed')
    synth_parser.add_argument(
        '--seed',
        help='RNG seed',
        type=int,
        default=0)
    synth_parser.add_argument(
        '--page-size',
        help='Page size in bytes',
        type=int,
        default=4096)

    return parser.parse_args(args)


def _run_overrides(args):
    overrides = list(args.set)

    if args.scheme is not None:
        overrides.append(f"scheme={{type: {args.scheme}}}")
    if args.timestep is not None:
        overrides.append(f"scheme.timestep_s={args.timestep!r}")
    if args.max_accesses is not None:
        overrides.append(f"trace.max_accesses={args.max_accesses}")
    if args.serialize_refresh:
        overrides.append("latency.serialize_refresh=true")
    if args.abort_on_parse_error:
        overrides.append("trace.abort_on_parse_error=true")

    return overrides


def _handle_run(args):
    logging.info('Running %s', args.config)

    conf = config.load(args.config, _run_overrides(args))
    sim = simulator.Simulation(conf, args.check_invariants)
    sim.run()

    report_path = simulator.write_outputs(sim, args.out_dir)
    print(report_path)

    if args.result:
        logging.info('Writing effective configuration to %s', args.result)
        config.dump_config(conf, args.result)


def _handle_grid(args):
    logging.info('Running grid %s', args.config)

    if args.jobs < 1:
        raise Error(f"--jobs must be >= 1, got {args.jobs}")

    cells = grid.cmd_grid(args.config, args.out_dir, args.jobs, args.set)
    print(f"{len(cells)} cells done")


def _failure_params(args):
    failure_dict = {}

    if args.failure:
        contents, _ = DescriptorType.load_any(args.failure)
        # either a run descriptor or a bare failure section
        if 'trace' in contents:
            contents = contents.get('failure')
        failure_dict = dict(contents or {})

    flags = {"delta": args.delta, "k": args.k, "words": args.words,
             "p_wf_cell": args.p_wf_cell}
    failure_dict.update({k: v for k, v in flags.items() if v is not None})

    config.evaluate_rules(os.path.join("default", "failure.yaml"),
                          failure_dict)
    return reliability.FailureParams.load(failure_dict)


def cmd_calc(intervals_csv, writes_csv, params):
    """
    ### Description ###
    Failure model of an exported ledger, per page and for the whole PJA

    ### Parameters ###
    intervals_csv (str): ledger intervals file
    writes_csv (str): ledger write counts file, or None
    params (FailureParams): failure model parameters

    ### Returns ###
    `FailureSummary`
    """
    idle_ledger = ledger.IdleLedger.import_csv(intervals_csv, writes_csv)
    return reliability.aggregate_pja_failure(idle_ledger, params,
                                             per_page=True)


def _handle_calc(args):
    params = _failure_params(args)
    summary = cmd_calc(args.intervals, args.writes, params)

    print(DescriptorType.JSON.dumps(dump({
        "params": params.dump(),
        "summary": summary.dump()
    })), end="")


def cmd_synth(spec, out_path, page_size=4096):
    """
    Writes the accesses of a synthetic trace as MSRC records; returns the
    number of records written
    """
    return trace.write_msrc(trace.generate_synthetic(spec), out_path,
                            page_size)


def _handle_synth(args):
    spec = trace.TraceSpec(args.count, args.pages,
                           trace.Pattern.from_str(args.pattern), args.theta,
                           args.write_fraction, args.inter_arrival,
                           args.arrival, args.seed)
    try:
        spec.validate()
    except trace.Error as e:
        raise config.Error(str(e)) from e
    if not tools.is_power_of_two(args.page_size):
        raise config.Error(f"Page size must be a power of two, got "
                           f"{args.page_size}")

    count = cmd_synth(spec, args.out, args.page_size)
    logging.info(f"Wrote {count} accesses to {args.out}")


def _exit_code(e):
    if isinstance(e, grid.GridError):
        return _exit_code(e.failed[0].error)
    if isinstance(e, AssertionError):
        return EXIT_INTERNAL
    if isinstance(e, IO_ERRORS):
        return EXIT_IO

    return EXIT_CONFIG


def main(raw_args=None):
    args = _parse_args(raw_args)
    _setup_logging(args)

    try:
        args.command_handler(args)
    except Exception as e:
        if args.debug:
            raise

        if isinstance(e, AssertionError):
            logging.error(f"Internal invariant violated: {e}")
        else:
            logging.error(e)

        sys.exit(_exit_code(e))

    return EXIT_OK

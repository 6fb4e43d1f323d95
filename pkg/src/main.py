import argparse
import logging
import math
import sys
from typing import List, Optional

from src.cli.commands import COMMANDS, DomainViolation, UsageError
from src.cli.records import RunRecord
from src.cli.units import parse_amplitudes, parse_angle, parse_field, parse_time
from src.config import settings
from src.protocol.schmidt import SynthesisFailed

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_SYNTHESIS = 4

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper, default=None,
                        help="Log level (default from SPINPREP_LOG_LEVEL)")
    common.add_argument("--constants", default=None, help="Constants registry JSON file")
    common.add_argument("--json", action="store_true", help="Print the run record as JSON")
    common.add_argument("--workers", type=int, default=settings.workers, help="Worker processes for sweeps")

    donor = argparse.ArgumentParser(add_help=False)
    donor.add_argument("--preset", choices=["P31"], default="P31", help="Donor preset")
    donor.add_argument("--gamma-e", type=float, default=None, help="Override gamma_e (s^-1 T^-1)")
    donor.add_argument("--gamma-n", type=float, default=None, help="Override gamma_n (s^-1 T^-1)")
    donor.add_argument("--hyperfine", type=float, default=None, help="Override the hyperfine A (s^-1)")

    parser = argparse.ArgumentParser(prog="spinprep", description="Two-qubit spin state preparation toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)

    prep = subparsers.add_parser("prepare", parents=[common], help="Run the two-step protocol")
    prep.add_argument("--A", type=float, default=None, help="Coupling A (s^-1)")
    prep.add_argument("--t1", type=parse_time, default=0.0, help="Free-evolution time (s, or with ns/us/ms)")
    for index in (1, 2):
        prep.add_argument(f"--chi{index}", type=parse_angle, default=0.0, help=f"Pulse area on spin {index} (rad)")
        prep.add_argument(f"--theta{index}", type=parse_angle, default=0.0, help=f"Polar angle of pulse {index}")
        prep.add_argument(f"--phi{index}", type=parse_angle, default=0.0, help=f"Azimuth of pulse {index}")
    prep.add_argument("--plan-file", default=None, help="JSON plan file instead of flags")

    synth = subparsers.add_parser("synthesize", parents=[common], help="Find a plan for a target state")
    synth.add_argument("--A", type=float, required=True, help="Coupling A (s^-1)")
    target = synth.add_mutually_exclusive_group(required=True)
    target.add_argument("--target", type=parse_amplitudes, help="Four amplitudes, e.g. '0,0.7071,0.7071,0'")
    target.add_argument("--target-file", help="File holding four complex amplitudes")
    target.add_argument("--target-state", help="Named state: T0, T+, T-, singlet, uu, ud, du, dd")
    target.add_argument("--random", type=int, help="Number of Haar-random targets")
    synth.add_argument("--seed", type=int, default=0, help="Seed for --random")
    synth.add_argument("--plan-out", default=None, help="Write the plan as JSON (single target)")
    synth.add_argument("--output", default=None, help="CSV file for batch results")

    ent = subparsers.add_parser("entangle", parents=[common, donor], help="Solve the entangling field and time")
    ent.add_argument("--chi", type=parse_angle, default=0.0, help="Target relative phase (rad)")
    ent.add_argument("--branch", type=int, default=0, help="Later-time solution index")
    ent.add_argument("--Bz", type=parse_field, default=None, help="Check this field (T or mT) instead of solving")
    ent.add_argument("--t", type=parse_time, default=None, help="Check this time (s or ns) instead of solving")
    ent.add_argument("--chi-min", type=parse_angle, default=0.0, help="Sweep start")
    ent.add_argument("--chi-max", type=parse_angle, default=math.pi, help="Sweep end")
    ent.add_argument("--steps", type=int, default=None, help="Sweep over this many chi values")
    ent.add_argument("--output", default=None, help="CSV file for sweep results")

    curve = subparsers.add_parser("fidelity-curve", parents=[common, donor], help="Write the gate fidelity curve")
    curve.add_argument("--t-max", type=parse_time, default=None, help="Range end (default from settings)")
    curve.add_argument("--n", type=int, default=None, help="Number of samples (default from settings)")
    curve.add_argument("--output", default="fidelity_curve.txt", help="Curve file")
    curve.add_argument("--trace", action="store_true", help="Add the trace-formula column and its deviation")

    spec = subparsers.add_parser("spectrum", parents=[common, donor], help="Levels and eigenvectors in a field")
    spec.add_argument("--B", type=parse_field, default=0.0, help="Field magnitude (T or mT)")
    spec.add_argument("--theta", type=parse_angle, default=0.0, help="Field polar angle")
    spec.add_argument("--phi", type=parse_angle, default=0.0, help="Field azimuth")
    spec.add_argument("--B-min", type=parse_field, default=0.0, help="Sweep start")
    spec.add_argument("--B-max", type=parse_field, default=1.0, help="Sweep end")
    spec.add_argument("--steps", type=int, default=None, help="Sweep over this many fields")
    spec.add_argument("--log-grid", action="store_true", help="Logarithmic field grid")
    spec.add_argument("--output", default=None, help="CSV file for sweep results")
    return parser


def _print_record(record: RunRecord, as_json: bool) -> None:
    if as_json:
        print(record.to_json())
    else:
        print(record.to_text(), end="")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.basicConfig(level=args.log_level or settings.log_level,
                        format='%(asctime)s - %(levelname)s - %(message)s')

    try:
        record = COMMANDS[args.command](args)
    except UsageError as e:
        logger.error(f"Usage error in {args.command}: {e}")
        print(f"spinprep {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DomainViolation as e:
        _print_record(e.record, args.json)
        logger.error(f"{args.command}: {e}")
        return EXIT_DOMAIN
    except SynthesisFailed as e:
        logger.error(f"Synthesis failed: {e} (residual fidelity {e.residual_fidelity:.12f})")
        print(f"spinprep synthesize: {e}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except (ValueError, ArithmeticError) as e:
        logger.exception(f"Numerical error in {args.command}: {e}")
        return EXIT_DOMAIN

    _print_record(record, args.json)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

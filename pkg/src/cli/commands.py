"""
Subcommand implementations. Each ``cmd_*`` takes parsed arguments and returns a RunRecord;
every residual in a record is recomputed from the command's outputs.
"""

import argparse
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.cli.records import RunRecord
from src.cli.units import parse_amplitudes
from src.data.registry import ConstantsRegistry, load_registry
from src.donor.entangler import EntanglerSpec, concurrence, solve_entangler, verify_entangling_conditions
from src.donor.fidelity import entangling_point, fidelity_analytic, fidelity_curve
from src.donor.system import DonorParams, FieldConfig, hamiltonian_full, spectrum
from src.execution.executor import SweepExecutor
from src.linalg.qmath import dagger, identity
from src.protocol.heisenberg import (
    PreparationPlan,
    PulseParams,
    TwoQubitState,
    basis_state,
    haar_random_state,
    prepare,
    singlet_state,
    triplet_states,
)
from src.protocol.schmidt import decompose, fidelity_states, synthesize, synthesize_batch

logger = logging.getLogger(__name__)

TARGET_NORM_TOLERANCE = 1e-6
BASIS_LABELS = ("uu", "ud", "du", "dd")


class UsageError(Exception):
    """Invalid command-line input found after argument parsing."""


class DomainViolation(Exception):
    """A command finished but its result violates a numerical domain condition."""

    def __init__(self, message: str, record: RunRecord):
        super().__init__(message)
        self.record = record


@contextmanager
def invalid_input():
    """Turns validation errors raised while building inputs into usage errors."""
    try:
        yield
    except (ValueError, KeyError, OSError, argparse.ArgumentTypeError) as e:
        raise UsageError(str(e)) from e


class PulseModel(BaseModel):
    chi: float = 0.0
    theta: float = 0.0
    phi: float = 0.0


class PlanModel(BaseModel):
    """JSON layout of a plan file."""
    A: float
    t1: float
    pulse1: PulseModel = PulseModel()
    pulse2: PulseModel = PulseModel()

    def to_plan(self) -> PreparationPlan:
        return PreparationPlan(coupling_A=self.A, t1=self.t1,
                               pulse1=PulseParams(**self.pulse1.dict()),
                               pulse2=PulseParams(**self.pulse2.dict()))

    @classmethod
    def from_plan(cls, plan: PreparationPlan) -> "PlanModel":
        return cls(A=plan.coupling_A, t1=plan.t1,
                   pulse1=PulseModel(chi=plan.pulse1.chi, theta=plan.pulse1.theta, phi=plan.pulse1.phi),
                   pulse2=PulseModel(chi=plan.pulse2.chi, theta=plan.pulse2.theta, phi=plan.pulse2.phi))


def _load_donor(args) -> Tuple[DonorParams, ConstantsRegistry]:
    with invalid_input():
        registry = load_registry(args.constants)
        base = DonorParams.phosphorus(registry)
        d = DonorParams(
            gamma_e=base.gamma_e if args.gamma_e is None else args.gamma_e,
            gamma_n=base.gamma_n if args.gamma_n is None else args.gamma_n,
            hyperfine_A=base.hyperfine_A if args.hyperfine is None else args.hyperfine,
        )
    return d, registry


def _record_donor(record: RunRecord, d: DonorParams) -> None:
    record.put("inputs", "gamma_e", d.gamma_e, "s^-1 T^-1")
    record.put("inputs", "gamma_n", d.gamma_n, "s^-1 T^-1")
    record.put("inputs", "A", d.hyperfine_A, "s^-1")


def _record_plan(record: RunRecord, section: str, plan: PreparationPlan) -> None:
    record.put(section, "t1", plan.t1, "s")
    for index, pulse in ((1, plan.pulse1), (2, plan.pulse2)):
        record.put(section, f"chi{index}", pulse.chi, "rad")
        record.put(section, f"theta{index}", pulse.theta, "rad")
        record.put(section, f"phi{index}", pulse.phi, "rad")


def _record_state(record: RunRecord, prefix: str, state: TwoQubitState, section: str = "outputs") -> None:
    for label, amplitude in zip(BASIS_LABELS, state.amplitudes):
        record.put_complex(section, f"{prefix}.{label}", amplitude)


def _emit_table(frame: pd.DataFrame, output: Optional[str]) -> None:
    if output:
        with invalid_input():
            frame.to_csv(output, index=False, float_format="%.17g")
        logger.info(f"Wrote {len(frame)} rows to {output}")
    else:
        print(frame.to_csv(index=False, float_format="%.17g"), end="")


def cmd_prepare(args) -> RunRecord:
    with invalid_input():
        if args.plan_file:
            plan = PlanModel.parse_file(args.plan_file).to_plan()
        elif args.A is None:
            raise ValueError("prepare needs --A (or --plan-file)")
        else:
            plan = PreparationPlan(
                coupling_A=args.A,
                t1=args.t1,
                pulse1=PulseParams(chi=args.chi1, theta=args.theta1, phi=args.phi1),
                pulse2=PulseParams(chi=args.chi2, theta=args.theta2, phi=args.phi2),
            )

    state = prepare(plan)
    form = decompose(state)
    rebuilt = form.reconstruct()

    record = RunRecord(command="prepare")
    record.put("inputs", "A", plan.coupling_A, "s^-1")
    _record_plan(record, "inputs", plan)
    _record_state(record, "psi", state)
    record.put("outputs", "c1", form.c1, "dimensionless")
    record.put("outputs", "c2", form.c2, "dimensionless")
    for name in ("alpha1", "alpha2", "beta1", "beta2"):
        vector = getattr(form, name)
        record.put_complex("outputs", f"{name}.u", vector[0])
        record.put_complex("outputs", f"{name}.d", vector[1])
    record.put("outputs", "concurrence", concurrence(state), "dimensionless")
    record.put("residuals", "norm", abs(state.norm() - 1.0), "dimensionless")
    record.put("residuals", "schmidt_normalization", abs(form.c1 ** 2 + form.c2 ** 2 - 1.0), "dimensionless")
    record.put("residuals", "schmidt_reconstruction",
               float(np.max(np.abs(rebuilt.amplitudes - state.amplitudes))), "dimensionless")
    return record


def _named_target(name: str) -> TwoQubitState:
    t_plus, t_minus, t0 = triplet_states()
    named = {"T0": t0, "T+": t_plus, "T-": t_minus, "singlet": singlet_state()}
    named.update({label: basis_state(i) for i, label in enumerate(BASIS_LABELS)})
    if name not in named:
        raise ValueError(f"Unknown target state {name!r}. Use one of {sorted(named)}")
    return named[name]


def _read_targets(args) -> List[TwoQubitState]:
    with invalid_input():
        if args.random is not None:
            if args.random < 1:
                raise ValueError("--random needs a positive count")
            rng = np.random.default_rng(args.seed)
            return [haar_random_state(rng) for _ in range(args.random)]
        if args.target_state is not None:
            return [_named_target(args.target_state)]
        if args.target_file is not None:
            values = parse_amplitudes(Path(args.target_file).read_text())
        else:
            values = args.target
        return [TwoQubitState.from_amplitudes(values, normalize=True, tolerance=TARGET_NORM_TOLERANCE)]


def _write_plan(path: str, plan: PreparationPlan) -> None:
    with invalid_input():
        Path(path).write_text(PlanModel.from_plan(plan).json(indent=2))
    logger.info(f"Wrote plan to {path}")


def cmd_synthesize(args) -> RunRecord:
    targets = _read_targets(args)
    record = RunRecord(command="synthesize")
    record.put("inputs", "A", args.A, "s^-1")

    if len(targets) == 1:
        target = targets[0]
        result = synthesize(target, args.A)
        achieved = prepare(result.plan)
        _record_state(record, "target", target, section="inputs")
        _record_plan(record, "outputs", result.plan)
        record.put("outputs", "global_phase", result.global_phase, "rad")
        record.put("outputs", "refined", float(result.refined), "dimensionless")
        fidelity = fidelity_states(target, achieved)
        record.put("residuals", "fidelity", fidelity, "dimensionless")
        record.put("residuals", "infidelity", 1.0 - fidelity, "dimensionless")
        if args.plan_out:
            _write_plan(args.plan_out, result.plan)
        return record

    results = synthesize_batch(targets, args.A, workers=args.workers)
    rows = []
    for index, (target, result) in enumerate(zip(targets, results)):
        plan = result.plan
        rows.append({
            "index": index,
            "t1_s": plan.t1,
            "chi1": plan.pulse1.chi, "theta1": plan.pulse1.theta, "phi1": plan.pulse1.phi,
            "chi2": plan.pulse2.chi, "theta2": plan.pulse2.theta, "phi2": plan.pulse2.phi,
            "global_phase": result.global_phase,
            "fidelity": fidelity_states(target, prepare(plan)),
        })
    frame = pd.DataFrame(rows)
    _emit_table(frame, args.output)
    record.put("inputs", "count", len(targets), "dimensionless")
    record.put("outputs", "refined_count", float(sum(r.refined for r in results)), "dimensionless")
    record.put("residuals", "min_fidelity", float(frame["fidelity"].min()), "dimensionless")
    return record


def _entangle_row(job: Tuple[DonorParams, float, int]) -> Dict[str, float]:
    d, chi, branch = job
    spec = solve_entangler(d, chi, branch)
    report = verify_entangling_conditions(d, spec)
    return {
        "chi": chi,
        "Bz_T": spec.Bz,
        "t_s": spec.t,
        "achieved_chi": report.achieved_chi,
        "concurrence": report.concurrence,
        "fidelity_achieved": report.fidelity_achieved,
        "cot_residual": np.nan if report.cot_residual is None else report.cot_residual,
        "tan_residual": report.tan_residual,
        "conditions_ok": report.conditions_ok,
    }


def cmd_entangle(args) -> RunRecord:
    d, registry = _load_donor(args)
    record = RunRecord(command="entangle", constants_version=registry.version)
    _record_donor(record, d)

    if args.steps is not None:
        with invalid_input():
            if args.steps < 1:
                raise ValueError("--steps must be positive")
            chis = np.linspace(args.chi_min, args.chi_max, args.steps)
        rows = SweepExecutor(workers=args.workers).map(_entangle_row, [(d, float(c), args.branch) for c in chis])
        frame = pd.DataFrame(rows)
        _emit_table(frame, args.output)
        record.put("inputs", "chi_min", args.chi_min, "rad")
        record.put("inputs", "chi_max", args.chi_max, "rad")
        record.put("outputs", "points", len(frame), "dimensionless")
        record.put("outputs", "min_concurrence", float(frame["concurrence"].min()), "dimensionless")
        record.put("residuals", "max_tan_residual", float(frame["tan_residual"].max()), "dimensionless")
        if not frame["conditions_ok"].all():
            raise DomainViolation(f"{int((~frame['conditions_ok']).sum())} sweep points violate the entangling conditions", record)
        return record

    if (args.Bz is None) != (args.t is None):
        raise UsageError("--Bz and --t must be given together")
    if args.Bz is None:
        spec = solve_entangler(d, args.chi, args.branch)
    else:
        with invalid_input():
            if args.t < 0:
                raise ValueError(f"Evolution time must be >= 0, got {args.t}")
        spec = EntanglerSpec(chi=args.chi, Bz=args.Bz, t=args.t)
    report = verify_entangling_conditions(d, spec)

    record.put("inputs", "chi", args.chi, "rad")
    record.put("outputs", "Bz", spec.Bz, "T")
    record.put("outputs", "Bz_mT", spec.Bz * 1e3, "mT")
    record.put("outputs", "t", spec.t, "s")
    record.put("outputs", "t_ns", spec.t * 1e9, "ns")
    record.put("outputs", "achieved_chi", report.achieved_chi, "rad")
    record.put("outputs", "concurrence", report.concurrence, "dimensionless")
    record.put("outputs", "fidelity_requested", report.fidelity_requested, "dimensionless")
    record.put("outputs", "fidelity_achieved", report.fidelity_achieved, "dimensionless")
    if any(c.name == "T2_electron" for c in registry.constants):
        record.put("outputs", "t_over_T2", spec.t / registry.get("T2_electron"), "dimensionless")
    if report.cot_residual is not None:
        record.put("residuals", "cot_condition", report.cot_residual, "dimensionless")
    record.put("residuals", "tan_condition", report.tan_residual, "dimensionless")

    if not report.domain_ok:
        raise DomainViolation("Omega^2 < 2 omega_-^2: the entangling conditions have no real solution", record)
    if not report.conditions_ok:
        raise DomainViolation("The entangling conditions are not met at this field and time", record)
    return record


def cmd_fidelity_curve(args) -> RunRecord:
    d, registry = _load_donor(args)
    with invalid_input():
        curve = fidelity_curve(d, args.t_max, args.n, with_trace=args.trace)
    peak_t, peak_f = curve.peak(refine=True)
    bz_star, t_star = entangling_point(d)

    frame = curve.to_frame()
    columns = ["t_ns", "F"] + (["F_trace", "deviation"] if args.trace else [])
    output = Path(args.output)
    with invalid_input():
        with output.open("w") as fh:
            fh.write("# " + " ".join(columns) + "\n")
            frame[columns].to_csv(fh, sep=" ", header=False, index=False, float_format="%.17g")
    logger.info(f"Wrote fidelity curve ({len(frame)} points) to {output}")

    record = RunRecord(command="fidelity-curve", constants_version=registry.version)
    _record_donor(record, d)
    record.put("inputs", "t_max", float(curve.times[-1]), "s")
    record.put("inputs", "n", len(frame), "dimensionless")
    record.put("outputs", "peak_t", peak_t, "s")
    record.put("outputs", "peak_t_ns", peak_t * 1e9, "ns")
    record.put("outputs", "peak_F", peak_f, "dimensionless")
    record.put("outputs", "Bz_star", bz_star, "T")
    record.put("outputs", "t_star", t_star, "s")
    record.put("residuals", "F_at_t_star", abs(fidelity_analytic(d, t_star) - 1.0), "dimensionless")
    if args.trace:
        record.put("residuals", "max_trace_deviation", curve.max_deviation(), "dimensionless")

    sidecar = output.with_name(output.name + ".record.json")
    with invalid_input():
        sidecar.write_text(record.to_json())
    return record


def _spectrum_row(job: Tuple[DonorParams, FieldConfig]) -> Dict[str, float]:
    d, field = job
    levels = spectrum(d, field)
    row = {"B_T": field.B}
    row.update({f"E{k + 1}": e for k, e in enumerate(levels.energies)})
    row["eta"] = levels.eta
    row["gap_E2_E3"] = levels.energies[1] - levels.energies[2]
    row["residual"] = levels.residual(hamiltonian_full(d, field))
    return row


def cmd_spectrum(args) -> RunRecord:
    d, registry = _load_donor(args)
    record = RunRecord(command="spectrum", constants_version=registry.version)
    _record_donor(record, d)
    record.put("inputs", "theta", args.theta, "rad")
    record.put("inputs", "phi", args.phi, "rad")

    if args.steps is not None:
        with invalid_input():
            if args.steps < 1:
                raise ValueError("--steps must be positive")
            if args.log_grid:
                if args.B_min <= 0:
                    raise ValueError("A logarithmic grid needs --B-min > 0")
                fields = np.geomspace(args.B_min, args.B_max, args.steps)
            else:
                fields = np.linspace(args.B_min, args.B_max, args.steps)
            jobs = [(d, FieldConfig(B=float(b), theta=args.theta, phi=args.phi)) for b in fields]
        frame = pd.DataFrame(SweepExecutor(workers=args.workers).map(_spectrum_row, jobs))
        _emit_table(frame, args.output)
        record.put("outputs", "points", len(frame), "dimensionless")
        record.put("residuals", "max_eigen_residual", float(frame["residual"].max()), "s^-1")
        return record

    with invalid_input():
        field = FieldConfig(B=args.B, theta=args.theta, phi=args.phi)
    levels = spectrum(d, field)
    h = hamiltonian_full(d, field)
    record.put("inputs", "B", field.B, "T")
    for k, energy in enumerate(levels.energies, start=1):
        record.put("outputs", f"E{k}", energy, "s^-1")
    record.put("outputs", "eta", levels.eta, "rad")
    for k, vector in enumerate(levels.eigenvectors, start=1):
        _record_state(record, f"psi{k}", vector)

    basis = np.column_stack([v.amplitudes for v in levels.eigenvectors])
    record.put("residuals", "eigen", levels.residual(h), "s^-1")
    record.put("residuals", "orthonormality",
               float(np.max(np.abs(dagger(basis) @ basis - identity(4)))), "dimensionless")
    return record


COMMANDS = {
    "prepare": cmd_prepare,
    "synthesize": cmd_synthesize,
    "entangle": cmd_entangle,
    "fidelity-curve": cmd_fidelity_curve,
    "spectrum": cmd_spectrum,
}

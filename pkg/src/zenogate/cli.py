"""Command-line surface: single-point evaluation, sweeps and bound runs.

Subcommands
-----------
tau           closed-form tau at (n, lambda), or the continuum value
chain-verify  brute-force chain vs closed form over the test grid
gate          emit a gate table (raw / distilled / tau-gate) as JSON
gc            teleported-gate metrics at one operating point
optimize      optimal lambda for success or fidelity
sweep         CSV sweep over kappa, lambda or gamma
bounds        gamma_min / kappa_min against threshold curves

Numbers are serialized with 17 significant digits so CSV output
round-trips exactly; sweep rows are emitted in sweep order regardless of
--jobs.  Flags override values from an optional key=value config file.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (DEFAULT_DETECTOR, InfeasibleError, MismatchConfig,
                       build_gate_table, distillation_advantage_report,
                       error_rates, gamma_min_for_kappa, gc_point_metrics,
                       is_tolerable, kappa_min_at_perfect_matching, load_curve,
                       load_named_curve, optimize_lambda)
from .fock import (ChainConfig, run_zeno_chain, tau_closed_form,
                   tau_continuum, continuum_segments)
from .gates import DomainError, tau_gate_table
from .teleport import DetectorModel, TwoQubitState, simulate_gc_circuit, worst_case_search


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _parse_config_file(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def _apply_config_defaults(args: argparse.Namespace, parser: argparse.ArgumentParser):
    if not getattr(args, "config", None):
        return
    file_values = _parse_config_file(args.config)
    for key, raw in file_values.items():
        if not hasattr(args, key):
            continue
        # flags given on the command line take precedence
        if any(a.lstrip("-").replace("-", "_") == key for a in sys.argv[1:]):
            continue
        default = parser.get_default(key)
        if getattr(args, key) != default:
            continue
        current = getattr(args, key)
        caster = type(default) if default is not None else (
            type(current) if current is not None else str)
        if caster is bool:
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        else:
            setattr(args, key, caster(raw))


def _input_state(spec: str) -> TwoQubitState:
    named = {
        "equal": TwoQubitState.equal_superposition,
        "one-one": lambda: TwoQubitState.from_label("11"),
        "worst-f": TwoQubitState.equal_superposition,
        "worst-p": lambda: TwoQubitState.from_label("11"),
        "worst-f-nodistill": TwoQubitState.worst_fidelity_nodistill,
    }
    if spec in named:
        return named[spec]()
    parts = [float(x) for x in spec.split(",")]
    if len(parts) == 4:
        amps = np.array(parts, dtype=complex)
    elif len(parts) == 8:
        amps = np.array(parts[0::2]) + 1j * np.array(parts[1::2])
    else:
        raise SystemExit(
            "--input must be a name or 4 (real) / 8 (re,im) comma-separated values")
    return TwoQubitState(amps / np.linalg.norm(amps))


def _detector(args) -> DetectorModel:
    return DetectorModel(eta=args.eta, detections=4,
                         measurement_noise_fraction=args.measurement_noise)


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _resolve_lambda(args, mismatch, input_state, detector) -> float:
    if args.optimize_lambda:
        lam, _ = optimize_lambda(args.kappa, mismatch, "success", input_state,
                                 distillation=args.distill, detector=detector)
        return lam
    if args.lam is None:
        raise SystemExit("either --lambda or --optimize-lambda is required")
    return args.lam


# ---------------------------------------------------------------------------
# subcommands

def cmd_tau(args) -> int:
    if args.continuum:
        tau = tau_continuum(args.lam)
        n = continuum_segments(args.lam)
    else:
        n = args.n
        tau = tau_closed_form(n, args.lam)
    report = {"n": n, "lambda": args.lam, "tau": tau,
              "continuum": bool(args.continuum), "version": __version__}
    _write(args.out, json.dumps(report, indent=2) + "\n")
    return 0


def cmd_chain_verify(args) -> int:
    worst = 0.0
    rows = []
    for n in (2, 4, 8, 16, 32, 64):
        for lam in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
            cfg = ChainConfig(n=n, lam=lam, kappa=args.kappa)
            table = run_zeno_chain(cfg)
            g = math.exp(-lam / args.kappa)
            chain_tau = (-table.logical[3, 3] / g).real
            closed = tau_closed_form(n, lam)
            resid = abs(chain_tau - closed)
            worst = max(worst, resid)
            rows.append((n, lam, closed, chain_tau, resid))
    lines = ["n lambda tau_closed tau_chain residual"]
    for r in rows:
        lines.append(" ".join(_fmt(x) for x in r))
    lines.append(f"# worst residual: {_fmt(worst)}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0 if worst <= 1e-9 else 1


def cmd_gate(args) -> int:
    mismatch = MismatchConfig(args.gamma)
    input_state = TwoQubitState.equal_superposition()
    detector = _detector(args)
    lam = _resolve_lambda(args, mismatch, input_state, detector)
    if args.mode == "tau-gate":
        table = tau_gate_table(tau_continuum(lam), args.kappa, mismatch)
    else:
        distill = "full" if args.mode == "distilled" else "none"
        table = build_gate_table(args.kappa, lam, mismatch, distill)
    _write(args.out, table.to_json() + "\n")
    return 0


def cmd_gc(args) -> int:
    mismatch = MismatchConfig(args.gamma)
    input_state = _input_state(args.input)
    detector = _detector(args)
    lam = _resolve_lambda(args, mismatch, input_state, detector)
    tau = tau_continuum(lam)
    table = build_gate_table(args.kappa, lam, mismatch, args.distill)
    metrics = simulate_gc_circuit(table, input_state, detector)
    rates = error_rates(metrics)
    report = {
        "kappa": args.kappa, "lambda": lam, "tau": tau,
        "gamma": args.gamma, "eta": args.eta,
        "measurement_noise": args.measurement_noise,
        "distill": args.distill,
        "fidelity": metrics.fidelity,
        "ps_per_qubit": metrics.ps_per_qubit,
        "ps_two_qubit": metrics.ps_two_qubit,
        "unlocated": rates.unlocated, "located": rates.located,
        "version": __version__,
    }
    if args.distill == "full":
        from .teleport import closed_form_metrics
        cf = closed_form_metrics(input_state, tau, lam, args.kappa, mismatch, detector)
        report["closed_form_residual"] = {
            "fidelity": abs(cf.fidelity - metrics.fidelity),
            "ps_per_qubit": abs(cf.ps_per_qubit - metrics.ps_per_qubit),
        }
    _write(args.out, json.dumps(report, indent=2, default=_fmt) + "\n")
    return 0


def cmd_optimize(args) -> int:
    mismatch = MismatchConfig(args.gamma)
    input_state = _input_state(args.input)
    detector = _detector(args)
    lam, value = optimize_lambda(args.kappa, mismatch, args.objective,
                                 input_state, distillation=args.distill,
                                 detector=detector)
    metrics = gc_point_metrics(args.kappa, lam, mismatch, input_state,
                               args.distill, detector)
    report = {
        "kappa": args.kappa, "objective": args.objective,
        "lambda_opt": lam, "objective_value": value,
        "fidelity": metrics.fidelity,
        "ps_per_qubit": metrics.ps_per_qubit,
        "ps_two_qubit": metrics.ps_two_qubit,
        "version": __version__,
    }
    _write(args.out, json.dumps(report, indent=2, default=_fmt) + "\n")
    return 0


_SWEEP_COLUMNS = ("lambda_opt", "tau", "fidelity", "ps_per_qubit",
                  "ps_two_qubit", "unlocated", "located")


def _sweep_point(job):
    (variable, value, kappa, lam, gamma, distill, input_spec,
     eta, mnoise, curve_paths) = job
    if variable == "kappa":
        kappa = value
    elif variable == "lambda":
        lam = value
    elif variable == "gamma_overlap":
        gamma = value
    mismatch = MismatchConfig(gamma)
    input_state = _input_state(input_spec)
    detector = DetectorModel(eta=eta, detections=4,
                             measurement_noise_fraction=mnoise)
    if lam is None:
        lam_opt, _ = optimize_lambda(kappa, mismatch, "success", input_state,
                                     distillation=distill, detector=detector)
    else:
        lam_opt = lam
    tau = tau_continuum(lam_opt)
    metrics = gc_point_metrics(kappa, lam_opt, mismatch, input_state,
                               distill, detector)
    rates = error_rates(metrics)
    row = [value, lam_opt, tau, metrics.fidelity, metrics.ps_per_qubit,
           metrics.ps_two_qubit, rates.unlocated, rates.located]
    for path in curve_paths:
        curve = load_curve(path)
        bound = gamma_min_for_kappa(kappa, curve,
                                    input_state, detector=detector)
        row.append(bound.gamma_min if bound.feasible else math.nan)
    return row


def cmd_sweep(args) -> int:
    if args.points < 2:
        raise SystemExit("--points must be >= 2")
    if args.spacing == "log" and (args.start <= 0 or args.stop <= 0):
        raise SystemExit("log spacing requires a positive range")
    space = np.geomspace if args.spacing == "log" else np.linspace
    values = space(args.start, args.stop, args.points)
    lam = None if args.optimize_lambda else args.lam
    if lam is None and not args.optimize_lambda and args.variable != "lambda":
        raise SystemExit("either --lambda or --optimize-lambda is required")
    curves = list(args.curve or [])
    jobs = [(args.variable, float(v), args.kappa, lam, args.gamma,
             args.distill, args.input, args.eta, args.measurement_noise,
             curves) for v in values]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    header = [args.variable, *_SWEEP_COLUMNS]
    header += [f"gamma_min_{Path(p).stem}" for p in curves]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_bounds(args) -> int:
    curves = []
    for name in args.named_curve or []:
        curves.append(load_named_curve(name))
    for path in args.curve or []:
        curves.append(load_curve(path))
    if not curves:
        curves = [load_named_curve("steane"), load_named_curve("golay")]
    detector = _detector(args)
    input_state = _input_state(args.input)
    report = {"version": __version__, "curves": {}}
    for curve in curves:
        entry = {}
        if args.kappa is not None:
            bound = gamma_min_for_kappa(args.kappa, curve, input_state,
                                        detector=detector)
            entry["kappa"] = args.kappa
            entry["gamma_min"] = bound.gamma_min if bound.feasible else None
            entry["feasible"] = bound.feasible
            if bound.feasible:
                entry["lambda_opt"] = bound.lambda_opt
                entry["rates_at_bound"] = {
                    "located": bound.rates_at_bound.located,
                    "unlocated": bound.rates_at_bound.unlocated,
                }
        if args.kappa_min:
            adv = distillation_advantage_report(curve, detector=detector)
            entry["kappa_min_full"] = adv.kappa_min_full
            entry["kappa_min_none"] = adv.kappa_min_none
            entry["distillation_advantage"] = adv.advantage
        report["curves"][curve.label] = entry
    _write(args.out, json.dumps(report, indent=2, default=_fmt) + "\n")
    return 0


# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *, lam: bool = True):
    p.add_argument("--kappa", type=float, default=1e4,
                   help="one-photon to two-photon transmission ratio")
    if lam:
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="absorption strength")
        p.add_argument("--optimize-lambda", action="store_true",
                       help="pick the success-optimal lambda")
    p.add_argument("--gamma", type=float, default=1.0, help="mode overlap")
    p.add_argument("--eta", type=float, default=1.0, help="detector efficiency")
    p.add_argument("--measurement-noise", type=float,
                   default=DEFAULT_DETECTOR.measurement_noise_fraction,
                   help="measurement noise as a fraction of gate noise")
    p.add_argument("--distill", choices=("full", "none"), default="full")
    p.add_argument("--input", default="equal",
                   help="equal | one-one | worst-f | worst-p | "
                        "worst-f-nodistill | comma-separated amplitudes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="output path ('-' = stdout)")
    p.add_argument("--config", default=None, help="key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zenogate",
        description="Zeno-effect optical gate simulator and bound analysis")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tau", help="closed-form tau")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--continuum", action="store_true")
    p.add_argument("--out", default="-")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("chain-verify", help="chain oracle vs closed form")
    p.add_argument("--kappa", type=float, default=1e4)
    p.add_argument("--out", default="-")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_chain_verify)

    p = sub.add_parser("gate", help="emit a gate table as JSON")
    p.add_argument("--mode", choices=("raw", "distilled", "tau-gate"),
                   default="distilled")
    _add_common(p)
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("gc", help="teleported-gate metrics at one point")
    _add_common(p)
    p.set_defaults(func=cmd_gc)

    p = sub.add_parser("optimize", help="optimal lambda search")
    p.add_argument("--objective", choices=("success", "fidelity"),
                   default="success")
    _add_common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="CSV parameter sweep")
    p.add_argument("--variable", choices=("kappa", "lambda", "gamma_overlap"),
                   default="kappa")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--spacing", choices=("linear", "log"), default="log")
    p.add_argument("--curve", action="append", default=None,
                   help="threshold-curve file (repeatable)")
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="fault-tolerance bounds")
    p.add_argument("--named-curve", action="append", default=None,
                   choices=("steane", "golay"))
    p.add_argument("--curve", action="append", default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--kappa-min", action="store_true",
                   help="also compute critical kappa with/without distillation")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--measurement-noise", type=float,
                   default=DEFAULT_DETECTOR.measurement_noise_fraction)
    p.add_argument("--input", default="equal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_defaults(args, parser)
    try:
        return args.func(args)
    except (DomainError, InfeasibleError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

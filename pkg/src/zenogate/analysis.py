"""Optimal-lambda search, error-rate mapping and fault-tolerance bounds.

The (located, unlocated) error rates of the teleported gate are

    located   = 1 - P_s   (per qubit; loss/bunching heralded at detectors)
    unlocated = 1 - F     (mode mismatch, invisible to the detectors)

and a ThresholdCurve is a monotone trade-off boundary in that plane: a
point is tolerable iff it lies on or below the piecewise-linear boundary
and does not exceed its last abscissa.

The shipped steane/golay curves are *calibrations*: their vertices were
fitted (tools/calibrate_curves.py) so this pipeline reproduces the
published endpoint numbers; they are not independently derived threshold
data.  The default detector model applies measurement noise equal to
one-tenth of the gate noise (see DetectorModel).
"""
from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .fock import ChainConfig, tau_continuum
from .gates import DomainError, GateTable, MismatchConfig, distilled_cz_table, raw_cz_table
from .teleport import (DetectorModel, GateMetrics, TwoQubitState,
                       closed_form_metrics, simulate_gc_circuit)

__all__ = [
    "InfeasibleError",
    "ThresholdCurve",
    "ErrorRates",
    "BoundResult",
    "AdvantageReport",
    "DEFAULT_DETECTOR",
    "LAMBDA_GRID",
    "load_curve",
    "load_named_curve",
    "gc_point_metrics",
    "build_gate_table",
    "optimize_lambda",
    "error_rates",
    "is_tolerable",
    "gamma_min_for_kappa",
    "kappa_min_at_perfect_matching",
    "distillation_advantage_report",
]

#: analysis-pipeline default: ideal efficiency, measurement noise = gate noise / 10
DEFAULT_DETECTOR = DetectorModel(eta=1.0, detections=4,
                                 measurement_noise_fraction=0.1)

#: coarse logarithmic lambda grid for the 1-D optimizations
LAMBDA_GRID = np.geomspace(1e-2, 1e3, 50)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class InfeasibleError(RuntimeError):
    """No feasible operating point exists in the searched range."""


@dataclass(frozen=True)
class ErrorRates:
    unlocated: float
    located: float

    def __post_init__(self):
        for name, v in (("unlocated", self.unlocated), ("located", self.located)):
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name} rate out of [0, 1]: {v!r}")


def error_rates(metrics: GateMetrics) -> ErrorRates:
    """(1 - F, 1 - P_s) per qubit."""
    return ErrorRates(unlocated=min(max(1.0 - metrics.fidelity, 0.0), 1.0),
                      located=min(max(1.0 - metrics.ps_per_qubit, 0.0), 1.0))


@dataclass(frozen=True)
class ThresholdCurve:
    """Monotone boundary of tolerable (located, unlocated) rate pairs."""

    points: np.ndarray
    label: str = "curve"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError("curve needs at least one (located, unlocated) point")
        if np.any(pts < 0.0) or np.any(pts > 1.0):
            raise ValueError("curve points must lie in [0, 1]^2")
        if np.any(np.diff(pts[:, 0]) <= 0.0):
            raise ValueError("located coordinates must be strictly increasing")
        if np.any(np.diff(pts[:, 1]) > 0.0):
            raise ValueError("unlocated coordinates must be non-increasing")
        object.__setattr__(self, "points", pts)

    @property
    def located_reach(self) -> float:
        return float(self.points[-1, 0])

    def allowed_unlocated(self, located: float) -> float:
        """Boundary value at the given located rate; -inf beyond the reach."""
        pts = self.points
        if located > pts[-1, 0]:
            return -math.inf
        if located <= pts[0, 0]:
            return float(pts[0, 1])
        return float(np.interp(located, pts[:, 0], pts[:, 1]))

    def dominates(self, other: "ThresholdCurve") -> bool:
        """True if this curve tolerates every point the other tolerates."""
        xs = np.unique(np.concatenate([self.points[:, 0], other.points[:, 0]]))
        mine = np.array([self.allowed_unlocated(x) for x in xs])
        theirs = np.array([other.allowed_unlocated(x) for x in xs])
        theirs[np.isneginf(theirs)] = -1.0
        return bool(np.all(mine >= theirs) and self.located_reach >= other.located_reach)

    def to_file(self, path) -> None:
        lines = [f"# label: {self.label}",
                 "# columns: located_rate unlocated_rate"]
        for loc, unl in self.points:
            lines.append(f"{loc:.17g} {unl:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")


def load_curve(path) -> ThresholdCurve:
    """Parse a two-column text curve; '#' starts a comment."""
    label = Path(path).stem
    pts = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            if line[1:].strip().lower().startswith("label:"):
                label = line.split(":", 1)[1].strip()
            continue
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected two columns, got {raw!r}")
        pts.append((float(fields[0]), float(fields[1])))
    if not pts:
        raise ValueError(f"{path}: empty curve")
    return ThresholdCurve(points=np.array(pts), label=label)


def load_named_curve(name: str) -> ThresholdCurve:
    """Load a packaged calibration curve ('steane' or 'golay')."""
    ref = importlib.resources.files("zenogate").joinpath(f"data/{name}.curve")
    with importlib.resources.as_file(ref) as path:
        return load_curve(path)


def is_tolerable(rates: ErrorRates, curve: ThresholdCurve) -> bool:
    """True iff the point lies on or below the boundary (closed region)."""
    allowed = curve.allowed_unlocated(rates.located)
    return rates.unlocated <= allowed


# ---------------------------------------------------------------------------
# point evaluation

def build_gate_table(kappa: float, lam: float, mismatch: MismatchConfig,
                     distillation: str = "full") -> GateTable:
    """Continuum-limit gate table at the given operating point."""
    tau = tau_continuum(lam)
    config = ChainConfig(n=16, lam=lam, kappa=kappa)  # n only labels metadata
    if distillation == "full":
        return distilled_cz_table(config, mismatch, tau=tau)
    if distillation == "none":
        return raw_cz_table(config, mismatch, tau=tau)
    raise ValueError(f"distillation must be 'full' or 'none', got {distillation!r}")


def gc_point_metrics(kappa: float, lam: float, mismatch: MismatchConfig,
                     input: TwoQubitState, distillation: str = "full",
                     detector: Optional[DetectorModel] = DEFAULT_DETECTOR) -> GateMetrics:
    """Teleported-gate metrics at one continuum operating point.

    The full-distillation path uses the closed form (the circuit agrees to
    machine precision); the no-distillation path runs the circuit on the
    raw CZ table, for which no closed form exists.
    """
    tau = tau_continuum(lam)
    if distillation == "full":
        return closed_form_metrics(input, tau, lam, kappa, mismatch, detector)
    return simulate_gc_circuit(build_gate_table(kappa, lam, mismatch, "none"),
                               input, detector)


# ---------------------------------------------------------------------------
# 1-D lambda optimization

def _golden_max(f: Callable[[float], float], lo: float, hi: float,
                rel_tol: float = 1e-6) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_tol * max(abs(a), abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def optimize_lambda(kappa: float, mismatch: MismatchConfig, objective: str,
                    input: TwoQubitState, *, distillation: str = "full",
                    detector: Optional[DetectorModel] = DEFAULT_DETECTOR,
                    grid: np.ndarray = LAMBDA_GRID,
                    rel_tol: float = 1e-6) -> tuple[float, float]:
    """Maximize success (two-qubit) or fidelity over the absorber strength.

    Coarse logarithmic grid followed by golden-section refinement.  Raises
    InfeasibleError when no grid point is feasible (e.g. tau <= 0
    everywhere for the distilled gate).
    """
    if objective not in ("success", "fidelity"):
        raise ValueError(f"objective must be 'success' or 'fidelity', got {objective!r}")
    if not kappa > 1.0:
        raise ValueError(f"kappa must exceed 1, got {kappa!r}")

    def value(lam: float) -> float:
        try:
            m = gc_point_metrics(kappa, lam, mismatch, input, distillation, detector)
        except DomainError:
            return -math.inf
        return m.ps_two_qubit if objective == "success" else m.fidelity

    vals = np.array([value(l) for l in grid])
    if not np.any(np.isfinite(vals)):
        raise InfeasibleError(
            f"objective infeasible on the whole lambda grid (kappa={kappa})")
    i = int(np.argmax(vals))
    lo = grid[i - 1] if i > 0 and np.isfinite(vals[i - 1]) else grid[i]
    hi = grid[i + 1] if i + 1 < len(grid) else grid[i]
    if lo == hi:
        return float(grid[i]), float(vals[i])
    lam_opt, best = _golden_max(value, float(lo), float(hi), rel_tol)
    if vals[i] > best:
        lam_opt, best = float(grid[i]), float(vals[i])
    return lam_opt, best


# ---------------------------------------------------------------------------
# fault-tolerance bounds

@dataclass(frozen=True)
class BoundResult:
    kappa: float
    feasible: bool
    gamma_min: Optional[float]
    lambda_opt: Optional[float]
    rates_at_bound: Optional[ErrorRates]


def _rates_at_success_optimum(kappa: float, gamma: float, input: TwoQubitState,
                              distillation: str,
                              detector: Optional[DetectorModel]) -> tuple[float, ErrorRates]:
    mm = MismatchConfig(gamma)
    lam, _ = optimize_lambda(kappa, mm, "success", input,
                             distillation=distillation, detector=detector)
    m = gc_point_metrics(kappa, lam, mm, input, distillation, detector)
    return lam, error_rates(m)


def gamma_min_for_kappa(kappa: float, curve: ThresholdCurve,
                        input: TwoQubitState, *, distillation: str = "full",
                        detector: Optional[DetectorModel] = DEFAULT_DETECTOR,
                        tol: float = 1e-4) -> BoundResult:
    """Least mode overlap whose success-optimal rates are tolerable.

    Bisection on Gamma in [0, 1]; infeasible when even perfect overlap is
    intolerable (kappa below the curve's reach).
    """
    def probe(gamma: float):
        try:
            lam, rates = _rates_at_success_optimum(kappa, gamma, input,
                                                   distillation, detector)
        except InfeasibleError:
            return None
        return lam, rates

    top = probe(1.0)
    if top is None or not is_tolerable(top[1], curve):
        return BoundResult(kappa=kappa, feasible=False, gamma_min=None,
                           lambda_opt=None, rates_at_bound=None)
    lo_probe = probe(0.0)
    if lo_probe is not None and is_tolerable(lo_probe[1], curve):
        lam, rates = lo_probe
        return BoundResult(kappa, True, 0.0, lam, rates)
    lo, hi = 0.0, 1.0
    hi_state = top
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        mid_probe = probe(mid)
        if mid_probe is not None and is_tolerable(mid_probe[1], curve):
            hi, hi_state = mid, mid_probe
        else:
            lo = mid
    lam, rates = hi_state
    return BoundResult(kappa=kappa, feasible=True, gamma_min=hi,
                       lambda_opt=lam, rates_at_bound=rates)


def _tolerability_margin(kappa: float, curve: ThresholdCurve,
                         input: TwoQubitState, distillation: str,
                         detector: Optional[DetectorModel]) -> float:
    """max over lambda of (allowed - actual) unlocated rate; >= 0 = tolerable.

    An existential search: for the raw gate the success-optimal lambda is
    degenerate (lambda -> 0 maximizes P_s but ruins F), so tolerability
    must scan the whole grid.
    """
    def margin(lam: float) -> float:
        try:
            m = gc_point_metrics(kappa, lam, MismatchConfig(1.0), input,
                                 distillation, detector)
        except DomainError:
            return -math.inf
        r = error_rates(m)
        allowed = curve.allowed_unlocated(r.located)
        return allowed - r.unlocated

    vals = np.array([margin(l) for l in LAMBDA_GRID])
    i = int(np.argmax(vals))
    best = float(vals[i])
    if not math.isfinite(best):
        return best
    lo = float(LAMBDA_GRID[max(0, i - 1)])
    hi = float(LAMBDA_GRID[min(len(LAMBDA_GRID) - 1, i + 1)])
    if lo < hi:
        _, refined = _golden_max(margin, lo, hi, 1e-6)
        best = max(best, refined)
    return best


def kappa_min_at_perfect_matching(curve: ThresholdCurve, distillation: str,
                                  *, input: Optional[TwoQubitState] = None,
                                  detector: Optional[DetectorModel] = DEFAULT_DETECTOR,
                                  lo: float = 1e2, hi: float = 1e8,
                                  rel_tol: float = 1e-3) -> float:
    """Smallest kappa tolerable at Gamma = 1 (bisection on log kappa).

    With distillation='none' the raw CZ table is used; the default input
    is then its worst-fidelity state (|00>+|01>+|10>-|11>)/2, otherwise
    the equal superposition (full-distillation rates are input-free).
    """
    if input is None:
        input = (TwoQubitState.worst_fidelity_nodistill() if distillation == "none"
                 else TwoQubitState.equal_superposition())

    def tolerable(kappa: float) -> bool:
        return _tolerability_margin(kappa, curve, input, distillation,
                                    detector) >= 0.0

    if tolerable(lo):
        return lo
    if not tolerable(hi):
        raise InfeasibleError(
            f"{curve.label}: intolerable across kappa in [{lo:g}, {hi:g}]")
    llo, lhi = math.log(lo), math.log(hi)
    while lhi - llo > rel_tol:
        mid = 0.5 * (llo + lhi)
        if tolerable(math.exp(mid)):
            lhi = mid
        else:
            llo = mid
    return math.exp(lhi)


@dataclass(frozen=True)
class AdvantageReport:
    curve_label: str
    kappa_min_full: float
    kappa_min_none: float

    @property
    def advantage(self) -> bool:
        return self.kappa_min_full < self.kappa_min_none


def distillation_advantage_report(curve: ThresholdCurve, *,
                                  detector: Optional[DetectorModel] = DEFAULT_DETECTOR,
                                  lo: float = 1e2, hi: float = 1e8) -> AdvantageReport:
    """Critical kappa with and without distillation, and whether full wins."""
    full = kappa_min_at_perfect_matching(curve, "full", detector=detector,
                                         lo=lo, hi=hi)
    none = kappa_min_at_perfect_matching(curve, "none", detector=detector,
                                         lo=lo, hi=hi)
    return AdvantageReport(curve_label=curve.label, kappa_min_full=full,
                           kappa_min_none=none)

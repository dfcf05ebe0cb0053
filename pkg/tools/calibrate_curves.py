#!/usr/bin/env python3
"""Generate the calibrated Steane/Golay threshold-curve data files.

The curves are *calibrations*: piecewise-linear monotone boundaries whose
vertices are computed from this package's own pipeline so that the
published endpoint numbers come out:

  steane: kappa_min(full) ~ 6050, Gamma_min(kappa=1e6, equal input) ~ 0.998,
          Gamma_min(kappa=1e6, |11> input) ~ 0.995, kappa_min(none) ~ 12000
  golay:  kappa_min(full) ~ 2050, Gamma_min(kappa=5e5, equal input) ~ 0.996,
          Gamma_min(5e5, |11> input) ~ 0.989, kappa_min(none) ~ 4300

Vertices:
  (0, u0)                       start (u0 a fixed plausible intercept)
  equal-superposition anchor    rates at (kappa_g, Gamma_eq)
  |11> anchor                   rates at (kappa_g, Gamma_11)
  lower-hull vertices           of the no-distillation lambda locus at
                                kappa_nd (worst-fidelity input, Gamma=1)
  (located_reach, 0)            rates reach at kappa_full, Gamma=1

Run from the repository root:  python3 tools/calibrate_curves.py [--verify]
"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from zenogate.analysis import (DEFAULT_DETECTOR, MismatchConfig, ThresholdCurve,
                               build_gate_table, error_rates,
                               gamma_min_for_kappa, gc_point_metrics,
                               kappa_min_at_perfect_matching, load_curve,
                               optimize_lambda)
from zenogate.teleport import TwoQubitState

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "zenogate" / "data"

SPECS = {
    "steane": dict(u0=0.010, kappa_full=6050.0, kappa_gamma=1e6,
                   gamma_eq=0.998, gamma_11=0.995, kappa_nd=12000.0),
    "golay": dict(u0=0.016, kappa_full=2050.0, kappa_gamma=5e5,
                  gamma_eq=0.996, gamma_11=0.989, kappa_nd=4300.0),
}

EQUAL = TwoQubitState.equal_superposition()
ONEONE = TwoQubitState.from_label("11")
PSIM = TwoQubitState.worst_fidelity_nodistill()
DET = DEFAULT_DETECTOR


def rates_full(kappa, gamma, state):
    mm = MismatchConfig(gamma)
    lam, _ = optimize_lambda(kappa, mm, "success", state, detector=DET)
    return error_rates(gc_point_metrics(kappa, lam, mm, state, "full", DET))


def nd_locus(kappa, n_points=400):
    pts = []
    for lam in np.geomspace(1.0, 1e3, n_points):
        m = gc_point_metrics(kappa, lam, MismatchConfig(1.0), PSIM, "none", DET)
        r = error_rates(m)
        pts.append((r.located, r.unlocated))
    return np.array(pts)


def lower_hull(points):
    """Lower convex hull vertices, by increasing x."""
    pts = sorted(map(tuple, points))
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (p[0] - x1) * (y2 - y1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def calibrate(name, spec):
    print(f"== {name} ==")
    anchor_eq = rates_full(spec["kappa_gamma"], spec["gamma_eq"], EQUAL)
    anchor_11 = rates_full(spec["kappa_gamma"], spec["gamma_11"], ONEONE)
    reach = rates_full(spec["kappa_full"], 1.0, EQUAL)
    print(f"  eq anchor:   located={anchor_eq.located:.8f} unlocated={anchor_eq.unlocated:.8f}")
    print(f"  |11> anchor: located={anchor_11.located:.8f} unlocated={anchor_11.unlocated:.8f}")
    print(f"  reach:       located={reach.located:.8f}")

    locus = nd_locus(spec["kappa_nd"])
    hull = lower_hull(locus)
    # keep hull vertices strictly between the equal anchor and the reach;
    # the |11> anchor cannot be threaded monotonically together with the
    # no-distillation constraint (it sits at larger located rate but higher
    # unlocated than the locus minimum), so it is reported but not used
    lo_x = anchor_eq.located * 1.05
    hi_x = reach.located * 0.98
    hi_y = anchor_eq.unlocated
    hull = [(x, y) for x, y in hull if lo_x < x < hi_x and 0.0 < y < hi_y]
    print(f"  nd hull vertices ({len(hull)}):",
          " ".join(f"({x:.5f},{y:.5f})" for x, y in hull))

    vertices = [(0.0, spec["u0"]),
                (anchor_eq.located, anchor_eq.unlocated),
                *hull,
                (reach.located, 0.0)]
    # enforce strict monotonicity (drop any vertex that violates it)
    cleaned = [vertices[0]]
    for x, y in vertices[1:]:
        px, py = cleaned[-1]
        if x > px and y <= py:
            cleaned.append((x, y))
        else:
            print(f"  ! dropping non-monotone vertex ({x:.6f}, {y:.6f})")
    curve = ThresholdCurve(points=np.array(cleaned), label=name)
    out = DATA_DIR / f"{name}.curve"
    header = (f"# label: {name}\n"
              f"# CALIBRATION: vertices fitted by tools/calibrate_curves.py so the\n"
              f"# bound pipeline reproduces the published endpoint numbers; not\n"
              f"# independently derived threshold data.\n"
              f"# columns: located_rate unlocated_rate\n")
    body = "".join(f"{x:.17g} {y:.17g}\n" for x, y in curve.points)
    out.write_text(header + body)
    print(f"  wrote {out}")
    return curve


def verify(name, spec):
    curve = load_curve(DATA_DIR / f"{name}.curve")
    kf = kappa_min_at_perfect_matching(curve, "full", detector=DET)
    kn = kappa_min_at_perfect_matching(curve, "none", detector=DET)
    geq = gamma_min_for_kappa(spec["kappa_gamma"], curve, EQUAL, detector=DET)
    g11 = gamma_min_for_kappa(spec["kappa_gamma"], curve, ONEONE, detector=DET)
    print(f"== verify {name} ==")
    print(f"  kappa_min(full) = {kf:.1f}   (target {spec['kappa_full']:.0f})")
    print(f"  kappa_min(none) = {kn:.1f}   (target {spec['kappa_nd']:.0f})")
    print(f"  gamma_min(eq)   = {geq.gamma_min:.5f} (target {spec['gamma_eq']})")
    print(f"  gamma_min(|11>) = {g11.gamma_min:.5f} (target {spec['gamma_11']})")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--verify", action="store_true",
                    help="run the bound pipeline against the written curves")
    args = ap.parse_args()
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for name, spec in SPECS.items():
        calibrate(name, spec)
    if args.verify:
        for name, spec in SPECS.items():
            verify(name, spec)


if __name__ == "__main__":
    main()

"""Two-mode Fock-space simulation of the Zeno CZ chain.

The gate is modelled as n segments, each a weak beamsplitter of angle
pi/(2n) followed by an absorber, then a final mode crossing.  The state
space is the <=2-photon sector of two modes,

    basis order: |00>, |01>, |10>, |11>, |20>, |02>

plus a scalar ``absorbed_mass`` accumulating the probability lost to the
absorbers, so every evolution conserves the total probability budget.

Conventions (fixed once, tested):

* Beamsplitter: symmetric coupler, a+ -> cos(t) a+ + i sin(t) b+,
  b+ -> i sin(t) a+ + cos(t) b+.  A full swap (total angle pi/2) therefore
  sends |01> -> i|10> and |11> -> -|11>.
* Final crossing: relabel the modes and apply a -pi/2 phase shifter to each
  output mode, i.e. multiply by (-i)^(photon number).  With the coupler
  above, singles then come out with amplitude +gamma1^(n/2) and |11> with
  -gamma1^n * tau, which is the table the closed form describes.
* Absorbers factor per step as sqrt(gamma1) per photon on every state plus
  an extra sqrt(gamma2) on the doubly-occupied states.  The two-photon
  sector then factors exactly into gamma1^n times a gamma2-only evolution,
  so tau depends on gamma2 alone.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BASIS",
    "ChainConfig",
    "TwoModeState",
    "TauClosedFormIntermediates",
    "PrecisionLossError",
    "beamsplitter_step",
    "absorber_step",
    "run_zeno_chain",
    "tau_closed_form",
    "tau_closed_form_parts",
    "continuum_segments",
    "tau_continuum",
]

#: occupation pairs (n_a, n_b) in amplitude-vector order
BASIS = ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (0, 2))

_I00, _I01, _I10, _I11, _I20, _I02 = range(6)

_LN2 = math.log(2.0)

NORM_TOL = 1e-9


class PrecisionLossError(ArithmeticError):
    """Closed-form evaluation lost precision (n too large for naive use)."""


@dataclass(frozen=True)
class ChainConfig:
    """Physical parameters of the beamsplitter/absorber chain.

    n      -- number of segments (>= 1; >= 2 for the closed form)
    lam    -- total dimensionless absorption strength (chi * L)
    kappa  -- one-photon to two-photon transmission ratio (> 1)
    """

    n: int
    lam: float
    kappa: float

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.lam >= 0.0:
            raise ValueError(f"lam must be nonnegative, got {self.lam!r}")
        if not self.kappa > 1.0:
            raise ValueError(f"kappa must exceed 1, got {self.kappa!r}")

    @property
    def gamma1(self) -> float:
        """Per-segment single-photon transmission exp(-lam/(n*kappa))."""
        return math.exp(-self.lam / (self.n * self.kappa))

    @property
    def gamma2(self) -> float:
        """Per-segment two-photon transmission exp(-lam/n)."""
        return math.exp(-self.lam / self.n)


@dataclass
class TwoModeState:
    """Amplitudes over BASIS plus the probability absorbed so far."""

    amplitudes: np.ndarray = field(
        default_factory=lambda: np.zeros(6, dtype=complex))
    absorbed_mass: float = 0.0

    @classmethod
    def from_occupation(cls, n_a: int, n_b: int) -> "TwoModeState":
        s = cls()
        s.amplitudes[BASIS.index((n_a, n_b))] = 1.0
        return s

    def norm_budget(self) -> float:
        """Sum of squared amplitudes plus absorbed mass (should be 1)."""
        return float(np.sum(np.abs(self.amplitudes) ** 2) + self.absorbed_mass)

    def copy(self) -> "TwoModeState":
        return TwoModeState(self.amplitudes.copy(), self.absorbed_mass)


def _single_photon_block(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    # basis (|01>, |10>): b+ -> is a+ + c b+, a+ -> c a+ + is b+
    return np.array([[c, 1j * s], [1j * s, c]])


def _two_photon_block(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    r2 = math.sqrt(2.0)
    # basis (|11>, |20>, |02>)
    return np.array([
        [c * c - s * s, 1j * r2 * c * s, 1j * r2 * c * s],
        [1j * r2 * c * s, c * c, -s * s],
        [1j * r2 * c * s, -s * s, c * c],
    ])


def beamsplitter_step(state: TwoModeState, theta: float) -> TwoModeState:
    """Apply one coupler of angle theta; photon-number sectors do not mix."""
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta!r}")
    if abs(state.norm_budget() - 1.0) > NORM_TOL:
        raise ValueError(
            f"state not normalized (budget {state.norm_budget()!r})")
    out = state.copy()
    a = out.amplitudes
    a[[_I01, _I10]] = _single_photon_block(theta) @ a[[_I01, _I10]]
    a[[_I11, _I20, _I02]] = _two_photon_block(theta) @ a[[_I11, _I20, _I02]]
    return out


def absorber_step(state: TwoModeState, gamma1: float, gamma2: float) -> TwoModeState:
    """Apply one absorber: sqrt(gamma1) per photon, extra sqrt(gamma2) on
    the doubly-occupied states; the lost probability is booked as absorbed."""
    for name, g in (("gamma1", gamma1), ("gamma2", gamma2)):
        if not 0.0 < g <= 1.0:
            raise ValueError(f"{name} must lie in (0, 1], got {g!r}")
    if gamma2 > gamma1:
        raise ValueError("gamma2 must not exceed gamma1")
    out = state.copy()
    before = np.sum(np.abs(out.amplitudes) ** 2)
    sg1 = math.sqrt(gamma1)
    factors = np.array([1.0, sg1, sg1, gamma1,
                        gamma1 * math.sqrt(gamma2), gamma1 * math.sqrt(gamma2)])
    out.amplitudes *= factors
    out.absorbed_mass += float(before - np.sum(np.abs(out.amplitudes) ** 2))
    return out


def _cross_modes(state: TwoModeState) -> TwoModeState:
    """Final crossing: swap mode labels, then -pi/2 phase on each mode."""
    out = state.copy()
    a = out.amplitudes
    a[[_I01, _I10]] = a[[_I10, _I01]]
    a[[_I20, _I02]] = a[[_I02, _I20]]
    photons = np.array([0, 1, 1, 2, 2, 2])
    a *= (-1j) ** photons
    return out


def evolve_chain(state: TwoModeState, config: ChainConfig) -> TwoModeState:
    """Run the full chain (n segments + crossing) on an arbitrary state."""
    theta = math.pi / (2 * config.n)
    g1, g2 = config.gamma1, config.gamma2
    for _ in range(config.n):
        state = beamsplitter_step(state, theta)
        state = absorber_step(state, g1, g2)
    return _cross_modes(state)


def run_zeno_chain(config: ChainConfig):
    """Simulate the chain on the four logical inputs and tabulate the gate.

    Returns a GateTable whose logical entries are the amplitudes onto
    |00>,|01>,|10>,|11>; residual bunched amplitudes and absorbed mass are
    reported as failure mass.  The diagonal reproduces
    (1, gamma1^(n/2), gamma1^(n/2), -gamma1^n * tau).
    """
    from .gates import GateTable  # local import: gates depends on this module

    logical = np.zeros((4, 4), dtype=complex)
    failure = np.zeros(4)
    inputs = ((0, 0), (0, 1), (1, 0), (1, 1))
    for col, occ in enumerate(inputs):
        out = evolve_chain(TwoModeState.from_occupation(*occ), config)
        for row, occ_out in enumerate(inputs):
            logical[row, col] = out.amplitudes[BASIS.index(occ_out)]
        bunched = float(np.sum(np.abs(out.amplitudes[[_I20, _I02]]) ** 2))
        failure[col] = out.absorbed_mass + bunched
    meta = {
        "kind": "chain",
        "n": config.n,
        "lambda": config.lam,
        "kappa": config.kappa,
    }
    return GateTable(logical=logical, mismatch=np.zeros((4, 4), dtype=complex),
                     failure=failure, metadata=meta)


@dataclass(frozen=True)
class TauClosedFormIntermediates:
    """The d, g, h quantities entering the closed-form tau."""

    d: complex
    g: complex
    h: complex


def _tau_parts(n: int, lam: float) -> TauClosedFormIntermediates:
    g2 = math.exp(-lam / n)
    sg = math.sqrt(g2)
    c2 = math.cos(2.0 * math.pi / n)
    c1 = math.cos(math.pi / n)
    d = cmath.sqrt((1.0 + c2) * (1.0 + g2) + 2.0 * sg * (c2 - 3.0))
    g = complex(c1 * (sg + 1.0))
    h = complex(2.0 * c1 * (sg - 1.0))
    return TauClosedFormIntermediates(d=d, g=g, h=h)


def tau_closed_form_parts(n: int, lam: float) -> TauClosedFormIntermediates:
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if not lam >= 0.0:
        raise ValueError(f"lam must be nonnegative, got {lam!r}")
    return _tau_parts(int(n), float(lam))


def tau_closed_form(n: int, lam: float, *, imag_tol: float = 1e-10) -> float:
    """Closed-form |11> -> |11> factor of the chain (beyond gamma1^n).

    Depends only on n and gamma2 = exp(-lam/n).  Evaluated with complex
    arithmetic throughout: the powers are computed in polar form,
    z^n / 2^n = exp(n*(log z - log 2)), since d is imaginary for gamma2
    near 1 and the naive form overflows for large n.  Raises
    PrecisionLossError when the imaginary residue exceeds ``imag_tol``
    relative to the magnitude (signals n too large for naive evaluation).
    """
    p = tau_closed_form_parts(n, lam)
    d, g, h = p.d, p.g, p.h
    if abs(d) == 0.0:
        raise PrecisionLossError(
            f"d vanished at n={n}, lam={lam}; closed form is singular here")
    r2 = math.sqrt(2.0)

    def powterm(z: complex) -> complex:
        if z == 0:
            return 0j
        return cmath.exp(n * (cmath.log(z) - _LN2))

    tp = powterm(g + d / r2)
    tm = powterm(g - d / r2)
    val = (2.0 ** -1.5 / d) * (tp * (r2 * d - h) + tm * (r2 * d + h))
    if abs(val.imag) > imag_tol * max(1.0, abs(val)):
        raise PrecisionLossError(
            f"imaginary residue {val.imag:.3e} at n={n}, lam={lam}")
    return float(val.real)


_CONTINUUM_CACHE: dict[tuple[float, float], tuple[int, float]] = {}

#: doubling-search floor and cap for the continuum-n determination
CONTINUUM_N_START = 16
CONTINUUM_N_MAX = 1 << 22


def continuum_segments(lam: float, tol: float = 1e-6) -> int:
    """Smallest n (by doubling from 16) with |tau(n) - tau(2n)| < tol."""
    return _continuum(float(lam), float(tol))[0]


def tau_continuum(lam: float, tol: float = 1e-6) -> float:
    """tau in the continuous-coupling limit, via the adaptive n above."""
    return _continuum(float(lam), float(tol))[1]


def _continuum(lam: float, tol: float) -> tuple[int, float]:
    key = (lam, tol)
    cached = _CONTINUUM_CACHE.get(key)
    if cached is not None:
        return cached
    n = CONTINUUM_N_START
    t = tau_closed_form(n, lam)
    while True:
        t2 = tau_closed_form(2 * n, lam)
        if abs(t2 - t) < tol:
            break
        n *= 2
        t = t2
        if n > CONTINUUM_N_MAX:
            raise PrecisionLossError(
                f"continuum tau did not converge to {tol} by n={n} at lam={lam}")
    result = (n, t2)
    _CONTINUUM_CACHE[key] = result
    return result

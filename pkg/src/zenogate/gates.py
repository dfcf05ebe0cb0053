"""Logical operation tables for the Zeno CZ family.

A GateTable records, for each two-qubit logical input, the complex
amplitudes onto the logical outputs, the amplitudes onto mismatch-tagged
outputs (photon pairs that failed to interact, orthogonal in their
temporal mode but indistinguishable at detectors), and a scalar failure
mass (photon loss plus bunching).  Every column satisfies

    sum |logical|^2 + sum |mismatch|^2 + failure = 1.

Tables built here:

* raw CZ       -- the bare chain: (1, g^(1/2), g^(1/2), -G*g*tau) with a
                  mismatch term sqrt(1-G^2)*g on |11>, g = gamma1^n.
* tau gate     -- balanced interferometer with a two-photon absorber in
                  each arm: (1, sqrt(g1'), sqrt(g1'), +G*g1'*tau), mismatch
                  sqrt(1-G^2)*g1' on |11>, with g1' = tau^(1/kappa).
* distilled CZ -- raw CZ on the occupied-rail pair, tau gate on the
                  complementary (vacuum-rail) pair, plus per-term
                  attenuations that balance all four amplitudes at G=1 to
                  the common magnitude g*g1'*tau with the sign on |11>.
                  The three distillation beamsplitter transmissions
                  (sqrt(g), sqrt(g1'), sqrt(g*g1')*tau) are kept as
                  metadata; mismatch terms appear on |00> (tau-gate stage)
                  and |11> (CZ stage).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fock import ChainConfig, tau_closed_form

__all__ = [
    "STATES",
    "DomainError",
    "MismatchConfig",
    "DistillationConfig",
    "GateTable",
    "ideal_cz_table",
    "raw_cz_table",
    "tau_gate_table",
    "distilled_cz_table",
    "heralded_success_probability",
    "heralded_fidelity",
    "unheralded_fidelity",
]

STATES = ("00", "01", "10", "11")

COLUMN_TOL = 1e-12


class DomainError(ValueError):
    """Operating point outside a gate's domain (e.g. tau <= 0)."""


@dataclass(frozen=True)
class MismatchConfig:
    """Wavepacket overlap Gamma; Gamma^2 is the interaction probability."""

    gamma_overlap: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.gamma_overlap <= 1.0:
            raise ValueError(
                f"gamma_overlap must lie in [0, 1], got {self.gamma_overlap!r}")

    @property
    def residual(self) -> float:
        """sqrt(1 - Gamma^2), the non-interacting amplitude weight."""
        return math.sqrt(max(0.0, 1.0 - self.gamma_overlap ** 2))


@dataclass(frozen=True)
class DistillationConfig:
    """Distillation mode; only the endpoints are modelled."""

    mode: str = "full"

    def __post_init__(self):
        if self.mode not in ("full", "none"):
            raise ValueError(f"mode must be 'full' or 'none', got {self.mode!r}")

    @staticmethod
    def gamma1_prime(tau: float, kappa: float) -> float:
        """Single-photon transmission tau^(1/kappa) of the tau-gate absorber."""
        if tau <= 0.0:
            raise DomainError(
                f"tau = {tau!r} <= 0: distillation undefined (gamma1' not real)")
        return tau ** (1.0 / kappa)


@dataclass
class GateTable:
    """Amplitude maps of a two-qubit gate over STATES.

    logical[row, col]  -- amplitude from input STATES[col] to STATES[row]
    mismatch[row, col] -- amplitude onto the mismatch-tagged copy of
                          STATES[row]
    failure[col]       -- probability heralded as failure (loss, bunching)
    metadata           -- provenance (parameters, distillation transmissions)
    """

    logical: np.ndarray
    mismatch: np.ndarray
    failure: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.logical = np.asarray(self.logical, dtype=complex)
        self.mismatch = np.asarray(self.mismatch, dtype=complex)
        self.failure = np.asarray(self.failure, dtype=float)
        if self.logical.shape != (4, 4) or self.mismatch.shape != (4, 4):
            raise ValueError("logical and mismatch must be 4x4")
        if self.failure.shape != (4,):
            raise ValueError("failure must have length 4")

    def column_budgets(self) -> np.ndarray:
        return (np.sum(np.abs(self.logical) ** 2, axis=0)
                + np.sum(np.abs(self.mismatch) ** 2, axis=0)
                + self.failure)

    def validate(self, tol: float = COLUMN_TOL) -> None:
        budgets = self.column_budgets()
        if np.any(np.abs(budgets - 1.0) > tol):
            raise ValueError(f"column budgets deviate from 1: {budgets}")
        if np.any(self.failure < -tol):
            raise ValueError(f"negative failure mass: {self.failure}")

    def to_json(self) -> str:
        def cmat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        payload = {
            "states": list(STATES),
            "logical": cmat(self.logical),
            "mismatch": cmat(self.mismatch),
            "failure": [float(x) for x in self.failure],
            "metadata": self.metadata,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GateTable":
        payload = json.loads(text)

        def mat(m):
            return np.array([[complex(re, im) for re, im in row] for row in m])

        return cls(logical=mat(payload["logical"]),
                   mismatch=mat(payload["mismatch"]),
                   failure=np.array(payload["failure"], dtype=float),
                   metadata=payload.get("metadata", {}))


def ideal_cz_table() -> GateTable:
    """The lossless controlled-sign gate diag(1, 1, 1, -1)."""
    return GateTable(logical=np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex),
                     mismatch=np.zeros((4, 4), dtype=complex),
                     failure=np.zeros(4),
                     metadata={"kind": "ideal"})


def _finish(logical, mismatch, meta) -> GateTable:
    survive = (np.sum(np.abs(logical) ** 2, axis=0)
               + np.sum(np.abs(mismatch) ** 2, axis=0))
    failure = np.clip(1.0 - survive, 0.0, None)
    table = GateTable(logical=logical, mismatch=mismatch,
                      failure=failure, metadata=meta)
    table.validate(1e-9)
    return table


def raw_cz_table(config: ChainConfig,
                 mismatch: MismatchConfig = MismatchConfig(),
                 tau: Optional[float] = None) -> GateTable:
    """Bare Zeno CZ with mode mismatch.

    tau defaults to the closed form at (config.n, config.lam); pass a
    precomputed (e.g. continuum) value to override.
    """
    if tau is None:
        tau = tau_closed_form(config.n, config.lam)
    g = math.exp(-config.lam / config.kappa)  # gamma1^n
    gam = mismatch.gamma_overlap
    logical = np.zeros((4, 4), dtype=complex)
    mm = np.zeros((4, 4), dtype=complex)
    logical[0, 0] = 1.0
    logical[1, 1] = logical[2, 2] = math.sqrt(g)
    logical[3, 3] = -gam * g * tau
    mm[3, 3] = mismatch.residual * g
    meta = {
        "kind": "raw_cz",
        "n": config.n,
        "lambda": config.lam,
        "kappa": config.kappa,
        "tau": float(tau),
        "gamma_overlap": gam,
    }
    return _finish(logical, mm, meta)


def tau_gate_table(tau: float, kappa: float,
                   mismatch: MismatchConfig = MismatchConfig()) -> GateTable:
    """Two-photon distillation interferometer (no sign flip on |11>)."""
    g1p = DistillationConfig.gamma1_prime(tau, kappa)
    gam = mismatch.gamma_overlap
    logical = np.zeros((4, 4), dtype=complex)
    mm = np.zeros((4, 4), dtype=complex)
    logical[0, 0] = 1.0
    logical[1, 1] = logical[2, 2] = math.sqrt(g1p)
    logical[3, 3] = gam * g1p * tau
    mm[3, 3] = mismatch.residual * g1p
    meta = {
        "kind": "tau_gate",
        "tau": float(tau),
        "kappa": kappa,
        "gamma1_prime": g1p,
        "gamma_overlap": gam,
    }
    return _finish(logical, mm, meta)


def distilled_cz_table(config: ChainConfig,
                       mismatch: MismatchConfig = MismatchConfig(),
                       tau: Optional[float] = None) -> GateTable:
    """Distilled Zeno CZ: all four amplitudes balanced at Gamma=1.

    Composes the raw CZ (occupied-rail pair) with the tau gate acting on
    the complementary rail pair, so the tau gate's two-photon stage hits
    the |00> term; the per-term attenuations fixed by the Gamma=1 balance
    are gamma1^n on |00>, sqrt(gamma1^n * gamma1') * tau on |01>/|10> and
    gamma1' on |11>.  No Gamma compensation is applied (Gamma is unknown
    to the gate).
    """
    if tau is None:
        tau = tau_closed_form(config.n, config.lam)
    if tau <= 0.0:
        raise DomainError(
            f"tau = {tau!r} <= 0 at lam={config.lam}: distillation undefined")
    g = math.exp(-config.lam / config.kappa)  # gamma1^n
    g1p = DistillationConfig.gamma1_prime(tau, config.kappa)
    K = g * g1p
    gam = mismatch.gamma_overlap
    res = mismatch.residual

    logical = np.zeros((4, 4), dtype=complex)
    mm = np.zeros((4, 4), dtype=complex)
    logical[0, 0] = K * gam * tau
    logical[1, 1] = logical[2, 2] = K * tau
    logical[3, 3] = -K * gam * tau
    mm[0, 0] = K * res  # tau-gate stage on the vacuum-rail pair
    mm[3, 3] = K * res  # CZ stage on the occupied-rail pair
    meta = {
        "kind": "distilled_cz",
        "n": config.n,
        "lambda": config.lam,
        "kappa": config.kappa,
        "tau": float(tau),
        "gamma1_prime": g1p,
        "single_photon_factor": K,
        "gamma_overlap": gam,
        "distillation_transmissions": [math.sqrt(g), math.sqrt(g1p),
                                       math.sqrt(g * g1p) * tau],
    }
    return _finish(logical, mm, meta)


def heralded_success_probability(table: GateTable, amps: np.ndarray) -> float:
    """Probability of a loss/bunching-free outcome for a given input."""
    amps = np.asarray(amps, dtype=complex)
    weights = np.abs(amps) ** 2
    survive = (np.sum(np.abs(table.logical) ** 2, axis=0)
               + np.sum(np.abs(table.mismatch) ** 2, axis=0))
    return float(np.dot(weights, survive))


def heralded_fidelity(table: GateTable, amps: np.ndarray) -> float:
    """Fidelity of the renormalized surviving output against the ideal CZ.

    Mismatch-tagged amplitudes survive detection but are orthogonal to the
    target, so they enter the normalization only.
    """
    amps = np.asarray(amps, dtype=complex)
    out = table.logical @ amps
    out_mm = table.mismatch @ amps
    norm = float(np.sum(np.abs(out) ** 2) + np.sum(np.abs(out_mm) ** 2))
    if norm <= 0.0:
        raise DomainError("zero surviving norm: heralded fidelity undefined")
    ideal = np.array([1, 1, 1, -1]) * amps
    return float(abs(np.vdot(ideal, out)) ** 2 / norm)


def unheralded_fidelity(table: GateTable, amps: np.ndarray) -> float:
    """Fidelity without post-selection.

    The overlap with the ideal CZ output is taken against the full unit
    probability budget: mismatch amplitudes and failure mass are excluded
    from the target but included in the normalization, so photon loss
    counts as error.
    """
    amps = np.asarray(amps, dtype=complex)
    n_in = float(np.sum(np.abs(amps) ** 2))
    if abs(n_in - 1.0) > 1e-9:
        raise ValueError(f"input not normalized (norm^2 = {n_in!r})")
    out = table.logical @ amps
    out_mm = table.mismatch @ amps
    norm = (float(np.sum(np.abs(out) ** 2) + np.sum(np.abs(out_mm) ** 2))
            + float(np.dot(np.abs(amps) ** 2, table.failure)))
    if norm <= 0.0:
        raise DomainError("zero output norm: fidelity undefined")
    ideal = np.array([1, 1, 1, -1]) * amps
    return float(abs(np.vdot(ideal, out)) ** 2 / norm)

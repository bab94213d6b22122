"""Qubit-oscillator observables evaluated directly on Fock amplitudes."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .eigensolver import GroundState

__all__ = [
    "ObservableSet",
    "VanishingWeight",
    "reduced_density_matrix",
    "entanglement_entropy",
    "entropy_from_density_matrix",
    "conditional_displacement",
    "raw_displacement",
    "spin_weight",
    "parity_expectation",
    "observables",
]

MIN_SPIN_WEIGHT = 1e-14
CLAMP_LIMIT = 1e-12


class VanishingWeight(ValueError):
    """Conditional displacement requested for a spin with (almost) no weight."""


@dataclass(frozen=True)
class ObservableSet:
    entropy: float
    x_plus: float
    x_minus: float
    weight_plus: float
    weight_minus: float
    parity: float

    def as_dict(self) -> dict:
        return asdict(self)


def reduced_density_matrix(gs: GroundState) -> np.ndarray:
    """Qubit density matrix in the (+, -) order after tracing the oscillator."""
    cp, cm = gs.plus, gs.minus
    off = float(cp @ cm)
    return np.array([[cp @ cp, off], [off, cm @ cm]])


def entropy_from_density_matrix(rho: np.ndarray) -> float:
    """von Neumann entropy in bits of a 2x2 density matrix."""
    p = np.linalg.eigvalsh(0.5 * (rho + rho.T))
    clipped = np.clip(p, 0.0, 1.0)
    if np.max(np.abs(clipped - p)) > CLAMP_LIMIT:
        raise ValueError(f"density matrix eigenvalues {p} outside [0, 1]")
    nz = clipped[clipped > 0]
    return float(min(1.0, max(0.0, -np.sum(nz * np.log2(nz)))))


def entanglement_entropy(gs: GroundState) -> float:
    return entropy_from_density_matrix(reduced_density_matrix(gs))


def spin_weight(gs: GroundState, spin: int) -> float:
    c = gs.spin(spin)
    return float(c @ c)


def raw_displacement(gs: GroundState, spin: int) -> float:
    """Unnormalized <phi_s|(a + a^dag)|phi_s>."""
    c = gs.spin(spin)
    n = np.arange(1, c.size)
    return float(2.0 * np.sum(np.sqrt(n) * c[:-1] * c[1:]))


def conditional_displacement(gs: GroundState, spin: int) -> float:
    """<a + a^dag> in the normalized oscillator state attached to ``spin``."""
    w = spin_weight(gs, spin)
    if w < MIN_SPIN_WEIGHT:
        raise VanishingWeight(f"spin {spin:+d} weight {w:.3e} below {MIN_SPIN_WEIGHT:g}")
    return raw_displacement(gs, spin) / w


def parity_expectation(gs: GroundState) -> float:
    """<sigma_x (-1)^{a^dag a}>."""
    sign = np.where(np.arange(gs.nmax) % 2 == 0, 1.0, -1.0)
    return float(2.0 * np.sum(sign * gs.plus * gs.minus))


def observables(gs: GroundState) -> ObservableSet:
    wp, wm = spin_weight(gs, 1), spin_weight(gs, -1)
    xp = raw_displacement(gs, 1) / wp if wp >= MIN_SPIN_WEIGHT else float("nan")
    xm = raw_displacement(gs, -1) / wm if wm >= MIN_SPIN_WEIGHT else float("nan")
    return ObservableSet(
        entropy=entanglement_entropy(gs),
        x_plus=xp,
        x_minus=xm,
        weight_plus=wp,
        weight_minus=wm,
        parity=parity_expectation(gs),
    )

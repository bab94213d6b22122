"""Position-space spinor components and their polaron / anti-polaron split.

The oscillator eigenfunctions are generated by the normalized three-term
recurrence.  At large ``|x|`` the Gaussian prefactor underflows long
before high-``n`` functions become negligible, so the recurrence runs on
a per-point rescaled copy and carries the log of the scale separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigensolver import GroundState
from .model import ModelParams

__all__ = [
    "GridSpec",
    "PositionWaveFunction",
    "PolaronWeights",
    "default_grid",
    "oscillator_functions",
    "oscillator_norms",
    "check_recurrence",
    "occupied_levels",
    "synthesize",
    "polaron_weights",
    "is_anti_polaron_overweighted",
    "trapezoid_split",
]

_RESCALE = 1e150


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-half_width, half_width]."""

    half_width: float
    points: int = 4096

    def array(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points)


def default_grid(p: ModelParams, points: int = 4096, padding: float = 10.0) -> GridSpec:
    return GridSpec(p.x0 + padding / math.sqrt(p.omega), points)


@dataclass(frozen=True, eq=False)
class PositionWaveFunction:
    grid: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    x0: float

    def component(self, spin: int) -> np.ndarray:
        return self.phi_plus if spin > 0 else self.phi_minus

    def norm(self) -> float:
        return float(np.trapezoid(self.phi_plus**2 + self.phi_minus**2, self.grid))


@dataclass(frozen=True)
class PolaronWeights:
    polaron_plus: float
    anti_polaron_plus: float
    polaron_minus: float
    anti_polaron_minus: float

    def polaron(self, spin: int) -> float:
        return self.polaron_plus if spin > 0 else self.polaron_minus

    def anti_polaron(self, spin: int) -> float:
        return self.anti_polaron_plus if spin > 0 else self.anti_polaron_minus


def _recurrence(omega: float, x: np.ndarray, nmax: int):
    """Yield (n, scaled psi_n, log scale) for n = 0 .. nmax-1.

    The true value is ``scaled * exp(logscale)``; ``logscale`` changes only
    where a rescale happened, and the caller must rescale accumulators by
    the yielded ``factor`` on those points.
    """
    xi = math.sqrt(omega) * x
    logscale = 0.25 * math.log(omega / math.pi) - 0.5 * xi**2
    prev = np.zeros_like(xi)
    cur = np.ones_like(xi)
    for n in range(nmax):
        yield n, cur, logscale, None
        nxt = math.sqrt(2.0 / (n + 1)) * xi * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            factor = np.where(big, np.abs(cur), 1.0)
            prev = prev / factor
            cur = cur / factor
            logscale = logscale + np.log(factor)
            yield None, None, None, factor


def oscillator_functions(omega: float, x: np.ndarray, nmax: int) -> np.ndarray:
    """psi_n(x) for n < nmax, shape (nmax, len(x)).  For tests and small nmax."""
    out = np.empty((nmax, x.size))
    for n, scaled, logscale, _ in _recurrence(omega, x, nmax):
        if n is not None:
            out[n] = scaled * np.exp(logscale)
    return out


def oscillator_norms(omega: float, x: np.ndarray, nmax: int) -> np.ndarray:
    """Trapezoidal norms of psi_n on ``x`` for n < nmax."""
    norms = np.empty(nmax)
    for n, scaled, logscale, _ in _recurrence(omega, x, nmax):
        if n is not None:
            norms[n] = np.trapezoid((scaled * np.exp(logscale)) ** 2, x)
    return norms


def check_recurrence(omega: float, x: np.ndarray, nmax: int, tol: float = 1e-8) -> float:
    """Self-test: every psi_n, n < nmax, is finite with unit norm on ``x``.

    Returns the worst norm deviation; raises RuntimeError above ``tol``.
    """
    norms = oscillator_norms(omega, np.asarray(x, dtype=float), nmax)
    if not np.all(np.isfinite(norms)):
        raise RuntimeError("oscillator recurrence produced non-finite values")
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > tol:
        raise RuntimeError(f"oscillator norms deviate from 1 by {worst:.2e} > {tol:g}")
    return worst


def occupied_levels(gs: GroundState, cutoff: float = 1e-16) -> int:
    """Number of Fock levels up to the last amplitude above ``cutoff``."""
    big = np.maximum(np.abs(gs.plus), np.abs(gs.minus)) > cutoff
    return int(np.flatnonzero(big).max(initial=0)) + 1


def synthesize(gs: GroundState, p: ModelParams | None = None,
               grid: GridSpec | np.ndarray | None = None) -> PositionWaveFunction:
    """phi_s(x) = sum_n c_{s,n} psi_n(x) on a position grid."""
    p = p or gs.params
    if grid is None:
        grid = default_grid(p)
    x = grid.array() if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    reach = p.x0 + 8.0 / math.sqrt(p.omega)
    if x.size < 512:
        raise ValueError(f"grid needs at least 512 points, got {x.size}")
    if np.any(np.diff(x) <= 0):
        raise ValueError("grid must be strictly increasing")
    if x[0] > -reach or x[-1] < reach:
        raise ValueError(f"grid must cover [-{reach:.6g}, {reach:.6g}]")

    cp, cm = gs.plus, gs.minus
    last = occupied_levels(gs, cutoff=0.0)
    acc_p = np.zeros_like(x)
    acc_m = np.zeros_like(x)
    logscale = 0.0
    for n, scaled, ls, factor in _recurrence(p.omega, x, last):
        if factor is not None:
            acc_p /= factor
            acc_m /= factor
            continue
        acc_p += cp[n] * scaled
        acc_m += cm[n] * scaled
        logscale = ls
    scale = np.exp(logscale)
    return PositionWaveFunction(x, acc_p * scale, acc_m * scale, p.x0)


def trapezoid_split(f: np.ndarray, x: np.ndarray, at: float = 0.0) -> tuple[float, float]:
    """Trapezoidal integrals of ``f`` left and right of ``at``.

    The straddling interval is cut at ``at`` using the linear interpolant,
    so the two halves add up to the full trapezoidal integral.
    """
    k = int(np.searchsorted(x, at, side="right"))
    if k == 0:
        return 0.0, float(np.trapezoid(f, x))
    if k == x.size:
        return float(np.trapezoid(f, x)), 0.0
    left = float(np.trapezoid(f[:k], x[:k]))
    right = float(np.trapezoid(f[k:], x[k:]))
    x0, x1, f0, f1 = x[k - 1], x[k], f[k - 1], f[k]
    t = (at - x0) / (x1 - x0)
    fm = f0 + t * (f1 - f0)
    left += 0.5 * (f0 + fm) * (at - x0)
    right += 0.5 * (fm + f1) * (x1 - at)
    return left, right


def polaron_weights(w: PositionWaveFunction) -> PolaronWeights:
    """Split each phi_s^2 at x = 0.

    Spin-up's well sits at -x0, so its polaron side is x < 0; spin-down's
    polaron side is x > 0.
    """
    if not np.allclose(w.grid, -w.grid[::-1], rtol=0, atol=1e-12 * max(1.0, abs(w.grid[-1]))):
        raise ValueError("polaron split needs a grid symmetric about 0")
    left_p, right_p = trapezoid_split(w.phi_plus**2, w.grid)
    left_m, right_m = trapezoid_split(w.phi_minus**2, w.grid)
    return PolaronWeights(
        polaron_plus=left_p,
        anti_polaron_plus=right_p,
        polaron_minus=right_m,
        anti_polaron_minus=left_m,
    )


def is_anti_polaron_overweighted(pw: PolaronWeights, spin: int) -> bool:
    return bool(pw.anti_polaron(spin) > pw.polaron(spin))

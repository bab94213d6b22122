"""Coupling sweeps and bisection for the two transition-like points.

``g0`` is where the spin-up conditional displacement turns from negative
to positive; ``epsilon_c`` is the asymmetry above which it is positive
already at vanishing coupling.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .eigensolver import (
    GroundState,
    IterationLimit,
    NonConvergence,
    SolverOptions,
    dense_oracle_ground_state,
    ground_state,
    initial_nmax,
)
from .model import ModelParams, build_hamiltonian
from .observables import VanishingWeight, conditional_displacement, observables
from .wavefunction import is_anti_polaron_overweighted, polaron_weights, synthesize

log = logging.getLogger(__name__)

__all__ = [
    "SweepRow",
    "SweepResult",
    "TransitionPoint",
    "NoSignChange",
    "SCAN_COLUMNS",
    "evaluate_point",
    "scan_g",
    "find_g0",
    "find_epsilon_c",
    "dense_solver",
]

Solver = Callable[[ModelParams, SolverOptions], GroundState]

SCAN_COLUMNS = ("g", "g_over_gc", "energy", "entropy", "x_plus", "x_minus",
                "weight_plus", "weight_minus", "parity", "overweighted_plus")

EC_PROBE = 1e-3  # probe coupling for epsilon_c, in units of g_c


class NoSignChange(RuntimeError):
    """The displacement sign never flips over the searched bracket."""


@dataclass(frozen=True)
class SweepRow:
    g: float
    g_over_gc: float
    energy: float
    entropy: float
    x_plus: float
    x_minus: float
    weight_plus: float
    weight_minus: float
    parity: float
    overweighted_plus: bool | None
    error: str | None = None

    def values(self) -> tuple:
        return tuple(getattr(self, c) for c in SCAN_COLUMNS)


@dataclass
class SweepResult:
    rows: list
    params: dict
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def as_dict(self) -> dict:
        return {"params": self.params, "meta": self.meta,
                "rows": [asdict(r) for r in self.rows]}


@dataclass(frozen=True)
class TransitionPoint:
    value: float
    bracket: tuple
    kind: str  # "G0" or "EpsilonC"
    iterations: int

    def as_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value,
                "bracket": list(self.bracket), "iterations": self.iterations}


def dense_solver(p: ModelParams, options: SolverOptions) -> GroundState:
    """Dense-oracle ground state at the adaptive solver's starting truncation."""
    nmax = options.nmax or initial_nmax(p)
    return dense_oracle_ground_state(build_hamiltonian(p, nmax))


def _failed_row(g, gc, message):
    nan = float("nan")
    return SweepRow(g, g / gc if gc > 0 else nan, nan, nan, nan, nan, nan, nan, nan,
                    None, message)


def evaluate_point(p: ModelParams, options: SolverOptions | None = None,
                   solver: Solver = ground_state) -> SweepRow:
    """Ground state, observables and the spin-up overweighting flag at one point."""
    options = options or SolverOptions()
    gc = p.g_c
    try:
        gs = solver(p, options)
    except (NonConvergence, IterationLimit) as exc:
        log.warning("g=%g: %s", p.g, exc)
        return _failed_row(p.g, gc, f"{type(exc).__name__}: {exc}")
    obs = observables(gs)
    weights = polaron_weights(synthesize(gs))
    return SweepRow(
        g=p.g,
        g_over_gc=p.g / gc if gc > 0 else float("nan"),
        energy=gs.energy,
        entropy=obs.entropy,
        x_plus=obs.x_plus,
        x_minus=obs.x_minus,
        weight_plus=obs.weight_plus,
        weight_minus=obs.weight_minus,
        parity=obs.parity,
        overweighted_plus=is_anti_polaron_overweighted(weights, 1),
    )


def _evaluate_star(args):
    return evaluate_point(*args)


def scan_g(p: ModelParams, g_min: float, g_max: float, points: int,
           options: SolverOptions | None = None, workers: int = 1,
           solver: Solver = ground_state) -> SweepResult:
    """Evaluate ``points`` couplings uniformly spaced on [g_min, g_max].

    ``p.g`` is ignored.  Rows come back in coupling order whatever the
    completion order of the workers.
    """
    if not 0 <= g_min < g_max:
        raise ValueError(f"need 0 <= g_min < g_max, got {g_min}, {g_max}")
    if points < 2:
        raise ValueError(f"need at least 2 points, got {points}")
    options = options or SolverOptions()
    grid = np.linspace(g_min, g_max, points)
    jobs = [(p.with_(g=float(g)), options, solver) for g in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_star, jobs))
    else:
        rows = [_evaluate_star(job) for job in jobs]
    params = p.as_dict()
    params.pop("g")
    return SweepResult(rows, params, {"options": asdict(options)})


def _x_plus(p: ModelParams, options: SolverOptions, solver: Solver) -> float:
    gs = solver(p, options)
    try:
        return conditional_displacement(gs, 1)
    except VanishingWeight:
        # spin-up fully suppressed: nothing left on the negative side
        return 0.0


def _bisect(f, lo, hi, tol, max_iter=200):
    """Bisect on the sign of f with f(lo) < 0 <= f(hi)."""
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo, hi, it


def find_g0(p: ModelParams, tol: float, options: SolverOptions | None = None,
            solver: Solver = ground_state, max_expansions: int = 6,
            min_fraction: float = 1e-3, bracket: tuple | None = None) -> TransitionPoint:
    """Coupling where X_+ turns from negative to positive.

    Brackets start at [g_c, 4 g_c] (or ``bracket``); the right end doubles
    while X_+ stays negative, and when X_+ at the left end is already
    non-negative the left end is halved down to ``min_fraction * g_c``
    looking for a negative value.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if p.Omega <= 0:
        raise ValueError("g0 is measured against g_c, which needs Omega > 0")
    options = options or SolverOptions()
    gc = p.g_c

    def f(g):
        return _x_plus(p.with_(g=g), options, solver)

    lo, hi = bracket if bracket is not None else (gc, 4.0 * gc)
    if f(lo) >= 0:
        hi = lo
        lo = 0.5 * lo
        while f(lo) >= 0:
            hi = lo
            lo *= 0.5
            if lo < min_fraction * gc:
                raise NoSignChange(
                    f"X_+ >= 0 down to g = {hi:.3g} (epsilon = {p.epsilon:g}, "
                    f"omega = {p.omega:g}); no displacement sign transition"
                )
    else:
        expansions = 0
        while f(hi) < 0:
            expansions += 1
            nxt = 2.0 * hi
            if expansions > max_expansions or initial_nmax(p.with_(g=nxt)) > options.max_nmax:
                raise NoSignChange(
                    f"X_+ < 0 up to g = {hi:.3g} (epsilon = {p.epsilon:g}); "
                    "bracket could not be established"
                )
            lo, hi = hi, nxt
    lo, hi, it = _bisect(f, lo, hi, tol)
    return TransitionPoint(0.5 * (lo + hi), (lo, hi), "G0", it)


def find_epsilon_c(omega: float, tol: float, Omega: float = 1.0,
                   options: SolverOptions | None = None,
                   solver: Solver = ground_state) -> TransitionPoint:
    """Asymmetry where X_+ at a small probe coupling changes sign.

    Bisects on [omega/2, 2 omega] with the probe at 1e-3 g_c.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    options = options or SolverOptions()
    base = ModelParams(omega=omega, Omega=Omega)
    g_probe = EC_PROBE * base.g_c

    def f(eps):
        return _x_plus(base.with_(epsilon=eps, g=g_probe), options, solver)

    lo, hi = 0.5 * omega, 2.0 * omega
    if not (f(lo) < 0 <= f(hi)):
        raise NoSignChange(
            f"X_+ at g = {g_probe:.3g} does not change sign on [{lo:g}, {hi:g}]"
        )
    lo, hi, it = _bisect(f, lo, hi, tol)
    return TransitionPoint(0.5 * (lo + hi), (lo, hi), "EpsilonC", it)

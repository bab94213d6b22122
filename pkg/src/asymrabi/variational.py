"""Coherent-state variational ground states.

Four schemes, from cheapest to richest:

* ``fixed``  two oppositely displaced coherent states, displacement g/omega
* ``gvm``    same two-state ansatz with the displacement optimized
* ``four``   polaron + anti-polaron coherent state on each spin
* ``smallg`` closed-form weak-coupling solution of the quadratic energy

Coherent states are displaced vacua with real displacement ``lam``, so
``<a> = lam``.  Overlap rules used throughout::

    <l|m> = exp(-(l - m)^2 / 2)
    <l|a^dag a|m> = l m <l|m>
    <l|a + a^dag|m> = (l + m) <l|m>
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize, root

from .model import ModelParams

log = logging.getLogger(__name__)

__all__ = [
    "VariationalSolution",
    "DegenerateState",
    "energy_two_state",
    "two_state_envelope",
    "two_state_envelope_derivative",
    "minimize_two_state",
    "FOUR_KEYS",
    "energy_four_coherent",
    "four_from_two_state",
    "symmetric_four_coherent",
    "minimize_four_coherent",
    "small_g_solution",
    "minimize_small_g",
    "energy_small_g",
    "METHODS",
    "solve_variational",
]

FIXED, GVM, FOUR, SMALLG = "fixed", "gvm", "four", "smallg"
METHODS = (FIXED, GVM, FOUR, SMALLG)

# amplitude (C * alpha) and displacement per spin and packet
FOUR_KEYS = ("a_mP", "a_mA", "a_pP", "a_pA", "l_mP", "l_mA", "l_pP", "l_pA")


class DegenerateState(ValueError):
    """Trial state norm underflowed."""


@dataclass
class VariationalSolution:
    ansatz: str
    params: dict
    energy: float
    converged: bool = True
    iterations: int = 0
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "ansatz": self.ansatz,
            "energy": self.energy,
            "converged": self.converged,
            "iterations": self.iterations,
            "params": dict(self.params),
            "notes": list(self.notes),
        }


# -- two coherent states --------------------------------------------------

def energy_two_state(p: ModelParams, lam: float, theta: float) -> float:
    """Energy of cos(theta/2)|+>|-lam> + sin(theta/2)|->|lam>."""
    return (p.omega * lam**2 - 2.0 * p.g * lam
            + 0.5 * (p.Omega * math.exp(-2.0 * lam**2) * math.sin(theta)
                     + p.epsilon * math.cos(theta)))


def _theta_branch(p: ModelParams, lam: float) -> float:
    tunnel = p.Omega * math.exp(-2.0 * lam**2)
    root = math.hypot(tunnel, p.epsilon)
    if root == 0.0:
        return 1.5 * math.pi
    return math.atan2(-tunnel / root, -p.epsilon / root)


def two_state_envelope(p: ModelParams, lam: float) -> float:
    """Two-state energy with theta eliminated on the minimizing branch."""
    return (p.omega * lam**2 - 2.0 * p.g * lam
            - 0.5 * math.sqrt(p.Omega**2 * math.exp(-4.0 * lam**2) + p.epsilon**2))


def two_state_envelope_derivative(p: ModelParams, lam: float) -> float:
    t2 = p.Omega**2 * math.exp(-4.0 * lam**2)
    root = math.sqrt(t2 + p.epsilon**2)
    tail = 2.0 * lam * t2 / root if root > 0 else 0.0
    return 2.0 * p.omega * lam - 2.0 * p.g + tail


def _two_state_solution(p, ansatz, lam, iterations=0, converged=True, notes=()):
    theta = _theta_branch(p, lam)
    return VariationalSolution(
        ansatz=ansatz,
        params={"lambda": lam, "theta": theta},
        energy=two_state_envelope(p, lam),
        converged=converged,
        iterations=iterations,
        notes=list(notes),
    )


def minimize_two_state(p: ModelParams, mode: str = GVM, scan_points: int = 2001) -> VariationalSolution:
    """FixedLambda (``mode="fixed"``) or GVM (``mode="gvm"``) ground state.

    GVM locates every sign change of dE_G/dlambda on [0, 2g/omega] with a
    scan, polishes each with Brent's method, and keeps the lowest minimum.
    """
    if mode == FIXED:
        return _two_state_solution(p, FIXED, p.g / p.omega)
    if mode != GVM:
        raise ValueError(f"unknown two-state mode {mode!r}")
    if p.g == 0:
        return _two_state_solution(p, GVM, 0.0)

    upper = 2.0 * p.g / p.omega
    lams = np.linspace(0.0, upper, scan_points)
    deriv = np.array([two_state_envelope_derivative(p, l) for l in lams])
    candidates = []
    iterations = 0
    converged = True
    for i in np.flatnonzero((deriv[:-1] < 0) & (deriv[1:] >= 0)):
        root, info = brentq(lambda l: two_state_envelope_derivative(p, l),
                            lams[i], lams[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps,
                            maxiter=200, full_output=True, disp=False)
        iterations += info.iterations
        converged &= info.converged
        candidates.append(root)
    if not candidates:
        converged = False
        candidates.append(lams[np.argmin([two_state_envelope(p, l) for l in lams])])
    lam = min(candidates, key=lambda l: two_state_envelope(p, l))
    slope = abs(two_state_envelope_derivative(p, lam))
    notes = []
    if slope > 1e-12:
        # the root is bracketed to machine precision; |E'| is limited by E''*ulp
        scale = 2.0 * p.omega + 8.0 * p.Omega
        if slope > 1e-12 * max(1.0, scale * upper):
            converged = False
        notes.append(f"|dE/dlambda| = {slope:.2e} at the polished root")
    return _two_state_solution(p, GVM, lam, iterations, converged, notes)


# -- four coherent states -------------------------------------------------

def _components(q):
    amps = np.array([q["a_mP"], q["a_mA"], q["a_pP"], q["a_pA"]], dtype=float)
    lams = np.array([q["l_mP"], q["l_mA"], q["l_pP"], q["l_pA"]], dtype=float)
    spins = np.array([-1.0, -1.0, 1.0, 1.0])
    return amps, lams, spins


def _four_moments(p: ModelParams, amps, lams, spins):
    """(<H>, <Psi|Psi>) summed over all 16 component pairs."""
    dl = lams[:, None] - lams[None, :]
    overlap = np.exp(-0.5 * dl**2)
    same = spins[:, None] == spins[None, :]
    s = spins[:, None]
    diag_terms = (p.omega * lams[:, None] * lams[None, :]
                  + s * p.g * (lams[:, None] + lams[None, :])
                  + s * 0.5 * p.epsilon)
    hmat = np.where(same, diag_terms, 0.5 * p.Omega) * overlap
    smat = np.where(same, overlap, 0.0)
    weight = amps[:, None] * amps[None, :]
    return float(np.sum(weight * hmat)), float(np.sum(weight * smat))


def energy_four_coherent(p: ModelParams, q: dict) -> float:
    """<Psi|H|Psi>/<Psi|Psi> for the polaron + anti-polaron ansatz.

    ``q`` maps FOUR_KEYS to values; amplitudes need not be normalized.
    """
    num, norm = _four_moments(p, *_components(q))
    if not norm > 1e-12:
        raise DegenerateState(f"trial state norm {norm:.3e} too small")
    return num / norm


def _vec_to_q(v):
    return dict(zip(FOUR_KEYS, map(float, v)))


def _q_to_vec(q):
    return np.array([q[k] for k in FOUR_KEYS], dtype=float)


def _normalized_four(p, q):
    amps, lams, spins = _components(q)
    _, norm = _four_moments(p, amps, lams, spins)
    scaled = dict(q)
    for key in ("a_mP", "a_mA", "a_pP", "a_pA"):
        scaled[key] = q[key] / math.sqrt(norm)
    return scaled


def _describe_four(p, q):
    """Add C^pm and normalized alpha^pm_{P,A} to the raw amplitudes."""
    q = _normalized_four(p, q)
    out = dict(q)
    for spin, tag in ((-1, "m"), (1, "p")):
        aP, aA = q[f"a_{tag}P"], q[f"a_{tag}A"]
        lP, lA = q[f"l_{tag}P"], q[f"l_{tag}A"]
        w = aP**2 + aA**2 + 2.0 * aP * aA * math.exp(-0.5 * (lP - lA) ** 2)
        c = math.sqrt(max(w, 0.0))
        out[f"C_{tag}"] = c
        out[f"alpha_{tag}P"] = aP / c if c > 0 else 0.0
        out[f"alpha_{tag}A"] = aA / c if c > 0 else 0.0
    return out


def four_from_two_state(lam: float, theta: float, anti: float = 0.0) -> dict:
    """Embed the two-state solution; anti-polarons sit at the mirrored positions."""
    up, down = math.cos(0.5 * theta), math.sin(0.5 * theta)
    return {
        "a_mP": down, "a_mA": anti * down,
        "a_pP": up, "a_pA": anti * up,
        "l_mP": lam, "l_mA": -lam,
        "l_pP": -lam, "l_pA": lam,
    }


def symmetric_four_coherent(alpha_p: float, alpha_a: float, lam_p: float, lam_a: float) -> dict:
    """Odd-parity member of the family: C^- = -C^+ = 1/sqrt 2,
    alpha^- = alpha^+, lambda^- = -lambda^+."""
    c = 1.0 / math.sqrt(2.0)
    return {
        "a_mP": c * alpha_p, "a_mA": c * alpha_a,
        "a_pP": -c * alpha_p, "a_pA": -c * alpha_a,
        "l_mP": lam_p, "l_mA": lam_a,
        "l_pP": -lam_p, "l_pA": -lam_a,
    }


def _nelder_mead(fun, x0, maxiter):
    res = minimize(fun, x0, method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": maxiter,
                            "maxfev": 2 * maxiter, "adaptive": True})
    return res


def _polish(fun, x0, cycles=12, maxiter=20000, renorm=None):
    """Restart the simplex from its own optimum until the energy stops moving."""
    x = np.asarray(x0, dtype=float)
    f = fun(x)
    nit = 0
    for _ in range(cycles):
        res = _nelder_mead(fun, x, maxiter)
        nit += res.nit
        improvement = f - res.fun
        if res.fun < f:
            x, f = res.x, res.fun
            if renorm is not None:
                x = renorm(x)
        if improvement < 1e-12:
            return x, f, nit, True
    return x, f, nit, False


def _unit_amplitudes(v):
    # overall amplitude scale is a gauge; keep it O(1) between restarts
    v = v.copy()
    v[:4] /= np.linalg.norm(v[:4])
    return v


def _safe_energy(p):
    def fun(v):
        try:
            return energy_four_coherent(p, _vec_to_q(v))
        except DegenerateState:
            return math.inf
    return fun


def _symmetric_start(p: ModelParams, gvm: VariationalSolution):
    """Minimum within the parity-constrained family, angle-parameterized."""
    lam = gvm.params["lambda"]

    def family(v):
        return symmetric_four_coherent(math.cos(v[0]), math.sin(v[0]), v[1], v[2])

    def fun(v):
        try:
            return energy_four_coherent(p, family(v))
        except DegenerateState:
            return math.inf

    lam_ref = p.g / p.omega
    seeds = [[phi, lp, sgn * lp]
             for phi in (0.1, 0.6, -0.6)
             for lp in sorted({lam, 0.5 * lam_ref, lam_ref})
             for sgn in (-1.0, 0.0)]
    nit = 0
    best = None
    for seed in seeds:
        res = _nelder_mead(fun, seed, 2000)
        nit += res.nit
        if best is None or res.fun < best[1]:
            best = (res.x, res.fun)
    x, f, more, ok = _polish(fun, best[0], cycles=6)
    return family(x), f, nit + more, ok


def minimize_four_coherent(p: ModelParams) -> VariationalSolution:
    """Multi-start simplex minimization of the four-coherent energy.

    Starts: the GVM solution, the GVM solution with +/-0.1 anti-polaron
    admixture at the mirrored displacements, and the parity-symmetric
    family minimum.  All deterministic.
    """
    gvm = minimize_two_state(p, GVM)
    lam, theta = gvm.params["lambda"], gvm.params["theta"]
    sym, _, sym_nit, _ = _symmetric_start(p, gvm)
    starts = [
        four_from_two_state(lam, theta, 0.0),
        four_from_two_state(lam, theta, 0.1),
        four_from_two_state(lam, theta, -0.1),
        sym,
    ]
    fun = _safe_energy(p)
    best = None
    total = sym_nit
    any_converged = False
    for q in starts:
        x, f, nit, ok = _polish(fun, _unit_amplitudes(_q_to_vec(q)), renorm=_unit_amplitudes)
        total += nit
        any_converged |= ok
        if best is None or f < best[1]:
            best = (x, f, ok)
    x, f, ok = best
    return VariationalSolution(
        ansatz=FOUR,
        params=_describe_four(p, _vec_to_q(x)),
        energy=float(f),
        converged=bool(ok and any_converged),
        iterations=total,
    )


# -- weak-coupling closed form -------------------------------------------

def small_g_solution(p: ModelParams) -> VariationalSolution:
    """Closed-form stationary point of the quadratic energy at the critical
    asymmetry (lambda_2 = 0).  Reduces to epsilon_c = omega at g = 0."""
    if p.Omega <= 0:
        raise ValueError("the weak-coupling solution needs Omega > 0")
    surd = math.sqrt(p.Omega**2 + p.omega**2) - p.omega
    lam1 = 2.0 * p.g * surd / p.Omega**2
    ratio = -surd / p.Omega  # alpha_2 / alpha_1
    eps_c = 2.0 * p.g * lam1 + p.omega * lam1**2 - 0.5 * p.Omega * (1.0 / ratio - ratio)
    a1 = 1.0 / math.sqrt(1.0 + ratio**2)
    a2 = ratio * a1
    notes = []
    if p.g > 0.1 * p.g_c:
        notes.append(f"g = {p.g:g} exceeds 0.1 g_c; weak-coupling form outside its validity")
    q = {"alpha1": a1, "alpha2": a2, "lambda1": lam1, "lambda2": 0.0,
         "alpha_ratio": ratio, "epsilon_c": eps_c}
    return VariationalSolution(
        ansatz=SMALLG,
        params=q,
        energy=energy_small_g(p, a1, a2, lam1, 0.0),
        notes=notes,
    )


def energy_small_g(p: ModelParams, a1: float, a2: float, l1: float, l2: float) -> float:
    """Energy of a1|->|l1> + a2|+>|l2> to second order in the displacements."""
    if abs(a1**2 + a2**2 - 1.0) > 1e-10:
        raise ValueError(f"amplitudes must satisfy a1^2 + a2^2 = 1, got {a1**2 + a2**2!r}")
    return (p.omega * (a1**2 * l1**2 + a2**2 * l2**2)
            + p.Omega * a1 * a2 * (1.0 - 0.5 * (l1 - l2) ** 2)
            + 2.0 * p.g * (a2**2 * l2 - a1**2 * l1)
            + 0.5 * p.epsilon * (a2**2 - a1**2))


def _small_g_gradient(p: ModelParams, v):
    phi, l1, l2 = v
    c, s = math.cos(phi), math.sin(phi)
    d = l1 - l2
    return np.array([
        math.sin(2 * phi) * (p.omega * (l2**2 - l1**2) + 2 * p.g * (l1 + l2) + p.epsilon)
        + p.Omega * math.cos(2 * phi) * (1.0 - 0.5 * d**2),
        2 * p.omega * c * c * l1 - p.Omega * c * s * d - 2 * p.g * c * c,
        2 * p.omega * s * s * l2 + p.Omega * c * s * d + 2 * p.g * s * s,
    ])


def minimize_small_g(p: ModelParams) -> VariationalSolution:
    """Numerical minimum of the quadratic energy on the circle a1^2 + a2^2 = 1.

    a1 = cos(phi), a2 = sin(phi); BFGS from the undisplaced tunneling
    state, then the stationarity system is solved to machine precision.
    """
    def fun(v):
        return energy_small_g(p, math.cos(v[0]), math.sin(v[0]), v[1], v[2])

    res = minimize(fun, np.array([-0.25 * math.pi, 0.0, 0.0]),
                   jac=lambda v: _small_g_gradient(p, v), method="BFGS",
                   options={"gtol": 1e-14, "maxiter": 10000})
    sol = root(lambda v: _small_g_gradient(p, v), res.x, method="hybr", tol=1e-15)
    grad = lambda v: float(np.max(np.abs(_small_g_gradient(p, v))))  # noqa: E731
    x = sol.x if grad(sol.x) < grad(res.x) and fun(sol.x) <= res.fun + 1e-15 else res.x
    phi, l1, l2 = map(float, x)
    a1, a2 = math.cos(phi), math.sin(phi)
    if a1 < 0:
        a1, a2 = -a1, -a2
    return VariationalSolution(
        ansatz=SMALLG,
        params={"alpha1": a1, "alpha2": a2, "lambda1": l1, "lambda2": l2,
                "alpha_ratio": a2 / a1},
        energy=fun(x),
        converged=grad(x) <= 1e-12,
        iterations=int(res.nit + sol.nfev),
    )


def solve_variational(p: ModelParams, method: str) -> VariationalSolution:
    if method in (FIXED, GVM):
        return minimize_two_state(p, method)
    if method == FOUR:
        return minimize_four_coherent(p)
    if method == SMALLG:
        return small_g_solution(p)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")

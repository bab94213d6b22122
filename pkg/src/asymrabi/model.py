"""Model parameters and the spin-boson Hamiltonian in the spin x Fock basis.

Working Hamiltonian (energies in units of the tunneling rate ``Omega``)::

    H = omega a^dag a + Omega/2 sigma_x + epsilon/2 sigma_z + g sigma_z (a + a^dag)

Basis layout interleaves the two spin projections: row ``2n`` is
``|-_z> (x) |n>`` and row ``2n + 1`` is ``|+_z> (x) |n>``.  The spin-flip
band is then the first off-diagonal and the coupling band the second, so
the matrix has half-bandwidth 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ModelParams",
    "AsymmetricParams",
    "HamiltonianMatrix",
    "from_asymmetric_form",
    "critical_coupling",
    "build_hamiltonian",
    "basis_index",
]

SPIN_DOWN = -1
SPIN_UP = 1


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the working Hamiltonian, all in units of ``Omega``.

    ``Omega = 0`` is accepted so that the decoupled displaced-oscillator
    limit can be solved; everything else follows the sign conventions
    ``omega > 0``, ``g >= 0``, ``epsilon >= 0``.
    """

    omega: float
    epsilon: float = 0.0
    g: float = 0.0
    Omega: float = 1.0

    def __post_init__(self):
        for name in ("omega", "epsilon", "g", "Omega"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.Omega < 0:
            raise ValueError(f"Omega must be non-negative, got {self.Omega}")
        if self.g < 0:
            raise ValueError(f"coupling g must be non-negative, got {self.g}")
        if self.epsilon < 0:
            raise ValueError(
                f"epsilon must be non-negative, got {self.epsilon}; the model with "
                "epsilon < 0 is the mirror image with spins exchanged"
            )

    @property
    def g_c(self) -> float:
        return critical_coupling(self)

    @property
    def x0(self) -> float:
        """Position-space displacement of each spin's potential well."""
        return math.sqrt(2.0 * self.g**2 / self.omega**3)

    @property
    def X0(self) -> float:
        """Saturation value of the conditional displacement <a + a^dag>."""
        return 2.0 * self.g / self.omega

    def with_(self, **changes) -> "ModelParams":
        fields = {"omega": self.omega, "epsilon": self.epsilon, "g": self.g, "Omega": self.Omega}
        fields.update(changes)
        return ModelParams(**fields)

    def as_dict(self) -> dict:
        return {"omega": self.omega, "Omega": self.Omega, "epsilon": self.epsilon, "g": self.g}


@dataclass(frozen=True)
class AsymmetricParams:
    """Couplings of the sigma_x-coupled form
    ``omega a^dag a + g sigma_x (a + a^dag) + Delta sigma_z + epsilon_prime sigma_x``."""

    omega: float
    Delta: float
    epsilon_prime: float
    g: float


def from_asymmetric_form(p: AsymmetricParams) -> ModelParams:
    """Rotate the spin by pi/2 about y and rename couplings.

    The rotation maps sigma_x -> sigma_z and sigma_z -> -sigma_x, giving
    ``epsilon = 2 epsilon_prime`` and ``Omega = -2 Delta``.
    """
    if not p.Delta < 0:
        raise ValueError(
            f"Delta must be negative (Omega = -2 Delta > 0 convention), got {p.Delta}"
        )
    return ModelParams(omega=p.omega, epsilon=2.0 * p.epsilon_prime, g=p.g, Omega=-2.0 * p.Delta)


def critical_coupling(p: ModelParams) -> float:
    """Coupling scale sqrt(omega * Omega) / 2 at which polarons separate."""
    return math.sqrt(p.omega * p.Omega) / 2.0


def basis_index(spin: int, n: int) -> int:
    """Row index of ``|s_z> (x) |n>`` with ``spin`` in {-1, +1}."""
    if spin not in (SPIN_DOWN, SPIN_UP):
        raise ValueError(f"spin must be -1 or +1, got {spin}")
    return 2 * n + (spin > 0)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Banded real symmetric Hamiltonian for a fixed Fock truncation.

    ``bands[k]`` holds the k-th superdiagonal (length ``dim - k``), k = 0, 1, 2.
    """

    params: ModelParams
    nmax: int
    bands: tuple

    @property
    def dim(self) -> int:
        return 2 * self.nmax

    @property
    def diagonal(self) -> np.ndarray:
        return self.bands[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """H @ v for a vector or a (dim, k) block."""
        d0, d1, d2 = self.bands
        if v.ndim == 2:
            d0, d1, d2 = d0[:, None], d1[:, None], d2[:, None]
        out = d0 * v
        out[:-1] += d1 * v[1:]
        out[1:] += d1 * v[:-1]
        out[:-2] += d2 * v[2:]
        out[2:] += d2 * v[:-2]
        return out

    def upper_banded(self) -> np.ndarray:
        """LAPACK upper band storage, shape (3, dim)."""
        ab = np.zeros((3, self.dim))
        ab[2] = self.bands[0]
        ab[1, 1:] = self.bands[1]
        ab[0, 2:] = self.bands[2]
        return ab

    @cached_property
    def entries(self) -> sp.csr_matrix:
        """All structural slots as a CSR matrix, explicit zeros kept."""
        dim = self.dim
        rows, cols, vals = [np.arange(dim)], [np.arange(dim)], [self.bands[0]]
        for k in (1, 2):
            band = self.bands[k]
            idx = np.arange(dim - k)
            if k == 1:
                # only (-,n)<->(+,n) pairs are structural on the first band
                idx = idx[0::2]
                band = band[0::2]
            rows += [idx, idx + k]
            cols += [idx + k, idx]
            vals += [band, band]
        coo = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        )
        return coo.tocsr()

    def to_dense(self) -> np.ndarray:
        return self.entries.toarray()


def build_hamiltonian(p: ModelParams, nmax: int) -> HamiltonianMatrix:
    """Assemble H on ``nmax`` Fock levels per spin (dimension ``2 nmax``)."""
    nmax = int(nmax)
    if nmax < 2:
        raise ValueError(f"nmax must be at least 2, got {nmax}")
    n = np.arange(nmax, dtype=float)
    d0 = np.empty(2 * nmax)
    d0[0::2] = p.omega * n - p.epsilon / 2.0
    d0[1::2] = p.omega * n + p.epsilon / 2.0

    d1 = np.zeros(2 * nmax - 1)
    d1[0::2] = p.Omega / 2.0

    coupling = p.g * np.sqrt(n[1:])
    d2 = np.empty(2 * nmax - 2)
    d2[0::2] = -coupling
    d2[1::2] = coupling
    return HamiltonianMatrix(params=p, nmax=nmax, bands=(d0, d1, d2))

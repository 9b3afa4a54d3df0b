"""Bipartite density operators: construction, validation, decomposition, sampling.

Composite indices follow the row-major convention ``j * d2 + k`` for
``|j> (x) |k>``, which is what :func:`numpy.kron` produces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .validation import (
    DEFAULT_TOL,
    DimensionError,
    NormError,
    NotHermitianError,
    NotPositiveError,
    ParameterRangeError,
    TraceError,
    ValidationError,
    as_square,
    check_dims,
    check_probability_matrix,
)

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Validated bipartite state on C^d1 (x) C^d2."""

    matrix: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def d1(self) -> int:
        return self.dims[0]

    @property
    def d2(self) -> int:
        return self.dims[1]

    def reduced(self, side: int) -> np.ndarray:
        return reduced(self, side)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def tensor(self) -> np.ndarray:
        """Matrix reshaped to ``(d1, d2, d1, d2)``."""
        d1, d2 = self.dims
        return self.matrix.reshape(d1, d2, d1, d2)


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return self.coefficients**2

    def reconstruct(self) -> np.ndarray:
        """Return the ket ``sum_j c_j |a_j> (x) |b_j>`` (bases stored as columns)."""
        d1 = self.left_basis.shape[0]
        d2 = self.right_basis.shape[0]
        psi = np.zeros(d1 * d2, dtype=complex)
        for c, a, b in zip(self.coefficients, self.left_basis.T, self.right_basis.T):
            psi += c * np.kron(a, b)
        return psi


@dataclass(frozen=True)
class NamedStateSpec:
    """A named family member, e.g. ``NamedStateSpec("isotropic", {"w": 0.3})``."""

    variant: str
    params: dict[str, Any] = field(default_factory=dict)


def new_density(matrix, d1: int, d2: int, tol: float = DEFAULT_TOL.validation) -> DensityOperator:
    """Validate ``matrix`` as a density operator with local dimensions ``(d1, d2)``.

    Eigenvalues in ``[-tol, 0)`` are clipped to zero and the trace renormalised.

    Raises
    ------
    DimensionError, NotHermitianError, TraceError, NotPositiveError
    """
    d1, d2 = check_dims(d1, d2)
    a = as_square(matrix)
    if a.shape[0] != d1 * d2:
        raise DimensionError(f"matrix size {a.shape[0]} does not match dims {(d1, d2)}")
    a = check_probability_matrix(a, tol)
    a = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(a)
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        a = (v * w) @ v.conj().T
        a = (a + a.conj().T) / 2
    return DensityOperator(np.array(a, dtype=complex), (d1, d2))


def as_density(rho, dims=None) -> DensityOperator:
    """Coerce an array or :class:`DensityOperator` into a validated state."""
    if isinstance(rho, DensityOperator):
        return rho
    a = np.asarray(rho, dtype=complex)
    if dims is None:
        d = int(round(np.sqrt(a.shape[0])))
        if d * d != a.shape[0]:
            raise DimensionError("dims are required when the matrix size is not a perfect square")
        dims = (d, d)
    return new_density(a, *dims)


def pure_density(ket, d1: int, d2: int) -> DensityOperator:
    psi = np.asarray(ket, dtype=complex).ravel()
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-12:
        raise NormError(f"ket has norm {nrm!r}")
    return new_density(np.outer(psi, psi.conj()), d1, d2)


def reduced(rho: DensityOperator, side: int) -> np.ndarray:
    """Partial trace keeping subsystem ``side`` (1 or 2)."""
    t = rho.tensor()
    if side == 1:
        out = np.einsum("ajbj->ab", t)
    elif side == 2:
        out = np.einsum("jajb->ab", t)
    else:
        raise ValidationError(f"side must be 1 or 2, got {side!r}")
    return (out + out.conj().T) / 2


def von_neumann_entropy(matrix, tol: float = 1e-9) -> float:
    """Entropy in bits, with ``0 log 0 = 0``."""
    a = check_probability_matrix(matrix, tol)
    lam = np.linalg.eigvalsh((a + a.conj().T) / 2)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam)))


def schmidt_decompose(ket, d1: int, d2: int) -> SchmidtForm:
    """Schmidt form of a unit ket; coefficients are non-increasing.

    Only coefficients above ``1e-15`` are kept.
    """
    d1, d2 = check_dims(d1, d2)
    psi = np.asarray(ket, dtype=complex).ravel()
    if psi.size != d1 * d2:
        raise DimensionError(f"ket has length {psi.size}, expected {d1 * d2}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-12:
        raise NormError(f"ket has norm {nrm!r}")
    u, s, vh = np.linalg.svd(psi.reshape(d1, d2))
    r = int(np.sum(s > 1e-15))
    return SchmidtForm(s[:r], u[:, :r], vh.T[:, :r])


def random_density(d1: int, d2: int, rank: int | None = None, seed=None) -> DensityOperator:
    """Induced (Ginibre) random state ``G G^dag / tr[G G^dag]``.

    ``G`` has shape ``(d1 d2, rank)``; the default rank is full.
    """
    d1, d2 = check_dims(d1, d2)
    dim = d1 * d2
    rank = dim if rank is None else int(rank)
    if not 1 <= rank <= dim:
        raise ParameterRangeError(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    a = g @ g.conj().T
    a /= np.trace(a).real
    return new_density((a + a.conj().T) / 2, d1, d2)


def random_pure_ket(dim: int, rng) -> np.ndarray:
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def random_unitary(n: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def bloch_state(m) -> np.ndarray:
    """Single-qubit operator ``(1 + m . sigma) / 2``."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3,):
        raise DimensionError("Bloch vector must have three components")
    if np.linalg.norm(m) > 1 + 1e-12:
        raise ParameterRangeError(f"Bloch vector has length {np.linalg.norm(m)!r} > 1")
    return (np.eye(2) + np.einsum("k,kab->ab", m, PAULI)) / 2


def swap_operator(d: int) -> np.ndarray:
    f = np.zeros((d * d, d * d))
    for j in range(d):
        for k in range(d):
            f[j * d + k, k * d + j] = 1.0
    return f


def singlet_ket() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def bell_ket(d: int = 2) -> np.ndarray:
    """``sum_j |jj> / sqrt(d)``."""
    psi = np.zeros(d * d, dtype=complex)
    psi[[j * d + j for j in range(d)]] = 1 / np.sqrt(d)
    return psi


def isotropic(w: float) -> DensityOperator:
    """Singlet weight ``w`` mixed with the normalised triplet projector."""
    if not 0 <= w <= 1:
        raise ParameterRangeError(f"w must lie in [0, 1], got {w!r}")
    p = np.outer(singlet_ket(), singlet_ket().conj())
    return new_density(w * p + (1 - w) / 3 * (np.eye(4) - p), 2, 2)


def werner(d: int, x: float) -> DensityOperator:
    """Two-qudit Werner state with swap expectation ``x``."""
    if int(d) != d or d < 2:
        raise ParameterRangeError(f"d must be an integer >= 2, got {d!r}")
    if not -1 <= x <= 1:
        raise ParameterRangeError(f"x must lie in [-1, 1], got {x!r}")
    d = int(d)
    eye = np.eye(d * d)
    m = eye / d**2 + (x - 1 / d) / (d**2 - 1) * (swap_operator(d) - eye / d)
    return new_density(m, d, d)


def product(m, n) -> DensityOperator:
    return new_density(np.kron(bloch_state(m), bloch_state(n)), 2, 2)


def separable_z(lam1: float, lam2: float, t1, t2) -> DensityOperator:
    """``lam1 |z><z| (x) tau1 + lam2 |-z><-z| (x) tau2`` with Bloch vectors ``t1``, ``t2``."""
    if lam1 < 0 or lam2 < 0 or abs(lam1 + lam2 - 1) > 1e-12:
        raise ParameterRangeError("weights must be nonnegative and sum to 1")
    up = np.diag([1.0, 0.0])
    down = np.diag([0.0, 1.0])
    m = lam1 * np.kron(up, bloch_state(t1)) + lam2 * np.kron(down, bloch_state(t2))
    return new_density(m, 2, 2)


def separable_ensemble(weights, left_kets, right_kets) -> DensityOperator:
    """``sum_j w_j |psi_j><psi_j| (x) |chi_j><chi_j|`` for normalised kets."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise ParameterRangeError("weights must be nonnegative and sum to 1")
    left = [np.asarray(k, dtype=complex) for k in left_kets]
    right = [np.asarray(k, dtype=complex) for k in right_kets]
    d1, d2 = left[0].size, right[0].size
    m = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for w, a, b in zip(weights, left, right):
        a = a / np.linalg.norm(a)
        b = b / np.linalg.norm(b)
        psi = np.kron(a, b)
        m += w * np.outer(psi, psi.conj())
    return new_density(m, d1, d2)


def schmidt_mixture(weights, probs, phases=None, d1=None, d2=None) -> DensityOperator:
    """Mixture of pure states sharing the computational Schmidt basis.

    ``probs[alpha][j]`` are the Schmidt probabilities of component ``alpha``;
    phases default to zero.
    """
    weights = np.asarray(weights, dtype=float)
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise ParameterRangeError("mixture weights must be nonnegative and sum to 1")
    if probs.shape[0] != weights.size:
        raise DimensionError("one Schmidt probability vector per mixture weight is required")
    if np.any(probs < 0) or np.any(np.abs(probs.sum(axis=1) - 1) > 1e-12):
        raise ParameterRangeError("Schmidt probabilities must be nonnegative and sum to 1")
    r = probs.shape[1]
    d1 = r if d1 is None else int(d1)
    d2 = r if d2 is None else int(d2)
    if r > min(d1, d2):
        raise DimensionError("more Schmidt terms than local dimensions")
    phases = np.zeros_like(probs) if phases is None else np.atleast_2d(np.asarray(phases, dtype=float))
    m = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for lam, p, ph in zip(weights, probs, phases):
        psi = np.zeros(d1 * d2, dtype=complex)
        for j in range(r):
            psi[j * d2 + j] = np.sqrt(p[j]) * np.exp(1j * ph[j])
        m += lam * np.outer(psi, psi.conj())
    return new_density(m, d1, d2)


_NAMED = {
    "singlet": lambda: pure_density(singlet_ket(), 2, 2),
    "isotropic": lambda w: isotropic(w),
    "werner": lambda d, x: werner(d, x),
    "trine_demo": lambda: pure_density(bell_ket(2), 2, 2),
    "separable_z": lambda lam1, lam2, t1, t2: separable_z(lam1, lam2, t1, t2),
    "product": lambda m, n: product(m, n),
    "schmidt_mixture": lambda weights, probs, phases=None: schmidt_mixture(weights, probs, phases),
}


def named_state(spec, **params) -> DensityOperator:
    """Build a named state from a :class:`NamedStateSpec` or a variant string."""
    if isinstance(spec, NamedStateSpec):
        variant, params = spec.variant, dict(spec.params)
    else:
        variant = str(spec)
    try:
        build = _NAMED[variant]
    except KeyError:
        raise ValidationError(f"unknown named state {variant!r}; choose from {sorted(_NAMED)}") from None
    try:
        return build(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {variant!r}: {exc}") from None


__all__ = [
    "DensityOperator",
    "NamedStateSpec",
    "SchmidtForm",
    "NotHermitianError",
    "NotPositiveError",
    "TraceError",
    "as_density",
    "bell_ket",
    "bloch_state",
    "isotropic",
    "named_state",
    "new_density",
    "product",
    "pure_density",
    "random_density",
    "random_unitary",
    "reduced",
    "schmidt_decompose",
    "schmidt_mixture",
    "separable_ensemble",
    "separable_z",
    "singlet_ket",
    "von_neumann_entropy",
    "werner",
]

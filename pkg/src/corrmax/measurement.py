"""Maximal POMs, Naimark lifting, joint statistics and correlation functionals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .state import PAULI, DensityOperator, new_density, reduced
from .validation import DEFAULT_TOL, CompletenessError, DimensionError, ValidationError


@dataclass(frozen=True, eq=False)
class MaximalPOM:
    """Rank-one POM ``{|a_j><a_j|}``; ``kets`` holds the vectors as columns (d x n)."""

    kets: np.ndarray

    def __post_init__(self):
        self.kets.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.kets.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.kets.shape[1]

    def elements(self) -> np.ndarray:
        """Stack of projector-like elements, shape ``(n, d, d)``."""
        return np.einsum("aj,bj->jab", self.kets, self.kets.conj())

    def padded(self, n: int) -> "MaximalPOM":
        """Append zero kets up to ``n`` outcomes."""
        if n < self.n_outcomes:
            raise DimensionError(f"cannot pad {self.n_outcomes} outcomes down to {n}")
        extra = np.zeros((self.dim, n - self.n_outcomes), dtype=complex)
        return MaximalPOM(np.hstack([self.kets, extra]))


@dataclass(frozen=True, eq=False)
class NaimarkFrame:
    """Orthonormal basis of C^n (columns of ``vectors``) lifting a POM on C^d.

    The physical space is spanned by the first ``dim`` coordinates.
    """

    vectors: np.ndarray
    dim: int

    def __post_init__(self):
        self.vectors.setflags(write=False)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def projection(self) -> np.ndarray:
        e = np.zeros((self.n, self.n))
        e[: self.dim, : self.dim] = np.eye(self.dim)
        return e

    def pom(self) -> MaximalPOM:
        return MaximalPOM(np.array(self.vectors[: self.dim, :]))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    table: np.ndarray

    def __post_init__(self):
        self.table.setflags(write=False)

    @property
    def p(self) -> np.ndarray:
        return self.table.sum(axis=1)

    @property
    def q(self) -> np.ndarray:
        return self.table.sum(axis=0)


@dataclass(frozen=True, eq=False)
class CoincidenceOperator:
    matrix: np.ndarray
    max_eigenvalue: float


def new_pom(kets, d: int | None = None, tol: float = DEFAULT_TOL.completeness) -> MaximalPOM:
    """Validate a list of kets (or a ``d x n`` column matrix) as a maximal POM.

    Zero kets are allowed and act as padding outcomes.
    """
    if isinstance(kets, np.ndarray) and kets.ndim == 2 and d is not None and kets.shape[0] == d:
        mat = np.array(kets, dtype=complex)
    else:
        vecs = [np.asarray(k, dtype=complex).ravel() for k in kets]
        if not vecs:
            raise CompletenessError("a POM needs at least one ket")
        d = vecs[0].size if d is None else d
        if any(v.size != d for v in vecs):
            raise DimensionError(f"all kets must have dimension {d}")
        mat = np.column_stack(vecs)
    if mat.shape[1] < mat.shape[0]:
        raise CompletenessError(f"{mat.shape[1]} kets cannot resolve the identity on C^{mat.shape[0]}")
    err = np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0])))
    if err > tol:
        raise CompletenessError(f"POM elements do not sum to the identity (max deviation {err:.3e})")
    return MaximalPOM(mat)


def spin_pom(direction) -> MaximalPOM:
    """Two-outcome qubit POM ``{(1 + a.sigma)/2, (1 - a.sigma)/2}`` for a unit direction ``a``."""
    a = np.asarray(direction, dtype=float)
    if a.shape != (3,):
        raise DimensionError("spin direction must be a 3-vector")
    nrm = np.linalg.norm(a)
    if abs(nrm - 1) > 1e-9:
        raise ValidationError(f"spin direction must be a unit vector, got length {nrm!r}")
    w, v = np.linalg.eigh(np.einsum("k,kab->ab", a / nrm, PAULI))
    v = v[:, ::-1]
    for j in range(2):
        k = np.flatnonzero(np.abs(v[:, j]) > 1e-12)[0]
        v[:, j] *= np.abs(v[k, j]) / v[k, j]
    return MaximalPOM(np.ascontiguousarray(v))


def trine_pom() -> MaximalPOM:
    """Three kets ``sqrt(2/3) |phi_j>`` at the vertices of an equilateral triangle."""
    return mirror_pom(1 / 3)


def mirror_pom(alpha: float) -> MaximalPOM:
    """Mirror-symmetric three-outcome qubit POM, equal to the trine at ``alpha = 1/3``."""
    if not 0 <= alpha <= 1:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha!r}")
    f1 = 1 - alpha
    f23 = (1 + alpha) / 2
    phi2 = np.array([np.sqrt(alpha), 1.0]) / np.sqrt(1 + alpha)
    phi3 = np.array([np.sqrt(alpha), -1.0]) / np.sqrt(1 + alpha)
    kets = [np.sqrt(f1) * np.array([1.0, 0.0]), np.sqrt(f23) * phi2, np.sqrt(f23) * phi3]
    return new_pom(kets, 2)


def basis_pom(unitary) -> MaximalPOM:
    """Orthogonal POM from the columns of a unitary."""
    u = np.asarray(unitary, dtype=complex)
    return new_pom(u, u.shape[0])


def naimark_extend(pom: MaximalPOM, n: int | None = None) -> NaimarkFrame:
    """Lift ``pom`` to an orthonormal frame on C^n whose first d coordinates reproduce it.

    The POM kets form the rows of a ``d x n`` isometry; the remaining
    ``n - d`` rows are an orthonormal basis of its null space.
    """
    n = pom.n_outcomes if n is None else int(n)
    if n < pom.n_outcomes:
        raise DimensionError(f"n = {n} is smaller than the number of outcomes {pom.n_outcomes}")
    top = pom.padded(n).kets
    d = pom.dim
    if n == d:
        return NaimarkFrame(np.array(top), d)
    comp = null_space(top).conj().T
    u = np.vstack([top, comp])
    return NaimarkFrame(u, d)


def _check_pair(rho: DensityOperator, a: MaximalPOM, b: MaximalPOM):
    if a.dim != rho.d1 or b.dim != rho.d2:
        raise DimensionError(f"POM dimensions ({a.dim}, {b.dim}) do not match state dims {rho.dims}")


def joint_distribution(rho: DensityOperator, a: MaximalPOM, b: MaximalPOM) -> JointDistribution:
    """``p_jk = <a_j, b_k| rho |a_j, b_k>``, negatives within round-off clipped to zero."""
    _check_pair(rho, a, b)
    t = np.einsum("aj,bk,abcd,cj,dk->jk", a.kets.conj(), b.kets.conj(), rho.tensor(), a.kets, b.kets, optimize=True)
    table = t.real
    if table.min(initial=0.0) < -1e-12:
        raise ValidationError(f"negative joint probability {table.min():.3e}")
    return JointDistribution(np.clip(table, 0.0, None))


def coincidence_rate(dist: JointDistribution) -> float:
    t = dist.table
    if t.shape[0] != t.shape[1]:
        raise DimensionError(f"coincidence rate needs a square table, got {t.shape}")
    return float(np.trace(t))


def coincidence(rho: DensityOperator, a: MaximalPOM, b: MaximalPOM) -> float:
    """Shortcut for ``coincidence_rate(joint_distribution(rho, a, b))``."""
    if a.n_outcomes != b.n_outcomes:
        raise DimensionError("coincidence rate needs equal outcome counts")
    _check_pair(rho, a, b)
    v = np.einsum("aj,bj,abcd,cj,dj->", a.kets.conj(), b.kets.conj(), rho.tensor(), a.kets, b.kets, optimize=True)
    return float(v.real)


def shannon_entropy(probs) -> float:
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def mutual_information(dist: JointDistribution) -> float:
    """Shannon mutual information in bits (nonnegative convention)."""
    t = dist.table
    pq = np.outer(dist.p, dist.q)
    mask = t > 0
    return float(np.sum(t[mask] * np.log2(t[mask] / pq[mask])))


def linear_measure(dist: JointDistribution, g) -> float:
    g = np.asarray(g, dtype=float)
    if g.shape != dist.table.shape:
        raise DimensionError(f"coefficient table shape {g.shape} does not match {dist.table.shape}")
    return float(np.sum(g * dist.table))


def covariance_measure(rho: DensityOperator, a: MaximalPOM, b: MaximalPOM, g) -> float:
    """``G(rho) - G(rho_1 (x) rho_2)``, zero for product states."""
    prod = new_density(np.kron(reduced(rho, 1), reduced(rho, 2)), *rho.dims, tol=1e-10)
    return linear_measure(joint_distribution(rho, a, b), g) - linear_measure(joint_distribution(prod, a, b), g)


def corr(dist: JointDistribution) -> float:
    """``sum_j (p_jj - p_j q_j)``."""
    t = dist.table
    if t.shape[0] != t.shape[1]:
        raise DimensionError(f"correlation needs a square table, got {t.shape}")
    return float(np.trace(t) - np.dot(dist.p, dist.q))


def coincidence_operator(a: MaximalPOM, b: MaximalPOM) -> CoincidenceOperator:
    """``K_AB = sum_j |a_j><a_j| (x) |b_j><b_j|`` and its largest eigenvalue."""
    if a.n_outcomes != b.n_outcomes:
        raise DimensionError("coincidence operator needs equal outcome counts")
    z = np.einsum("aj,bj->abj", a.kets, b.kets).reshape(a.dim * b.dim, -1)
    k = z @ z.conj().T
    k = (k + k.conj().T) / 2
    return CoincidenceOperator(k, float(np.linalg.eigvalsh(k)[-1]))

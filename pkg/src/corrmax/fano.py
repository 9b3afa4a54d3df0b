"""Traceless operator bases, Fano coefficients, spin matrices and real SVD helpers."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .state import PAULI, DensityOperator, reduced
from .validation import DimensionError, ValidationError


def gell_mann_basis(n: int) -> np.ndarray:
    """Generalised Gell-Mann matrices normalised to ``tr[K_p K_q] = delta_pq``.

    Returns an array of shape ``(n**2 - 1, n, n)`` ordered as: symmetric
    family (lexicographic ``j < k``), antisymmetric family, diagonal family.
    """
    if int(n) != n or n < 2:
        raise DimensionError(f"basis dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    out = []
    for j, k in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[j, k] = m[k, j] = 1
        out.append(m)
    for j, k in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[j, k] = -1j
        m[k, j] = 1j
        out.append(m)
    for l in range(1, n):
        diag = np.zeros(n)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag * np.sqrt(2 / (l * (l + 1)))).astype(complex))
    return np.array(out) / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class FanoForm:
    """``rho = 1/(d1 d2) + sum u_p K_p(x)1 + sum v_q 1(x)L_q + sum T_pq K_p(x)L_q``."""

    u: np.ndarray
    v: np.ndarray
    T: np.ndarray
    basis1: np.ndarray
    basis2: np.ndarray

    def reconstruct(self) -> np.ndarray:
        d1 = self.basis1.shape[1]
        d2 = self.basis2.shape[1]
        i1, i2 = np.eye(d1), np.eye(d2)
        k = np.einsum("p,pab->ab", self.u, self.basis1)
        l = np.einsum("q,qab->ab", self.v, self.basis2)
        kl = np.einsum("pq,pab,qcd->acbd", self.T, self.basis1, self.basis2).reshape(d1 * d2, d1 * d2)
        return np.eye(d1 * d2) / (d1 * d2) + np.kron(k, i2) + np.kron(i1, l) + kl


def _expect_local(rho: DensityOperator, basis1, basis2):
    """Return ``<K_p (x) 1>``, ``<1 (x) L_q>`` and ``<K_p (x) L_q>`` as real arrays."""
    t = rho.tensor()
    r1 = reduced(rho, 1)
    r2 = reduced(rho, 2)
    ek = np.einsum("pab,ba->p", basis1, r1).real
    el = np.einsum("qab,ba->q", basis2, r2).real
    ekl = np.einsum("pab,qcd,bdac->pq", basis1, basis2, t, optimize=True).real
    return ek, el, ekl


def fano_coefficients(rho: DensityOperator, basis1=None, basis2=None) -> FanoForm:
    d1, d2 = rho.dims
    basis1 = gell_mann_basis(d1) if basis1 is None else np.asarray(basis1)
    basis2 = gell_mann_basis(d2) if basis2 is None else np.asarray(basis2)
    if basis1.shape[1:] != (d1, d1) or basis2.shape[1:] != (d2, d2):
        raise DimensionError("basis sizes do not match the state dimensions")
    ek, el, ekl = _expect_local(rho, basis1, basis2)
    return FanoForm(ek / d2, el / d1, ekl, basis1, basis2)


@dataclass(frozen=True, eq=False)
class AugmentedT:
    """Correlation matrix including the ``K_0``/``L_0`` row and column.

    ``n`` is an integer or ``math.inf``; ``tilde`` is the ``p, q >= 1`` block.
    """

    matrix: np.ndarray
    n: float
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float

    @property
    def tilde(self) -> np.ndarray:
        return self.matrix[1:, 1:]


def _alpha_beta(d: int, n: float) -> tuple[float, float]:
    if math.isinf(n):
        return 1 / math.sqrt(d), 0.0
    alpha = math.sqrt(max(1 / d - 1 / n, 0.0))
    beta = 0.0 if n == d else alpha * d / (n - d)
    return alpha, beta


def augmented_T(rho: DensityOperator, n) -> AugmentedT:
    """Build ``T^(n)`` of size ``d1**2 x d2**2``; ``n`` may be ``math.inf`` (or ``"inf"``)."""
    if isinstance(n, str):
        if n.lower() not in ("inf", "infinity"):
            raise ValidationError(f"n must be an integer or 'inf', got {n!r}")
        n = math.inf
    d1, d2 = rho.dims
    if not math.isinf(n):
        if int(n) != n:
            raise ValidationError(f"n must be an integer, got {n!r}")
        n = int(n)
        if n < max(d1, d2):
            raise DimensionError(f"n = {n} is smaller than max(d1, d2) = {max(d1, d2)}")
    a1, b1 = _alpha_beta(d1, n)
    a2, b2 = _alpha_beta(d2, n)
    ek, el, ekl = _expect_local(rho, gell_mann_basis(d1), gell_mann_basis(d2))
    t = np.empty((d1 * d1, d2 * d2))
    t[0, 0] = a1 * a2
    t[0, 1:] = a1 * el
    t[1:, 0] = a2 * ek
    t[1:, 1:] = ekl
    return AugmentedT(t, n, a1, b1, a2, b2)


def svd_real(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Real SVD ``M = R1 D R2^T`` with full orthogonal ``R1``, ``R2``.

    Singular values are non-increasing. Each leading column of ``R1`` paired
    with a singular value is sign-fixed so its first nonzero entry is
    positive, with the matching column of ``R2`` flipped alongside.
    """
    m = np.asarray(m, dtype=float)
    u, s, vt = np.linalg.svd(m)
    v = vt.T.copy()
    u = u.copy()
    for j in range(min(u.shape[1], v.shape[1])):
        nz = np.flatnonzero(np.abs(u[:, j]) > 1e-12)
        if nz.size and u[nz[0], j] < 0:
            u[:, j] *= -1
            v[:, j] *= -1
    return u, s, v


@dataclass(frozen=True, eq=False)
class SpinMatrices:
    """Spin correlation ``S``, covariance ``Sbar`` and the SVD ``S = R1 diag(s) R2^T``."""

    S: np.ndarray
    Sbar: np.ndarray
    R1: np.ndarray
    s: np.ndarray
    R2: np.ndarray
    det1: float
    det2: float

    @property
    def covariance_singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.Sbar, compute_uv=False)


def _require_qubits(rho: DensityOperator):
    if rho.dims != (2, 2):
        raise DimensionError(f"two-qubit state required, got dims {rho.dims}")


def spin_correlation(rho: DensityOperator) -> np.ndarray:
    """``S_jk = <sigma_j (x) sigma_k>``."""
    _require_qubits(rho)
    return np.einsum("jab,kcd,bdac->jk", PAULI, PAULI, rho.tensor(), optimize=True).real


def bloch_vectors(rho: DensityOperator) -> tuple[np.ndarray, np.ndarray]:
    _require_qubits(rho)
    m = np.einsum("jab,ba->j", PAULI, reduced(rho, 1)).real
    n = np.einsum("jab,ba->j", PAULI, reduced(rho, 2)).real
    return m, n


def spin_covariance(rho: DensityOperator) -> np.ndarray:
    """``Sbar = S(rho) - S(rho_1 (x) rho_2)``."""
    m, n = bloch_vectors(rho)
    return spin_correlation(rho) - np.outer(m, n)


def spin_matrices(rho: DensityOperator) -> SpinMatrices:
    s = spin_correlation(rho)
    r1, sv, r2 = svd_real(s)
    return SpinMatrices(
        s, spin_covariance(rho), r1, sv, r2, float(np.linalg.det(r1)), float(np.linalg.det(r2))
    )


@dataclass(frozen=True, eq=False)
class WMatrix:
    """``W_pq = sum_jk g_jk f^(j)_p g^(k)_q`` with probe vectors stored as rows."""

    W: np.ndarray
    f: np.ndarray
    g: np.ndarray


def frame_probes(frame, basis) -> np.ndarray:
    """Rows ``f^(j)_p = <x_j| L_p |x_j>`` for the columns of ``frame``."""
    x = np.asarray(frame)
    return np.einsum("aj,pab,bj->jp", x.conj(), basis, x, optimize=True).real


def w_matrix(x, y, basis=None, g=None) -> WMatrix:
    """Probe-vector matrix for orthonormal frames ``x``, ``y`` (columns) on C^n.

    With ``g`` omitted this is the coincidence case ``g_jk = delta_jk``.
    """
    x = np.asarray(getattr(x, "vectors", x))
    y = np.asarray(getattr(y, "vectors", y))
    n = x.shape[0]
    if x.shape != (n, n) or y.shape != (n, n):
        raise DimensionError("frames must be square and of equal size")
    basis = gell_mann_basis(n) if basis is None else np.asarray(basis)
    if basis.shape != (n * n - 1, n, n):
        raise DimensionError(f"basis must hold {n * n - 1} operators on C^{n}")
    f = frame_probes(x, basis)
    gv = frame_probes(y, basis)
    gt = np.eye(n) if g is None else np.asarray(g, dtype=float)
    if gt.shape != (n, n):
        raise DimensionError(f"coefficient table must be {n} x {n}")
    return WMatrix(f.T @ gt @ gv, f, gv)


def write_pq_csv(matrix, path) -> None:
    """Write a real matrix as ``p,q,value`` rows (zero-based indices)."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "q", "value"])
        for p in range(m.shape[0]):
            for q in range(m.shape[1]):
                w.writerow([p, q, repr(float(m[p, q]))])

"""Closed-form maxima, upper bounds, Bell combinations and separability witnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .fano import (
    augmented_T,
    bloch_vectors,
    gell_mann_basis,
    spin_correlation,
    spin_covariance,
    svd_real,
    w_matrix,
    _expect_local,
)
from .measurement import (
    MaximalPOM,
    coincidence,
    joint_distribution,
    mutual_information,
    shannon_entropy,
    spin_pom,
)
from .state import DensityOperator, reduced, von_neumann_entropy
from .validation import DimensionError, ParameterRangeError


@dataclass(frozen=True, eq=False)
class BoundReport:
    kind: str
    value: float
    certificate: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class WitnessReport:
    hs_norm: float
    purity_witness: float
    logneg_lower: float
    hs_identity_error: float

    @property
    def hs_flag(self) -> bool:
        """True when the Hilbert-Schmidt distance test certifies entanglement."""
        return self.hs_norm > 1

    @property
    def purity_flag(self) -> bool:
        return self.purity_witness > 1

    @property
    def logneg_flag(self) -> bool:
        return self.logneg_lower > 0


@dataclass(frozen=True, eq=False)
class BellReport:
    info_lhs: float
    info_rhs: float
    coincidence_lhs: float
    coincidence_rhs: float = 2.0

    @property
    def info_violated(self) -> bool:
        return self.info_lhs > self.info_rhs + 1e-12

    @property
    def coincidence_violated(self) -> bool:
        return self.coincidence_lhs > self.coincidence_rhs + 1e-12


def _require_qubits(rho: DensityOperator):
    if rho.dims != (2, 2):
        raise DimensionError(f"two-qubit state required, got dims {rho.dims}")


def two_qubit_max(rho: DensityOperator) -> BoundReport:
    """Exact maximum ``(1 + s1(S))/2`` over spin measurements, with optimal directions.

    The directions are the leading columns of ``R1`` and ``R2`` in
    ``S = R1 D R2^T``.
    """
    _require_qubits(rho)
    r1, s, r2 = svd_real(spin_correlation(rho))
    a, b = r1[:, 0], r2[:, 0]
    value = 0.5 * (1 + s[0])
    return BoundReport("two_qubit", float(value), {"a": a, "b": b, "singular_values": s})


def theorem_bound(rho: DensityOperator, n) -> BoundReport:
    """``1/n + sum_{k <= min(n-1, delta^2)} s_k(T^(n))``; ``n`` may be ``math.inf``."""
    t = augmented_T(rho, n)
    delta = min(rho.dims)
    s = np.linalg.svd(t.matrix, compute_uv=False)
    if math.isinf(t.n):
        k, base = delta**2, 0.0
    else:
        k, base = min(t.n - 1, delta**2), 1 / t.n
    value = base + float(np.sum(s[:k]))
    return BoundReport(
        "theorem", value, {"n": t.n, "delta": delta, "d": max(rho.dims), "terms": k, "singular_values": s}
    )


def cross_norm_bound(rho: DensityOperator) -> BoundReport:
    """Trace norm of ``T^(inf)``, i.e. the computable cross norm."""
    t = augmented_T(rho, math.inf)
    s = np.linalg.svd(t.matrix, compute_uv=False)
    return BoundReport("cross_norm", float(s.sum()), {"delta": min(rho.dims), "singular_values": s})


def correlation_tilde(rho: DensityOperator) -> np.ndarray:
    """``T~_pq = <K_p (x) L_q>`` in the Gell-Mann bases of each side."""
    _, _, ekl = _expect_local(rho, gell_mann_basis(rho.d1), gell_mann_basis(rho.d2))
    return ekl


def orthogonal_bound(rho: DensityOperator) -> BoundReport:
    """``1/d + sum_{k <= min(d-1, delta^2-1)} s_k(T~)`` for measurements with ``d`` outcomes.

    Derived for ``d1 == d2``; for unequal dimensions prefer
    ``theorem_bound(rho, max(d1, d2))``.
    """
    d = max(rho.dims)
    delta = min(rho.dims)
    s = np.linalg.svd(correlation_tilde(rho), compute_uv=False)
    k = min(d - 1, delta**2 - 1)
    return BoundReport("orthogonal", 1 / d + float(np.sum(s[:k])), {"d": d, "delta": delta, "terms": k, "singular_values": s})


def werner_exact(d: int, x: float) -> float:
    """Maximum coincidence rate of the two-qudit Werner state over ``d``-outcome measurements."""
    if int(d) != d or d < 2:
        raise ParameterRangeError(f"d must be an integer >= 2, got {d!r}")
    if not -1 <= x <= 1:
        raise ParameterRangeError(f"x must lie in [-1, 1], got {x!r}")
    gap = abs(x - 1 / d)
    if x >= 1 / d:
        return 1 / d + gap / (d + 1)
    return 1 / d + gap / (d * d - 1)


def werner_theorem_value(d: int, x: float, n) -> float:
    """Displayed closed form of the Theorem bound for the Werner state.

    ``T^(n)`` is diagonal with ``d^2 - 1`` entries ``|x - 1/d| / (d^2 - 1)`` and
    one entry ``1/d - 1/n``. The formula always takes the larger of the two
    kinds for its last term. When ``D = d^2`` and the first kind is larger it
    counts one more copy than exists, so it then lies strictly above
    :func:`theorem_bound`; otherwise the two agree.
    """
    gap = abs(x - 1 / d) / (d * d - 1)
    if math.isinf(n):
        return 1 / d + abs(x - 1 / d)
    dd = min(n - 1, d * d)
    return 1 / n + (dd - 1) * gap + max(1 / d - 1 / n, gap)


def covariance_bound(rho: DensityOperator) -> BoundReport:
    """Maximum spin covariance ``s1(Sbar)`` with the maximising directions."""
    _require_qubits(rho)
    r1, s, r2 = svd_real(spin_covariance(rho))
    return BoundReport("covariance", float(s[0]), {"a": r1[:, 0], "b": r2[:, 0], "singular_values": s})


def separability_witnesses(rho: DensityOperator) -> WitnessReport:
    _require_qubits(rho)
    sbar = spin_covariance(rho)
    hs = float(np.sum(sbar * sbar))
    diff = rho.matrix - np.kron(reduced(rho, 1), reduced(rho, 2))
    identity_err = abs(hs - 4 * float(np.real(np.vdot(diff, diff))))
    s_cov = np.linalg.svd(sbar, compute_uv=False)
    s = np.linalg.svd(spin_correlation(rho), compute_uv=False)
    total = s[0] + s[1]
    logneg = max(0.0, math.log2(total)) if total > 0 else 0.0
    return WitnessReport(hs, rho.purity() + s_cov[0] / 2, logneg, identity_err)


def bell_tests(rho: DensityOperator, a: MaximalPOM, abar: MaximalPOM, b: MaximalPOM, bbar: MaximalPOM) -> BellReport:
    """Information and coincidence CHSH-type combinations for two settings per side."""
    pairs = [(a, b), (a, bbar), (abar, b), (abar, bbar)]
    signs = [1, 1, 1, -1]
    info = 0.0
    coin = 0.0
    for sign, (x, y) in zip(signs, pairs):
        info += sign * mutual_information(joint_distribution(rho, x, y))
        coin += sign * coincidence(rho, x, y)
    ref = joint_distribution(rho, a, b)
    return BellReport(info, shannon_entropy(ref.p) + shannon_entropy(ref.q), coin)


def _xz(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), 0.0, math.sin(theta)])


def chsh_directions() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Coplanar directions ``a, a', b, b'`` maximising the singlet coincidence combination."""
    return _xz(0.0), _xz(math.pi / 2), _xz(5 * math.pi / 4), _xz(3 * math.pi / 4)


def spin_combination(rho: DensityOperator, a, abar, b, bbar) -> float:
    """Coincidence combination ``C(a,b) + C(a,b') + C(a',b) - C(a',b')`` for spin directions."""
    s = spin_correlation(rho)
    c = lambda u, v: 0.5 * (1 + u @ s @ v)  # noqa: E731
    return c(a, b) + c(a, bbar) + c(abar, b) - c(abar, bbar)


def chsh_angle_search(rho: DensityOperator, trials: int = 10_000, seed=None) -> tuple[float, tuple]:
    """Random search over spin directions on the sphere for the largest coincidence combination."""
    rng = np.random.default_rng(seed)
    best, arg = -np.inf, None
    s = spin_correlation(rho)
    for _ in range(trials):
        dirs = rng.standard_normal((4, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        a, abar, b, bbar = dirs
        val = 1 + 0.5 * (a @ s @ b + a @ s @ bbar + abar @ s @ b - abar @ s @ bbar)
        if val > best:
            best, arg = val, (a, abar, b, bbar)
    return float(best), arg


def holevo_bound(rho: DensityOperator) -> float:
    """``min{S(rho_1), S(rho_2)}`` in bits, an upper bound on accessible mutual information."""
    return min(von_neumann_entropy(reduced(rho, 1)), von_neumann_entropy(reduced(rho, 2)))


def schmidt_mixture_imax(weights, probs) -> float:
    """``-sum_j P_j log2 P_j`` with ``P_j = sum_alpha lambda_alpha p_j^(alpha)``."""
    big_p = np.asarray(weights, dtype=float) @ np.atleast_2d(np.asarray(probs, dtype=float))
    return shannon_entropy(big_p)


def covariance_tilde(rho: DensityOperator) -> np.ndarray:
    """``Tbar_pq = <K_p (x) L_q> - <K_p><L_q>`` on the Gell-Mann blocks of each side."""
    ek, el, ekl = _expect_local(rho, gell_mann_basis(rho.d1), gell_mann_basis(rho.d2))
    return ekl - np.outer(ek, el)


def general_measure_bound(rho: DensityOperator, g, x, y) -> BoundReport:
    """Bound ``|Gbar| <= sum_k s_k(Tbar) s_k(W^G)`` for frames ``x``, ``y`` on C^n.

    The certificate also carries the measurement-free correlation bound
    ``sum_{k <= min(n-1, delta^2-1)} s_k(Tbar)``.
    """
    xv = np.asarray(getattr(x, "vectors", x))
    n = xv.shape[0]
    g = np.asarray(g, dtype=float)
    if g.shape != (n, n):
        raise DimensionError(f"coefficient table must be {n} x {n}")
    if n < max(rho.dims):
        raise DimensionError("frames are smaller than the state dimensions")
    s_t = np.linalg.svd(covariance_tilde(rho), compute_uv=False)
    s_w = np.linalg.svd(w_matrix(xv, y, g=g).W, compute_uv=False)
    m = min(s_t.size, s_w.size)
    value = float(np.dot(s_t[:m], s_w[:m]))
    delta = min(rho.dims)
    corr_bound = float(np.sum(s_t[: min(n - 1, delta**2 - 1)]))
    return BoundReport("general_measure", value, {"corr_bound": corr_bound, "n": n, "singular_values": s_t})


def spin_poms_for(report: BoundReport) -> tuple[MaximalPOM, MaximalPOM]:
    """Spin POMs along the directions certified by :func:`two_qubit_max` or :func:`covariance_bound`."""
    return spin_pom(report.certificate["a"]), spin_pom(report.certificate["b"])


def bloch_lengths(rho: DensityOperator) -> tuple[float, float]:
    m, n = bloch_vectors(rho)
    return float(np.linalg.norm(m)), float(np.linalg.norm(n))

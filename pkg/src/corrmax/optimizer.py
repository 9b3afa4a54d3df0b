"""Coincidence-rate maximisation over orthogonal frame pairs on C^n, plus certification.

A pair of maximal POMs with at most ``n`` outcomes is represented by two
orthonormal frames (unitaries) ``X``, ``Y`` on C^n whose first ``d1`` / ``d2``
coordinates carry the physical kets. Frames move by left multiplication with
``exp(i eps M)``; the directional derivative of the coincidence rate along a
Hermitian generator ``M`` is ``tr[M G_M]`` with ``G_M`` from :func:`gradient`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .measurement import MaximalPOM, NaimarkFrame, coincidence, mirror_pom, naimark_extend, new_pom
from .state import DensityOperator, bell_ket, pure_density, random_unitary
from .validation import DEFAULT_TOL, DimensionError, NotExtremalError, ValidationError

log = logging.getLogger(__name__)

CLASSIFICATIONS = ("local_max", "saddle", "local_min", "indeterminate")


@dataclass(frozen=True, eq=False)
class MultiplierPair:
    V: np.ndarray
    W: np.ndarray

    def hermiticity_residual(self) -> float:
        return float(max(np.abs(self.V - self.V.conj().T).max(), np.abs(self.W - self.W.conj().T).max()))


@dataclass(frozen=True, eq=False)
class DiscriminationReport:
    """Ensembles induced by each side's measurement and the operator inequalities.

    ``sigma[j]`` / ``p[j]`` come from ``<b_j|rho|b_j>``; ``tau[j]`` / ``q[j]``
    from ``<a_j|rho|a_j>``. ``upsilon_*`` are the Hermitian parts of ``V`` and
    ``W``; ``margin_*`` the smallest eigenvalue of ``upsilon - p_j sigma_j``.
    """

    p: np.ndarray
    sigma: np.ndarray
    q: np.ndarray
    tau: np.ndarray
    upsilon_a: np.ndarray
    upsilon_b: np.ndarray
    margin_a: float
    margin_b: float
    side_a: bool
    side_b: bool

    @property
    def satisfied(self) -> bool:
        return self.side_a and self.side_b


@dataclass(frozen=True, eq=False)
class SecondOrder:
    classification: str
    min_eigenvalue: float
    max_eigenvalue: float
    eigenvalues: np.ndarray


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    x: NaimarkFrame
    y: NaimarkFrame
    coincidence: float
    gradient_norm: float
    residual: float
    multipliers: MultiplierPair
    discrimination: DiscriminationReport
    classification: str
    hessian_min: float
    hessian_max: float
    converged: bool
    iterations: int
    restart_values: np.ndarray
    history: np.ndarray = field(repr=False)

    @property
    def pom_a(self) -> MaximalPOM:
        return self.x.pom()

    @property
    def pom_b(self) -> MaximalPOM:
        return self.y.pom()

    @property
    def vwcon(self) -> tuple[bool, bool]:
        return self.discrimination.side_a, self.discrimination.side_b

    @property
    def corollary(self) -> bool:
        return self.discrimination.satisfied


# ---------------------------------------------------------------------------
# low-level kernels on (rho tensor, A, B) with A = X[:d1], B = Y[:d2]


def _sigmas(t, b):
    """``sigma_j = <b_j| rho |b_j>`` on side one, shape ``(n, d1, d1)``."""
    return np.einsum("bj,abcd,dj->jac", b.conj(), t, b)


def _taus(t, a):
    """``tau_j = <a_j| rho |a_j>`` on side two, shape ``(n, d2, d2)``."""
    return np.einsum("aj,abcd,cj->jbd", a.conj(), t, a)


def _value(t, a, b) -> float:
    z = (a[:, None, :] * b[None, :, :]).reshape(-1, a.shape[1])
    m = t.reshape(z.shape[0], z.shape[0])
    return float(np.einsum("ij,ik,kj->", z.conj(), m, z).real)


def _embed_tensor(rho: DensityOperator, n: int) -> np.ndarray:
    d1, d2 = rho.dims
    out = np.zeros((n, n, n, n), dtype=complex)
    out[:d1, :d2, :d1, :d2] = rho.tensor()
    return out


def _frames(x, y):
    return np.asarray(getattr(x, "vectors", x)), np.asarray(getattr(y, "vectors", y))


def _check_frames(rho: DensityOperator, x, y):
    n = x.shape[0]
    if x.shape != (n, n) or y.shape != (n, n):
        raise DimensionError("frames must be square matrices of a common size n")
    if n < max(rho.dims):
        raise DimensionError(f"frame size {n} is smaller than max(d1, d2) = {max(rho.dims)}")
    for f in (x, y):
        if np.abs(f.conj().T @ f - np.eye(n)).max() > 1e-8:
            raise ValidationError("frame vectors are not orthonormal")


def _gradients(t, x, y, d1, d2):
    a, b = x[:d1], y[:d2]
    s = _sigmas(t, b)
    u = _taus(t, a)
    n = x.shape[0]
    p = np.zeros((n, n), dtype=complex)
    p[:d1] = np.einsum("jac,cj->aj", s, a)
    r = np.zeros((n, n), dtype=complex)
    r[:d2] = np.einsum("jbd,dj->bj", u, b)
    gm = 1j * (x @ p.conj().T - p @ x.conj().T)
    gn = 1j * (y @ r.conj().T - r @ y.conj().T)
    value = float(np.einsum("aj,aj->", a.conj(), p[:d1]).real)
    return value, gm, gn


def gradient(rho: DensityOperator, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian ascent directions ``(G_M, G_N)``.

    ``G_M = i sum_j [X_j, <y_j|rho|y_j>]`` on C^n (and symmetrically for
    ``G_N``), so that ``d/de C(exp(ieM)X, exp(ieN)Y) = tr[M G_M] + tr[N G_N]``.
    """
    x, y = _frames(x, y)
    _check_frames(rho, x, y)
    _, gm, gn = _gradients(rho.tensor(), x, y, *rho.dims)
    return gm, gn


def frame_coincidence(rho: DensityOperator, x, y) -> float:
    x, y = _frames(x, y)
    d1, d2 = rho.dims
    return _value(rho.tensor(), x[:d1], y[:d2])


def _expi(h, scale=1.0):
    """``exp(i * scale * h)`` for Hermitian ``h``."""
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(1j * scale * w)) @ v.conj().T


# ---------------------------------------------------------------------------
# second-order machinery


def _frame_rho(rho_emb, x, y):
    """Embedded state expressed in the product frame basis, as an n^2 x n^2 matrix."""
    n = x.shape[0]
    u = np.kron(x, y)
    return u.conj().T @ rho_emb.reshape(n * n, n * n) @ u


def _local_generators(n: int) -> np.ndarray:
    """Orthonormal Hermitian off-diagonal generators on C^n, shape ``(n(n-1), n, n)``."""
    out = []
    for k in range(n):
        for l in range(k + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[k, l] = s[l, k] = 1 / math.sqrt(2)
            a = np.zeros((n, n), dtype=complex)
            a[k, l] = 1j / math.sqrt(2)
            a[l, k] = -1j / math.sqrt(2)
            out.extend([s, a])
    return np.array(out).reshape(-1, n, n)


def _lifted_generators(n: int, local: np.ndarray) -> np.ndarray:
    eye = np.eye(n)
    side1 = np.array([np.kron(m, eye) for m in local])
    side2 = np.array([np.kron(eye, m) for m in local])
    return np.concatenate([side1, side2])


def _grad_hess(rho_frame, gens, n):
    """Gradient and Hessian of the coincidence rate in generator coordinates.

    ``rho_frame`` is the state in the frame basis, where the coincidence
    projector is diagonal on the indices ``j * n + j``.
    """
    idx = np.arange(n) * (n + 1)
    d = np.einsum("aim,mk->aik", gens, rho_frame) - np.einsum("im,amk->aik", rho_frame, gens)
    g = np.real(-1j * np.einsum("aii->a", d[:, idx][:, :, idx]))
    t1 = np.einsum("aim,bmi->ab", gens[:, idx, :], d[:, :, idx])
    t2 = np.einsum("bim,ami->ab", d[:, idx, :], gens[:, :, idx])
    s = (t1 - t2).real
    h = -0.5 * (s + s.T)
    return g, h


def hessian_form(rho: DensityOperator, x, y, m, nm) -> float:
    """Second derivative of ``C(exp(ieM)X, exp(ieN)Y)`` at ``e = 0``.

    Equals ``-sum_j <x_j,y_j|[K,[K,rho]]|x_j,y_j>`` with ``K = M (x) 1 + 1 (x) N``.
    """
    x, y = _frames(x, y)
    n = x.shape[0]
    rho_emb = _embed_tensor(rho, n).reshape(n * n, n * n)
    k = np.kron(m, np.eye(n)) + np.kron(np.eye(n), nm)
    inner = k @ rho_emb - rho_emb @ k
    outer = k @ inner - inner @ k
    z = np.einsum("aj,bj->abj", x, y).reshape(n * n, n)
    return float(-np.einsum("ij,ik,kj->", z.conj(), outer, z).real)


def hessian_matrix(rho: DensityOperator, x, y) -> np.ndarray:
    """Hessian on the gauge-free generator space (off-diagonal in the frame bases).

    Coordinates are ``n(n-1)`` generators for side one followed by
    ``n(n-1)`` for side two; generators diagonal in the frame bases only
    rephase frame vectors and are excluded.
    """
    x, y = _frames(x, y)
    _check_frames(rho, x, y)
    n = x.shape[0]
    gens = _lifted_generators(n, _local_generators(n))
    _, h = _grad_hess(_frame_rho(_embed_tensor(rho, n), x, y), gens, n)
    return h


def second_order_classify(
    rho: DensityOperator,
    x,
    y,
    max_n: int = 6,
    dead_band: float = DEFAULT_TOL.dead_band,
    extremal_tol: float = DEFAULT_TOL.extremal,
) -> SecondOrder:
    """Classify an extremal frame pair from the eigenvalues of its Hessian.

    Raises
    ------
    NotExtremalError
        If the first-order residual exceeds ``extremal_tol``.
    DimensionError
        If ``n`` exceeds ``max_n``.
    """
    x, y = _frames(x, y)
    n = x.shape[0]
    if n > max_n:
        raise DimensionError(f"probe space for n = {n} exceeds the cap n <= {max_n}")
    d1, d2 = rho.dims
    res, _ = extremality_residual(rho, MaximalPOM(np.array(x[:d1])), MaximalPOM(np.array(y[:d2])))
    if res > extremal_tol:
        raise NotExtremalError(f"first-order residual {res:.3e} exceeds {extremal_tol:.1e}")
    ev = np.linalg.eigvalsh(hessian_matrix(rho, x, y))
    pos = bool(np.any(ev > dead_band))
    neg = bool(np.any(ev < -dead_band))
    if pos and neg:
        cls = "saddle"
    elif neg:
        cls = "local_max"
    elif pos:
        cls = "local_min"
    else:
        cls = "indeterminate"
    return SecondOrder(cls, float(ev[0]), float(ev[-1]), ev)


# ---------------------------------------------------------------------------
# first-order certificates on POM pairs


def _check_pair(rho: DensityOperator, a: MaximalPOM, b: MaximalPOM):
    if a.n_outcomes != b.n_outcomes:
        raise DimensionError("POMs must have equal outcome counts")
    if a.dim != rho.d1 or b.dim != rho.d2:
        raise DimensionError(f"POM dimensions ({a.dim}, {b.dim}) do not match state dims {rho.dims}")


def extremality_residual(rho: DensityOperator, a: MaximalPOM, b: MaximalPOM) -> tuple[float, MultiplierPair]:
    """Largest violation of the stationarity equations and the multiplier operators.

    The residual is the maximum over ``k != l`` of
    ``|<a_k,b_l|rho|a_l,b_l> - <a_k,b_k|rho|a_l,b_k>|`` and of the mirrored
    condition. ``V = sum_j <b_j|rho|b_j> |a_j><a_j|`` and ``W`` likewise.
    """
    _check_pair(rho, a, b)
    t = rho.tensor()
    ak, bk = a.kets, b.kets
    s = _sigmas(t, bk)
    u = _taus(t, ak)
    # m1[k, l] = <a_k|sigma_l|a_l>, m2[k, l] = <a_k|sigma_k|a_l>
    m1 = np.einsum("ak,lac,cl->kl", ak.conj(), s, ak)
    m2 = np.einsum("ak,kac,cl->kl", ak.conj(), s, ak)
    # n1[k, l] = <b_l|tau_k|b_k>, n2[k, l] = <b_l|tau_l|b_k>
    n1 = np.einsum("bl,kbd,dk->kl", bk.conj(), u, bk)
    n2 = np.einsum("bl,lbd,dk->kl", bk.conj(), u, bk)
    off = ~np.eye(a.n_outcomes, dtype=bool)
    res = 0.0
    if off.any():
        res = float(max(np.abs(m1 - m2)[off].max(), np.abs(n1 - n2)[off].max()))
    v = np.einsum("jac,cj,dj->ad", s, ak, ak.conj())
    w = np.einsum("jbd,dj,ej->be", u, bk, bk.conj())
    return res, MultiplierPair(v, w)


def discrimination_check(rho: DensityOperator, a: MaximalPOM, b: MaximalPOM, tol: float = 1e-9) -> DiscriminationReport:
    """Check ``V >= <b_j|rho|b_j>`` and ``W >= <a_j|rho|a_j>`` for every outcome ``j``."""
    _check_pair(rho, a, b)
    t = rho.tensor()
    s = _sigmas(t, b.kets)
    u = _taus(t, a.kets)
    _, mp = extremality_residual(rho, a, b)
    va = (mp.V + mp.V.conj().T) / 2
    wb = (mp.W + mp.W.conj().T) / 2
    margin_a = min(np.linalg.eigvalsh(va - (sj + sj.conj().T) / 2)[0] for sj in s)
    margin_b = min(np.linalg.eigvalsh(wb - (uj + uj.conj().T) / 2)[0] for uj in u)
    p = np.einsum("jaa->j", s).real
    q = np.einsum("jbb->j", u).real
    with np.errstate(invalid="ignore", divide="ignore"):
        sigma = np.where(p[:, None, None] > 0, s / np.where(p > 0, p, 1)[:, None, None], 0)
        tau = np.where(q[:, None, None] > 0, u / np.where(q > 0, q, 1)[:, None, None], 0)
    return DiscriminationReport(
        p, sigma, q, tau, va, wb, float(margin_a), float(margin_b), bool(margin_a >= -tol), bool(margin_b >= -tol)
    )


# ---------------------------------------------------------------------------
# the optimiser


@dataclass
class _Run:
    x: np.ndarray
    y: np.ndarray
    value: float
    gnorm: float
    iterations: int
    history: list


def _ascend(rho, t_emb, x, y, max_iters, tol, newton_switch=1e-4):
    d1, d2 = rho.dims
    n = x.shape[0]
    value, gm, gn = _gradients(rho.tensor(), x, y, d1, d2)
    history = [value]
    step = 1.0
    it = 0
    gens = None
    cooldown = 0
    while it < max_iters:
        g2 = float(np.vdot(gm, gm).real + np.vdot(gn, gn).real)
        gnorm = math.sqrt(g2)
        if gnorm < tol:
            break
        cooldown -= 1
        if gnorm < newton_switch and cooldown <= 0:
            if gens is None:
                gens = _lifted_generators(n, _local_generators(n))
            moved = _newton_polish(rho, t_emb, x, y, value, gens, max(0, max_iters - it), tol, history)
            if moved is not None:
                x, y, value, gm, gn, used = moved
                it += used
                g2 = float(np.vdot(gm, gm).real + np.vdot(gn, gn).real)
                if math.sqrt(g2) < tol:
                    break
            cooldown = 20
        step = min(2.0 * step, 4.0)
        accepted = False
        while step > 1e-14:
            xn = _expi(gm, step) @ x
            yn = _expi(gn, step) @ y
            vn = _value(rho.tensor(), xn[:d1], yn[:d2])
            if vn >= value + 1e-4 * step * g2:
                accepted = True
                break
            step *= 0.5
        it += 1
        if not accepted:
            break
        x, y = xn, yn
        value, gm, gn = _gradients(rho.tensor(), x, y, d1, d2)
        history.append(value)
    gnorm = math.sqrt(float(np.vdot(gm, gm).real + np.vdot(gn, gn).real))
    return _Run(x, y, value, gnorm, it, history)


def _newton_polish(rho, t_emb, x, y, value, gens, budget, tol, history, max_steps=25):
    """Newton iterations in gauge-free coordinates; ``None`` if the Hessian is not negative definite."""
    d1, d2 = rho.dims
    n = x.shape[0]
    m = gens.shape[0] // 2
    used = 0
    moved = False
    gm = gn = None
    for _ in range(min(max_steps, budget)):
        g, h = _grad_hess(_frame_rho(t_emb, x, y), gens, n)
        ev, vecs = np.linalg.eigh(h)
        if ev[-1] > 1e-8:
            break
        # flat directions (e.g. rotations among unphysical frame vectors) are left alone
        curved = ev < -1e-9
        if not curved.any():
            break
        vc = vecs[:, curved]
        theta = -vc @ ((vc.T @ g) / ev[curved])
        e1 = np.einsum("a,aij->ij", theta[:m], _local_gens_cache(n))
        e2 = np.einsum("a,aij->ij", theta[m:], _local_gens_cache(n))
        xn = x @ _expi(e1)
        yn = y @ _expi(e2)
        vn, gmn, gnn = _gradients(rho.tensor(), xn, yn, d1, d2)
        used += 1
        if vn < value - 4 * np.finfo(float).eps:
            break
        x, y, value, gm, gn = xn, yn, vn, gmn, gnn
        history.append(value)
        moved = True
        if math.sqrt(float(np.vdot(gm, gm).real + np.vdot(gn, gn).real)) < tol:
            break
    if not moved:
        return None
    return x, y, value, gm, gn, used


_GEN_CACHE: dict[int, np.ndarray] = {}


def _local_gens_cache(n: int) -> np.ndarray:
    if n not in _GEN_CACHE:
        _GEN_CACHE[n] = _local_generators(n)
    return _GEN_CACHE[n]


def schmidt_start(rho: DensityOperator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Frames aligned with the Schmidt bases of the dominant eigenvector of ``rho``."""
    d1, d2 = rho.dims
    w, v = np.linalg.eigh(rho.matrix)
    psi = v[:, -1].reshape(d1, d2)
    u, _, vh = np.linalg.svd(psi)
    x = np.eye(n, dtype=complex)
    y = np.eye(n, dtype=complex)
    x[:d1, :d1] = u
    y[:d2, :d2] = vh.T
    return x, y


def _as_start(rho, n, start):
    a, b = start
    fx = a if isinstance(a, NaimarkFrame) else naimark_extend(a if isinstance(a, MaximalPOM) else new_pom(a), n)
    fy = b if isinstance(b, NaimarkFrame) else naimark_extend(b if isinstance(b, MaximalPOM) else new_pom(b), n)
    if fx.n != n or fy.n != n:
        fx = naimark_extend(fx.pom(), n)
        fy = naimark_extend(fy.pom(), n)
    return np.array(fx.vectors), np.array(fy.vectors)


def optimize_coincidence(
    rho: DensityOperator,
    n: int | None = None,
    restarts: int = 16,
    seed=None,
    max_iters: int = 5000,
    tol: float = 1e-10,
    starts=(),
    classify: bool = True,
) -> OptimizationResult:
    """Multi-start maximisation of the coincidence rate over ``n``-outcome maximal POMs.

    One start is aligned with the Schmidt bases of the dominant eigenvector;
    ``restarts`` further starts are Haar-random frame pairs drawn from
    seed-derived sub-streams. Extra starting POM pairs may be passed in
    ``starts``. Non-convergence is reported through ``converged`` and the
    final gradient norm rather than raised.
    """
    d1, d2 = rho.dims
    n = max(d1, d2) if n is None else int(n)
    if n < max(d1, d2):
        raise DimensionError(f"n = {n} is smaller than max(d1, d2) = {max(d1, d2)}")
    t_emb = _embed_tensor(rho, n)
    inits = [schmidt_start(rho, n)]
    inits += [_as_start(rho, n, s) for s in starts]
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    for child in ss.spawn(int(restarts)):
        rng = np.random.default_rng(child)
        inits.append((random_unitary(n, rng), random_unitary(n, rng)))
    runs = [_ascend(rho, t_emb, x0, y0, max_iters, tol) for x0, y0 in inits]
    best = max(runs, key=lambda r: (round(r.value, 12), -r.gnorm))
    return certify(rho, best.x, best.y, tol=tol, classify=classify, iterations=best.iterations,
                   restart_values=np.array([r.value for r in runs]), history=np.array(best.history))


def certify(rho: DensityOperator, x, y, tol=1e-10, classify=True, iterations=0, restart_values=None, history=None):
    """Assemble an :class:`OptimizationResult` for a given frame pair."""
    x, y = _frames(x, y)
    n = x.shape[0]
    d1, d2 = rho.dims
    a = MaximalPOM(np.array(x[:d1]))
    b = MaximalPOM(np.array(y[:d2]))
    value, gm, gn = _gradients(rho.tensor(), x, y, d1, d2)
    gnorm = math.sqrt(float(np.vdot(gm, gm).real + np.vdot(gn, gn).real))
    res, mp = extremality_residual(rho, a, b)
    disc = discrimination_check(rho, a, b)
    cls, hmin, hmax = "indeterminate", float("nan"), float("nan")
    if classify and res <= DEFAULT_TOL.extremal and n <= 6:
        so = second_order_classify(rho, x, y)
        cls, hmin, hmax = so.classification, so.min_eigenvalue, so.max_eigenvalue
    return OptimizationResult(
        NaimarkFrame(np.array(x), d1),
        NaimarkFrame(np.array(y), d2),
        value,
        gnorm,
        res,
        mp,
        disc,
        cls,
        hmin,
        hmax,
        bool(gnorm <= max(tol, 1e-9) or res <= 1e-9),
        iterations,
        np.array([value]) if restart_values is None else restart_values,
        np.array([value]) if history is None else history,
    )


def corollary_check(rho: DensityOperator, result: OptimizationResult) -> bool:
    """Sufficient condition for an ``n``-restricted maximum to be a local maximum over all maximal POMs."""
    return discrimination_check(rho, result.pom_a, result.pom_b).satisfied


def mirror_family_curve(alphas) -> list[tuple[float, float]]:
    """Coincidence rate of the mirror-symmetric pair on ``(|11> + |22>)/sqrt(2)``."""
    rho = pure_density(bell_ket(2), 2, 2)
    out = []
    for alpha in alphas:
        pom = mirror_pom(float(alpha))
        out.append((float(alpha), coincidence(rho, pom, pom)))
    return out

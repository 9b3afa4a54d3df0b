"""Independent reference computations used to freeze expected values in the tests.

Everything here is written with explicit loops or textbook formulas and
deliberately avoids the package's own kernels.
"""

import itertools
import math

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


def partial_trace(m, d1, d2, side):
    out = np.zeros((d1, d1) if side == 1 else (d2, d2), dtype=complex)
    for j, k, l in itertools.product(range(d1), range(d1), range(d2)):
        if side == 1:
            out[j, k] += m[j * d2 + l, k * d2 + l]
    for j, k, l in itertools.product(range(d2), range(d2), range(d1)):
        if side == 2:
            out[j, k] += m[l * d2 + j, l * d2 + k]
    return out


def entropy_bits(m):
    ev = np.linalg.eigvalsh(m)
    return -sum(x * math.log2(x) for x in ev if x > 1e-15)


def coincidence_loop(m, a_kets, b_kets):
    """``sum_j <a_j b_j| rho |a_j b_j>`` with kets as lists of vectors."""
    total = 0.0
    for a, b in zip(a_kets, b_kets):
        z = np.kron(a, b)
        total += np.real(z.conj() @ m @ z)
    return total


def spin_matrix_loop(m):
    return np.array([[np.real(np.trace(m @ np.kron(p, q))) for q in PAULIS] for p in PAULIS])


def random_state(rng, d1=2, d2=2, rank=None):
    dim = d1 * d2
    r = dim if rank is None else rank
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_separable(rng, terms=4):
    w = rng.dirichlet(np.ones(terms))
    m = np.zeros((4, 4), dtype=complex)
    for wk in w:
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        z = np.kron(a, b)
        m += wk * np.outer(z, z.conj())
    return m


def haar_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q @ np.diag(np.diag(r) / np.abs(np.diag(r)))


def werner_explicit(d, x):
    """Werner state from its projector form: mix of symmetric and antisymmetric projectors."""
    swap = np.zeros((d * d, d * d))
    for j in range(d):
        for k in range(d):
            swap[j * d + k, k * d + j] = 1
    eye = np.eye(d * d)
    p_sym, p_asym = (eye + swap) / 2, (eye - swap) / 2
    # tr[F rho] = x fixes the weights
    q = (1 + x) / 2
    return q * p_sym / (d * (d + 1) / 2) + (1 - q) * p_asym / (d * (d - 1) / 2)


def trine_kets():
    out = []
    for j in range(3):
        th = 2 * math.pi * j / 3
        out.append(math.sqrt(2 / 3) * np.array([math.cos(th), math.sin(th)]))
    return out

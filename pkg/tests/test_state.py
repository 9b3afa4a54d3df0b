import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrmax.state import (
    DensityOperator,
    NamedStateSpec,
    isotropic,
    named_state,
    new_density,
    product,
    pure_density,
    random_density,
    reduced,
    schmidt_decompose,
    schmidt_mixture,
    separable_ensemble,
    singlet_ket,
    von_neumann_entropy,
    werner,
)
from corrmax.validation import (
    DimensionError,
    NotHermitianError,
    NotPositiveError,
    ParameterRangeError,
    TraceError,
    ValidationError,
)

from oracles import entropy_bits, partial_trace, random_state

SINGLET = np.outer(singlet_ket(), singlet_ket().conj())


def test_new_density_accepts_singlet():
    rho = new_density(SINGLET, 2, 2)
    assert rho.dims == (2, 2)
    assert not rho.matrix.flags.writeable


@pytest.mark.parametrize(
    "m, err",
    [
        (np.diag([2, -1, 0, 0]), NotPositiveError),
        (np.diag([1, 1, 0, 0]), TraceError),
        (np.array([[0.5, 0.1], [0.0, 0.5]]), NotHermitianError),
    ],
)
def test_new_density_rejects(m, err):
    d1, d2 = (2, 2) if m.shape[0] == 4 else (1, 2)
    with pytest.raises(err):
        new_density(m, d1, d2)


def test_new_density_dimension_mismatch():
    with pytest.raises(DimensionError):
        new_density(np.eye(4) / 4, 2, 3)


def test_tiny_negative_eigenvalue_is_clipped():
    m = np.diag([0.5 + 5e-13, 0.5, -5e-13, 0.0])
    rho = new_density(m, 2, 2)
    assert np.linalg.eigvalsh(rho.matrix).min() >= 0
    assert abs(np.trace(rho.matrix).real - 1) < 1e-15


def test_reduced_singlet_is_maximally_mixed():
    rho = new_density(SINGLET, 2, 2)
    np.testing.assert_allclose(reduced(rho, 1), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(reduced(rho, 2), np.eye(2) / 2, atol=1e-15)


def test_reduced_product_factorises():
    m, n = np.array([0.3, -0.2, 0.5]), np.array([0, 0.6, 0.1])
    r1 = reduced(product(m, n), 1)
    sig = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
    np.testing.assert_allclose(r1, (np.eye(2) + np.einsum("k,kab->ab", m, sig)) / 2, atol=1e-15)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_reduced_matches_loop_oracle(dims, rng):
    m = random_state(rng, *dims)
    rho = new_density(m, *dims)
    for side in (1, 2):
        np.testing.assert_allclose(reduced(rho, side), partial_trace(m, *dims, side), atol=1e-14)


def test_pure_state_reduced_spectra_agree(rng):
    rho = random_density(2, 3, rank=1, seed=5)
    s1 = np.linalg.eigvalsh(reduced(rho, 1))
    s2 = np.linalg.eigvalsh(reduced(rho, 2))[-2:]
    np.testing.assert_allclose(s1, s2, atol=1e-12)


@pytest.mark.parametrize(
    "m, expected",
    [
        (np.eye(2) / 2, 1.0),
        (np.diag([1.0, 0.0]), 0.0),
        (np.diag([0.75, 0.25]), 2 - 0.75 * math.log2(3)),
    ],
)
def test_entropy_values(m, expected):
    assert von_neumann_entropy(m) == pytest.approx(expected, abs=1e-12)


def test_entropy_of_diag_three_quarters_frozen():
    # frozen from the eigenvalue formula
    assert von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(0.8112781244591328, abs=1e-12)


def test_schmidt_bell_coefficients():
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    sf = schmidt_decompose(psi, 2, 2)
    np.testing.assert_allclose(sf.coefficients, [1 / math.sqrt(2)] * 2, atol=1e-15)


def test_schmidt_product_single_coefficient():
    psi = np.kron([0.6, 0.8j], [1 / math.sqrt(2), -1 / math.sqrt(2)])
    sf = schmidt_decompose(psi, 2, 2)
    assert sf.coefficients[0] == pytest.approx(1.0)
    assert np.all(sf.coefficients[1:] < 1e-12)


def test_schmidt_coefficients_match_reduced_spectrum(rng):
    psi = rng.normal(size=9) + 1j * rng.normal(size=9)
    psi /= np.linalg.norm(psi)
    sf = schmidt_decompose(psi, 3, 3)
    ev = np.sort(np.linalg.eigvalsh(partial_trace(np.outer(psi, psi.conj()), 3, 3, 1)))[::-1]
    np.testing.assert_allclose(sf.coefficients**2, ev, atol=1e-12)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3)])
def test_schmidt_roundtrip(dims, rng):
    d1, d2 = dims
    for _ in range(100):
        psi = rng.normal(size=d1 * d2) + 1j * rng.normal(size=d1 * d2)
        psi /= np.linalg.norm(psi)
        assert np.abs(schmidt_decompose(psi, d1, d2).reconstruct() - psi).max() < 1e-10


def test_random_density_deterministic():
    a = random_density(2, 2, 4, seed=7)
    b = random_density(2, 2, 4, seed=7)
    assert np.array_equal(a.matrix, b.matrix)


def test_random_rank_one_is_pure():
    assert random_density(2, 2, 1, seed=3).purity() == pytest.approx(1.0, abs=1e-12)


def test_random_full_rank():
    ev = np.linalg.eigvalsh(random_density(2, 3, 6, seed=11).matrix)
    assert np.sum(ev > 1e-10) == 6


def test_random_rank_out_of_range():
    with pytest.raises(ParameterRangeError):
        random_density(2, 2, 5, seed=0)


def test_isotropic_endpoint_is_singlet():
    np.testing.assert_allclose(isotropic(1.0).matrix, SINGLET, atol=1e-15)


@pytest.mark.parametrize("w", [0.0, 0.2, 0.5, 0.9])
def test_werner_qubit_matches_isotropic(w):
    # both families are U (x) U invariant with swap expectation 1 - 2w, so they coincide
    np.testing.assert_allclose(werner(2, 1 - 2 * w).matrix, isotropic(w).matrix, atol=1e-14)


def test_product_z_z():
    np.testing.assert_allclose(product([0, 0, 1], [0, 0, 1]).matrix, np.diag([1, 0, 0, 0]), atol=1e-15)


def test_named_state_registry():
    assert named_state(NamedStateSpec("werner", {"d": 3, "x": 0.4})).dims == (3, 3)
    np.testing.assert_allclose(named_state("singlet").matrix, SINGLET)
    with pytest.raises(ValidationError):
        named_state("nope")
    with pytest.raises(ValidationError):
        named_state(NamedStateSpec("werner", {"d": 3}))


def test_schmidt_mixture_and_separable_ensemble_validate():
    rho = schmidt_mixture([0.5, 0.5], [[1, 0], [0, 1]])
    np.testing.assert_allclose(rho.matrix, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)
    with pytest.raises(ParameterRangeError):
        separable_ensemble([0.7, 0.7], [[1, 0], [0, 1]], [[1, 0], [0, 1]])


@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 3)]), st.integers(1, 9))
def test_constructor_outputs_validate(seed, dims, rank):
    d1, d2 = dims
    rank = min(rank, d1 * d2)
    rho = random_density(d1, d2, rank, seed=seed)
    assert isinstance(new_density(rho.matrix, d1, d2), DensityOperator)
    for side in (1, 2):
        r = reduced(rho, side)
        assert abs(np.trace(r).real - 1) < 1e-12
        assert np.linalg.eigvalsh(r).min() >= -1e-12


@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 3)]))
def test_pure_ket_entropies_equal(seed, dims):
    rho = random_density(*dims, rank=1, seed=seed)
    s1 = von_neumann_entropy(reduced(rho, 1))
    s2 = von_neumann_entropy(reduced(rho, 2))
    assert abs(s1 - s2) < 1e-9
    assert abs(s1 - entropy_bits(partial_trace(rho.matrix, *dims, 1))) < 1e-9


def test_pure_density_rejects_unnormalised():
    with pytest.raises(ValidationError):
        pure_density([1, 1, 0, 0], 2, 2)

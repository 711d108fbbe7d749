"""
Test dense matrix primitives
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import DimensionError, HermiticityError, InputError
from mathcore import (
    as_matrix,
    complex_gaussian,
    dft_sequence,
    haar_isometry,
    hermitian_eig,
    inverse_dft_sequence,
    kron,
    make_rng,
    mix_seed,
    partial_trace,
    projector,
    psd_check,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def random_complex(seed, shape):
    return complex_gaussian(make_rng(seed), shape)


def test_kron_identities_and_projectors():
    assert_allclose(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert_allclose(kron(np.diag([1, 0]), np.diag([1, 0])), np.diag([1, 0, 0, 0]))


def test_kron_sigma_x_flips_both_qubits():
    e00 = np.zeros(4)
    e00[0] = 1
    out = kron(SIGMA_X, SIGMA_X) @ e00
    assert np.argmax(np.abs(out)) == 3


@pytest.mark.parametrize("seed", range(5))
def test_kron_is_associative_and_bilinear(seed):
    a, b, c, b2 = (random_complex(mix_seed(seed, j), (2, 2)) for j in range(4))
    s, t = 0.7 - 0.2j, -1.3 + 0.5j
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) <= 1e-12
    assert np.max(np.abs(kron(a, s * b + t * b2) - (s * kron(a, b) + t * kron(a, b2)))) <= 1e-12
    assert np.max(np.abs(kron(s * a, b) - s * kron(a, b))) <= 1e-12


def test_partial_trace_of_product_state():
    h0 = np.array([1, 1j]) / np.sqrt(2)
    e0 = np.array([1, 0])
    rho = projector(np.kron(e0, h0))
    assert_allclose(partial_trace(rho, 2, 2, keep="K"), projector(h0), atol=1e-12)


def test_partial_trace_of_bell_state_is_maximally_mixed():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert_allclose(partial_trace(projector(bell), 2, 2, keep="H"), np.eye(2) / 2, atol=1e-12)


def test_partial_trace_of_factorized_input():
    rng = make_rng(3)
    a = rng.standard_normal((3, 3))
    b = rng.standard_normal((2, 2))
    assert_allclose(partial_trace(np.kron(a, b), 3, 2, keep="K"), np.trace(a) * b, atol=1e-12)


def test_partial_trace_rejects_wrong_shape():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(5), 2, 2)


@pytest.mark.parametrize(
    "matrix, expected",
    [
        (np.diag([3.0, 1.0]), [3, 1]),
        (SIGMA_X, [1, -1]),
        (np.eye(4), [1, 1, 1, 1]),
    ],
)
def test_hermitian_eig_examples(matrix, expected):
    eig = hermitian_eig(matrix)
    assert_allclose(eig.eigenvalues, expected, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_hermitian_eig_reconstructs_and_is_unitary(seed):
    rng = make_rng(seed)
    g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    a = g + g.conj().T
    eig = hermitian_eig(a)
    u = eig.eigenvectors
    assert np.max(np.abs(u.conj().T @ u - np.eye(5))) <= 1e-10
    assert np.max(np.abs(eig.reconstruct() - a)) <= 1e-9
    assert np.all(np.diff(eig.eigenvalues) <= 0)


@pytest.mark.parametrize("d", [2, 5, 9, 16])
def test_eigenvalues_sum_to_trace(d):
    g = random_complex(d, (d, d))
    a = g + g.conj().T
    eig = hermitian_eig(a)
    assert abs(np.sum(eig.eigenvalues) - np.real(np.trace(a))) <= 1e-10 * d


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(HermiticityError):
        hermitian_eig(np.array([[1, 2], [0, 1]]))
    with pytest.raises(DimensionError):
        hermitian_eig(np.ones((2, 3)))


def test_as_matrix_rejects_non_finite_entries():
    with pytest.raises(InputError):
        as_matrix([[1, np.nan], [0, 1]])


def test_psd_check_examples():
    assert psd_check(np.diag([1, 0]), 1e-10)
    assert not psd_check(np.array([[1, 2], [2, 1]]), 1e-10)
    assert psd_check(np.ones((6, 6)), 1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_psd_check_on_random_gram_matrices(seed):
    g = random_complex(seed, (4, 3))
    a = g @ g.conj().T
    assert psd_check(a, 1e-10)
    lam_min = hermitian_eig(a).eigenvalues[-1]
    assert not psd_check(a - (lam_min + 1) * np.eye(4), 1e-10)


def test_dft_sequence_examples():
    assert_allclose(dft_sequence([1, 0, 0, 0]), np.ones(4), atol=1e-12)
    assert_allclose(dft_sequence(np.full(5, 0.2)), [1, 0, 0, 0, 0], atol=1e-12)
    assert_allclose(dft_sequence([0.5, 0.25, 0, 0.25]), [1, 0.5, 0, 0.5], atol=1e-12)


def test_inverse_dft_sequence_examples():
    real, imag = inverse_dft_sequence(np.ones(3))
    assert_allclose(real, [1, 0, 0], atol=1e-12)
    assert_allclose(imag, 0, atol=1e-12)

    real, _ = inverse_dft_sequence([1, 0, 0, 0])
    assert_allclose(real, np.full(4, 0.25), atol=1e-12)

    real, _ = inverse_dft_sequence([1, 0.5, 0, 0.5])
    assert_allclose(real, [0.5, 0.25, 0, 0.25], atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 7, 32, 64])
def test_dft_round_trip(n):
    pi = make_rng(n).dirichlet(np.ones(n))
    real, imag = inverse_dft_sequence(dft_sequence(pi))
    assert_allclose(real, pi, atol=1e-10)
    assert_allclose(imag, 0, atol=1e-10)


def test_mix_seed_is_stable_and_spreads():
    assert mix_seed(7, 3) == mix_seed(7, 3)
    seeds = {mix_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2**64 for s in seeds)


def test_make_rng_reproduces_streams():
    assert_allclose(make_rng(11).standard_normal(8), make_rng(11).standard_normal(8))


@pytest.mark.parametrize("rows, cols", [(2, 2), (6, 2), (8, 3)])
def test_haar_isometry_has_orthonormal_columns(rows, cols):
    v = haar_isometry(make_rng(rows * cols), rows, cols)
    assert v.shape == (rows, cols)
    assert np.max(np.abs(v.conj().T @ v - np.eye(cols))) <= 1e-12

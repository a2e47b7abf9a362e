import numpy as np
import pytest
from hypothesis import given, strategies as st

from roofcut.errors import InputError
from roofcut.qlinalg import (
    DensityMatrix,
    PureState,
    eigh,
    from_coords,
    gell_mann_basis,
    partial_trace,
    partial_transpose,
    sqrtm_psd,
    tensor,
    to_coords,
    trace_norm,
)

from conftest import haar_state, random_hermitian, random_unitary

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seeds, st.integers(min_value=1, max_value=8))
def test_eigh_matches_lapack(seed, n):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, n)
    w, v = eigh(m)
    assert np.allclose(w, np.linalg.eigvalsh(m), atol=1e-12 * max(1, np.abs(m).max()))
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, m, atol=1e-11)


def test_eigh_degenerate_spectrum(rng):
    u = random_unitary(rng, 6)
    m = u @ np.diag([1, 1, 1, -2, -2, 5.0]) @ u.conj().T
    w, v = eigh(m)
    assert np.allclose(w, [-2, -2, 1, 1, 1, 5], atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, m, atol=1e-12)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(InputError):
        eigh(np.array([[0, 1], [0, 0]], dtype=complex))


def test_tensor_is_little_endian():
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    b = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(tensor(a, b), np.kron(b, a))
    # flat index i0 + 2*i1: subsystem 0 is the fast index
    v = tensor(np.array([0, 1]), np.array([1, 0]))
    assert np.argmax(np.abs(v)) == 1


def test_partial_trace_of_product(rng):
    ra = DensityMatrix((2,), np.diag([0.3, 0.7]).astype(complex))
    u = random_unitary(rng, 3)
    rb = DensityMatrix((3,), u @ np.diag([0.2, 0.3, 0.5]) @ u.conj().T)
    rho = DensityMatrix((2, 3), tensor(ra.matrix, rb.matrix))
    assert np.allclose(partial_trace(rho, [1]).matrix, ra.matrix)
    assert np.allclose(partial_trace(rho, [0]).matrix, rb.matrix)
    assert partial_trace(rho, [0]).dims == (3,)


def test_partial_trace_three_parties(rng):
    states = [haar_state(rng, 2) for _ in range(3)]
    psi = PureState((2, 2, 2), tensor(*states))
    red = partial_trace(psi, [1])
    expect = tensor(np.outer(states[0], states[0].conj()), np.outer(states[2], states[2].conj()))
    assert red.dims == (2, 2)
    assert np.allclose(red.matrix, expect)


def test_partial_trace_bad_index():
    rho = DensityMatrix((2, 2), np.eye(4) / 4)
    with pytest.raises(InputError):
        partial_trace(rho, [2])
    with pytest.raises(InputError):
        partial_trace(rho, [0, 1])


def test_partial_transpose_bell_spectrum():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    pt = partial_transpose(PureState((2, 2), phi), 0)
    assert np.allclose(np.sort(np.linalg.eigvalsh(pt)), [-0.5, 0.5, 0.5, 0.5])
    assert np.allclose(partial_transpose(PureState((2, 2), phi), 1), pt)


def test_partial_transpose_of_product(rng):
    a, b = random_hermitian(rng, 2), random_hermitian(rng, 3)
    out = partial_transpose((tensor(a, b), (2, 3)), 1)
    assert np.allclose(out, tensor(a, b.T))


def test_trace_norm(rng):
    m = random_hermitian(rng, 5)
    assert trace_norm(m) == pytest.approx(np.abs(np.linalg.eigvalsh(m)).sum(), abs=1e-12)


def test_sqrtm_psd(rng):
    u = random_unitary(rng, 4)
    m = u @ np.diag([0.0, 0.1, 0.4, 2.0]) @ u.conj().T
    s = sqrtm_psd(m)
    assert np.allclose(s @ s, m, atol=1e-12)


@pytest.mark.parametrize("r", [1, 2, 3, 4, 8])
def test_gell_mann_orthonormal(r):
    basis = gell_mann_basis(r)
    assert len(basis) == r * r
    assert np.allclose(basis.gram(), np.eye(r * r), atol=1e-13)
    for z in basis.elements:
        assert np.allclose(z, z.conj().T)
    assert np.allclose(basis.elements[0], np.eye(r) / np.sqrt(r))


@given(seeds, st.integers(min_value=1, max_value=6))
def test_coords_round_trip(seed, r):
    rng = np.random.default_rng(seed)
    basis = gell_mann_basis(r)
    h = random_hermitian(rng, r)
    x = to_coords(h, basis)
    assert x.dtype == float
    assert np.allclose(from_coords(x, basis), h, atol=1e-12)
    # Hilbert-Schmidt inner products become Euclidean ones
    g = random_hermitian(rng, r)
    assert x @ to_coords(g, basis) == pytest.approx(np.trace(h @ g).real, abs=1e-10)


def test_density_matrix_validation_names_invariant():
    with pytest.raises(InputError, match="hermiticity"):
        DensityMatrix((2,), np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(InputError, match="trace"):
        DensityMatrix((2,), np.eye(2))
    with pytest.raises(InputError, match="PSD"):
        DensityMatrix((2,), np.diag([1.5, -0.5]))
    with pytest.raises(InputError):
        DensityMatrix((2, 2), np.eye(2) / 2)


def test_pure_state_norm_and_normalize():
    with pytest.raises(InputError):
        PureState((2,), [1, 1])
    psi = PureState.normalized((2,), [1, 1j])
    assert np.isclose(np.linalg.norm(psi.amplitudes), 1)
    assert psi.density().matrix.shape == (2, 2)
    with pytest.raises(InputError):
        PureState.normalized((2,), [0, 0])

import numpy as np
import pytest

from chshkit.qcore import (
    Dims,
    DensityOperator,
    HermitianOperator,
    KrausMap,
    apply_kraus,
    as_matrix,
    hermitize,
    is_psd,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
    party_tensor,
    sandwich,
)


def test_dims_layout():
    d = Dims((2, 3), (4,))
    assert d.da == 6 and d.db == 4 and d.d == 24
    assert d.factors == (2, 3, 4)
    assert Dims.simple(2, 2).factors == (2, 2)


def test_hermitian_operator_symmetrizes_small_noise():
    m = np.array([[1.0, 0.5 + 1e-12j], [0.5, 0.0]])
    h = HermitianOperator(m, Dims.simple(1, 2))
    assert np.allclose(h.matrix, h.matrix.conj().T)


def test_hermitian_operator_rejects_genuinely_skew_input():
    m = np.array([[1.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        HermitianOperator(m, Dims.simple(1, 2))


def test_density_operator_rejects_negative_and_traceless():
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.5, -0.5]).astype(complex), Dims.simple(1, 2))
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.4, 0.4]).astype(complex), Dims.simple(1, 2))
    # unnormalized flag relaxes only the trace condition
    DensityOperator(np.diag([0.4, 0.4]).astype(complex), Dims.simple(1, 2), normalized=False)


def test_party_tensor_against_manual_reordering():
    # oracle: build the same operator by permuting basis indices explicitly
    rng = np.random.default_rng(3)
    x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    y = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    dx, dy = Dims.simple(2, 3), Dims.simple(3, 2)
    got, dims = party_tensor(x, dx, y, dy)
    assert dims.a_factors == (2, 3) and dims.b_factors == (3, 2)
    kron = np.kron(x, y)  # ordering (Xa Xb)(Ya Yb)
    perm = []
    for xa in range(2):
        for ya in range(3):
            for xb in range(3):
                for yb in range(2):
                    perm.append(((xa * 3 + xb) * 3 + ya) * 2 + yb)
    perm = np.array(perm)
    assert np.allclose(got, kron[np.ix_(perm, perm)])


def test_partial_trace_loop_oracle():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    factors = (2, 3, 2)
    got = partial_trace(x, factors, trace_out=(1,))
    # oracle: explicit index loop
    want = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    for m in range(3):
                        want[i * 2 + j, k * 2 + l] += x[(i * 3 + m) * 2 + j, (k * 3 + m) * 2 + l]
    assert np.allclose(got, want)


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 3))
    a = a @ a.T
    b = rng.standard_normal((2, 2))
    b = b @ b.T
    x = np.kron(a, b)
    assert np.allclose(partial_trace(x, (3, 2), (1,)), a * np.trace(b))
    assert np.allclose(partial_trace(x, (3, 2), (0,)), b * np.trace(a))


def test_partial_transpose_involution_and_bell_negativity():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    d = Dims.simple(2, 3)
    assert np.allclose(partial_transpose(partial_transpose(x, d), d), x)
    phi = np.zeros(4)
    phi[0] = phi[3] = 1.0 / np.sqrt(2.0)
    proj = np.outer(phi, phi)
    # [TRIVIAL] the maximally entangled projector has PT eigenvalue -1/2
    assert abs(min_eigenvalue(partial_transpose(proj, Dims.simple(2, 2))) + 0.5) < 1e-12


def test_partial_transpose_party_a_is_full_transpose_of_party_b():
    rng = np.random.default_rng(13)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    d = Dims.simple(2, 2)
    # X^{T_A} = (X^T)^{T_B} since the full transpose transposes both parties
    assert np.allclose(partial_transpose(x, d, party="a"), partial_transpose(x.T, d))


def test_min_eigenvalue_against_characteristic_polynomial():
    # 2x2 oracle: eigenvalues from the quadratic formula
    h = np.array([[1.0, 2.0 - 1.0j], [2.0 + 1.0j, -3.0]])
    tr, det = np.trace(h).real, np.linalg.det(h).real
    lam = (tr - np.sqrt(tr * tr - 4.0 * det)) / 2.0
    assert abs(min_eigenvalue(h) - lam) < 1e-12


def test_apply_kraus_and_sandwich():
    rng = np.random.default_rng(17)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    x = x @ x.conj().T
    a = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    kmap = KrausMap((a,), (b,), Dims.simple(2, 2), Dims.simple(3, 2))
    f = np.kron(a, b)
    assert np.allclose(apply_kraus(kmap, x), f @ x @ f.conj().T)
    assert np.allclose(sandwich(x, f.conj().T), f @ x @ f.conj().T)


def test_kraus_map_shape_validation():
    with pytest.raises(ValueError):
        KrausMap((np.eye(2),), (np.eye(3),), Dims.simple(2, 2), Dims.simple(2, 2))


def test_is_psd_and_as_matrix():
    assert is_psd(np.diag([0.0, 1.0]))
    assert not is_psd(np.diag([-1e-6, 1.0]))
    h = HermitianOperator(np.eye(2, dtype=complex), Dims.simple(1, 2))
    assert np.allclose(as_matrix(h), np.eye(2))
    assert np.allclose(hermitize(np.array([[0.0, 1.0], [0.0, 0.0]])), [[0, 0.5], [0.5, 0]])

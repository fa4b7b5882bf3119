import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import null_space

from rankpca import matops
from rankpca.errors import DimensionError, DomainError

from conftest import det1_spectrum, random_rotation

ks = st.integers(min_value=2, max_value=6)
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def test_vectorize_modes():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert matops.vectorize(np.eye(2), "diagonal").tolist() == [1, 1]
    assert matops.vectorize(A).tolist() == [1, 3, 2, 4]
    B = np.arange(9.0).reshape(3, 3)
    assert matops.vectorize(B, "upper_off_diag").tolist() == [B[0, 1], B[0, 2], B[1, 2]]
    assert matops.vectorize(B, "upper_diag").size == 6
    assert matops.vectorize(B, "diagonal_tail").tolist() == [4.0, 8.0]
    with pytest.raises(DimensionError):
        matops.vectorize(np.ones((2, 3)))


def test_commutation_k2_swaps_middle():
    K = matops.commutation(2)
    assert np.array_equal(K @ np.array([1.0, 2, 3, 4]), [1.0, 3, 2, 4])
    with pytest.raises(DomainError):
        matops.commutation(1)


@given(ks, seeds)
def test_commutation_transposes(k, seed):
    A = np.random.default_rng(seed).normal(size=(k, k))
    K = matops.commutation(k)
    assert np.array_equal(K @ matops.vectorize(A), matops.vectorize(A.T))
    assert np.array_equal(K @ K, np.eye(k * k))


@pytest.mark.parametrize("k", range(2, 11))
def test_diag_selector(k):
    H = matops.diag_selector(k)
    assert np.array_equal(H @ H.T, np.eye(k))
    A = np.arange(k * k, dtype=float).reshape(k, k)
    assert np.array_equal(H @ matops.vectorize(A), np.diag(A))


def test_diag_selector_reconstructs_diagonal():
    H = matops.diag_selector(2)
    assert np.array_equal(H.T @ [5.0, 7.0], matops.vectorize(np.diag([5.0, 7.0])))
    assert np.array_equal(H @ matops.vectorize(np.array([[1.0, 2], [3, 4]])), [1.0, 4.0])


def test_eigval_jacobian():
    assert np.allclose(matops.eigval_jacobian([2.0, 0.5]), [[-4.0, 1.0]])
    with pytest.raises(DomainError):
        matops.eigval_jacobian([1.0, 0.0])


@given(st.integers(2, 7), seeds)
def test_eigval_jacobian_identities(k, seed):
    lam = det1_spectrum(k, seed)
    M = matops.eigval_jacobian(lam)
    assert np.allclose(M @ matops.tail_selector(k).T, np.eye(k - 1), atol=0)
    tail = np.random.default_rng(seed).normal(size=k - 1)
    l = np.concatenate([[-lam[0] * np.sum(tail / lam[1:])], tail])
    assert abs(np.sum(l / lam)) < 1e-10
    assert np.allclose(M.T @ tail, l, atol=1e-12)


def test_eigvec_operators_k2():
    ops = matops.eigvec_operators(np.eye(2), [4.0, 0.25])
    assert np.array_equal(ops.G[:, 0], [0.0, 1.0, -1.0, 0.0])
    assert ops.nu[0] == pytest.approx(1.0 / 14.0625, rel=1e-14)


@given(st.integers(2, 6), seeds)
def test_L_annihilates_inverse_shape(k, seed):
    beta, lam = random_rotation(k, seed), det1_spectrum(k, seed)
    V = beta @ np.diag(lam) @ beta.T
    ops = matops.eigvec_operators(beta, lam)
    assert np.all(ops.nu > 0)
    assert np.max(np.abs(ops.L @ matops.vectorize(np.linalg.inv(V)))) < 1e-10


def _null_spectrum(lam, p, q):
    """Det-1 spectrum with c_pq' lambda = 0, built from the shape of ``lam``."""
    lam = np.asarray(lam, dtype=float)
    out = np.concatenate([lam[:q] * (1 - p) / lam[:q].sum(), lam[q:] * p / lam[q:].sum()])
    return out / np.exp(np.mean(np.log(out)))


def _skew_constraint_basis(frame):
    """Null space of b -> (b e1, sym(frame' b)), found directly from the constraints."""
    k = frame.shape[0]
    rows = []
    for col in range(k * k):
        b = matops.unvec(np.eye(k * k)[col], k)
        S = frame.T @ b
        rows.append(np.concatenate([b[:, 0], matops.vectorize(S + S.T, "upper_diag")]))
    return null_space(np.array(rows).T)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_tangent_chart_spans_constraint_space(k):
    frame = random_rotation(k, 7 + k)
    P = matops.tangent_chart(frame)
    assert P.shape == (k * k, k * (k - 1))
    for c in P.T:
        b = matops.unvec(c, k)
        S = frame.T @ b
        assert np.max(np.abs(b[:, 0])) == 0.0
        assert np.max(np.abs(S + S.T)) < 1e-12
    N = _skew_constraint_basis(frame)
    rank = np.linalg.matrix_rank(P, tol=1e-10)
    assert rank == N.shape[1] == (k - 1) * (k - 2) // 2
    if rank:
        # same span: projecting P onto the oracle basis loses nothing
        assert np.allclose(N @ (N.T @ P), P, atol=1e-12)


def test_tangent_chart_rejects_nonorthonormal():
    with pytest.raises(DomainError):
        matops.tangent_chart(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_shape_info_k2_scalar():
    lam = np.array([3.0, 1.0 / 3.0])
    D, Di = matops.shape_info_D(lam), matops.shape_info_D_inverse(lam)
    assert D.shape == (1, 1)
    # k = 2: D = (1/4)(2 lam1^2/lam2^2 lam1^-2 + 2 lam2^-2) = lam2^-2
    assert D[0, 0] == pytest.approx(1.0 / lam[1] ** 2, rel=1e-12)
    assert D[0, 0] * Di[0, 0] == pytest.approx(1.0, abs=1e-12)


@given(st.integers(2, 8), seeds)
def test_shape_info_inverse(k, seed):
    lam = det1_spectrum(k, seed)
    prod = matops.shape_info_D(lam) @ matops.shape_info_D_inverse(lam)
    assert np.max(np.abs(prod - np.eye(k - 1))) < 1e-10


@given(st.integers(2, 6), seeds, st.floats(0.05, 0.95))
def test_grad_h_quadratic_form_is_a_pq(k, seed, p):
    g = np.random.default_rng(seed)
    q = int(g.integers(1, k))
    lam = _null_spectrum(det1_spectrum(k, seed), p, q)
    gh = matops.grad_h(lam, p, q)
    val = gh @ matops.shape_info_D_inverse(lam) @ gh
    assert val == pytest.approx(matops.a_pq(lam, p, q), rel=1e-9)


def test_a_pq_hand_value():
    assert matops.a_pq([10.0, 4.0, 1.0], 1 / 3, 1) == pytest.approx(2 * 168 / 9, rel=1e-14)
    assert matops.c_pq(3, 1 / 3, 1) @ [10.0, 4.0, 1.0] == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(DomainError):
        matops.c_pq(3, 1 / 3, 3)


def test_symmetric_eigen_diagonal():
    lam, beta = matops.symmetric_eigen(np.diag([10.0, 4.0, 1.0]))
    assert np.allclose(lam, [10, 4, 1])
    assert np.allclose(beta, np.eye(3))


@given(st.integers(2, 6), seeds)
def test_symmetric_eigen_recovers_rotation(k, seed):
    R = random_rotation(k, seed)
    true = np.linspace(k + 3.0, 1.0, k)
    lam, beta = matops.symmetric_eigen(R @ np.diag(true) @ R.T)
    assert np.allclose(lam, true, rtol=1e-10)
    assert np.allclose(np.abs(np.sum(beta * R, axis=0)), 1.0, atol=1e-9)
    assert np.linalg.det(beta) == pytest.approx(1.0)
    lead = beta[np.argmax(np.abs(beta), axis=0), np.arange(k)]
    assert np.all(lead[:-1] > 0)


def test_symmetric_eigen_reconstruction_1000():
    g = np.random.default_rng(3)
    A = g.normal(size=(1000, 4, 4))
    S = A + np.swapaxes(A, 1, 2)
    lam, beta = matops.symmetric_eigen(S)
    rec = np.einsum("bij,bj,bkj->bik", beta, lam, beta)
    scale = np.max(np.abs(S), axis=(1, 2))
    assert np.all(np.max(np.abs(rec - S), axis=(1, 2)) < 1e-9 * scale)
    assert np.all(np.diff(lam, axis=1) <= 0)


def test_symmetric_sqrt():
    assert np.allclose(matops.symmetric_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(matops.symmetric_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    with pytest.raises(DomainError):
        matops.symmetric_sqrt(np.diag([1.0, -1.0]))


@given(st.integers(2, 6), seeds)
def test_symmetric_sqrt_squares_back(k, seed):
    A = np.random.default_rng(seed).normal(size=(k, k))
    S = A @ A.T + 0.1 * np.eye(k)
    T = matops.symmetric_sqrt(S)
    assert np.allclose(T, T.T, atol=1e-12)
    assert np.linalg.norm(T @ T - S) / np.linalg.norm(S) < 1e-9

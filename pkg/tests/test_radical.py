import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semireg.radical import OutOfImageError, cocontract, decompose_matrix, in_image, jacobi_eigh


def test_diagonal_degenerate():
    d = decompose_matrix(np.diag([2.0, 0.0]))
    assert d.rank == 1
    np.testing.assert_allclose(d.pinv, np.diag([0.5, 0.0]))
    np.testing.assert_allclose(d.projector, np.diag([1.0, 0.0]))


def test_rank_one_full_matrix():
    d = decompose_matrix(np.ones((2, 2)))
    assert d.rank == 1
    np.testing.assert_allclose(d.pinv, np.full((2, 2), 0.25), atol=1e-15)
    np.testing.assert_allclose(sorted(d.eigenvalues), [0.0, 2.0], atol=1e-15)


def test_lorentzian_is_self_inverse():
    d = decompose_matrix(np.diag([-1.0, 1.0]))
    assert d.rank == 2 and not d.degenerate
    np.testing.assert_allclose(d.pinv, np.diag([-1.0, 1.0]))


def test_in_image_examples():
    d = decompose_matrix(np.diag([1.0, 0.0]))
    assert in_image(d, [3.0, 0.0]) == (True, 0.0)
    ok, r = in_image(d, [0.0, 1.0])
    assert not ok and r == pytest.approx(1.0)
    full = decompose_matrix(np.array([[2.0, 1.0], [1.0, 3.0]]))
    assert in_image(full, [0.3, -9.0])[0]


def test_cocontract_examples():
    d = decompose_matrix(np.diag([1.0, 0.0]))
    assert cocontract(d, [3.0, 0.0], [5.0, 0.0]).value == pytest.approx(15.0)
    assert cocontract(decompose_matrix(np.eye(2)), [1.0, 2.0], [3.0, 4.0]).value == pytest.approx(11.0)
    res = cocontract(d, [3.0, 0.0], [0.0, 1.0])
    assert not res.in_image()
    with pytest.raises(OutOfImageError):
        cocontract(d, [3.0, 0.0], [0.0, 1.0], strict=True)


def test_rank_tolerance_validated():
    with pytest.raises(ValueError):
        decompose_matrix(np.eye(2), tol=0.0)


def test_zero_matrix():
    d = decompose_matrix(np.zeros((3, 3)))
    assert d.rank == 0
    assert not d.pinv.any()


@st.composite
def symmetric_matrices(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    vals = draw(st.lists(st.floats(-10, 10), min_size=n * n, max_size=n * n))
    A = np.array(vals).reshape(n, n)
    return 0.5 * (A + A.T)


@settings(max_examples=150, deadline=None)
@given(symmetric_matrices())
def test_jacobi_agrees_with_lapack(A):
    w, Q = jacobi_eigh(A)
    scale = max(1.0, np.abs(A).max())
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A), atol=1e-12 * scale * A.shape[0])
    np.testing.assert_allclose(Q.T @ Q, np.eye(A.shape[0]), atol=1e-12)
    np.testing.assert_allclose(Q @ np.diag(w) @ Q.T, A, atol=1e-11 * scale)


@st.composite
def degenerate_matrices(draw):
    n = draw(st.integers(2, 6))
    r = draw(st.integers(0, n - 1))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lam = np.zeros(n)
    lam[:r] = rng.uniform(0.5, 3.0, r) * rng.choice([-1.0, 1.0], r)
    return Q @ np.diag(lam) @ Q.T, r, Q[:, r:]


@settings(max_examples=150, deadline=None)
@given(degenerate_matrices())
def test_decomposition_invariants(case):
    G, r, kernel = case
    d = decompose_matrix(G)
    assert d.rank == r
    P, Gp = d.projector, d.pinv
    np.testing.assert_allclose(G @ Gp @ G, G, atol=1e-10)
    np.testing.assert_allclose(Gp @ G @ Gp, Gp, atol=1e-10)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P, P.T, atol=0)
    np.testing.assert_allclose(G @ Gp, P, atol=1e-10)
    np.testing.assert_allclose(P @ kernel, 0.0, atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(degenerate_matrices(), st.integers(0, 2**31), st.floats(-5, 5))
def test_contraction_independent_of_generalized_inverse(case, seed, c):
    """Adding c*k*k^T (k in the radical) gives another generalized inverse; on
    image covectors the contraction must not change."""
    G, r, kernel = case
    if kernel.shape[1] == 0:
        return
    d = decompose_matrix(G)
    rng = np.random.default_rng(seed)
    w = G @ rng.normal(size=G.shape[0])
    t = G @ rng.normal(size=G.shape[0])
    k = kernel[:, 0]
    other = d.pinv + c * np.outer(k, k)
    np.testing.assert_allclose(G @ other @ G, G, atol=1e-9)
    assert cocontract(d, w, t).value == pytest.approx(float(w @ other @ t), rel=1e-9, abs=1e-9)

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from skelid.linalg import (
    as_matrix,
    clipped_pinv_solve,
    cpqr,
    econ_qr,
    lupp,
    lupp_factor,
    row_squared_norms,
)


def test_row_squared_norms_examples():
    assert row_squared_norms(np.eye(2)).tolist() == [1.0, 1.0]
    assert row_squared_norms(np.array([[1.0, 0.0], [0.0, 2.0]])).tolist() == [1.0, 4.0]


def test_as_matrix_rejects_non_finite_with_location():
    x = np.ones((3, 4))
    x[2, 1] = np.nan
    with pytest.raises(ValueError, match="row 2.*column 1"):
        as_matrix(x)
    with pytest.raises(ValueError):
        as_matrix(np.ones(3))


def test_cpqr_orthogonal_columns_pivot_by_norm():
    a = np.diag([3.0, 1.0, 2.0])
    f = cpqr(a)
    assert f.pivots[:3].tolist() == [0, 2, 1]


def test_cpqr_identity_reconstructs():
    f = cpqr(np.eye(6))
    assert np.allclose(f.q @ f.r, np.eye(6)[:, f.pivots], atol=1e-14)


def test_cpqr_random_reconstruction(rng):
    a = rng.standard_normal((8, 5))
    f = cpqr(a, max_rank=5)
    assert np.linalg.norm(a[:, f.pivots] - f.q @ f.r) <= 1e-10 * np.linalg.norm(a)


@pytest.mark.parametrize("shape", [(200, 200), (150, 90), (60, 140), (33, 7)])
def test_cpqr_invariants_against_lapack(shape):
    a = np.random.default_rng(shape[0]).standard_normal(shape)
    f = cpqr(a)
    diag = np.abs(np.diag(f.r))
    assert np.all(diag[:-1] >= diag[1:] * (1 - 1e-12))
    assert np.max(np.abs(f.q.T @ f.q - np.eye(f.q.shape[1]))) <= 1e-10
    _, _, piv = scipy.linalg.qr(a, pivoting=True, mode="economic")
    assert np.array_equal(f.pivots, piv)


@pytest.mark.parametrize("j", [1, 7, 32, 45, 100])
def test_cpqr_truncated_residual_identity(j):
    a = np.random.default_rng(j).standard_normal((120, 110))
    full = cpqr(a)
    f = cpqr(a, max_rank=j)
    resid = np.linalg.norm(a[:, f.pivots] - f.q @ f.r) ** 2
    tail = np.linalg.norm(full.r[j:, j:]) ** 2
    assert f.rank == j
    assert np.array_equal(f.pivots[:j], full.pivots[:j])
    assert resid == pytest.approx(tail, rel=1e-8)


def test_cpqr_rank_detection():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((80, 20)) @ rng.standard_normal((20, 60))
    assert cpqr(a, rel_tol=1e-10).rank == 20
    assert cpqr(np.zeros((5, 4))).rank == 0


def test_cpqr_ill_conditioned_columns_stay_orthogonal(rng):
    u, _ = np.linalg.qr(rng.standard_normal((100, 40)))
    v, _ = np.linalg.qr(rng.standard_normal((40, 40)))
    a = (u * np.logspace(0, -8, 40)) @ v.T
    f = cpqr(a)
    assert np.max(np.abs(f.q.T @ f.q - np.eye(40))) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_cpqr_property_reconstruction(m, n, seed):
    a = np.random.default_rng(seed).standard_normal((m, n))
    f = cpqr(a)
    assert np.linalg.norm(a[:, f.pivots] - f.q @ f.r) <= 1e-12 * max(np.linalg.norm(a), 1.0)
    assert sorted(f.pivots.tolist()) == list(range(n))


def test_econ_qr_examples(rng):
    q0, _ = np.linalg.qr(rng.standard_normal((30, 10)))
    q, r = econ_qr(q0)
    assert np.allclose(np.abs(r), np.eye(10), atol=1e-12)
    assert np.allclose(np.abs(q), np.abs(q0), atol=1e-12)
    _, r = econ_qr(np.array([[2.0, 0.0], [0.0, 0.0], [0.0, 3.0]]))
    assert sorted(np.abs(np.diag(r)).tolist()) == [2.0, 3.0]
    q, _ = econ_qr(rng.standard_normal((30, 10)))
    assert np.max(np.abs(q.T @ q - np.eye(10))) <= 1e-10


def test_lupp_diagonally_dominant():
    a = np.diag([10.0, 8.0, 6.0, 4.0, 2.0]) + 0.1
    assert lupp(a, 5).pivots.tolist() == [0, 1, 2, 3, 4]


def test_lupp_recovers_permutation(rng):
    order = rng.permutation(7)
    p = np.eye(7)[np.argsort(order)]
    # row order[j] of p holds e_j, so the j-th pivot must be order[j]
    assert lupp(p, 7).pivots.tolist() == order.tolist()


def test_lupp_reconstruction(rng):
    a = rng.standard_normal((50, 20))
    piv, lower, upper, cols = lupp_factor(a, 20)
    assert piv.count == 20 and not piv.short
    assert cols.tolist() == list(range(20))
    assert np.linalg.norm(a[piv.perm] - lower @ upper) <= 1e-8 * np.linalg.norm(a)
    assert np.all(np.abs(lower) <= 1.0 + 1e-12)


def test_lupp_short_on_rank_deficient(rng):
    a = rng.standard_normal((30, 3)) @ rng.standard_normal((3, 10))
    a[:, 3:] = 0.0
    piv = lupp(a, 5)
    assert piv.short and piv.count <= 3


def test_clipped_pinv_examples(rng):
    b = rng.standard_normal((5, 4))
    assert np.allclose(clipped_pinv_solve(np.eye(4), b), b)
    out = clipped_pinv_solve(np.diag([1.0, 1e-15]), np.eye(2), 1e-12)
    assert np.allclose(out, np.diag([1.0, 0.0]))
    a = rng.standard_normal((20, 20)) + 10 * np.eye(20)
    b = rng.standard_normal((7, 20))
    direct = b @ np.linalg.inv(a)
    assert np.linalg.norm(clipped_pinv_solve(a, b) - direct) <= 1e-10 * np.linalg.norm(direct)


def test_clipped_pinv_least_squares(rng):
    a = rng.standard_normal((8, 15))
    b = rng.standard_normal((6, 15))
    # b @ pinv(a) is the minimizer of ||z a - b||
    expected = np.linalg.lstsq(a.T, b.T, rcond=None)[0].T
    got = clipped_pinv_solve(a, b)
    assert np.linalg.norm(got - expected) <= 1e-8 * np.linalg.norm(expected)


def test_clipped_pinv_zero_and_shape_errors():
    assert np.array_equal(clipped_pinv_solve(np.zeros((3, 4)), np.ones((2, 4))), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        clipped_pinv_solve(np.eye(3), np.ones((2, 4)))

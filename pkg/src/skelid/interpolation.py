"""Interpolation matrices ``W`` (n x k) with ``X ~= W @ X[S]``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .linalg import DEFAULT_CLIP_TOL, as_matrix, clipped_pinv_solve, econ_qr
from .selectors import SelectionResult


@dataclass
class Interpolation:
    w: np.ndarray
    skeletons: np.ndarray
    builder: str
    flag: str | None = None

    @property
    def k(self) -> int:
        return len(self.skeletons)


def exact_w(x, s, clip_tol: float = DEFAULT_CLIP_TOL) -> Interpolation:
    """Least-squares optimal ``W = X @ pinv(X[S])`` via QR of ``X[S].T``.

    With ``X[S].T = Q R`` this is ``(X @ Q) @ pinv(R.T)``; the only pass over
    ``X`` is the product ``X @ Q``.
    """
    x = as_matrix(x)
    s = np.asarray(s, dtype=int)
    if s.size == 0:
        raise ValueError("empty skeleton set")
    xs = x[s]
    if xs.shape[0] <= xs.shape[1]:
        q, r = econ_qr(xs.T)
        w = clipped_pinv_solve(r.T, x @ q, clip_tol)
    else:
        w = clipped_pinv_solve(xs, x, clip_tol)
    return Interpolation(w=w, skeletons=s, builder="exact")


def build_id(sel: SelectionResult, clip_tol: float = DEFAULT_CLIP_TOL) -> Interpolation:
    """Optimal ``W`` from the factor ``L`` of an ID-revealing selector, O(n k^2).

    ``W[perm[:k]] = I`` and ``W[perm[k:]] = L2 @ pinv(L1)`` with the
    pseudoinverse clipped, since ``L1`` from blockwise selection is often
    ill-conditioned.
    """
    if sel.l_factor is None:
        raise ValueError("selector not ID-revealing: no L factor")
    lf = sel.l_factor
    k = lf.shape[1]
    if k != sel.k:
        raise ValueError(f"L has {k} columns but {sel.k} skeletons were selected")
    n = lf.shape[0]
    head, tail = sel.perm[:k], sel.perm[k:]
    w = np.zeros((n, k))
    w[head] = np.eye(k)
    if tail.size and k:
        w[tail] = clipped_pinv_solve(lf[head], lf[tail], clip_tol)
    return Interpolation(w=w, skeletons=np.asarray(head), builder="id")


def build_osid(y, perm, k: int, clip_tol: float = DEFAULT_CLIP_TOL) -> Interpolation:
    """Oversampled sketchy ID: ``W = Y @ pinv(Y[S])`` from the retained sketch.

    With ``Y[S].T = Q R`` the non-skeleton rows are ``(Y @ Q) @ inv(R.T)``.
    Diagonal entries of ``R`` below ``clip_tol * max|diag|`` are dropped from the
    triangular solve and the result is flagged ``"rank_deficient"``.  Passing
    ``y[:, :k]`` gives the unoversampled sketched least-squares ``W``.
    """
    y = as_matrix(y, "y")
    perm = np.asarray(perm, dtype=int)
    n, l = y.shape
    if l < k:
        raise ValueError(f"sketch has {l} columns, need at least k = {k}")
    head, tail = perm[:k], perm[k:]
    w = np.zeros((n, k))
    w[head] = np.eye(k)
    flag = None
    if tail.size and k:
        q, r = econ_qr(y[head].T)
        rhs = (y[tail] @ q).T
        diag = np.abs(np.diag(r))
        keep = diag >= clip_tol * diag.max() if diag.max() > 0 else np.zeros(k, bool)
        if keep.all():
            w[tail] = solve_triangular(r, rhs).T
        else:
            flag = "rank_deficient"
            idx = np.flatnonzero(keep)
            if idx.size:
                w[np.ix_(tail, idx)] = solve_triangular(r[np.ix_(idx, idx)], rhs[idx]).T
    return Interpolation(w=w, skeletons=head, builder="osid", flag=flag)

"""Dense kernels shared by the selectors and interpolation builders.

Matrices are plain ``numpy.ndarray`` of float64; rows are data points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Column panels narrower than this are updated one reflector at a time.
MIN_BLOCKED_PANEL = 8
PANEL_WIDTH = 32
# A downdated column norm below this fraction of its last exact value is recomputed.
NORM_RECOMPUTE_RATIO = 1e-3
DEFAULT_CLIP_TOL = 1e-12


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a finite 2-D float64 array (no copy when already one)."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.isfinite(a).all():
        bad = np.argwhere(~np.isfinite(a))[0]
        raise ValueError(f"{name} has a non-finite entry at row {bad[0]}, column {bad[1]}")
    return a


def row_squared_norms(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.einsum("ij,ij->i", x, x)


@dataclass(frozen=True)
class PivotedQR:
    """``a[:, pivots] ~= q @ r`` with ``q`` m x j orthonormal and ``r`` j x n upper trapezoidal."""

    q: np.ndarray
    r: np.ndarray
    pivots: np.ndarray

    @property
    def rank(self) -> int:
        return self.q.shape[1]


def _householder(x: np.ndarray) -> tuple[float, float]:
    """Overwrite ``x[1:]`` with the reflector tail; return (beta, tau) as in LAPACK larfg."""
    alpha = float(x[0])
    xnorm = float(np.linalg.norm(x[1:]))
    if xnorm == 0.0:
        return alpha, 0.0
    beta = -np.copysign(np.hypot(alpha, xnorm), alpha)
    x[1:] /= alpha - beta
    return beta, (beta - alpha) / beta


def _larft(y: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Triangular factor T with H_1 ... H_b = I - Y T Y^T (forward, columnwise)."""
    b = y.shape[1]
    t = np.zeros((b, b))
    for i in range(b):
        t[i, i] = tau[i]
        if i:
            t[:i, i] = -tau[i] * (t[:i, :i] @ (y[:, :i].T @ y[:, i]))
    return t


def _form_q(work: np.ndarray, tau: np.ndarray, ncols: int) -> np.ndarray:
    """Accumulate the first ``ncols`` reflectors stored below the diagonal of ``work``."""
    m = work.shape[0]
    q = np.eye(m, ncols)
    if ncols == 0:
        return q
    y_all = np.tril(work[:, :ncols], -1)
    y_all[np.arange(ncols), np.arange(ncols)] = 1.0
    starts = list(range(0, ncols, PANEL_WIDTH))
    for start in reversed(starts):
        end = min(start + PANEL_WIDTH, ncols)
        y = y_all[start:, start:end]
        t = _larft(y, tau[start:end])
        block = q[start:, start:]
        block -= y @ (t @ (y.T @ block))
    return q


def _qp3_panel(work, k0, nb, piv, tau, vn1, vn2, threshold) -> int:
    """Factor up to ``nb`` pivoted columns starting at ``k0``; deferred trailing update.

    Follows the LAPACK laqps scheme: the panel's effect on the trailing matrix is
    kept in ``f`` and applied as one matrix-matrix product at the end.  Returns the
    number of columns factored (fewer than ``nb`` if the panel stopped early).
    """
    m, n = work.shape
    f = np.zeros((n - k0, nb))
    flagged: list[int] = []
    j = 0
    while j < nb:
        c = k0 + j
        if j:
            rest = vn1[c:]
            mass = float(rest @ rest)
            if mass == 0.0 or mass <= threshold:
                break
        p = c + int(np.argmax(vn1[c:]))
        if p != c:
            work[:, [c, p]] = work[:, [p, c]]
            f[[j, p - k0]] = f[[p - k0, j]]
            piv[[c, p]] = piv[[p, c]]
            vn1[p] = vn1[c]
            vn2[p] = vn2[c]
        if j:
            work[c:, c] -= work[c:, k0:c] @ f[j, :j]
        beta, t = _householder(work[c:, c])
        tau[c] = t
        work[c, c] = 1.0
        if c + 1 < n:
            f[j + 1:, j] = t * (work[c:, c + 1:].T @ work[c:, c])
        if j:
            aux = -t * (work[c:, k0:c].T @ work[c:, c])
            f[:, j] += f[:, :j] @ aux
        if c + 1 < n:
            work[c, c + 1:] -= work[c, k0:c + 1] @ f[j + 1:, :j + 1].T
        work[c, c] = beta
        j += 1
        cols = np.arange(c + 1, n)
        if c + 1 >= m:
            vn1[cols] = 0.0
            break
        live = cols[vn1[cols] != 0.0]
        if live.size:
            ratio = np.abs(work[c, live]) / vn1[live]
            shrink = np.maximum(0.0, (1.0 + ratio) * (1.0 - ratio))
            rel = shrink * (vn1[live] / vn2[live]) ** 2
            stale = rel <= NORM_RECOMPUTE_RATIO**2
            vn1[live[~stale]] *= np.sqrt(shrink[~stale])
            flagged.extend(live[stale].tolist())
        if flagged:
            break
    end = k0 + j
    if end < min(m, n):
        work[end:, end:] -= work[end:, k0:end] @ f[j:, :j].T
    for col in flagged:
        vn1[col] = np.linalg.norm(work[end:, col])
        vn2[col] = vn1[col]
    return j


def cpqr(a, max_rank: int | None = None, rel_tol: float = 0.0) -> PivotedQR:
    """Householder QR with greedy column pivoting, truncated on rank or residual mass.

    Stops after ``max_rank`` pivots or once the squared Frobenius norm of the
    trailing residual is at most ``rel_tol * ||a||_F^2``.  Ties go to the lowest
    column index.
    """
    a = as_matrix(a)
    m, n = a.shape
    kmax = min(m, n) if max_rank is None else int(max_rank)
    if not 0 <= kmax <= min(m, n):
        raise ValueError(f"max_rank must be in [0, {min(m, n)}], got {kmax}")
    if not 0.0 <= rel_tol < 1.0:
        raise ValueError(f"rel_tol must be in [0, 1), got {rel_tol}")

    work = np.array(a, order="F", copy=True)
    piv = np.arange(n)
    tau = np.zeros(max(kmax, 1))
    vn1 = np.linalg.norm(work, axis=0)
    vn2 = vn1.copy()
    threshold = rel_tol * float(vn1 @ vn1)

    k = 0
    while k < kmax:
        rest = vn1[k:]
        mass = float(rest @ rest)
        if mass == 0.0 or mass <= threshold:
            break
        nb = min(PANEL_WIDTH, kmax - k) if kmax - k >= MIN_BLOCKED_PANEL else 1
        k += _qp3_panel(work, k, nb, piv, tau, vn1, vn2, threshold)

    q = _form_q(work, tau, k)
    r = np.triu(work[:k, :])
    return PivotedQR(q=q, r=r, pivots=piv)


def econ_qr(a) -> tuple[np.ndarray, np.ndarray]:
    """Unpivoted economy QR (LAPACK geqrf/orgqr through numpy)."""
    a = as_matrix(a)
    if a.shape[0] < a.shape[1]:
        raise ValueError(f"econ_qr needs rows >= cols, got shape {a.shape}")
    return np.linalg.qr(a, mode="reduced")


class LUPivots(NamedTuple):
    perm: np.ndarray  # full row permutation; perm[:count] are the pivot rows
    count: int
    requested: int

    @property
    def pivots(self) -> np.ndarray:
        return self.perm[: self.count]

    @property
    def short(self) -> bool:
        return self.count < self.requested


def lupp_factor(a, k: int) -> tuple[LUPivots, np.ndarray, np.ndarray, np.ndarray]:
    """Run ``k`` steps of row-pivoted LU; return pivots, L, U and the pivot columns used.

    An exactly zero active column is skipped.  ``a[perm][:, cols]`` restricted to
    the leading ``count`` rows equals ``(L @ U)`` on those rows.
    """
    a = as_matrix(a)
    n, ncols = a.shape
    if not 0 <= k <= min(n, ncols):
        raise ValueError(f"k must be in [0, {min(n, ncols)}], got {k}")
    work = a.copy()
    perm = np.arange(n)
    cols: list[int] = []
    row = col = 0
    while row < k and col < ncols:
        p = row + int(np.argmax(np.abs(work[row:, col])))
        pivot = work[p, col]
        if pivot == 0.0:
            col += 1
            continue
        if p != row:
            work[[row, p]] = work[[p, row]]
            perm[[row, p]] = perm[[p, row]]
        work[row + 1:, col] /= pivot
        work[row + 1:, col + 1:] -= np.outer(work[row + 1:, col], work[row, col + 1:])
        cols.append(col)
        row += 1
        col += 1
    lower = np.zeros((n, row))
    for i, c in enumerate(cols):
        lower[i + 1:, i] = work[i + 1:, c]
        lower[i, i] = 1.0
    upper = np.triu(work[:row, :])
    return LUPivots(perm, row, k), lower, upper, np.asarray(cols, dtype=int)


def lupp(a, k: int) -> LUPivots:
    """First ``k`` pivot rows of LU with partial (row) pivoting."""
    return lupp_factor(a, k)[0]


def clipped_pinv_solve(a, b, clip_tol: float = DEFAULT_CLIP_TOL) -> np.ndarray:
    """Return ``b @ pinv(a)`` discarding singular values below ``clip_tol * sigma_max``."""
    if clip_tol <= 0:
        raise ValueError("clip_tol must be positive")
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if b.shape[1] != a.shape[1]:
        raise ValueError(f"b has {b.shape[1]} columns but a has {a.shape[1]}")
    if a.size == 0:
        return np.zeros((b.shape[0], a.shape[0]))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((b.shape[0], a.shape[0]))
    keep = s >= clip_tol * s[0]
    return ((b @ vt[keep].T) / s[keep]) @ u[:, keep].T

"""Error functionals for skeleton subsets and interpolation matrices.

These are the reference oracles: ``errskel`` always goes through the explicit
least-squares ``W``, never through a selector's internal residual tracking.
All relative quantities are normalized by ``||X||_F^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interpolation import exact_w
from .linalg import as_matrix


def fro2(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.einsum("ij,ij->", x, x))


def errid(x, s, w) -> float:
    """``||X - W X[S]||_F^2``."""
    x = as_matrix(x)
    s = np.asarray(s, dtype=int)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (x.shape[0], s.size):
        raise ValueError(f"W has shape {w.shape}, expected {(x.shape[0], s.size)}")
    return fro2(x - w @ x[s])


def errskel(x, s) -> float:
    """``min_W ||X - W X[S]||_F^2``."""
    s = np.asarray(s, dtype=int)
    if s.size == 0:
        raise ValueError("empty skeleton set")
    return errid(x, s, exact_w(x, s).w)


def eta_r(x, r: int) -> float:
    """Relative tail ``sum_{i>r} sigma_i^2 / sum_i sigma_i^2`` from a full SVD."""
    x = as_matrix(x)
    if not 1 <= r <= min(x.shape):
        raise ValueError(f"r must be in [1, {min(x.shape)}], got {r}")
    sq = np.linalg.svd(x, compute_uv=False) ** 2
    return float(sq[r:].sum() / sq.sum())


@dataclass(frozen=True)
class ErrorReport:
    abs_skeletonization: float
    abs_interpolation: float
    rel_skeletonization: float
    rel_interpolation: float
    fro_norm_sq: float


def error_report(x, s, w) -> ErrorReport:
    x = as_matrix(x)
    total = fro2(x)
    skel = errskel(x, s)
    interp = errid(x, s, w)
    return ErrorReport(skel, interp, skel / total, interp / total, total)


def is_rank_eps_id(x, s, w, r: int, eps: float) -> bool:
    """Whether ``(S, W)`` is within ``1 + eps`` of the best rank-``r`` error."""
    x = as_matrix(x)
    return errid(x, s, w) <= (1.0 + eps) * eta_r(x, r) * fro2(x)

"""Row skeleton selection.

Every selector takes an n x d data matrix whose rows are points and returns a
:class:`SelectionResult`.  The adaptive selectors (``cpqr_select``,
``srp_select``, ``blockwise_select``) also return the factor ``L`` with
``X ~= L @ Q.T`` on the selected span, which makes them ID-revealing, and they
track the residual mass ``||d||_1`` so they can stop at a relative tolerance.

Randomized selectors draw from one root seed.  Step (or block) ``t`` uses its
own stream ``default_rng((seed, t))`` so a blockwise run with ``b = 1`` consumes
exactly the same draws as the sequential algorithm.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, cpqr, lupp, row_squared_norms
from .sketch import apply_sketch, gaussian_embedding

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class StoppingRule:
    """Either a relative residual tolerance ``tau`` or a fixed skeleton count ``k``."""

    mode: str
    tau: float | None = None
    k: int | None = None

    def __post_init__(self):
        if self.mode == "tolerance":
            if self.tau is None or not 0.0 < self.tau < 1.0:
                raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        elif self.mode == "rank":
            if self.k is None or self.k < 1:
                raise ValueError(f"k must be a positive integer, got {self.k}")
        else:
            raise ValueError(f"unknown stopping mode {self.mode!r}")

    @classmethod
    def tolerance(cls, tau: float) -> StoppingRule:
        return cls("tolerance", tau=float(tau))

    @classmethod
    def rank(cls, k: int) -> StoppingRule:
        return cls("rank", k=int(k))

    @property
    def adaptive(self) -> bool:
        return self.mode == "tolerance"

    def budget(self, n: int) -> int:
        if self.mode == "rank":
            if self.k > n:
                raise ValueError(f"k = {self.k} exceeds the number of rows {n}")
            return self.k
        return n


@dataclass
class SelectionResult:
    """Selected rows, the ordering permutation and (for adaptive selectors) ``L``.

    ``perm[:k]`` lists ``skeletons`` in selection order.  ``residual_trace`` holds
    ``(|S|, ||d||_1 / ||d0||_1)`` at every step or block boundary.  ``flag`` is
    ``None`` for a clean run, otherwise one of ``"degenerate"``,
    ``"tolerance_unreachable"``, ``"duplicates_removed"``, ``"filter_empty"``,
    ``"short"``.
    """

    skeletons: np.ndarray
    perm: np.ndarray
    l_factor: np.ndarray | None = None
    residual_trace: list[tuple[int, float]] = field(default_factory=list)
    flag: str | None = None

    @property
    def k(self) -> int:
        return len(self.skeletons)

    @property
    def id_revealing(self) -> bool:
        return self.l_factor is not None


class _Pivots:
    """Permutation with inverse, updated by swapping chosen indices to the front."""

    def __init__(self, n: int):
        self.perm = np.arange(n)
        self.pos = np.arange(n)
        self.count = 0

    def push(self, indices) -> None:
        for s in indices:
            j, t = self.pos[s], self.count
            other = self.perm[t]
            self.perm[t], self.perm[j] = s, other
            self.pos[s], self.pos[other] = t, j
            self.count += 1

    @property
    def selected(self) -> np.ndarray:
        return self.perm[: self.count].copy()


class _Columns:
    """Column-appendable dense buffer."""

    def __init__(self, rows: int, capacity: int = 64):
        self._buf = np.empty((rows, max(capacity, 1)))
        self.size = 0

    def append(self, block: np.ndarray) -> None:
        block = block.reshape(block.shape[0], -1)
        need = self.size + block.shape[1]
        if need > self._buf.shape[1]:
            grown = np.empty((self._buf.shape[0], max(need, 2 * self._buf.shape[1])))
            grown[:, : self.size] = self._buf[:, : self.size]
            self._buf = grown
        self._buf[:, self.size:need] = block
        self.size = need

    @property
    def view(self) -> np.ndarray:
        return self._buf[:, : self.size]


def _stream(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng((seed, t))


def _draw(weights: np.ndarray, rng: np.random.Generator) -> int:
    """One index with probability proportional to ``weights`` (inverse CDF)."""
    cdf = np.cumsum(weights)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    if i >= len(weights) or weights[i] <= 0.0:
        i = int(np.flatnonzero(weights > 0.0)[-1])
    return i


def _numerically_zero(mass: float, total: float, k: int) -> bool:
    # Downdated residuals carry roughly k * eps * ||X||_F^2 of rounding noise.
    return mass <= 8.0 * max(k, 1) * _EPS * total


def _order_from(skeletons: np.ndarray, n: int) -> np.ndarray:
    rest = np.setdiff1d(np.arange(n), skeletons, assume_unique=True)
    return np.concatenate([skeletons, rest]).astype(int)


def sqnorm_distribution(x) -> np.ndarray:
    """Row sampling probabilities ``||x_i||^2 / ||X||_F^2``."""
    d = row_squared_norms(as_matrix(x))
    total = d.sum()
    if total <= 0.0:
        raise ValueError("degenerate distribution: all rows are zero")
    return d / total


def weighted_sample_block(d, b: int, seed) -> np.ndarray:
    """Draw up to ``b`` distinct indices proportional to ``d`` without replacement.

    Each draw is proportional to the current weights, after which the drawn
    weight is zeroed.  Returns every positive-weight index when fewer than ``b``
    exist.  ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if b < 1:
        raise ValueError(f"block size must be positive, got {b}")
    rng = np.random.default_rng(seed)
    w = np.maximum(np.asarray(d, dtype=np.float64), 0.0)
    count = min(b, int(np.count_nonzero(w)))
    out = np.empty(count, dtype=int)
    for j in range(count):
        i = _draw(w, rng)
        out[j] = i
        w[i] = 0.0
    return out


def _top_weights(d: np.ndarray, b: int) -> np.ndarray:
    order = np.argsort(-d, kind="stable")[:b]
    return order[d[order] > 0.0]


def sqnorm_sample(x, k: int, with_replacement: bool = True, seed: int = 0) -> SelectionResult:
    """Squared-norm row sampling (not adaptive, not ID-revealing).

    With replacement, ``k`` i.i.d. draws are deduplicated in first-seen order and
    the result is flagged ``"duplicates_removed"`` if any repeat occurred.
    """
    x = as_matrix(x)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    p = sqnorm_distribution(x)
    rng = np.random.default_rng(seed)
    flag = None
    if with_replacement:
        draws = rng.choice(n, size=k, p=p)
        _, first = np.unique(draws, return_index=True)
        skeletons = draws[np.sort(first)]
        if len(skeletons) < k:
            flag = "duplicates_removed"
    else:
        skeletons = weighted_sample_block(p, k, rng)
        if len(skeletons) < k:
            flag = "short"
    return SelectionResult(skeletons=skeletons, perm=_order_from(skeletons, n), flag=flag)


def cpqr_select(x, stop: StoppingRule) -> SelectionResult:
    """Greedy max-residual-norm pivoting: column-pivoted QR of ``X.T``."""
    x = as_matrix(x)
    n, dim = x.shape
    total = float(np.einsum("ij,ij->", x, x))
    if stop.adaptive:
        f = cpqr(x.T, max_rank=min(n, dim), rel_tol=stop.tau)
    else:
        k = stop.budget(n)
        f = cpqr(x.T, max_rank=min(k, dim), rel_tol=0.0)
    k_found = f.rank
    l_factor = np.zeros((n, k_found))
    l_factor[f.pivots] = f.r.T

    captured = np.cumsum(np.einsum("ij,ij->i", f.r, f.r))
    residual = np.maximum(total - captured, 0.0) / total if total else np.zeros(k_found)
    residual = np.minimum.accumulate(residual)
    trace = [(0, 1.0)] + [(j + 1, float(r)) for j, r in enumerate(residual)]

    flag = None
    if stop.adaptive and trace[-1][1] > stop.tau:
        flag = "tolerance_unreachable"
    elif not stop.adaptive and k_found < stop.k:
        flag = "degenerate"
    return SelectionResult(
        skeletons=f.pivots[:k_found].copy(),
        perm=f.pivots.copy(),
        l_factor=l_factor,
        residual_trace=trace,
        flag=flag,
    )


def _finish(pivots, l_cols, trace, flag, stop, mass, total) -> SelectionResult:
    if flag is None and stop.adaptive and mass > stop.tau * total:
        flag = "tolerance_unreachable"
    return SelectionResult(
        skeletons=pivots.selected,
        perm=pivots.perm.copy(),
        l_factor=l_cols.view.copy(),
        residual_trace=trace,
        flag=flag,
    )


def srp_select(x, stop: StoppingRule, seed: int = 0) -> SelectionResult:
    """Sequential random pivoting.

    Each pivot is sampled from the current residual squared norms ``d``; the
    residual is updated by one Gram-Schmidt step (with reorthogonalization) and
    ``d`` is downdated in O(n).
    """
    x = as_matrix(x)
    n, dim = x.shape
    d = row_squared_norms(x)
    total = float(d.sum())
    if total <= 0.0:
        raise ValueError("degenerate distribution: all rows are zero")
    kmax = stop.budget(n)
    target = stop.tau * total if stop.adaptive else -1.0

    pivots = _Pivots(n)
    l_cols, q_cols = _Columns(n), _Columns(dim)
    in_s = np.zeros(n, dtype=bool)
    trace = [(0, 1.0)]
    mass, flag, t = total, None, 0
    while pivots.count < kmax and mass > target:
        if _numerically_zero(mass, total, pivots.count):
            flag = "degenerate"
            break
        t += 1
        s = _draw(d, _stream(seed, t))
        q = q_cols.view
        v = x[s] - q @ (q.T @ x[s])
        v -= q @ (q.T @ v)
        vnorm = np.linalg.norm(v)
        a = x @ v
        a[in_s] = 0.0
        pivot = a[s]
        if vnorm == 0.0 or pivot <= 0.0:
            flag = "degenerate"
            break
        in_s[s] = True
        pivots.push((s,))
        q_cols.append(v / vnorm)
        l_cols.append(a / np.sqrt(pivot))
        d -= a * a / pivot
        d[in_s] = 0.0
        np.maximum(d, 0.0, out=d)
        mass = float(d.sum())
        trace.append((pivots.count, mass / total))
    return _finish(pivots, l_cols, trace, flag, stop, mass, total)


def robust_blockwise_filter(v, tau_b: float):
    """Truncated local CPQR on candidate residuals ``v`` (d x b).

    Keeps ``b'`` = the largest ``i`` with ``||R(i:, i:)||_F^2 >= tau_b ||R||_F^2``
    (1-based), limited to the numerical rank CPQR found.  Returns
    ``(b', Q[:, :b'], pivots)``.
    """
    v = as_matrix(v, "v")
    if not 0.0 <= tau_b <= 1.0:
        raise ValueError(f"tau_b must be in [0, 1], got {tau_b}")
    dim, b = v.shape
    if b == 0 or not np.any(v):
        return 0, np.zeros((dim, 0)), np.arange(b)
    f = cpqr(v, max_rank=min(dim, b), rel_tol=0.0)
    sq = f.r * f.r
    # tail[i] = ||R(i:, i:)||_F^2 (0-based), via reversed 2-D cumulative sums
    tail_grid = sq[::-1, ::-1].cumsum(axis=0).cumsum(axis=1)[::-1, ::-1]
    tail = np.diagonal(tail_grid)
    # slack so that exact ties (e.g. equal-norm orthogonal columns) survive rounding
    kept = int(np.count_nonzero(tail >= tau_b * tail[0] * (1.0 - 4.0 * max(dim, b) * _EPS)))
    diag = np.abs(np.diagonal(f.r))
    numerical_rank = int(np.count_nonzero(diag > max(dim, b) * _EPS * diag[0]))
    kept = min(kept, numerical_rank)
    return kept, f.q[:, :kept], f.pivots


def blockwise_select(
    x,
    stop: StoppingRule,
    b: int = 40,
    tau_b: float | None = None,
    pivot_mode: str = "random",
    seed: int = 0,
) -> SelectionResult:
    """Blockwise random/greedy pivoting with optional robust filtering.

    ``tau_b = 0`` gives plain BRP/BGP, ``tau_b = 1/b`` (the default) gives
    RBRP/RBGP.  Each block costs one pass over ``X`` as a matrix-matrix product.
    """
    if b < 1:
        raise ValueError(f"block size must be positive, got {b}")
    if tau_b is None:
        tau_b = 1.0 / b
    if not 0.0 <= tau_b <= 1.0:
        raise ValueError(f"tau_b must be in [0, 1], got {tau_b}")
    if pivot_mode not in ("random", "greedy"):
        raise ValueError(f"pivot_mode must be 'random' or 'greedy', got {pivot_mode!r}")
    x = as_matrix(x)
    n, dim = x.shape
    d = row_squared_norms(x)
    total = float(d.sum())
    if total <= 0.0:
        raise ValueError("degenerate distribution: all rows are zero")
    kmax = stop.budget(n)
    target = stop.tau * total if stop.adaptive else -1.0

    pivots = _Pivots(n)
    l_cols, q_cols = _Columns(n), _Columns(dim)
    in_s = np.zeros(n, dtype=bool)
    trace = [(0, 1.0)]
    mass, flag, t = total, None, 0
    while pivots.count < kmax and mass > target:
        if _numerically_zero(mass, total, pivots.count):
            flag = "degenerate"
            break
        t += 1
        width = min(b, kmax - pivots.count)
        if pivot_mode == "random":
            cand = weighted_sample_block(d, width, _stream(seed, t))
        else:
            cand = _top_weights(d, width)
        if cand.size == 0:
            flag = "degenerate"
            break
        q = q_cols.view
        xs = x[cand].T
        v = xs - q @ (q.T @ xs)
        v -= q @ (q.T @ v)
        kept, q_new, local = robust_blockwise_filter(v, tau_b)
        if kept == 0:
            flag = "filter_empty"
            break
        chosen = cand[local[:kept]]
        l_new = x @ q_new
        l_new[in_s] = 0.0
        in_s[chosen] = True
        pivots.push(chosen)
        q_cols.append(q_new)
        l_cols.append(l_new)
        d -= np.einsum("ij,ij->i", l_new, l_new)
        d[in_s] = 0.0
        np.maximum(d, 0.0, out=d)
        mass = float(d.sum())
        trace.append((pivots.count, mass / total))
    return _finish(pivots, l_cols, trace, flag, stop, mass, total)


def sketchy_select(
    x, k: int, method: str = "lupp", oversample_l: int | None = None, seed: int = 0
) -> tuple[SelectionResult, np.ndarray]:
    """Greedy pivoting (LUPP or CPQR) on the Gaussian sketch ``Y = X @ Omega``.

    Returns the selection and ``Y`` (n x l), which OSID reuses.  Not adaptive and
    not ID-revealing.
    """
    x = as_matrix(x)
    n, dim = x.shape
    l = k if oversample_l is None else int(oversample_l)
    if l < k:
        raise ValueError(f"sketch size l = {l} is smaller than k = {k}")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    y = apply_sketch(x, gaussian_embedding(dim, l, seed))
    if method == "lupp":
        piv = lupp(y, k)
        perm, count = piv.perm, piv.count
    elif method == "cpqr":
        f = cpqr(y.T, max_rank=k)
        perm, count = f.pivots, f.rank
    else:
        raise ValueError(f"method must be 'lupp' or 'cpqr', got {method!r}")
    sel = SelectionResult(
        skeletons=perm[:count].copy(),
        perm=perm.copy(),
        flag="short" if count < k else None,
    )
    return sel, y

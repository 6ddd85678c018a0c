"""Synthetic test matrices and a minimal matrix file format.

raw_f64 layout: two little-endian int64 (rows, cols) followed by rows*cols
little-endian float64 in row-major order.  CSV: no header, one row per line.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

KINDS = ("gmm", "gaussian_exp", "snn", "helmholtz", "file")


@dataclass(frozen=True)
class DatasetSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}; expected one of {KINDS}")


def gen_gmm(n: int = 2000, d: int = 500, clusters: int = 100, seed: int = 0) -> np.ndarray:
    """Clusters of equal size with means ``10 j e_j`` (j = 1..clusters) and unit noise."""
    if clusters < 1 or n % clusters:
        raise ValueError(f"clusters ({clusters}) must divide n ({n})")
    if clusters > d:
        raise ValueError(f"clusters ({clusters}) cannot exceed d ({d})")
    rng = np.random.default_rng(seed)
    m = n // clusters
    x = rng.standard_normal((n, d))
    j = np.arange(clusters)
    x[np.repeat(j * m, m) + np.tile(np.arange(m), clusters), np.repeat(j, m)] += np.repeat(
        10.0 * (j + 1), m
    )
    return x


def haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def gaussian_exp_spectrum(
    size: int, flat: int = 100, decay: float = 0.8, floor: float = 1e-5
) -> np.ndarray:
    i = np.arange(1, size + 1)
    return np.where(i <= flat, 1.0, np.maximum(decay ** (i - flat), floor))


def gen_gaussian_exp(
    n: int = 1000,
    seed: int = 0,
    d: int | None = None,
    flat: int = 100,
    decay: float = 0.8,
    floor: float = 1e-5,
) -> np.ndarray:
    """``U diag(sigma) V^T`` with Haar ``U, V``; sigma flat for ``flat`` values then geometric."""
    d = n if d is None else d
    rng = np.random.default_rng(seed)
    u = haar_orthogonal(n, rng)
    v = haar_orthogonal(d, rng)
    size = min(n, d)
    sigma = gaussian_exp_spectrum(size, flat, decay, floor)
    return (u[:, :size] * sigma) @ v[:, :size].T


def _sparse_nonneg(n: int, sparsity: float, rng: np.random.Generator) -> np.ndarray:
    nnz = int(round(sparsity * n * n))
    a = np.zeros(n * n)
    a[rng.choice(n * n, size=nnz, replace=False)] = 1.0 - rng.random(nnz)
    return a.reshape(n, n)


def snn_coefficients(n: int) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=np.float64)
    return np.where(i <= 100, 10.0 / i, 1.0 / i)


def snn_factors(n: int = 1000, sparsity: float = 0.1, seed: int = 0):
    """``(U, coefficients, V)`` behind :func:`gen_snn`."""
    if not 0.0 < sparsity <= 1.0:
        raise ValueError(f"sparsity must be in (0, 1], got {sparsity}")
    rng = np.random.default_rng(seed)
    u = _sparse_nonneg(n, sparsity, rng)
    v = _sparse_nonneg(n, sparsity, rng)
    return u, snn_coefficients(n), v


def gen_snn(n: int = 1000, sparsity: float = 0.1, seed: int = 0) -> np.ndarray:
    """Sparse non-negative test matrix ``sum_i c_i u_i v_i^T``, c_i = 10/i (i <= 100) else 1/i."""
    u, c, v = snn_factors(n, sparsity, seed)
    return (u * c) @ v.T


def helmholtz_points(grid_per_axis: int = 15, n_targets: int = 2000, seed: int = 0):
    """Clenshaw-Curtis grid on [-1, 1]^3 and uniform points on the radius-3 sphere."""
    m = grid_per_axis
    nodes = np.cos(np.arange(m) * np.pi / (m - 1)) if m > 1 else np.zeros(1)
    sources = np.stack(np.meshgrid(nodes, nodes, nodes, indexing="ij"), axis=-1).reshape(-1, 3)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_targets, 3))
    targets = 3.0 * g / np.linalg.norm(g, axis=1, keepdims=True)
    return sources, targets


def helmholtz_kernel(sources, targets, kappa: float) -> np.ndarray:
    """``exp(i kappa r) / (4 pi r)`` between point sets, embedded as ``[Re G, Im G]``."""
    r = cdist(np.atleast_2d(sources), np.atleast_2d(targets))
    hit = np.argwhere(r == 0.0)
    if hit.size:
        raise ValueError(f"source {hit[0][0]} coincides with target {hit[0][1]}")
    scale = 1.0 / (4.0 * np.pi * r)
    return np.hstack([np.cos(kappa * r) * scale, np.sin(kappa * r) * scale])


def gen_helmholtz(
    kappa: float = 5.5, grid_per_axis: int = 15, n_targets: int = 2000, seed: int = 0
) -> np.ndarray:
    """Helmholtz kernel matrix (sources x targets), real-embedded to ``m^3 x 2 n_targets``."""
    sources, targets = helmholtz_points(grid_per_axis, n_targets, seed)
    return helmholtz_kernel(sources, targets, kappa)


def generate(spec: DatasetSpec) -> np.ndarray:
    p = dict(spec.params)
    if spec.kind == "gmm":
        return gen_gmm(seed=spec.seed, **p)
    if spec.kind == "gaussian_exp":
        return gen_gaussian_exp(seed=spec.seed, **p)
    if spec.kind == "snn":
        return gen_snn(seed=spec.seed, **p)
    if spec.kind == "helmholtz":
        return gen_helmholtz(seed=spec.seed, **p)
    return load_matrix(p["path"], p.get("format"))


def save_matrix(x, path, format: str | None = None) -> None:
    path = Path(path)
    fmt = format or _format_from_suffix(path)
    x = np.asarray(x, dtype=np.float64)
    if fmt == "raw_f64":
        with open(path, "wb") as fh:
            fh.write(np.asarray(x.shape, dtype="<i8").tobytes())
            fh.write(np.ascontiguousarray(x, dtype="<f8").tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in x:
                writer.writerow([repr(float(v)) for v in row])
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def _format_from_suffix(path: Path) -> str:
    return "csv" if path.suffix.lower() == ".csv" else "raw_f64"


def load_matrix(path, format: str | None = None) -> np.ndarray:
    """Read a raw_f64 or CSV matrix, rejecting truncation, ragged rows and non-finite values."""
    path = Path(path)
    fmt = format or _format_from_suffix(path)
    if fmt == "raw_f64":
        data = path.read_bytes()
        if len(data) < 16:
            raise ValueError(f"{path}: truncated header ({len(data)} bytes)")
        rows, cols = (int(v) for v in np.frombuffer(data[:16], dtype="<i8"))
        if rows < 0 or cols < 0:
            raise ValueError(f"{path}: negative shape ({rows}, {cols})")
        expected = 16 + 8 * rows * cols
        if len(data) != expected:
            raise ValueError(
                f"{path}: expected {expected} bytes for {rows}x{cols}, found {len(data)}"
            )
        x = np.frombuffer(data[16:], dtype="<f8").reshape(rows, cols).astype(np.float64)
    elif fmt == "csv":
        rows_out: list[list[float]] = []
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row:
                    continue
                try:
                    values = [float(v) for v in row]
                except ValueError as exc:
                    raise ValueError(f"{path}: row {i}: {exc}") from None
                if rows_out and len(values) != len(rows_out[0]):
                    raise ValueError(
                        f"{path}: row {i} has {len(values)} columns, expected {len(rows_out[0])}"
                    )
                rows_out.append(values)
        ncols = len(rows_out[0]) if rows_out else 0
        x = np.asarray(rows_out, dtype=np.float64).reshape(len(rows_out), ncols)
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    bad = np.argwhere(~np.isfinite(x))
    if bad.size:
        raise ValueError(f"{path}: non-finite value at row {bad[0][0]}, column {bad[0][1]}")
    return x


def normalize_rows(x: np.ndarray, mode: str = "none") -> np.ndarray:
    """Optional scaling for natural data: ``row`` (unit rows) or ``max`` (divide by max |x|)."""
    if mode == "none":
        return x
    if mode == "row":
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        return x / np.where(norms > 0, norms, 1.0)
    if mode == "max":
        peak = np.abs(x).max() if x.size else 0.0
        return x / peak if peak > 0 else x
    raise ValueError(f"unknown normalization {mode!r}")


"""Gaussian embeddings used by sketchy pivoting and oversampled sketchy ID."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix


@dataclass(frozen=True)
class Embedding:
    dim_in: int
    dim_out: int
    seed: int | None
    omega: np.ndarray = field(repr=False)


def gaussian_embedding(d: int, l: int, seed: int) -> Embedding:
    """d x l matrix with i.i.d. N(0, 1/l) entries, bit-stable per seed."""
    if d < 1 or l < 1:
        raise ValueError(f"embedding dimensions must be positive, got d={d}, l={l}")
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((d, l)) / np.sqrt(l)
    return Embedding(dim_in=d, dim_out=l, seed=seed, omega=omega)


def apply_sketch(x, e: Embedding) -> np.ndarray:
    x = as_matrix(x)
    if x.shape[1] != e.dim_in:
        raise ValueError(f"matrix has {x.shape[1]} columns, embedding expects {e.dim_in}")
    return x @ e.omega

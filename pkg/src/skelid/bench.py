"""Sweeps of selector x builder x rank x seed with error and wall-time records."""
from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .interpolation import Interpolation, build_id, build_osid, exact_w
from .metrics import errid, errskel, fro2
from .selectors import (
    SelectionResult,
    StoppingRule,
    blockwise_select,
    cpqr_select,
    sketchy_select,
    sqnorm_sample,
    srp_select,
)

BUILDERS = {
    "cpqr": ("id",),
    "sqnorm": ("exact",),
    "srp": ("id",),
    "brp": ("id",),
    "rbrp": ("id",),
    "bgp": ("id",),
    "rbgp": ("id",),
    "sklupp": ("id", "osid"),
    "skcpqr": ("id", "osid"),
}
ALGORITHMS = tuple(BUILDERS)
ADAPTIVE = ("cpqr", "srp", "brp", "rbrp", "bgp", "rbgp")
BLOCKWISE = {"brp": ("random", False), "rbrp": ("random", True), "bgp": ("greedy", False), "rbgp": ("greedy", True)}
WORKERS_ENV = "SKELID_WORKERS"


@dataclass
class RunRecord:
    dataset: str
    algorithm: str
    builder: str
    rank: int
    rel_errskel: float
    rel_errid: float
    select_seconds: float
    build_seconds: float
    seed: int
    block_size: int
    tau_b: float
    oversample_l: int


FIELDS = tuple(f.name for f in fields(RunRecord))


def check_algorithm(name: str) -> None:
    if name not in BUILDERS:
        raise ValueError(f"unknown algorithm {name!r}; valid tags: {', '.join(ALGORITHMS)}")


def check_pair(algorithm: str, builder: str) -> None:
    check_algorithm(algorithm)
    if builder not in BUILDERS[algorithm]:
        raise ValueError(
            f"builder {builder!r} is not valid for {algorithm!r}; use one of {BUILDERS[algorithm]}"
        )


@dataclass
class CellConfig:
    block_size: int = 40
    tau_b: float | None = None
    oversample_factor: float = 3.0
    repeats: int = 3

    def tau_b_for(self, algorithm: str) -> float:
        if algorithm not in BLOCKWISE:
            return 0.0
        robust = BLOCKWISE[algorithm][1]
        if not robust:
            return 0.0
        return 1.0 / self.block_size if self.tau_b is None else self.tau_b


def select(x, algorithm: str, stop: StoppingRule, seed: int, cfg: CellConfig):
    """Run one selector; returns ``(selection, sketch or None)``."""
    check_algorithm(algorithm)
    if algorithm == "cpqr":
        return cpqr_select(x, stop), None
    if algorithm == "srp":
        return srp_select(x, stop, seed), None
    if algorithm in BLOCKWISE:
        mode = BLOCKWISE[algorithm][0]
        return blockwise_select(x, stop, cfg.block_size, cfg.tau_b_for(algorithm), mode, seed), None
    if stop.adaptive:
        raise ValueError(f"{algorithm!r} is not rank-adaptive; tolerance mode needs one of {ADAPTIVE}")
    k = stop.k
    if algorithm == "sqnorm":
        return sqnorm_sample(x, k, with_replacement=True, seed=seed), None
    l = max(k, math.ceil(cfg.oversample_factor * k))
    method = "lupp" if algorithm == "sklupp" else "cpqr"
    return sketchy_select(x, k, method, l, seed)


def build(x, algorithm: str, builder: str, sel: SelectionResult, y) -> Interpolation:
    check_pair(algorithm, builder)
    if builder == "exact":
        return exact_w(x, sel.skeletons)
    if builder == "osid":
        return build_osid(y, sel.perm, sel.k)
    if y is not None:
        # sketched least squares on the first k sketch columns
        return build_osid(y[:, : sel.k], sel.perm, sel.k)
    return build_id(sel)


def _best_of(fn, repeats: int):
    best, result = math.inf, None
    for _ in range(max(repeats, 1)):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return result, best


def run_cell(
    x, dataset: str, algorithm: str, rank: int | None, seed: int, cfg: CellConfig, tau: float | None = None
) -> list[RunRecord]:
    """All legal builders for one (algorithm, rank or tau, seed) cell."""
    stop = StoppingRule.tolerance(tau) if tau is not None else StoppingRule.rank(rank)
    (sel, y), t_sel = _best_of(lambda: select(x, algorithm, stop, seed, cfg), cfg.repeats)
    total = fro2(x)
    skel = errskel(x, sel.skeletons) / total
    records = []
    for builder in BUILDERS[algorithm]:
        interp, t_build = _best_of(lambda: build(x, algorithm, builder, sel, y), cfg.repeats)
        if y is None:
            l_used = 0
        else:
            l_used = y.shape[1] if builder == "osid" else sel.k
        records.append(
            RunRecord(
                dataset=dataset,
                algorithm=algorithm,
                builder=builder,
                rank=sel.k,
                rel_errskel=skel,
                rel_errid=errid(x, sel.skeletons, interp.w) / total,
                select_seconds=t_sel,
                build_seconds=t_build,
                seed=seed,
                block_size=cfg.block_size if algorithm in BLOCKWISE else 0,
                tau_b=cfg.tau_b_for(algorithm),
                oversample_l=l_used,
            )
        )
    return records


_WORKER_X = None


def _init_worker(x):
    global _WORKER_X
    _WORKER_X = x


def _run_cell_worker(args):
    return run_cell(_WORKER_X, *args)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def sweep(
    x,
    dataset: str,
    algorithms,
    ranks,
    seeds,
    cfg: CellConfig | None = None,
    tau: float | None = None,
    workers: int | None = None,
) -> list[RunRecord]:
    """Every (algorithm, rank, seed) cell; records sorted by (algorithm, builder, rank, seed).

    In tolerance mode (``tau`` given) ``ranks`` is ignored and each record's
    ``rank`` is the achieved skeleton count.
    """
    cfg = cfg or CellConfig()
    for name in algorithms:
        check_algorithm(name)
        if tau is not None and name not in ADAPTIVE:
            raise ValueError(f"{name!r} is not rank-adaptive; --tau supports {', '.join(ADAPTIVE)}")
    rank_list = [None] if tau is not None else list(ranks)
    cells = [(dataset, a, r, s, cfg, tau) for a in algorithms for r in rank_list for s in seeds]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(x,)) as pool:
            chunks = list(pool.map(_run_cell_worker, cells))
    else:
        chunks = [run_cell(x, *cell) for cell in cells]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.algorithm, r.builder, r.rank, r.seed))
    return records


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FIELDS)
        for rec in records:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in astuple(rec)])


def read_csv(path) -> list[RunRecord]:
    types = {f.name: f.type for f in fields(RunRecord)}
    casts = {"int": int, "float": float, "str": str}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            out.append(RunRecord(**{k: casts[types[k]](v) for k, v in row.items()}))
    return out


def write_meta(path, items: dict) -> None:
    Path(path).write_text("".join(f"{k}={v}\n" for k, v in items.items()))


def read_meta(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key] = value
    return out


def median(values) -> float:
    return float(np.median(np.asarray(list(values), dtype=np.float64)))

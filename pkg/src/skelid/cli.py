"""``skelid`` command line: generate, sweep, accept."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import acceptance, bench
from .datasets import KINDS, DatasetSpec, generate, load_matrix, normalize_rows, save_matrix
from .linalg import DEFAULT_CLIP_TOL

# per-kind generator parameters exposed on the command line
KIND_PARAMS = {
    "gmm": ("n", "d", "clusters"),
    "gaussian_exp": ("n",),
    "snn": ("n", "sparsity"),
    "helmholtz": ("kappa", "grid_per_axis", "n_targets"),
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed_list(text: str) -> list[int]:
    if ":" in text:
        lo, _, hi = text.partition(":")
        return list(range(int(lo), int(hi)))
    return _int_list(text)


def cmd_generate(args) -> int:
    if args.kind == "file":
        raise SystemExit("generate: kind 'file' has nothing to generate")
    params = {k: getattr(args, k) for k in KIND_PARAMS[args.kind] if getattr(args, k) is not None}
    spec = DatasetSpec(args.kind, params, args.seed)
    x = generate(spec)
    out = Path(args.out)
    save_matrix(x, out, "raw_f64")
    meta = {"kind": spec.kind, "seed": spec.seed, "rows": x.shape[0], "cols": x.shape[1], **params}
    bench.write_meta(out.with_name(out.name + ".meta"), meta)
    print(f"wrote {x.shape[0]}x{x.shape[1]} {spec.kind} matrix to {out}")
    return 0


def cmd_sweep(args) -> int:
    x = normalize_rows(load_matrix(args.matrix, args.format), args.normalize)
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    cfg = bench.CellConfig(args.block_size, args.tau_b, args.oversample_factor, args.repeats)
    if args.tau is None and not args.ranks:
        raise SystemExit("sweep: give --ranks or --tau")
    records = bench.sweep(x, args.dataset or Path(args.matrix).stem, algorithms, args.ranks or [], args.seeds, cfg, tau=args.tau)
    bench.write_csv(records, args.out)
    meta = {
        "matrix": args.matrix,
        "normalize": args.normalize,
        "timing": f"best-of-{cfg.repeats} perf_counter",
        "workers": bench.worker_count(),
        "mode": "tolerance" if args.tau is not None else "rank",
    }
    if args.tau is not None:
        meta["tau"] = args.tau
    bench.write_meta(args.out + ".meta", meta)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_accept(args) -> int:
    results = acceptance.run(args.level, args.only, args.clip_tol, echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skelid", description="Row skeleton selection benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic matrix in raw_f64 format")
    gen.add_argument("kind", choices=[k for k in KINDS if k != "file"])
    gen.add_argument("out")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--n", type=int)
    gen.add_argument("--d", type=int)
    gen.add_argument("--clusters", type=int)
    gen.add_argument("--sparsity", type=float)
    gen.add_argument("--kappa", type=float)
    gen.add_argument("--grid-per-axis", dest="grid_per_axis", type=int)
    gen.add_argument("--n-targets", dest="n_targets", type=int)
    gen.set_defaults(func=cmd_generate)

    sw = sub.add_parser("sweep", help="selector x builder x rank x seed sweep to CSV")
    sw.add_argument("matrix")
    sw.add_argument("--format", choices=["raw_f64", "csv"])
    sw.add_argument("--dataset", help="tag written to the dataset column (default: file stem)")
    sw.add_argument("--algorithms", default="srp,rbrp", help=f"comma list from {','.join(bench.ALGORITHMS)}")
    sw.add_argument("--ranks", type=_int_list)
    sw.add_argument("--tau", type=float, help="tolerance mode for rank-adaptive algorithms")
    sw.add_argument("--seeds", type=_seed_list, default=[0], help="comma list or lo:hi range")
    sw.add_argument("--block-size", dest="block_size", type=int, default=40)
    sw.add_argument("--tau-b", dest="tau_b", type=float, help="robust filter threshold (default 1/b)")
    sw.add_argument("--oversample-factor", dest="oversample_factor", type=float, default=3.0)
    sw.add_argument("--repeats", type=int, default=3, help="timing repetitions per cell (best kept)")
    sw.add_argument("--normalize", choices=["none", "row", "max"], default="none")
    sw.add_argument("--out", required=True)
    sw.set_defaults(func=cmd_sweep)

    acc = sub.add_parser("accept", help="run the acceptance suite")
    acc.add_argument("--level", choices=["fast", "full"], default="fast")
    acc.add_argument("--only", type=_int_list, help="comma list of criterion numbers")
    acc.add_argument("--clip-tol", dest="clip_tol", type=float, default=DEFAULT_CLIP_TOL, help=argparse.SUPPRESS)
    acc.set_defaults(func=cmd_accept)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"skelid {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

import logging

import pandas as pd

from Commands.Analyze import graph_arity
from data_loader import resolve_graph
from graph_core import ParameterError
from harness import diagnose_fixed_graph

logger = logging.getLogger(__name__)

AGGREGATE_COLUMNS = [
    "bucket_count",
    "vertex_fraction",
    "weighted_collision",
    "mean_collision",
    "median_code_ratio",
    "q90_balance",
]


def run_diagnose_buckets(args):
    cutoffs = (3, 10) if args.min_bucket is None else (args.min_bucket,)
    if any(c < 2 for c in cutoffs):
        raise ParameterError(f"--min-bucket must be at least 2, got {args.min_bucket}")

    g = resolve_graph(args.graph, args.regular, args.seed, lcc=args.lcc)
    rows = diagnose_fixed_graph(
        g,
        k=args.anchors,
        m=args.m,
        eta=args.eta,
        quantizer=args.quantizer,
        scaled=args.scaled,
        feature=args.feature,
        strategy=args.strategy,
        resamples=args.resamples,
        seed=args.seed,
        r=graph_arity(args),
        cutoffs=cutoffs,
    )

    # averages over resamples; a cutoff with no buckets in some resample averages the rest
    numeric = rows[AGGREGATE_COLUMNS].apply(pd.to_numeric, errors="coerce")
    table = numeric.groupby(rows["cutoff"]).mean()
    table.index = [f"|B|>={c}" for c in table.index]
    print(f"n={g.n} k={args.anchors} m={args.m} eta={args.eta} quantizer={args.quantizer} resamples={args.resamples}")
    print(f"singleton bucket fraction: {rows['singleton_bucket_frac'].mean():.6g}")
    print(table.to_string(na_rep="n/a", float_format=lambda x: f"{x:.6g}"))

    per_resample = rows.drop_duplicates("resample")
    refined = pd.to_numeric(per_resample["refined_bound"], errors="coerce")
    print(f"image size (mean): {per_resample['image_size'].mean():.6g}")
    if refined.notna().any():
        print(f"refined bound (mean over applicable): {refined.mean():.6g}")
        print(f"beta_hat (mean): {pd.to_numeric(per_resample['beta_hat'], errors='coerce').mean():.6g}  "
              f"coll_hat (mean): {pd.to_numeric(per_resample['coll_hat'], errors='coerce').mean():.6g}")
    else:
        print("refined bound: n/a (no bucket with a spectral collision)")
    violations = int((per_resample["refined_ok"] == False).sum())  # noqa: E712
    print(f"refined bound violations: {violations}/{len(per_resample)}; "
          f"per-bucket inequality holds on {int(per_resample['inequality_ok'].sum())}/{len(per_resample)}")

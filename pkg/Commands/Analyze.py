import logging

import pandas as pd

from data_loader import parse_regular, resolve_graph
from graph_core import ParameterError
from harness import analyze_fixed_graph, write_csv
from spectral import dump_basis_tsv, energy_embedding, graph_basis
from theory import BudgetInputs, rho_eng, subcritical_check

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "error",
    "image_frac",
    "mean_preimage",
    "singleton_frac",
    "codebook_size",
    "profile_count",
    "singleton_bucket_frac",
    "weighted_collision",
    "median_code_ratio",
    "q90_balance",
    "generic_bound",
    "refined_bound",
]


def graph_arity(args):
    return parse_regular(args.regular)[1] if args.regular else None


def run_analyze(args):
    if args.anchors < 1:
        raise ParameterError(f"--anchors must be at least 1, got {args.anchors}")

    g = resolve_graph(args.graph, args.regular, args.seed, lcc=args.lcc)
    result = analyze_fixed_graph(
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
    )

    frame = result.frame()
    metrics = frame[REPORT_COLUMNS].apply(pd.to_numeric, errors="coerce")
    summary = pd.DataFrame({"mean": metrics.mean(), "std": metrics.std(ddof=0), "min": metrics.min(), "max": metrics.max()})

    print(f"n={g.n} edges={g.edge_count} k={args.anchors} m={args.m} eta={args.eta} "
          f"quantizer={args.quantizer} scaled={str(args.scaled).lower()} feature={args.feature} "
          f"strategy={args.strategy} resamples={args.resamples}")
    print(summary.to_string(float_format=lambda x: f"{x:.6g}"))

    ok = frame["bounds_ok"].astype(str) == "True"
    print(f"bounds satisfied on {int(ok.sum())}/{len(frame)} resamples")
    if g.n >= 16:
        budget = BudgetInputs(g.n, args.anchors, args.m, float(args.eta))
        print(f"rho_eng={rho_eng(budget):.4f} subcritical(eps0=0.1)={subcritical_check(budget, 0.1)}")

    if args.csv:
        write_csv(result, args.csv)
        logger.info("wrote %d trial records to %s", len(frame), args.csv)

    if args.dump_basis:
        basis = graph_basis(g, args.m)
        dump_basis_tsv(basis, energy_embedding(basis, args.m, scaled=args.scaled), args.dump_basis)
        logger.info("wrote spectral basis (m=%d) to %s", args.m, args.dump_basis)

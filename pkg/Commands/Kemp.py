import logging
from decimal import Decimal

import pandas as pd

from data_loader import load_sweep_csv
from graph_core import ParameterError
from harness import resample_robustness, threshold_table

logger = logging.getLogger(__name__)

BLOCK_KEYS = ["feature", "anchor_strategy", "quantizer", "scaled", "r"]


def run_kemp(args):
    try:
        threshold = float(args.threshold)
    except ValueError as exc:
        raise ParameterError(f"--threshold expects a number, got {args.threshold!r}") from exc
    if not 0 < threshold <= 1:
        raise ParameterError(f"--threshold must lie in (0, 1], got {threshold}")

    frame = load_sweep_csv(args.input)
    failed = frame["bounds_ok"].astype(str).str.startswith("error:")
    if failed.any():
        logger.warning("%d failed trial rows are excluded from the error means", int(failed.sum()))

    for (feature, strategy, quantizer, scaled, r), group in frame.groupby(BLOCK_KEYS, sort=False, dropna=False):
        table = threshold_table(group, threshold)
        r_text = "n/a" if pd.isna(r) else f"{r:.0f}"
        print(f"# feature={feature} anchor_strategy={strategy} quantizer={quantizer} scaled={scaled} r={r_text} threshold={threshold:g}")
        print(table.drop(columns=["r", "quantizer", "scaled"]).to_string(index=False, na_rep="n/a"))
        # k_emp grid: rows m, coarsest eta first
        for n, per_n in table.groupby("n", sort=True):
            grid = per_n.pivot(index="m", columns="eta", values="k_emp")
            grid = grid[sorted(set(per_n["eta"]), key=Decimal, reverse=True)]
            print(f"\n# k_emp grid n={n}")
            print(grid.to_string(na_rep="n/a", float_format=lambda x: f"{x:.0f}"))
        if group["resample"].max() > 0:
            spread = resample_robustness(group)
            print("\n# error spread across anchor resamples")
            print(spread.drop(columns=BLOCK_KEYS).to_string(index=False, na_rep="n/a"))
        print()

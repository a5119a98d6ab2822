import logging
from dataclasses import asdict

import pandas as pd

from data_loader import load_edge_list, parse_regular, resolve_graph
from graph_core import ParameterError, diameter_survey, structural_stats, write_token_map

logger = logging.getLogger(__name__)


# -------------------------------------------------------------
# graph-stats: one row of structural statistics per graph
# -------------------------------------------------------------
def run_graph_stats(args):
    if args.survey is not None and not args.regular:
        raise ParameterError("--survey needs --regular N,R")
    if args.survey is not None and args.survey < 1:
        raise ParameterError(f"--survey expects a positive seed count, got {args.survey}")

    if args.token_map and args.graph and not args.regular:
        g, report = load_edge_list(args.graph, lcc=args.lcc)
        write_token_map(report.token_to_id, args.token_map)
        logger.info("token map with %d entries written to %s", len(report.token_to_id), args.token_map)
    else:
        if args.token_map:
            logger.warning("--token-map only applies to --graph inputs; ignored")
        g = resolve_graph(args.graph, args.regular, args.seed, lcc=args.lcc)

    stats = pd.Series(asdict(structural_stats(g)))
    print(stats.to_string())

    if args.survey is not None:
        n, r = parse_regular(args.regular)
        survey = diameter_survey(n, r, range(args.seed, args.seed + args.survey))
        print(f"\n# diameter survey over {args.survey} seeds")
        print(survey.to_string(index=False))
        print(f"max diameter / ln n = {survey['c_diam'].max():.4f}")

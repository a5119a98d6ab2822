import logging
from pathlib import Path

from graph_core import random_regular, serialize_edge_list

logger = logging.getLogger(__name__)


def run_gen_regular(args):
    g = random_regular(args.n, args.r, args.seed)
    out = Path(args.out)
    out.write_text(serialize_edge_list(g), encoding="utf-8")
    logger.info("wrote %d-regular graph on %d vertices (%d edges) to %s", args.r, g.n, g.edge_count, out)
    print(f"{out}: n={g.n} edges={g.edge_count}")

"""Command-line entry point: python posenc_app.py <subcommand> [flags]."""

import argparse
import logging
import os
import sys

from Commands import Analyze, DiagnoseBuckets, GenRegular, GraphStats, Kemp, Sweep
from graph_core import ParameterError, PosencError

logger = logging.getLogger("posenc")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_PARAMETER = 2


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def add_graph_source(parser: argparse.ArgumentParser):
    parser.add_argument("--graph", metavar="PATH", help="edge-list file (largest component is used)")
    parser.add_argument("--regular", metavar="N,R", help="sample a random R-regular graph on N vertices")
    parser.add_argument("--seed", type=int, default=0, help="seed for graph sampling and anchors")
    parser.add_argument("--lcc", action=argparse.BooleanOptionalAction, default=True, help="restrict an edge-list graph to its largest component")


def add_encoding_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--anchors", type=int, required=True, metavar="K")
    parser.add_argument("--strategy", default="random", choices=["random", "farthest", "degree"])
    parser.add_argument("--m", type=int, default=0)
    parser.add_argument("--eta", default="0.1", help="quantization step/ratio, kept verbatim")
    parser.add_argument("--quantizer", default="relative", choices=["absolute", "relative"])
    parser.add_argument("--scaled", type=parse_bool, default=True, metavar="BOOL")
    parser.add_argument("--feature", default="full", choices=["nope", "distance", "spectral", "full"])
    parser.add_argument("--resamples", type=int, default=1, metavar="T")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posenc_app.py", description="Anchor/spectral positional-encoding identifiability toolkit")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-regular", help="sample a random regular graph and write its edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(handler=GenRegular.run_gen_regular)

    p = sub.add_parser("graph-stats", help="structural statistics of a graph")
    add_graph_source(p)
    p.add_argument("--token-map", metavar="PATH", help="write the token -> id sidecar TSV")
    p.add_argument("--survey", type=int, metavar="COUNT", help="with --regular: diameters of COUNT sampled graphs from --seed on")
    p.set_defaults(handler=GraphStats.run_graph_stats)

    p = sub.add_parser("analyze", help="evaluate the observation map on one graph")
    add_graph_source(p)
    add_encoding_flags(p)
    p.add_argument("--csv", metavar="PATH", help="write per-resample trial records")
    p.add_argument("--dump-basis", metavar="PATH", help="write the retained eigenbasis and energies as TSV")
    p.set_defaults(handler=Analyze.run_analyze)

    p = sub.add_parser("diagnose-buckets", help="bucketwise collision/balance diagnostics")
    add_graph_source(p)
    add_encoding_flags(p)
    p.add_argument("--min-bucket", type=int, choices=[3, 10], help="report only this large-bucket cutoff")
    p.set_defaults(handler=DiagnoseBuckets.run_diagnose_buckets)

    p = sub.add_parser("sweep", help="run a parameter sweep and write the trial CSV")
    p.add_argument("--config", metavar="PATH", help="settings file (.json, .toml or key = value)")
    p.add_argument("--preset", help="named settings file under data/sweeps/")
    p.add_argument("--graph", metavar="PATH", help="sweep the grid on a supplied graph instead of sampled ones")
    p.add_argument("--n", action="append", dest="n_list", help="graph size (repeat or comma-separate)")
    p.add_argument("--k", action="append", dest="k_list")
    p.add_argument("--m", action="append", dest="m_list")
    p.add_argument("--eta", action="append", dest="eta_list")
    p.add_argument("--feature", action="append", dest="features")
    p.add_argument("--strategy", action="append", dest="anchor_strategies")
    p.add_argument("--trials", type=int)
    p.add_argument("--resamples", type=int, dest="anchor_resamples")
    p.add_argument("--r", type=int)
    p.add_argument("--quantizer", choices=["absolute", "relative"])
    p.add_argument("--scaled", type=parse_bool, metavar="BOOL")
    p.add_argument("--seed", type=int)
    p.add_argument("--full-protocol", action="store_true", help="20 graph trials per configuration")
    p.add_argument("--timing", action="store_true", help="record wall time (CSV is then not reproducible)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--summary", metavar="PATH", help="also write per-configuration means and standard deviations")
    p.set_defaults(handler=Sweep.run_sweep_command)

    p = sub.add_parser("kemp", help="empirical anchor thresholds from a sweep CSV")
    p.add_argument("--in", dest="input", required=True, metavar="PATH")
    p.add_argument("--threshold", default="0.1", help="mean-error threshold in (0, 1]")
    p.set_defaults(handler=Kemp.run_kemp)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args.handler(args)
    except ParameterError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except (PosencError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

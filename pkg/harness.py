import csv
import hashlib
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np
import pandas as pd

from graph_core import (
    AnchorSet,
    Graph,
    ParameterError,
    PosencError,
    anchor_profile,
    bfs_distances,
    make_rng,
    random_regular,
)
from observation import ObservationTable, bucket_diagnostics, bucket_inequality_holds, fiber_stats
from spectral import QuantizedCodes, SpectralBasis, codebook_size, energy_embedding, graph_basis, quantize
from theory import bound_report, rho_grid

logger = logging.getLogger(__name__)

FEATURES = ("nope", "distance", "spectral", "full")
STRATEGIES = ("random", "farthest", "degree")
QUANTIZERS = ("absolute", "relative")

CONFIG_COLUMNS = ["n", "r", "k", "m", "eta", "quantizer", "scaled", "feature", "anchor_strategy"]
CSV_COLUMNS = CONFIG_COLUMNS + [
    "trial",
    "resample",
    "seed",
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
    "bounds_ok",
    "wall_time_ms",
]
METRIC_COLUMNS = CSV_COLUMNS[CSV_COLUMNS.index("error") : CSV_COLUMNS.index("bounds_ok")]
NA = "n/a"


def eta_key(eta) -> str:
    """Decimal string for eta, validated; kept verbatim in keys and CSV."""
    text = str(eta).strip()
    try:
        value = Decimal(text)
    except InvalidOperation as exc:
        raise ParameterError(f"eta {eta!r} is not a decimal number") from exc
    if not value > 0:
        raise ParameterError(f"eta must be positive, got {text}")
    return text


def mix_seed(*parts) -> int:
    """Stable 64-bit seed from any mix of ints/strings; identical across platforms and runs."""
    digest = hashlib.blake2b("\x1f".join(map(str, parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") & 0x7FFF_FFFF_FFFF_FFFF


def trial_seed(master: int, n: int, r, trial: int) -> int:
    """Seed of one graph trial; the CSV seed column, from which graph and anchors both derive."""
    return mix_seed(master, "trial", n, r, trial)


def graph_seed(seed: int) -> int:
    return mix_seed(seed, "graph")


def anchor_seed(seed: int, k: int, strategy: str, resample: int) -> int:
    # independent of m and eta, so every spectral setting sees the same anchors
    return mix_seed(seed, "anchors", k, strategy, resample)


# ----------------------------------------------------------------------------
# Config + records
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialPoint:
    n: int
    r: int | None
    k: int
    m: int
    eta: str
    quantizer: str = "relative"
    scaled: bool = True
    feature: str = "full"
    anchor_strategy: str = "random"

    @property
    def eta_value(self) -> float:
        return float(self.eta)

    def sort_key(self):
        return (
            self.n,
            self.r or 0,
            self.k,
            self.m,
            Decimal(self.eta),
            self.quantizer,
            self.scaled,
            FEATURES.index(self.feature),
            STRATEGIES.index(self.anchor_strategy),
        )


@dataclass
class SweepConfig:
    n_list: list[int]
    k_list: list[int]
    m_list: list[int]
    eta_list: list[str]
    trials: int = 5
    anchor_resamples: int = 1
    r: int = 3
    quantizer: str = "relative"
    scaled: bool = True
    features: list[str] = field(default_factory=lambda: ["full"])
    anchor_strategies: list[str] = field(default_factory=lambda: ["random"])
    seed: int = 0
    error_threshold: float = 0.1
    timing: bool = False
    jobs: int = 1
    # restricts the m x eta product to these (m, eta) pairs when set
    m_eta_pairs: list[tuple[int, str]] | None = None

    def __post_init__(self):
        for name in ("n_list", "k_list", "m_list", "eta_list", "features", "anchor_strategies"):
            if not getattr(self, name):
                raise ParameterError(f"{name} must not be empty")
        self.eta_list = [eta_key(e) for e in self.eta_list]
        if self.trials < 1 or self.anchor_resamples < 1:
            raise ParameterError("trials and anchor_resamples must be at least 1")
        if not 0 < self.error_threshold <= 1:
            raise ParameterError(f"error_threshold must lie in (0, 1], got {self.error_threshold}")
        if self.quantizer not in QUANTIZERS:
            raise ParameterError(f"quantizer must be one of {QUANTIZERS}, got {self.quantizer!r}")
        for feat in self.features:
            if feat not in FEATURES:
                raise ParameterError(f"feature must be one of {FEATURES}, got {feat!r}")
        for strat in self.anchor_strategies:
            if strat not in STRATEGIES:
                raise ParameterError(f"anchor strategy must be one of {STRATEGIES}, got {strat!r}")
        for n in self.n_list:
            if (n * self.r) % 2 or n <= self.r:
                raise ParameterError(f"no {self.r}-regular graph on n={n} vertices")
            if max(self.k_list) > n or max(self.m_list) + 1 > n:
                raise ParameterError(f"k or m too large for n={n}")
        if min(self.k_list) < 0 or min(self.m_list) < 0:
            raise ParameterError("k and m must be non-negative")
        if self.jobs < 1:
            raise ParameterError("jobs must be at least 1")
        if self.m_eta_pairs is not None:
            pairs = [(int(m), eta_key(eta)) for m, eta in self.m_eta_pairs]
            grid = {(m, Decimal(eta)) for m in self.m_list for eta in self.eta_list}
            missing = [p for p in pairs if (p[0], Decimal(p[1])) not in grid]
            if not pairs or missing:
                raise ParameterError(f"m_eta_pairs must be non-empty and inside the m x eta grid, got {missing or pairs}")
            self.m_eta_pairs = pairs

    def points(self) -> list[TrialPoint]:
        pts = [
            TrialPoint(n, self.r, k, m, eta, self.quantizer, self.scaled, feat, strat)
            for n in self.n_list
            for k in self.k_list
            for m in self.m_list
            for eta in self.eta_list
            for feat in self.features
            for strat in self.anchor_strategies
        ]
        if self.m_eta_pairs is not None:
            keep = {(m, Decimal(eta)) for m, eta in self.m_eta_pairs}
            pts = [p for p in pts if (p.m, Decimal(p.eta)) in keep]
        return sorted(set(pts), key=TrialPoint.sort_key)


@dataclass
class TrialRecord:
    n: int
    r: int | None
    k: int
    m: int
    eta: str
    quantizer: str
    scaled: bool
    feature: str
    anchor_strategy: str
    trial: int
    resample: int
    seed: int
    error: float | None = None
    image_frac: float | None = None
    mean_preimage: float | None = None
    singleton_frac: float | None = None
    codebook_size: int | None = None
    profile_count: int | None = None
    singleton_bucket_frac: float | None = None
    weighted_collision: float | None = None
    median_code_ratio: float | None = None
    q90_balance: float | None = None
    generic_bound: int | None = None
    refined_bound: float | None = None
    bounds_ok: bool | str | None = None
    wall_time_ms: float | None = None

    @classmethod
    def start(cls, point: TrialPoint, trial: int, resample: int, seed: int) -> "TrialRecord":
        return cls(**asdict(point), trial=trial, resample=resample, seed=seed)

    def sort_key(self):
        return (TrialPoint(*(getattr(self, c) for c in CONFIG_COLUMNS)).sort_key(), self.trial, self.resample)


@dataclass
class SweepResult:
    records: list[TrialRecord] = field(default_factory=list)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.records], columns=CSV_COLUMNS)

    def aggregates(self) -> pd.DataFrame:
        return aggregate_frame(self.frame())


def aggregate_frame(frame: pd.DataFrame) -> pd.DataFrame:
    metrics = frame[METRIC_COLUMNS].apply(pd.to_numeric, errors="coerce")
    keyed = pd.concat([frame[CONFIG_COLUMNS].apply(lambda col: col.map(format_cell)), metrics], axis=1)
    grouped = keyed.groupby(CONFIG_COLUMNS, sort=False)
    stats = grouped[METRIC_COLUMNS].agg(["mean", "std"])
    stats.columns = [f"{col}_{stat}" for col, stat in stats.columns]
    stats["count"] = grouped.size()
    return stats.reset_index()


def _as_frame(result) -> pd.DataFrame:
    return result.frame() if isinstance(result, SweepResult) else result


# ----------------------------------------------------------------------------
# Anchors
# ----------------------------------------------------------------------------


def select_anchors(g: Graph, k: int, strategy: str, seed: int, first: int | None = None) -> AnchorSet:
    if k < 0 or k > g.n:
        raise ParameterError(f"cannot pick k={k} anchors from n={g.n} vertices")
    if k == 0:
        return AnchorSet(())
    rng = make_rng(seed)

    if strategy == "random":
        return AnchorSet(tuple(rng.choice(g.n, size=k, replace=False).tolist()))

    if strategy == "degree":
        order = np.lexsort((np.arange(g.n), -g.degrees))
        return AnchorSet(tuple(order[:k].tolist()))

    if strategy == "farthest":
        chosen = [int(rng.integers(g.n)) if first is None else first]
        nearest = bfs_distances(g, chosen[0])
        while len(chosen) < k:
            # argmax returns the smallest id among ties
            nxt = int(np.argmax(nearest))
            chosen.append(nxt)
            nearest = np.minimum(nearest, bfs_distances(g, nxt))
        return AnchorSet(tuple(chosen))

    raise ParameterError(f"unknown anchor strategy {strategy!r}")


# ----------------------------------------------------------------------------
# Trials
# ----------------------------------------------------------------------------


class _TrialCache:
    """Per-graph memo of spectral bases, quantized codes and anchor profiles.

    Bases are solved per m, exactly as a standalone trial solves them, so a sweep row and its
    run_trial replay see bit-identical energies.
    """

    def __init__(self, g: Graph):
        self.g = g
        self._bases: dict[int, SpectralBasis] = {}
        self._codes: dict = {}
        self._profiles: dict = {}

    def basis(self, m: int) -> SpectralBasis:
        if m not in self._bases:
            self._bases[m] = graph_basis(self.g, m)
        return self._bases[m]

    def codes(self, point: TrialPoint) -> QuantizedCodes:
        use_spectral = point.feature in ("spectral", "full") and point.m > 0
        m = point.m if use_spectral else 0
        key = (m, point.eta, point.quantizer, point.scaled)
        if key not in self._codes:
            if m == 0:
                codes = QuantizedCodes(np.zeros((self.g.n, 0), dtype=np.int64), point.quantizer, point.eta_value, 0.0)
            else:
                emb = energy_embedding(self.basis(m), m, scaled=point.scaled)
                codes = quantize(emb, point.eta_value, point.quantizer)
            self._codes[key] = codes
        return self._codes[key]

    def profile(self, point: TrialPoint, seed: int) -> np.ndarray:
        if point.feature not in ("distance", "full") or point.k == 0:
            return np.zeros((self.g.n, 0), dtype=np.int64)
        key = (point.k, point.anchor_strategy, seed)
        if key not in self._profiles:
            anchors = select_anchors(self.g, point.k, point.anchor_strategy, seed)
            self._profiles[key] = anchor_profile(self.g, anchors)
        return self._profiles[key]


def _observe(point: TrialPoint, cache: _TrialCache, seed: int, resample: int) -> tuple[ObservationTable, QuantizedCodes]:
    codes = cache.codes(point)
    profile = cache.profile(point, anchor_seed(seed, point.k, point.anchor_strategy, resample))
    return ObservationTable.from_arrays(profile, codes.codes), codes


def _evaluate(point: TrialPoint, cache: _TrialCache, seed: int, trial: int, resample: int, timing: bool) -> TrialRecord:
    started = time.perf_counter()
    record = TrialRecord.start(point, trial, resample, seed)
    table, codes = _observe(point, cache, seed, resample)

    stats = fiber_stats(table)
    diag = bucket_diagnostics(table)
    report = bound_report(table, codes)

    record.image_frac = stats.success
    record.error = 1.0 - record.image_frac
    record.mean_preimage = stats.vertex_mean_preimage
    record.singleton_frac = stats.singleton_fraction
    record.codebook_size = codebook_size(codes)
    record.profile_count = table.profile_count
    record.singleton_bucket_frac = diag.singleton_bucket_frac
    record.weighted_collision = diag.weighted_collision
    record.median_code_ratio = diag.median_code_ratio
    record.q90_balance = diag.q90_balance
    record.generic_bound = report.generic_bound
    record.refined_bound = report.refined_bound
    record.bounds_ok = report.satisfied and bucket_inequality_holds(table)
    if timing:
        record.wall_time_ms = (time.perf_counter() - started) * 1000.0
    return record


def _failed(point: TrialPoint, trial: int, resample: int, seed: int, exc: Exception) -> TrialRecord:
    record = TrialRecord.start(point, trial, resample, seed)
    record.bounds_ok = f"error:{type(exc).__name__}"
    return record


def run_trial(
    point: TrialPoint,
    seed: int,
    trial: int = 0,
    resample: int = 0,
    graph: Graph | None = None,
    timing: bool = False,
) -> TrialRecord:
    """One (graph, anchor set) evaluation.

    `seed` is the trial seed of a CSV row: without a supplied graph the graph is sampled from
    graph_seed(seed), and the anchors always come from anchor_seed(seed, k, strategy, resample),
    so run_trial(point, row.seed, row.trial, row.resample) reproduces that row.
    """
    try:
        g = graph if graph is not None else random_regular(point.n, point.r, graph_seed(seed))
        return _evaluate(point, _TrialCache(g), seed, trial, resample, timing)
    except PosencError as exc:
        raise type(exc)(f"{exc} [at {point}, trial={trial}, resample={resample}]") from exc


def _run_graph_job(cfg: SweepConfig, n: int, trial: int) -> list[TrialRecord]:
    points = [p for p in cfg.points() if p.n == n]
    seed = trial_seed(cfg.seed, n, cfg.r, trial)
    try:
        g = random_regular(n, cfg.r, graph_seed(seed))
    except PosencError as exc:
        logger.error("graph n=%d trial=%d failed: %s", n, trial, exc)
        return [_failed(p, trial, s, seed, exc) for p in points for s in range(cfg.anchor_resamples)]

    cache = _TrialCache(g)
    records = []
    for p in points:
        for s in range(cfg.anchor_resamples):
            try:
                records.append(_evaluate(p, cache, seed, trial, s, cfg.timing))
            except PosencError as exc:
                logger.error("trial failed at %s trial=%d resample=%d: %s", p, trial, s, exc)
                records.append(_failed(p, trial, s, seed, exc))
    return records


def run_sweep(cfg: SweepConfig) -> SweepResult:
    jobs = [(n, t) for n in sorted(set(cfg.n_list)) for t in range(cfg.trials)]
    records: list[TrialRecord] = []
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_run_graph_job, cfg, n, t) for n, t in jobs]
            for i, fut in enumerate(futures, start=1):
                records.extend(fut.result())
                logger.info("sweep: %d/%d graph jobs done", i, len(jobs))
    else:
        for i, (n, t) in enumerate(jobs, start=1):
            records.extend(_run_graph_job(cfg, n, t))
            logger.info("sweep: graph n=%d trial=%d done (%d/%d)", n, t, i, len(jobs))
    records.sort(key=TrialRecord.sort_key)
    return SweepResult(records)


def analyze_fixed_graph(
    g: Graph,
    k: int,
    m: int,
    eta,
    quantizer: str = "relative",
    scaled: bool = True,
    feature: str = "full",
    strategy: str = "random",
    resamples: int = 1,
    seed: int = 0,
    r: int | None = None,
    timing: bool = False,
) -> SweepResult:
    """Fixed graph, repeated anchor samplings (the protocol used for supplied graphs)."""
    point = _fixed_point(g, k, m, eta, quantizer, scaled, feature, strategy, resamples, r)
    cache = _TrialCache(g)
    t_seed = trial_seed(seed, g.n, r, 0)
    return SweepResult([_evaluate(point, cache, t_seed, 0, s, timing) for s in range(resamples)])


def _fixed_point(g, k, m, eta, quantizer, scaled, feature, strategy, resamples, r) -> TrialPoint:
    if resamples < 1:
        raise ParameterError("resamples must be at least 1")
    if feature not in FEATURES or strategy not in STRATEGIES or quantizer not in QUANTIZERS:
        raise ParameterError(f"bad feature/strategy/quantizer: {feature}, {strategy}, {quantizer}")
    if not 0 <= k <= g.n or m < 0 or m + 1 > g.n:
        raise ParameterError(f"k={k}, m={m} out of range for n={g.n}")
    return TrialPoint(g.n, r, k, m, eta_key(eta), quantizer, scaled, feature, strategy)


BUCKET_COLUMNS = [
    "resample",
    "seed",
    "cutoff",
    "bucket_count",
    "vertex_fraction",
    "weighted_collision",
    "mean_collision",
    "median_code_ratio",
    "q90_balance",
    "singleton_bucket_frac",
    "image_size",
    "refined_bound",
    "beta_hat",
    "coll_hat",
    "refined_ok",
    "inequality_ok",
]


def diagnose_fixed_graph(
    g: Graph,
    k: int,
    m: int,
    eta,
    quantizer: str = "relative",
    scaled: bool = True,
    feature: str = "full",
    strategy: str = "random",
    resamples: int = 1,
    seed: int = 0,
    r: int | None = None,
    cutoffs: tuple[int, ...] = (3, 10),
) -> pd.DataFrame:
    """Bucket aggregates per anchor resample: one row for all non-singleton buckets (cutoff 2) and one per cutoff."""
    point = _fixed_point(g, k, m, eta, quantizer, scaled, feature, strategy, resamples, r)
    cache = _TrialCache(g)
    t_seed = trial_seed(seed, g.n, r, 0)
    rows = []
    for s in range(resamples):
        table, codes = _observe(point, cache, t_seed, s)
        diag = bucket_diagnostics(table, cutoffs)
        report = bound_report(table, codes)
        shared = {
            "resample": s,
            "seed": t_seed,
            "singleton_bucket_frac": diag.singleton_bucket_frac,
            "image_size": report.image_size,
            "refined_bound": report.refined_bound,
            "beta_hat": report.beta_hat,
            "coll_hat": report.coll_hat,
            "refined_ok": report.refined_ok,
            "inequality_ok": bucket_inequality_holds(table),
        }
        for agg in [diag.overall, *(diag.large[c] for c in cutoffs)]:
            rows.append({**shared, **asdict(agg)})
    return pd.DataFrame(rows, columns=BUCKET_COLUMNS)


def run_fixed_graph_sweep(g: Graph, cfg: SweepConfig) -> SweepResult:
    """The cfg grid (n_list and trials ignored) on one supplied graph, anchor resamples as repeats."""
    points = sorted({replace(p, n=g.n, r=None) for p in cfg.points()}, key=TrialPoint.sort_key)
    if max(p.k for p in points) > g.n or max(p.m for p in points) + 1 > g.n:
        raise ParameterError(f"grid k/m exceeds what a graph on {g.n} vertices supports")
    cache = _TrialCache(g)
    seed = trial_seed(cfg.seed, g.n, None, 0)
    records = []
    for p in points:
        for s in range(cfg.anchor_resamples):
            try:
                records.append(_evaluate(p, cache, seed, 0, s, cfg.timing))
            except PosencError as exc:
                logger.error("trial failed at %s resample=%d: %s", p, s, exc)
                records.append(_failed(p, 0, s, seed, exc))
        logger.info("fixed-graph sweep: %s done", p)
    return SweepResult(records)


# ----------------------------------------------------------------------------
# Thresholds + robustness
# ----------------------------------------------------------------------------


def _numeric(frame: pd.DataFrame) -> pd.DataFrame:
    out = frame.copy()
    for col in METRIC_COLUMNS + ["n", "k", "m"]:
        out[col] = pd.to_numeric(out[col], errors="coerce")
    out["r"] = pd.to_numeric(out["r"], errors="coerce").astype("Int64")
    out["eta_dec"] = out["eta"].map(lambda e: Decimal(str(e)))
    return out


def _check_threshold(threshold: float):
    if not 0 < threshold <= 1:
        raise ParameterError(f"error threshold must lie in (0, 1], got {threshold}")


def k_emp(result, n: int, m: int, eta, threshold: float = 0.1, **filters) -> int | None:
    """Smallest tested k whose mean error is at most the threshold; None if no grid k qualifies."""
    _check_threshold(threshold)
    frame = _numeric(_as_frame(result))
    mask = (frame["n"] == n) & (frame["m"] == m) & (frame["eta_dec"] == Decimal(eta_key(eta)))
    for col, value in filters.items():
        if value is not None:
            mask &= frame[col].astype(str) == str(value)
    rows = frame[mask]
    if rows.empty:
        raise ParameterError(f"result has no rows for n={n}, m={m}, eta={eta}")
    mean_err = rows.groupby("k")["error"].mean().sort_index()
    passing = mean_err[mean_err <= threshold]
    return int(passing.index[0]) if len(passing) else None


PROTOCOL_COLUMNS = ["r", "quantizer", "scaled"]
THRESHOLD_COLUMNS = ["n", *PROTOCOL_COLUMNS, "m", "eta", "k_emp", "rho_emp", "image_frac", "mean_preimage",
                     "codebook_size", "spectral_code_ratio"]


def threshold_table(result, threshold: float = 0.1) -> pd.DataFrame:
    """k_emp per (n, protocol, m, eta) with rho and the mean diagnostics at the threshold.

    The protocol (r, quantizer, scaled) is part of the key, so concatenated sweeps never pool
    different quantizations into one threshold.
    """
    _check_threshold(threshold)
    frame = _numeric(_as_frame(result))
    if frame.empty:
        raise ParameterError("no records to estimate thresholds from")
    frame["scaled"] = frame["scaled"].map(lambda v: str(v).lower())
    rows = []
    keys = ["n", *PROTOCOL_COLUMNS, "m", "eta_dec"]
    for (n, r, quantizer, scaled, m, _), group in frame.groupby(keys, sort=True, dropna=False):
        eta = str(group["eta"].iloc[0])
        kk = k_emp(group, int(n), int(m), eta, threshold)
        at = group[group["k"] == kk] if kk is not None else group.iloc[0:0]
        rows.append(
            {
                "n": int(n),
                "r": r,
                "quantizer": quantizer,
                "scaled": scaled,
                "m": int(m),
                "eta": eta,
                "k_emp": kk,
                "image_frac": at["image_frac"].mean() if len(at) else None,
                "mean_preimage": at["mean_preimage"].mean() if len(at) else None,
                "codebook_size": at["codebook_size"].mean() if len(at) else None,
            }
        )
    table = rho_grid(pd.DataFrame(rows))
    table["spectral_code_ratio"] = table["codebook_size"].astype(float) / table["n"]
    return table[THRESHOLD_COLUMNS]


def resample_robustness(result) -> pd.DataFrame:
    """Within-graph spread of the error across anchor resamples, summarised per config."""
    frame = _numeric(_as_frame(result))
    keys = [c for c in CONFIG_COLUMNS if c != "eta"] + ["eta_dec"]
    per_graph = frame.groupby(keys + ["trial"], dropna=False)["error"].agg(
        within_std=lambda s: float(np.std(s, ddof=0)), within_range=lambda s: float(s.max() - s.min())
    )
    summary = per_graph.groupby(keys, dropna=False).agg(
        mean_within_std=("within_std", "mean"),
        max_within_std=("within_std", "max"),
        mean_within_range=("within_range", "mean"),
        max_within_range=("within_range", "max"),
    )
    return summary.reset_index()


# ----------------------------------------------------------------------------
# CSV export
# ----------------------------------------------------------------------------


def format_cell(value) -> str:
    if value is None:
        return NA
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return NA
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(float(value), ".17g")
    return str(value)


def write_csv(result: SweepResult, path: str | Path):
    """Header + one row per record, fixed column order, deterministic row order."""
    records = sorted(result.records, key=TrialRecord.sort_key)
    rows = [[format_cell(getattr(rec, col)) for col in CSV_COLUMNS] for rec in records]
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS)
    frame.to_csv(path, index=False, quoting=csv.QUOTE_MINIMAL, lineterminator="\n", encoding="utf-8")



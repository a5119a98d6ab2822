"""Observation map F(v) = (anchor distances, quantized spectral code) and its counting statistics."""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from graph_core import AnchorSet, Graph, ParameterError, anchor_profile
from spectral import QuantizedCodes

LARGE_BUCKET_CUTOFFS = (3, 10)
EXHAUSTIVE_LIMIT = 200_000


def _group_rows(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Label rows by identity. Returns (labels per row, distinct rows in label order)."""
    n, width = matrix.shape
    if width == 0:
        return np.zeros(n, dtype=np.int64), np.zeros((1 if n else 0, 0), dtype=np.int64)
    uniq, inverse = np.unique(matrix, axis=0, return_inverse=True)
    return inverse.reshape(-1).astype(np.int64), uniq


def _as_code_matrix(codes) -> np.ndarray:
    return codes.codes if isinstance(codes, QuantizedCodes) else np.asarray(codes)


@dataclass(frozen=True)
class ObservationTable:
    distances: np.ndarray  # n x k
    spectral: np.ndarray  # n x m
    fiber_labels: np.ndarray = field(repr=False)
    bucket_labels: np.ndarray = field(repr=False)

    @classmethod
    def from_arrays(cls, distances: np.ndarray, spectral: np.ndarray) -> "ObservationTable":
        distances = np.asarray(distances, dtype=np.int64)
        spectral = np.asarray(spectral, dtype=np.int64)
        if distances.ndim != 2 or spectral.ndim != 2 or distances.shape[0] != spectral.shape[0]:
            raise ParameterError(f"row mismatch: distances {distances.shape} vs spectral codes {spectral.shape}")
        bucket_labels, _ = _group_rows(distances)
        fiber_labels, _ = _group_rows(np.hstack([distances, spectral]))
        return cls(distances, spectral, fiber_labels, bucket_labels)

    @property
    def n(self) -> int:
        return self.distances.shape[0]

    def code(self, v: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(self.distances[v].tolist()), tuple(self.spectral[v].tolist())

    @cached_property
    def fibers(self) -> dict[tuple, tuple[int, ...]]:
        return self._index(self.fiber_labels, lambda v: self.code(v))

    @cached_property
    def buckets(self) -> dict[tuple[int, ...], tuple[int, ...]]:
        return self._index(self.bucket_labels, lambda v: tuple(self.distances[v].tolist()))

    @staticmethod
    def _index(labels: np.ndarray, key_of) -> dict:
        if labels.size == 0:
            return {}
        order = np.argsort(labels, kind="stable")
        cuts = np.flatnonzero(np.diff(labels[order])) + 1
        return {key_of(int(members[0])): tuple(members.tolist()) for members in np.split(order, cuts)}

    @property
    def image_size(self) -> int:
        return int(self.fiber_labels.max()) + 1 if self.n else 0

    @property
    def profile_count(self) -> int:
        return int(self.bucket_labels.max()) + 1 if self.n else 0


def build_observation(g: Graph, a: AnchorSet, codes: QuantizedCodes) -> ObservationTable:
    if codes.n != g.n:
        raise ParameterError(f"spectral codes have {codes.n} rows, graph has {g.n} vertices")
    return ObservationTable.from_arrays(anchor_profile(g, a), codes.codes)


# ----------------------------------------------------------------------------
# Fiber statistics
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FiberStats:
    image_size: int
    success: float
    error: float
    vertex_mean_preimage: float
    singleton_fraction: float


def fiber_stats(t: ObservationTable) -> FiberStats:
    sizes = np.bincount(t.fiber_labels)
    per_vertex = sizes[t.fiber_labels]
    success = t.image_size / t.n
    return FiberStats(
        image_size=t.image_size,
        success=success,
        error=1.0 - success,
        vertex_mean_preimage=float(per_vertex.sum() / t.n),
        singleton_fraction=float(np.count_nonzero(per_vertex == 1) / t.n),
    )


def optimal_error(t: ObservationTable) -> float:
    return 1.0 - t.image_size / t.n


def section_success(t: ObservationTable) -> Fraction:
    """Success of the section that maps each code to its smallest vertex, counted over all v."""
    chosen = {code: min(members) for code, members in t.fibers.items()}
    hits = sum(1 for v in range(t.n) if chosen[t.code(v)] == v)
    return Fraction(hits, t.n)


def max_success_exhaustive(t: ObservationTable) -> Fraction:
    """Best success over every map from attained codes to vertices. Tiny instances only."""
    codes = list(t.fibers)
    if t.n ** len(codes) > EXHAUSTIVE_LIMIT:
        raise ParameterError(f"{t.n}^{len(codes)} reconstruction maps is too many to enumerate")
    code_of = [t.code(v) for v in range(t.n)]
    best = 0
    for guess in itertools.product(range(t.n), repeat=len(codes)):
        recon = dict(zip(codes, guess))
        best = max(best, sum(1 for v in range(t.n) if recon[code_of[v]] == v))
    return Fraction(best, t.n)


# ----------------------------------------------------------------------------
# Bucket statistics
# ----------------------------------------------------------------------------


def _occupancy(bucket, codes) -> np.ndarray:
    rows = _as_code_matrix(codes)[list(bucket)]
    labels, _ = _group_rows(rows)
    return np.bincount(labels)


def bucket_collision(bucket, codes) -> float:
    b = len(bucket)
    if b < 2:
        raise ParameterError("collision density is defined only for buckets of size >= 2")
    occ = _occupancy(bucket, codes)
    return int(np.sum(occ * (occ - 1))) / (b * (b - 1))


def bucket_collision_bruteforce(bucket, codes) -> float:
    b = len(bucket)
    if b < 2:
        raise ParameterError("collision density is defined only for buckets of size >= 2")
    rows = _as_code_matrix(codes)
    same = sum(1 for u in bucket for v in bucket if u != v and np.array_equal(rows[u], rows[v]))
    return same / (b * (b - 1))


def bucket_balance(bucket, codes) -> float:
    b = len(bucket)
    if b < 1:
        raise ParameterError("balance needs a non-empty bucket")
    occ = _occupancy(bucket, codes)
    return occ.size / b * int(occ.max())


@dataclass(frozen=True)
class BucketTable:
    """Per distance bucket integer counts: size b, code count M, sum N(N-1), max N."""

    sizes: np.ndarray
    code_counts: np.ndarray
    colliding_pairs: np.ndarray
    max_occupancy: np.ndarray

    @property
    def collision(self) -> np.ndarray:
        pairs = self.sizes * (self.sizes - 1)
        return np.divide(self.colliding_pairs, pairs, out=np.full(len(pairs), np.nan), where=pairs > 0)

    @property
    def balance(self) -> np.ndarray:
        return self.code_counts / self.sizes * self.max_occupancy


def bucket_table(t: ObservationTable) -> BucketTable:
    buckets = t.bucket_labels
    fibers = t.fiber_labels
    n_buckets = t.profile_count
    fiber_sizes = np.bincount(fibers)
    # every fiber sits inside exactly one bucket
    fiber_bucket = np.zeros(len(fiber_sizes), dtype=np.int64)
    fiber_bucket[fibers] = buckets
    sizes = np.bincount(buckets, minlength=n_buckets)
    code_counts = np.bincount(fiber_bucket, minlength=n_buckets)
    colliding = np.bincount(fiber_bucket, weights=fiber_sizes * (fiber_sizes - 1), minlength=n_buckets)
    max_occ = np.zeros(n_buckets, dtype=np.int64)
    np.maximum.at(max_occ, fiber_bucket, fiber_sizes)
    return BucketTable(sizes, code_counts, np.rint(colliding).astype(np.int64), max_occ)


def nearest_rank_quantile(values, q: float) -> float:
    ordered = np.sort(np.asarray(values, dtype=float))
    rank = max(1, math.ceil(q * len(ordered)))
    return float(ordered[rank - 1])


@dataclass(frozen=True)
class BucketAggregate:
    """Aggregates over the buckets kept by a size cutoff; None marks n/a."""

    cutoff: int
    bucket_count: int
    vertex_fraction: float
    weighted_collision: float | None
    mean_collision: float | None
    median_code_ratio: float | None
    q90_balance: float | None


@dataclass(frozen=True)
class BucketDiagnostics:
    table: BucketTable
    singleton_bucket_frac: float
    overall: BucketAggregate
    large: dict[int, BucketAggregate]

    @property
    def weighted_collision(self):
        return self.overall.weighted_collision

    @property
    def median_code_ratio(self):
        return self.overall.median_code_ratio

    @property
    def q90_balance(self):
        return self.overall.q90_balance


def _aggregate(bt: BucketTable, cutoff: int, n: int) -> BucketAggregate:
    keep = bt.sizes >= cutoff
    vertex_fraction = float(bt.sizes[keep].sum() / n) if n else 0.0
    if not np.any(keep):
        return BucketAggregate(cutoff, 0, vertex_fraction, None, None, None, None)
    sizes = bt.sizes[keep]
    pairs = sizes * (sizes - 1)
    return BucketAggregate(
        cutoff=cutoff,
        bucket_count=int(keep.sum()),
        vertex_fraction=vertex_fraction,
        weighted_collision=float(bt.colliding_pairs[keep].sum() / pairs.sum()),
        mean_collision=float(bt.collision[keep].mean()),
        median_code_ratio=float(np.median(bt.code_counts[keep] / sizes)),
        q90_balance=nearest_rank_quantile(bt.balance[keep], 0.9),
    )


def bucket_diagnostics(t: ObservationTable, cutoffs=LARGE_BUCKET_CUTOFFS) -> BucketDiagnostics:
    bt = bucket_table(t)
    singleton_vertices = int(bt.sizes[bt.sizes == 1].sum())
    return BucketDiagnostics(
        table=bt,
        singleton_bucket_frac=singleton_vertices / t.n,
        overall=_aggregate(bt, 2, t.n),
        large={c: _aggregate(bt, c, t.n) for c in cutoffs},
    )


def bucket_inequality_holds(t: ObservationTable) -> bool:
    """M(B) <= Bal(B)|B| / (1 + (|B|-1) Coll(B)) on every non-singleton bucket, in exact arithmetic."""
    bt = bucket_table(t)
    for b, m, pairs, top in zip(bt.sizes.tolist(), bt.code_counts.tolist(), bt.colliding_pairs.tolist(), bt.max_occupancy.tolist()):
        if b < 2:
            continue
        coll = Fraction(pairs, b * (b - 1))
        bal = Fraction(m * top, b)
        if m > bal * b / (1 + (b - 1) * coll):
            return False
    return True

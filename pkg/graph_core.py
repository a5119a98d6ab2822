import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)

# ----------------------------------------------------------------------------
# Errors
# ----------------------------------------------------------------------------


class PosencError(Exception):
    """Base class for every error raised by this toolkit."""


class ParameterError(PosencError, ValueError):
    pass


class ConnectivityError(PosencError):
    pass


class SamplerError(PosencError):
    pass


class NumericError(PosencError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class EdgeListParseError(ParameterError):
    def __init__(self, line_no: int, line: str):
        super().__init__(f"line {line_no}: expected two vertex tokens, got {line.strip()!r}")
        self.line_no = line_no


# ----------------------------------------------------------------------------
# Graph + anchors
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on vertices 0..n-1."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    edge_count: int = field(init=False)

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ParameterError(f"adjacency has {len(self.adjacency)} rows for n={self.n}")
        halves: Counter = Counter()
        for v, nbrs in enumerate(self.adjacency):
            if v in nbrs:
                raise ParameterError(f"self-loop at vertex {v}")
            if len(set(nbrs)) != len(nbrs):
                raise ParameterError(f"duplicate neighbor at vertex {v}")
            for u in nbrs:
                if not 0 <= u < self.n:
                    raise ParameterError(f"neighbor {u} of vertex {v} out of range")
                halves[(min(u, v), max(u, v))] += 1
        # every undirected edge must be listed from both endpoints
        lopsided = [e for e, count in halves.items() if count != 2]
        if lopsided:
            raise ParameterError(f"edge {lopsided[0]} is not symmetric")
        object.__setattr__(self, "edge_count", len(halves))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ParameterError(f"self-loop at vertex {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        rows = np.repeat(np.arange(self.n), self.degrees)
        cols = np.fromiter((u for a in self.adjacency for u in a), dtype=np.int64, count=int(self.degrees.sum()))
        data = np.ones(len(cols), dtype=float)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def edges(self) -> list[tuple[int, int]]:
        return [(v, u) for v, nbrs in enumerate(self.adjacency) for u in nbrs if v < u]


@dataclass(frozen=True)
class AnchorSet:
    """Ordered anchor list; order matters because distance tuples are ordered."""

    anchors: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "anchors", tuple(int(a) for a in self.anchors))
        if any(a < 0 for a in self.anchors):
            raise ParameterError(f"negative anchor id in {self.anchors}")
        if len(set(self.anchors)) != len(self.anchors):
            raise ParameterError(f"duplicate anchors in {self.anchors}")

    def __len__(self):
        return len(self.anchors)

    def check_range(self, n: int):
        bad = [a for a in self.anchors if a >= n]
        if bad:
            raise ParameterError(f"anchors {bad} out of range for n={n}")


@dataclass(frozen=True)
class GraphStats:
    n: int
    edge_count: int
    avg_degree: float
    density: float
    diameter: int
    avg_shortest_path_length: float
    avg_clustering: float
    transitivity: float
    degree_variance: float
    degree_gini: float


@dataclass
class EdgeListReport:
    token_to_id: dict[str, int]
    duplicates_dropped: int = 0
    self_loops_dropped: int = 0


# ----------------------------------------------------------------------------
# Construction
# ----------------------------------------------------------------------------

PAIRING_ATTEMPTS = 1000
REPAIR_ATTEMPTS = 1000


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _plain_pairing(stubs: np.ndarray, n: int, rng: np.random.Generator):
    pairs = rng.permutation(stubs).reshape(-1, 2)
    lo = pairs.min(axis=1)
    hi = pairs.max(axis=1)
    if np.any(lo == hi):
        return None
    keys = lo * n + hi
    if np.unique(keys).size != keys.size:
        return None
    return lo, hi


def _repaired_pairing(stubs: np.ndarray, n: int, rng: np.random.Generator):
    """Pairs stubs, then re-pairs only the stubs that formed loops or repeats."""
    edges: set[tuple[int, int]] = set()
    while stubs.size:
        leftover = []
        for a, b in rng.permutation(stubs).reshape(-1, 2).tolist():
            a, b = min(a, b), max(a, b)
            if a != b and (a, b) not in edges:
                edges.add((a, b))
            else:
                leftover += [a, b]
        if not leftover:
            break
        open_vertices = sorted(set(leftover))
        if not any((a, b) not in edges for i, a in enumerate(open_vertices) for b in open_vertices[i + 1 :]):
            return None
        stubs = np.array(leftover, dtype=np.int64)
    lo, hi = np.array(sorted(edges), dtype=np.int64).T
    return lo, hi


def _connected(lo: np.ndarray, hi: np.ndarray, n: int) -> bool:
    adj = sparse.csr_matrix((np.ones(lo.size), (lo, hi)), shape=(n, n))
    return csgraph.connected_components(adj, directed=False)[0] == 1


def random_regular(n: int, r: int, seed: int) -> Graph:
    """Pairing-model r-regular graph; restarts on loops, multi-edges or disconnection.

    Plain pairing succeeds with probability about exp(-(r^2 - 1) / 4), so after PAIRING_ATTEMPTS
    restarts the sampler switches to re-pairing only the offending stubs.
    """
    if r < 3:
        raise ParameterError(f"degree r={r} must be at least 3")
    if n <= r:
        raise ParameterError(f"need n > r, got n={n}, r={r}")
    if (n * r) % 2:
        raise ParameterError(f"n*r must be even, got n={n}, r={r}")

    rng = make_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), r)
    for attempt in range(1, PAIRING_ATTEMPTS + 1):
        paired = _plain_pairing(stubs, n, rng)
        if paired is not None and _connected(*paired, n):
            logger.debug("random_regular(n=%d, r=%d) accepted after %d attempts", n, r, attempt)
            return Graph.from_edges(n, zip(*(side.tolist() for side in paired)))

    logger.info("random_regular(n=%d, r=%d): plain pairing failed %d times, repairing stubs", n, r, PAIRING_ATTEMPTS)
    for attempt in range(1, REPAIR_ATTEMPTS + 1):
        paired = _repaired_pairing(stubs, n, rng)
        if paired is not None and _connected(*paired, n):
            return Graph.from_edges(n, zip(*(side.tolist() for side in paired)))
    raise SamplerError(f"no simple connected {r}-regular graph found on {n} vertices within the restart budget")


def read_edge_list(lines: Iterable[str]) -> tuple[Graph, EdgeListReport]:
    token_to_id: dict[str, int] = {}
    seen: set[tuple[int, int]] = set()
    report = EdgeListReport(token_to_id)

    def _id(tok: str) -> int:
        if tok not in token_to_id:
            token_to_id[tok] = len(token_to_id)
        return token_to_id[tok]

    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_no, line)
        u, v = _id(tokens[0]), _id(tokens[1])
        if u == v:
            report.self_loops_dropped += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            report.duplicates_dropped += 1
            continue
        seen.add(key)

    g = Graph.from_edges(len(token_to_id), seen)
    return g, report


def from_edge_list(lines: Iterable[str]) -> Graph:
    g, report = read_edge_list(lines)
    if report.duplicates_dropped or report.self_loops_dropped:
        logger.warning(
            "edge list: dropped %d duplicate edges and %d self-loops",
            report.duplicates_dropped,
            report.self_loops_dropped,
        )
    return g


def serialize_edge_list(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def write_token_map(token_to_id: dict[str, int], path: str | Path):
    frame = pd.DataFrame({"token": list(token_to_id), "id": list(token_to_id.values())})
    frame.to_csv(path, sep="\t", index=False)


# ----------------------------------------------------------------------------
# Components and distances
# ----------------------------------------------------------------------------


def connected_components(g: Graph) -> list[list[int]]:
    """Components as sorted vertex lists, ordered by their smallest vertex."""
    if g.n == 0:
        return []
    _, labels = csgraph.connected_components(g.csr, directed=False)
    groups: dict[int, list[int]] = {}
    for v, label in enumerate(labels.tolist()):
        groups.setdefault(label, []).append(v)
    return sorted(groups.values(), key=lambda comp: comp[0])


def is_connected(g: Graph) -> bool:
    return len(connected_components(g)) == 1


def induced_subgraph(g: Graph, vertices: list[int]) -> Graph:
    index = {v: i for i, v in enumerate(sorted(vertices))}
    edges = [(index[u], index[v]) for u, v in g.edges() if u in index and v in index]
    return Graph.from_edges(len(index), edges)


def largest_connected_component(g: Graph) -> Graph:
    if g.n == 0:
        raise ParameterError("empty graph has no connected component")
    comps = connected_components(g)
    # sorted by smallest id already, so max() keeps the first of equal sizes
    best = max(comps, key=len)
    if len(best) == g.n:
        return g
    logger.info("largest component keeps %d of %d vertices", len(best), g.n)
    return induced_subgraph(g, best)


def _distance_rows(g: Graph, sources: list[int]) -> np.ndarray:
    if not sources:
        return np.zeros((0, g.n), dtype=np.int64)
    dist = csgraph.shortest_path(g.csr, method="D", directed=False, unweighted=True, indices=sources)
    dist = np.atleast_2d(dist)
    if not np.all(np.isfinite(dist)):
        src = sources[int(np.argwhere(~np.isfinite(dist))[0][0])]
        raise ConnectivityError(f"some vertex is unreachable from {src}; graph is disconnected")
    return dist.astype(np.int64)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    if not 0 <= source < g.n:
        raise ParameterError(f"source {source} out of range for n={g.n}")
    return _distance_rows(g, [source])[0]


def all_pairs_distances(g: Graph) -> np.ndarray:
    return _distance_rows(g, list(range(g.n)))


def anchor_profile(g: Graph, a: AnchorSet) -> np.ndarray:
    """n x k matrix; row v is the distance tuple of v to the ordered anchors."""
    a.check_range(g.n)
    return np.ascontiguousarray(_distance_rows(g, list(a.anchors)).T)


# ----------------------------------------------------------------------------
# Structural statistics
# ----------------------------------------------------------------------------


def degree_gini(degrees: np.ndarray) -> float:
    x = np.sort(np.asarray(degrees, dtype=float))
    total = x.sum()
    if total == 0:
        return 0.0
    n = x.size
    index = np.arange(1, n + 1)
    return float(np.sum((2 * index - n - 1) * x) / (n * total))


def structural_stats(g: Graph) -> GraphStats:
    if g.n < 2:
        raise ParameterError(f"structural stats need n >= 2, got n={g.n}")
    n = g.n
    deg = g.degrees.astype(float)
    dist = all_pairs_distances(g)
    upper = dist[np.triu_indices(n, k=1)]

    adj = g.csr
    # closed walks of length 3 through v, halved = triangles at v
    tri = np.asarray((adj @ adj).multiply(adj).sum(axis=1)).ravel() / 2.0
    wedges = deg * (deg - 1) / 2.0
    local = np.divide(tri, wedges, out=np.zeros(n), where=wedges > 0)
    total_wedges = wedges.sum()

    return GraphStats(
        n=n,
        edge_count=g.edge_count,
        avg_degree=float(deg.mean()),
        density=2.0 * g.edge_count / (n * (n - 1)),
        diameter=int(upper.max()),
        avg_shortest_path_length=float(upper.mean()),
        avg_clustering=float(local.mean()),
        transitivity=float(tri.sum() / total_wedges) if total_wedges else 0.0,
        degree_variance=float(deg.var()),
        degree_gini=degree_gini(g.degrees),
    )


def diameter_survey(n: int, r: int, seeds: Iterable[int]) -> pd.DataFrame:
    """Diameters of sampled r-regular graphs with the ratio diam / ln n per seed."""
    rows = []
    for seed in seeds:
        g = random_regular(n, r, seed)
        diam = int(all_pairs_distances(g).max())
        rows.append({"seed": seed, "n": n, "r": r, "diameter": diam, "c_diam": diam / np.log(n)})
    return pd.DataFrame(rows, columns=["seed", "n", "r", "diameter", "c_diam"])

"""Scale-free social graph generation with degree-anticorrelated wiring.

Degrees are sampled from the truncated power law P(k) = k^-gamma / M_gamma
on support {1, .., n-1}.  Edges are wired degree-first: sources are
processed in descending target-degree order and each selects its remaining
quota of partners among users of strictly smaller target degree, drawing a
distinct subset whose probability is proportional to the product of the
partners' degree^-epsilon weights.  Partners that are already saturated
(realized degree reached their own target) or already adjacent are not
admissible, so realized degrees deviate from targets only downward; the
per-node shortfall is recorded on the graph.

Degree-1 users have an empty admissible pool and acquire their edges
passively from higher-degree sources.
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np

from ._kernels import _bfs_levels, build_edges, level_size_sums
from ._rng import child_seed, numpy_rng
from .errors import ParameterError

_DEGREE_STREAM = 0xDE65EE
_WIRING_STREAM = 0x3D6E5


@dataclass(frozen=True)
class FractalParams:
    """Generative law: user count, degree exponent, correlation exponent."""

    n: int
    gamma: float
    epsilon: float
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError("n must be an integer >= 2")
        if not (self.gamma > 2):
            raise ParameterError("gamma must be > 2 (finite mean degree)")
        if not (2 < self.epsilon <= 3):
            raise ParameterError("epsilon must lie in (2, 3]")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ParameterError("seed must fit in 64 bits")

    @property
    def m_gamma(self):
        """Normalizer sum_{k=1..n} k^-gamma (never stored, always derived)."""
        k = np.arange(1, self.n + 1, dtype=np.float64)
        return float(np.sum(k ** (-self.gamma)))


def degree_pmf(n, gamma):
    """P(k) on the support {1..n-1}, normalized."""
    k = np.arange(1, n, dtype=np.float64)
    p = k ** (-gamma)
    return p / p.sum()


def analytic_mean_degree(n, gamma):
    """Exact mean of the truncated degree law sum k^(1-gamma) / sum k^-gamma."""
    k = np.arange(1, n, dtype=np.float64)
    w = k ** (-gamma)
    return float((k * w).sum() / w.sum())


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray

    def __post_init__(self):
        deg = np.asarray(self.degrees, dtype=np.int64)
        n = deg.size
        if n < 2:
            raise ParameterError("need at least two users")
        if deg.min() < 1 or deg.max() > n - 1:
            raise ParameterError("degrees must lie in [1, n-1]")
        object.__setattr__(self, "degrees", deg)

    @property
    def n(self):
        return self.degrees.size


def sample_degrees(params):
    """n i.i.d. draws from the truncated degree law via inverse CDF."""
    pmf = degree_pmf(params.n, params.gamma)
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    rng = numpy_rng(params.seed, _DEGREE_STREAM)
    u = rng.random(params.n)
    degrees = np.searchsorted(cdf, u, side="right") + 1
    return DegreeSequence(degrees=degrees.astype(np.int64))


@dataclass(frozen=True)
class SocialGraph:
    """Simple undirected graph in CSR form with generation metadata."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    realized_degrees: np.ndarray
    degrees_target: np.ndarray
    shortfall: np.ndarray
    gamma: float = math.nan
    epsilon: float = math.nan
    seed: int = 0

    def adjacency(self, i):
        """Sorted neighbor ids of node i (view)."""
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def edge_count(self):
        return self.indices.size // 2

    @property
    def total_shortfall(self):
        return int(self.shortfall.sum())

    def edges(self):
        """(u, v) pairs with u < v, lexicographic."""
        for u in range(self.n):
            for v in self.adjacency(u):
                if u < v:
                    yield u, int(v)

    def check_invariants(self):
        """Raise if the graph is not a simple symmetric graph."""
        for u in range(self.n):
            nbrs = self.adjacency(u)
            if np.any(nbrs == u):
                raise AssertionError(f"self loop at {u}")
            if np.any(np.diff(nbrs) <= 0):
                raise AssertionError(f"unsorted or duplicate neighbors at {u}")
            if len(nbrs) != self.realized_degrees[u]:
                raise AssertionError(f"degree mismatch at {u}")
            for v in nbrs:
                back = self.adjacency(int(v))
                if u not in back:
                    raise AssertionError(f"asymmetric edge {u}-{v}")


def build_graph(degrees, epsilon, seed, gamma=math.nan):
    """Wire a graph realizing the given target degrees.

    Selection is order-independent at the stream level (per-source RNG is
    derived from (seed, node id)) but pools evolve with the fixed descending
    processing order, which is what makes the run reproducible.
    """
    if isinstance(degrees, DegreeSequence):
        targets = degrees.degrees
    else:
        targets = DegreeSequence(np.asarray(degrees, dtype=np.int64)).degrees
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise ParameterError("epsilon must be positive and finite")
    n = targets.size

    asc_id = np.lexsort((np.arange(n), targets))
    asc_deg = targets[asc_id]
    uniq_vals = np.unique(asc_deg)
    uniq_w = uniq_vals.astype(np.float64) ** (-float(epsilon))
    # deg_index[v]: position of node v's degree among the distinct values
    deg_index = np.searchsorted(uniq_vals, targets).astype(np.int64)
    strict_end = np.searchsorted(asc_deg, targets, side="left").astype(np.int64)

    slot_off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(targets, out=slot_off[1:])
    nbr_flat = np.empty(slot_off[-1], dtype=np.int64)
    fill = np.zeros(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.int64)
    scratch_members = np.empty(int(targets.max()) + 1, dtype=np.int64)
    count_scratch = np.zeros(uniq_vals.size, dtype=np.int64)

    build_edges(targets, uniq_w, deg_index, asc_id, strict_end,
                np.uint64(seed), fill, nbr_flat, slot_off[:-1].copy(), mark,
                scratch_members, count_scratch)

    realized = fill.copy()
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(realized, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for v in range(n):
        nbrs = np.sort(nbr_flat[slot_off[v]:slot_off[v] + fill[v]])
        indices[indptr[v]:indptr[v + 1]] = nbrs
    shortfall = targets - realized
    return SocialGraph(n=n, indptr=indptr, indices=indices,
                       realized_degrees=realized, degrees_target=targets.copy(),
                       shortfall=shortfall, gamma=float(gamma),
                       epsilon=float(epsilon), seed=int(seed))


def from_edges(n, edges, gamma=math.nan, epsilon=math.nan, seed=0):
    """Graph from an explicit edge list (deduplicated, self-loops rejected)."""
    pairs = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ParameterError("self loops are not allowed")
        if not (0 <= u < n and 0 <= v < n):
            raise ParameterError("edge endpoint out of range")
        pairs.add((min(u, v), max(u, v)))
    deg = np.zeros(n, dtype=np.int64)
    for u, v in pairs:
        deg[u] += 1
        deg[v] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    fill = np.zeros(n, dtype=np.int64)
    indices = np.empty(indptr[-1], dtype=np.int64)
    for u, v in sorted(pairs):
        indices[indptr[u] + fill[u]] = v
        fill[u] += 1
        indices[indptr[v] + fill[v]] = u
        fill[v] += 1
    for v in range(n):
        indices[indptr[v]:indptr[v + 1]] = np.sort(indices[indptr[v]:indptr[v + 1]])
    return SocialGraph(n=n, indptr=indptr, indices=indices, realized_degrees=deg,
                       degrees_target=deg.copy(), shortfall=np.zeros(n, dtype=np.int64),
                       gamma=float(gamma), epsilon=float(epsilon), seed=int(seed))


def generate(params):
    """Sample degrees and wire the graph for one parameter set."""
    deg = sample_degrees(params)
    g = build_graph(deg, params.epsilon,
                    int(child_seed(np.uint64(params.seed), np.uint64(_WIRING_STREAM))),
                    gamma=params.gamma)
    return deg, g


@dataclass(frozen=True)
class LevelSets:
    """Nodes grouped by social shortest-path distance from one source."""

    source: int
    levels: list
    l_max_observed: int

    def level(self, l):
        """Sorted array of level-l contacts (distance exactly l)."""
        if l < 1 or l > len(self.levels):
            return np.empty(0, dtype=np.int64)
        return self.levels[l - 1]


def _bfs_scratch(n):
    return (np.zeros(n, dtype=np.int64), np.full(n, -1, dtype=np.int64),
            np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64))


def level_sets(graph, source, l_cap):
    """BFS level sets from `source`, truncated at l_cap levels."""
    if not (0 <= source < graph.n):
        raise ParameterError("source out of range")
    if l_cap < 1:
        raise ParameterError("l_cap must be >= 1")
    dist, parent, order, epoch = _bfs_scratch(graph.n)
    visited = _bfs_levels(source, l_cap, graph.indptr, graph.indices,
                          dist, parent, order, epoch, 1)
    levels = [[] for _ in range(l_cap)]
    for idx in range(1, visited):
        v = int(order[idx])
        levels[dist[v] - 1].append(v)
    levels = [np.array(sorted(l), dtype=np.int64) for l in levels]
    l_max_observed = max((i + 1 for i, l in enumerate(levels) if l.size), default=0)
    return LevelSets(source=source, levels=levels, l_max_observed=l_max_observed)


def mean_level_degrees(graph, l_cap):
    """Mean level-L set size over all sources, for L = 1..l_cap."""
    if l_cap < 1:
        raise ParameterError("l_cap must be >= 1")
    dist, parent, order, epoch = _bfs_scratch(graph.n)
    sums = level_size_sums(graph.indptr, graph.indices, l_cap,
                           dist, parent, order, epoch)
    return sums.astype(np.float64) / graph.n


def mean_level_degree(graph, l):
    """Average number of level-L contacts per user."""
    return float(mean_level_degrees(graph, l)[l - 1])


def write_edge_list(graph, path):
    """Plain-text export: header line then one `u v` pair (u < v) per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={graph.n} gamma={graph.gamma:.17g} "
                 f"epsilon={graph.epsilon:.17g} seed={graph.seed}\n")
        for u, v in graph.edges():
            fh.write(f"{u} {v}\n")


def read_edge_list(path):
    """Parse a graph written by write_edge_list."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        m = re.match(r"#\s*n=(\S+)\s+gamma=(\S+)\s+epsilon=(\S+)\s+seed=(\S+)", header)
        if not m:
            raise ParameterError(f"bad edge-list header: {header!r}")
        n = int(m.group(1))
        gamma = float(m.group(2))
        epsilon = float(m.group(3))
        seed = int(m.group(4))
        pairs = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            u, v = line.split()
            pairs.append((int(u), int(v)))
    deg = np.zeros(n, dtype=np.int64)
    for u, v in pairs:
        deg[u] += 1
        deg[v] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    fill = np.zeros(n, dtype=np.int64)
    indices = np.empty(indptr[-1], dtype=np.int64)
    for u, v in pairs:
        indices[indptr[u] + fill[u]] = v
        fill[u] += 1
        indices[indptr[v] + fill[v]] = u
        fill[v] += 1
    for v in range(n):
        indices[indptr[v]:indptr[v + 1]] = np.sort(indices[indptr[v]:indptr[v + 1]])
    # imported graphs carry realized degrees as targets (no shortfall known)
    return SocialGraph(n=n, indptr=indptr, indices=indices, realized_degrees=deg,
                       degrees_target=deg.copy(), shortfall=np.zeros(n, dtype=np.int64),
                       gamma=gamma, epsilon=epsilon, seed=seed)

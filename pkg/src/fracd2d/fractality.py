"""Box covering, renormalization, and fractal exponent estimation.

A box is a set of nodes whose pairwise shortest-path distance (measured in
the full graph) stays within the box size l_B.  The greedy covering seeds
each box at the highest-degree uncovered node (ties to the lowest id) and
grows it through uncovered neighbors in ascending-id waves; candidates that
would break the diameter bound are rejected permanently since the bound
only tightens as the box grows.  The result is a valid covering and an
upper bound on the minimal box count, which is all the log-log slope fits
need.

Exponent fits follow the renormalization relations: the box-count ratio,
the box-to-hub degree ratio, and the hub cross-link ratio all decay as
powers of l_B; their slopes give d_B, d_g, d_e, from which the degree and
correlation exponents derive as 1 + d_B/d_g and 2 + d_e/d_g.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .capacity import fit_loglog
from .errors import ParameterError
from .fractal_graph import SocialGraph


@dataclass(frozen=True)
class BoxCovering:
    l_b: int
    boxes: list                 # list of sorted int arrays, a partition
    hub_of_box: np.ndarray      # highest-degree node per box, ties lowest id

    @property
    def n_boxes(self):
        return len(self.boxes)


@dataclass(frozen=True)
class FractalityReport:
    d_b: float
    d_g: float
    d_e: float
    gamma_hat: float
    epsilon_hat: float
    fit_r_squared: dict
    l_b_values: list
    box_counts: list
    n: int
    giant_size: int
    n_components: int


@njit(cache=True)
def _count_members_within(indptr, indices, v, l_b, in_box, stamp, need,
                          dist, epoch, queue, visit_stamp):
    """BFS from v truncated at l_b; counts current box members reached."""
    epoch[v] = visit_stamp
    dist[v] = 0
    queue[0] = v
    head = 0
    tail = 1
    found = 1 if in_box[v] == stamp else 0
    while head < tail:
        u = queue[head]
        head += 1
        if dist[u] >= l_b:
            continue
        for e in range(indptr[u], indptr[u + 1]):
            w = indices[e]
            if epoch[w] != visit_stamp:
                epoch[w] = visit_stamp
                dist[w] = dist[u] + 1
                queue[tail] = w
                tail += 1
                if in_box[w] == stamp:
                    found += 1
                    if found == need:
                        return found
    return found


def box_cover(graph, l_b):
    """Greedy diameter-bounded covering; deterministic."""
    if l_b < 1:
        raise ParameterError("l_b must be >= 1")
    n = graph.n
    covered = np.zeros(n, dtype=bool)
    in_box = np.zeros(n, dtype=np.int64)
    rejected = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n, dtype=np.int64)
    epoch = np.zeros(n, dtype=np.int64)
    queue = np.zeros(n, dtype=np.int64)
    seed_order = np.lexsort((np.arange(n), -graph.realized_degrees))
    boxes = []
    hubs = []
    stamp = 0
    visit_stamp = 0
    for s in seed_order:
        s = int(s)
        if covered[s]:
            continue
        stamp += 1
        members = [s]
        covered[s] = True
        in_box[s] = stamp
        frontier = sorted(int(v) for v in graph.adjacency(s) if not covered[v])
        while frontier:
            nxt = set()
            for v in frontier:
                if covered[v] or rejected[v] == stamp:
                    continue
                visit_stamp += 1
                cnt = _count_members_within(graph.indptr, graph.indices, v,
                                            l_b, in_box, stamp, len(members),
                                            dist, epoch, queue, visit_stamp)
                if cnt == len(members):
                    members.append(v)
                    covered[v] = True
                    in_box[v] = stamp
                    for w in graph.adjacency(v):
                        if not covered[w]:
                            nxt.add(int(w))
                else:
                    rejected[v] = stamp
            frontier = sorted(w for w in nxt if not covered[w] and rejected[w] != stamp)
        members = sorted(members)
        deg = graph.realized_degrees[members]
        hubs.append(members[int(np.argmax(deg))])
        boxes.append(np.array(members, dtype=np.int64))
    return BoxCovering(l_b=int(l_b), boxes=boxes, hub_of_box=np.array(hubs, dtype=np.int64))


def covering_is_valid(graph, covering):
    """Partition + diameter bound check (test support)."""
    seen = np.zeros(graph.n, dtype=np.int64)
    for box in covering.boxes:
        for v in box:
            seen[v] += 1
    if not np.all(seen == 1):
        return False
    dist = np.zeros(graph.n, dtype=np.int64)
    epoch = np.zeros(graph.n, dtype=np.int64)
    queue = np.zeros(graph.n, dtype=np.int64)
    in_box = np.zeros(graph.n, dtype=np.int64)
    stamp = 0
    visit = 0
    for box in covering.boxes:
        stamp += 1
        for v in box:
            in_box[v] = stamp
        for v in box:
            visit += 1
            cnt = _count_members_within(graph.indptr, graph.indices, int(v),
                                        covering.l_b, in_box, stamp, len(box),
                                        dist, epoch, queue, visit)
            if cnt != len(box):
                return False
    return True


def _box_graph_edges(graph, covering):
    box_of = np.full(graph.n, -1, dtype=np.int64)
    for b, box in enumerate(covering.boxes):
        box_of[box] = b
    pairs = set()
    for u in range(graph.n):
        bu = box_of[u]
        for v in graph.adjacency(u):
            if u < v and bu != box_of[v]:
                pairs.add((min(int(bu), int(box_of[v])), max(int(bu), int(box_of[v]))))
    return box_of, pairs


def renormalize(graph, covering):
    """One node per box; boxes adjacent iff any cross-box edge exists."""
    from .fractal_graph import from_edges

    _, pairs = _box_graph_edges(graph, covering)
    return from_edges(covering.n_boxes, sorted(pairs))


def nested_box_counts(graph, l_b_values):
    """Box counts for a nested covering family (monotone by construction).

    The covering at the smallest box size is the plain greedy one; each
    larger size then greedily merges adjacent boxes of the previous level
    while the merged diameter bound holds.  Box counts are therefore
    non-increasing in the box size, which makes the family suitable for
    trend checks (the plain per-size greedy can locally fluctuate).
    """
    l_bs = sorted(set(int(l) for l in l_b_values))
    if not l_bs or l_bs[0] < 1:
        raise ParameterError("box sizes must be >= 1")
    cov = box_cover(graph, l_bs[0])
    boxes = [list(map(int, b)) for b in cov.boxes]
    counts = [len(boxes)]
    dist = np.zeros(graph.n, dtype=np.int64)
    epoch = np.zeros(graph.n, dtype=np.int64)
    queue = np.zeros(graph.n, dtype=np.int64)
    in_box = np.zeros(graph.n, dtype=np.int64)
    stamp = 0
    visit = 0
    for l_b in l_bs[1:]:
        merged = True
        while merged:
            merged = False
            box_of = {}
            for bi, box in enumerate(boxes):
                for v in box:
                    box_of[v] = bi
            for bi in range(len(boxes)):
                if boxes[bi] is None:
                    continue
                neighbors = set()
                for v in boxes[bi]:
                    for w in graph.adjacency(v):
                        bw = box_of[int(w)]
                        if bw != bi and boxes[bw] is not None:
                            neighbors.add(bw)
                for bj in sorted(neighbors):
                    union = boxes[bi] + boxes[bj]
                    stamp += 1
                    for v in union:
                        in_box[v] = stamp
                    ok = True
                    for v in union:
                        visit += 1
                        cnt = _count_members_within(graph.indptr, graph.indices,
                                                    v, l_b, in_box, stamp,
                                                    len(union), dist, epoch,
                                                    queue, visit)
                        if cnt != len(union):
                            ok = False
                            break
                    if ok:
                        boxes[bi] = sorted(union)
                        for v in boxes[bj]:
                            box_of[v] = bi
                        boxes[bj] = None
                        merged = True
            boxes = [b for b in boxes if b is not None]
        counts.append(len(boxes))
    return l_bs, counts


def connected_components(graph):
    """List of sorted node-id arrays, largest first."""
    n = graph.n
    comp = np.full(n, -1, dtype=np.int64)
    c = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = c
        while stack:
            u = stack.pop()
            for v in graph.adjacency(u):
                if comp[v] < 0:
                    comp[v] = c
                    stack.append(int(v))
        c += 1
    groups = [np.flatnonzero(comp == i) for i in range(c)]
    groups.sort(key=lambda g: (-g.size, g[0]))
    return groups


def induced_subgraph(graph, nodes):
    """Subgraph on `nodes` with ids remapped to 0..len-1."""
    from .fractal_graph import from_edges

    nodes = np.asarray(nodes, dtype=np.int64)
    new_id = np.full(graph.n, -1, dtype=np.int64)
    new_id[nodes] = np.arange(nodes.size)
    edges = []
    for u in nodes:
        for v in graph.adjacency(int(u)):
            if u < v and new_id[v] >= 0:
                edges.append((int(new_id[u]), int(new_id[v])))
    return from_edges(nodes.size, edges)


def _covering_stats(sub, covering):
    """(N_B/n, mean box/hub degree ratio, mean hub cross-link ratio)."""
    box_of, _ = _box_graph_edges(sub, covering)
    nb = covering.n_boxes
    neighbor_boxes = [set() for _ in range(nb)]
    for u in range(sub.n):
        bu = int(box_of[u])
        for v in sub.adjacency(u):
            bv = int(box_of[v])
            if bu != bv:
                neighbor_boxes[bu].add(bv)
    kb_ratios = []
    nh_ratios = []
    for b, box in enumerate(covering.boxes):
        hub = int(covering.hub_of_box[b])
        k_hub = int(sub.realized_degrees[hub])
        k_b = len(neighbor_boxes[b])
        if k_hub > 0:
            kb_ratios.append(k_b / k_hub)
        if k_b > 0:
            n_h = sum(1 for v in sub.adjacency(hub) if box_of[v] != b)
            nh_ratios.append(n_h / k_b)
    kb_mean = float(np.mean(kb_ratios)) if kb_ratios else math.nan
    nh_mean = float(np.mean(nh_ratios)) if nh_ratios else math.nan
    return nb / sub.n, kb_mean, nh_mean


def _safe_fit(l_bs, ys):
    """Log-log fit returning (exponent, r2); nan on degenerate data."""
    xs = [l for l, y in zip(l_bs, ys) if y is not None and y > 0 and math.isfinite(y)]
    vals = [y for y in ys if y is not None and y > 0 and math.isfinite(y)]
    if len(vals) < 3 or len(set(vals)) == 1:
        return math.nan, math.nan
    slope, _, r2 = fit_loglog(xs, vals)
    return -slope, r2


def estimate_exponents(graph, l_b_values):
    """Fit d_B, d_g, d_e over the box sizes and derive gamma/epsilon.

    Fits run on the giant component; smaller components are reported via
    the component counts only.
    """
    l_bs = sorted(set(int(l) for l in l_b_values))
    if len(l_bs) < 3:
        raise ParameterError("need at least 3 box sizes")
    comps = connected_components(graph)
    giant = comps[0]
    sub = induced_subgraph(graph, giant) if giant.size < graph.n else graph
    nb_ratios = []
    kb_means = []
    nh_means = []
    box_counts = []
    for l_b in l_bs:
        cov = box_cover(sub, l_b)
        nb, kb, nh = _covering_stats(sub, cov)
        nb_ratios.append(nb)
        kb_means.append(kb)
        nh_means.append(nh)
        box_counts.append(cov.n_boxes)
    d_b, r2_b = _safe_fit(l_bs, nb_ratios)
    d_g, r2_g = _safe_fit(l_bs, kb_means)
    d_e, r2_e = _safe_fit(l_bs, nh_means)
    gamma_hat = 1.0 + d_b / d_g if (math.isfinite(d_b) and math.isfinite(d_g) and d_g != 0) else math.nan
    epsilon_hat = 2.0 + d_e / d_g if (math.isfinite(d_e) and math.isfinite(d_g) and d_g != 0) else math.nan
    return FractalityReport(d_b=d_b, d_g=d_g, d_e=d_e,
                            gamma_hat=gamma_hat, epsilon_hat=epsilon_hat,
                            fit_r_squared={"d_b": r2_b, "d_g": r2_g, "d_e": r2_e},
                            l_b_values=l_bs, box_counts=box_counts,
                            n=graph.n, giant_size=int(giant.size),
                            n_components=len(comps))


def write_covering(covering, path):
    """Debug export: `box_id: node node ...` per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for b, box in enumerate(covering.boxes):
            fh.write(f"{b}: " + " ".join(str(int(v)) for v in box) + "\n")

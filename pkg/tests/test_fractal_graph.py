import math

import numpy as np
import pytest

from fracd2d import fractal_graph as fg
from fracd2d.errors import ParameterError

from conftest import make_complete, make_path, make_star


def test_params_validation():
    with pytest.raises(ParameterError):
        fg.FractalParams(n=1, gamma=2.5, epsilon=2.5)
    with pytest.raises(ParameterError):
        fg.FractalParams(n=10, gamma=2.0, epsilon=2.5)
    with pytest.raises(ParameterError):
        fg.FractalParams(n=10, gamma=2.5, epsilon=2.0)
    with pytest.raises(ParameterError):
        fg.FractalParams(n=10, gamma=2.5, epsilon=3.5)
    fg.FractalParams(n=10, gamma=2.5, epsilon=3.0)  # boundary allowed


def test_degrees_n2_single_point_support():
    params = fg.FractalParams(n=2, gamma=2.5, epsilon=2.5, seed=0)
    deg = fg.sample_degrees(params)
    assert np.all(deg.degrees == 1)


def test_degrees_deterministic():
    params = fg.FractalParams(n=10 ** 4, gamma=2.5, epsilon=2.5, seed=1)
    a = fg.sample_degrees(params)
    b = fg.sample_degrees(params)
    assert np.array_equal(a.degrees, b.degrees)


def test_degrees_mean_matches_analytic():
    params = fg.FractalParams(n=10 ** 4, gamma=2.5, epsilon=2.5, seed=1)
    deg = fg.sample_degrees(params)
    analytic = fg.analytic_mean_degree(10 ** 4, 2.5)
    assert abs(deg.degrees.mean() - analytic) <= 0.1 * analytic


def test_degrees_bounds():
    params = fg.FractalParams(n=5000, gamma=2.2, epsilon=2.5, seed=2)
    deg = fg.sample_degrees(params)
    assert deg.degrees.min() >= 1
    assert deg.degrees.max() <= 4999


def test_sampler_law_ks():
    # empirical target-degree distribution tracks P(k) = k^-gamma / M
    params = fg.FractalParams(n=10 ** 4, gamma=2.5, epsilon=2.5, seed=1)
    deg = fg.sample_degrees(params)
    cdf = np.cumsum(fg.degree_pmf(10 ** 4, 2.5))
    ks = 0.0
    for k in range(1, int(deg.degrees.max()) + 1):
        emp = float(np.sum(deg.degrees <= k)) / deg.n
        ks = max(ks, abs(emp - cdf[k - 1]))
    assert ks <= 0.05


def test_build_forced_star():
    graph = fg.build_graph(np.array([3, 1, 1, 1]), 2.5, seed=0)
    assert sorted(graph.adjacency(0).tolist()) == [1, 2, 3]
    assert graph.realized_degrees.tolist() == [3, 1, 1, 1]
    assert graph.total_shortfall == 0


def test_build_invariants(graph_1k):
    graph_1k.check_invariants()


def test_build_deterministic():
    params = fg.FractalParams(n=500, gamma=2.5, epsilon=2.5, seed=42)
    _, a = fg.generate(params)
    _, b = fg.generate(params)
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.indptr, b.indptr)


def test_shortfall_only_downward(graph_10k):
    # realized degrees never exceed targets; the deficit is recorded
    _, graph = graph_10k
    assert np.all(graph.realized_degrees <= graph.degrees_target)
    assert np.array_equal(graph.shortfall,
                          graph.degrees_target - graph.realized_degrees)
    assert np.all(graph.shortfall >= 0)


@pytest.mark.xfail(strict=True, reason=(
    "wired-degree KS vs P(k) lands near 0.07 at gamma=2.5, n=1e4: the "
    "strictly-lower-degree selection law demands ~1.16n endpoints from the "
    "0.745n-capacity degree-1 stratum, so ~6% of target mass is unrealizable "
    "no matter the wiring (see decisions ledger)"))
def test_wired_degree_ks(graph_10k):
    _, graph = graph_10k
    cdf = np.cumsum(fg.degree_pmf(10 ** 4, 2.5))
    realized = graph.realized_degrees
    ks = abs(float(np.sum(realized <= 0)) / realized.size - 0.0)
    for k in range(1, int(realized.max()) + 1):
        emp = float(np.sum(realized <= k)) / realized.size
        ks = max(ks, abs(emp - cdf[k - 1]))
    assert ks <= 0.05


def test_build_partner_law_pristine_pool():
    # the first-processed (highest-degree) source faces the untouched pool;
    # its partner-degree histogram follows count_k * k^-eps exactly
    eps = 2.5
    picks = []
    pool_w = None
    for seed in range(150):
        params = fg.FractalParams(n=300, gamma=2.5, epsilon=eps, seed=seed)
        deg = fg.sample_degrees(params)
        graph = fg.build_graph(deg, eps, seed=seed + 1000)
        t = graph.degrees_target
        top = int(np.lexsort((np.arange(t.size), -t))[0])
        for v in graph.adjacency(top):
            if t[v] < t[top]:
                picks.append(int(t[v]))
        kmax = int(t[top])
        counts = np.bincount(t, minlength=kmax)[1:kmax]
        w = counts * np.arange(1, kmax, dtype=float) ** (-eps)
        if pool_w is None:
            pool_w = np.zeros(0)
        if w.size > pool_w.size:
            pool_w = np.pad(pool_w, (0, w.size - pool_w.size))
        pool_w[:w.size] += w
    picks = np.array(picks)
    emp = np.bincount(picks, minlength=pool_w.size + 1)[1:pool_w.size + 1]
    emp = emp / emp.sum()
    law = pool_w / pool_w.sum()
    ks = float(np.max(np.abs(np.cumsum(emp) - np.cumsum(law))))
    assert ks < 0.1


def test_level_sets_path():
    graph = make_path(3)
    ls = fg.level_sets(graph, 0, 5)
    assert ls.level(1).tolist() == [1]
    assert ls.level(2).tolist() == [2]
    assert ls.level(3).size == 0
    assert ls.l_max_observed == 2


def test_level_sets_star():
    graph = make_star(6)
    ls = fg.level_sets(graph, 0, 3)
    assert ls.level(1).tolist() == [1, 2, 3, 4, 5]
    assert ls.level(2).size == 0


def test_level_sets_two_hop_tree():
    # hub with two children, each child with two leaves: level-2 of the hub
    # is exactly the four leaves
    edges = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]
    graph = fg.from_edges(7, edges)
    ls = fg.level_sets(graph, 0, 4)
    assert ls.level(1).tolist() == [1, 2]
    assert ls.level(2).tolist() == [3, 4, 5, 6]


def test_level_sets_match_adjacency(graph_1k):
    ls = fg.level_sets(graph_1k, 17, 4)
    assert ls.level(1).tolist() == graph_1k.adjacency(17).tolist()


def test_level_sets_disjoint_and_exclude_source(graph_1k):
    ls = fg.level_sets(graph_1k, 3, 6)
    seen = set()
    for l in range(1, 7):
        nodes = set(ls.level(l).tolist())
        assert 3 not in nodes
        assert not (nodes & seen)
        seen |= nodes


def test_level_sets_isolated_source():
    graph = fg.from_edges(3, [(1, 2)])
    ls = fg.level_sets(graph, 0, 3)
    assert all(ls.level(l).size == 0 for l in (1, 2, 3))
    assert ls.l_max_observed == 0


def test_level_sets_domain(graph_1k):
    with pytest.raises(ParameterError):
        fg.level_sets(graph_1k, -1, 2)
    with pytest.raises(ParameterError):
        fg.level_sets(graph_1k, 0, 0)


def test_mean_level_degree_complete_graph():
    k4 = make_complete(4)
    assert fg.mean_level_degree(k4, 1) == 3.0
    assert fg.mean_level_degree(k4, 2) == 0.0


@pytest.mark.xfail(strict=True, reason=(
    "the branching prediction alpha^(L-1)*(gamma-1)/(gamma-2) uses integral "
    "approximations of the zeta sums and an idealized neighbor-degree law; "
    "on degree-law-preserving graphs the measured level-2 mean is pinned to "
    "E[d(d-1)]/E[d] (size biased), giving [~1.06, ~4.2, ~0.05] at gamma=3, "
    "eps=3, n=5000 vs the flat 2.0 claim (see decisions ledger)"))
def test_level_degree_invariance_generated():
    params = fg.FractalParams(n=5000, gamma=3.0, epsilon=3.0, seed=1)
    _, graph = fg.generate(params)
    measured = fg.mean_level_degrees(graph, 3)
    assert np.all(np.abs(measured / 2.0 - 1.0) <= 0.25)


@pytest.mark.xfail(strict=True, reason=(
    "measured level-degree sequences oscillate (hub-and-leaf structure): "
    "~[1.8, 74, 5.6, 25] at gamma=2.5 - neither increasing (eps=2.4) nor "
    "flat (eps=3.0); same root cause as the Eq-17 gap (see decisions ledger)"))
def test_level_degree_trend():
    base = dict(n=5000, gamma=2.5, seed=1)
    _, g24 = fg.generate(fg.FractalParams(epsilon=2.4, **base))
    m24 = fg.mean_level_degrees(g24, 4)
    assert np.all(np.diff(m24) > 0)
    _, g30 = fg.generate(fg.FractalParams(epsilon=3.0, **base))
    m30 = fg.mean_level_degrees(g30, 4)
    assert m30.max() / m30.min() <= 1.5


def test_edge_list_roundtrip(tmp_path, graph_1k):
    path = tmp_path / "graph.txt"
    fg.write_edge_list(graph_1k, path)
    first = open(path).readline()
    assert first.startswith("# n=1000 gamma=2.5 epsilon=2.5 seed=")
    back = fg.read_edge_list(path)
    assert back.n == graph_1k.n
    assert np.array_equal(back.indices, graph_1k.indices)
    assert np.array_equal(back.indptr, graph_1k.indptr)
    for u, v in list(graph_1k.edges())[:50]:
        assert u < v


def test_from_edges_rejects_self_loop():
    with pytest.raises(ParameterError):
        fg.from_edges(3, [(1, 1)])

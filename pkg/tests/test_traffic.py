import math

import numpy as np
import pytest

from fracd2d import capacity, fractal_graph as fg, spatial_grid as sg, sympoly, traffic
from fracd2d.errors import ParameterError

from conftest import make_complete


def test_model_validation():
    with pytest.raises(ParameterError):
        traffic.TrafficModel(rule="nearest")
    with pytest.raises(ParameterError):
        traffic.TrafficModel(rule="powerlaw", beta=-1.0)
    with pytest.raises(ParameterError):
        traffic.TrafficModel(level_policy="hierarchical", l_max=0)
    m = traffic.TrafficModel(rule="powerlaw", beta=2.0)
    assert m.uses_beta


def test_pick_uniform_singleton():
    rng = np.random.default_rng(0)
    assert traffic.pick_destination_uniform([7], rng) == 7


def test_pick_uniform_empty_signals_none():
    rng = np.random.default_rng(0)
    assert traffic.pick_destination_uniform([], rng) is None


def test_pick_uniform_frequencies():
    rng = np.random.default_rng(1)
    contacts = [2, 5, 8, 11]
    counts = {c: 0 for c in contacts}
    for _ in range(100000):
        counts[traffic.pick_destination_uniform(contacts, rng)] += 1
    for c in contacts:
        assert abs(counts[c] / 100000 - 0.25) <= 0.005


def test_pick_uniform_deterministic():
    a = traffic.pick_destination_uniform([3, 4, 5], np.random.default_rng(9))
    b = traffic.pick_destination_uniform([3, 4, 5], np.random.default_rng(9))
    assert a == b


def _layout_with_distances():
    # source node 0 at the center; contacts at distances 0.1 and 0.2
    pos = np.array([[0.5, 0.5], [0.6, 0.5], [0.7, 0.5]])
    return sg.SpatialLayout(pos)


def test_powerlaw_probabilities_beta1():
    layout = _layout_with_distances()
    p = traffic.destination_probabilities(0, [1, 2], layout, 1.0)
    assert p[0] == pytest.approx(2 / 3, rel=1e-12)
    assert p[1] == pytest.approx(1 / 3, rel=1e-12)


def test_powerlaw_probabilities_beta3():
    layout = _layout_with_distances()
    p = traffic.destination_probabilities(0, [1, 2], layout, 3.0)
    assert p[0] == pytest.approx(8 / 9, rel=1e-12)
    assert p[1] == pytest.approx(1 / 9, rel=1e-12)


def test_powerlaw_beta0_uniform():
    layout = _layout_with_distances()
    p = traffic.destination_probabilities(0, [1, 2], layout, 0.0)
    assert np.allclose(p, 0.5)


def test_pick_powerlaw_empty_signals_none():
    rng = np.random.default_rng(0)
    assert traffic.pick_destination_powerlaw(0, [], _layout_with_distances(),
                                             1.0, rng) is None


def test_estimator_all_in_one_cell():
    # giant cell side: every transmission costs zero hops
    n = 10
    graph = make_complete(n)
    pos = 0.05 + 0.02 * np.random.default_rng(3).random((n, 2))
    layout = sg.SpatialLayout(pos)
    grid = sg.grid_config(n, c_r=1.0, c1=5.0)
    est = traffic.estimate_mean_hops(graph, layout, grid,
                                     traffic.TrafficModel(rule="uniform"), 2000, 1)
    assert est.mean == 0.0
    assert est.skip_fraction == 0.0


def test_estimator_matches_exact_small(small_instance):
    graph, layout, grid = small_instance
    exact = sympoly.analytic_hops_uniform(graph, layout, grid)
    est = traffic.estimate_mean_hops(graph, layout, grid,
                                     traffic.TrafficModel(rule="uniform"),
                                     100000, 3)
    assert abs(est.mean - exact) <= 3 * est.stderr


def test_estimator_matches_exact_powerlaw(small_instance):
    graph, layout, grid = small_instance
    exact = sympoly.analytic_hops_powerlaw(graph, layout, grid, 2.5)
    est = traffic.estimate_mean_hops(graph, layout, grid,
                                     traffic.TrafficModel(rule="powerlaw", beta=2.5),
                                     100000, 3)
    assert abs(est.mean - exact) <= 3 * est.stderr


def test_estimator_deterministic_across_threads(small_instance):
    graph, layout, grid = small_instance
    model = traffic.TrafficModel(rule="uniform")
    a = traffic.estimate_mean_hops(graph, layout, grid, model, 20000, 5, threads=1)
    b = traffic.estimate_mean_hops(graph, layout, grid, model, 20000, 5, threads=4)
    assert a.mean == b.mean
    assert a.stderr == b.stderr


def test_hierarchical_lmax1_identical_to_direct(small_instance):
    graph, layout, grid = small_instance
    direct = traffic.estimate_mean_hops(
        graph, layout, grid, traffic.TrafficModel(rule="uniform"), 30000, 11)
    hier = traffic.estimate_mean_hops(
        graph, layout, grid,
        traffic.TrafficModel(rule="uniform", level_policy="hierarchical", l_max=1),
        30000, 11)
    assert direct.mean == hier.mean
    assert direct.stderr == hier.stderr


def test_skip_fraction_small_at_defaults(graph_1k):
    layout = sg.place_nodes(1000, 7)
    grid = sg.grid_config(1000)
    est = traffic.estimate_mean_hops(graph_1k, layout, grid,
                                     traffic.TrafficModel(rule="uniform"), 20000, 7)
    assert est.skip_fraction < 0.01
    assert est.empty_pool_fraction < 0.01


def test_hierarchical_mixture_reports_levels():
    params = fg.FractalParams(n=512, gamma=2.5, epsilon=2.5, seed=2)
    _, graph = fg.generate(params)
    layout = sg.place_nodes(512, 2)
    grid = sg.grid_config(512)
    est = traffic.estimate_mean_hops(
        graph, layout, grid,
        traffic.TrafficModel(rule="uniform", level_policy="hierarchical", l_max=4),
        20000, 2)
    assert est.per_level_counts is not None
    assert est.per_level_counts.sum() == est.trials
    assert est.level_weights.size == 4
    assert est.mean > 0


def test_hierarchical_path_cost_ratio():
    # measured per-level cost tracks L * E_1 within a factor of two
    params = fg.FractalParams(n=2000, gamma=2.5, epsilon=2.5, seed=4)
    _, graph = fg.generate(params)
    layout = sg.place_nodes(2000, 4)
    grid = sg.grid_config(2000)
    est = traffic.estimate_hierarchical_hops(
        graph, layout, grid, traffic.TrafficModel(rule="uniform"),
        2.5, 2.5, 4, 20000)
    ratios = est.per_level_ratio
    for l in range(2, min(5, ratios.size + 1)):
        r = ratios[l - 1]
        if math.isfinite(r):
            assert 0.5 <= r <= 2.0


def test_hierarchical_estimator_validation(small_instance):
    graph, layout, grid = small_instance
    with pytest.raises(ParameterError):
        traffic.estimate_hierarchical_hops(
            graph, layout, grid, traffic.TrafficModel(rule="uniform"),
            2.5, 3.5, 1, 1000)


@pytest.mark.slow
def test_conditional_slopes_by_source_degree():
    # low-degree and high-degree sources share the sqrt(n) hop growth
    ns = [2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13]
    for lo, hi in ((1, 5), (20, 1 << 40)):
        hops = []
        for n in ns:
            params = fg.FractalParams(n=n, gamma=2.5, epsilon=2.5, seed=1)
            _, graph = fg.generate(params)
            layout = sg.place_nodes(n, 1)
            grid = sg.grid_config(n)
            est = traffic.estimate_mean_hops(
                graph, layout, grid, traffic.TrafficModel(rule="uniform"),
                8000, 1, source_degree_range=(lo, hi))
            hops.append(est.mean)
        slope, _, _ = capacity.fit_loglog(ns, hops)
        assert abs(slope - 0.5) <= 0.15, (lo, hi, slope, hops)

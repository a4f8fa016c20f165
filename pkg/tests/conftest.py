import numpy as np
import pytest

from fracd2d import fractal_graph, spatial_grid


@pytest.fixture(scope="session")
def small_instance():
    """n=50 frozen instance shared by the exact-vs-MC comparisons."""
    params = fractal_graph.FractalParams(n=50, gamma=2.5, epsilon=2.5, seed=3)
    _, graph = fractal_graph.generate(params)
    layout = spatial_grid.place_nodes(50, 3)
    grid = spatial_grid.grid_config(50)
    return graph, layout, grid


@pytest.fixture(scope="session")
def graph_1k():
    params = fractal_graph.FractalParams(n=1000, gamma=2.5, epsilon=2.5, seed=7)
    _, graph = fractal_graph.generate(params)
    return graph


@pytest.fixture(scope="session")
def graph_10k():
    params = fractal_graph.FractalParams(n=10000, gamma=2.5, epsilon=2.5, seed=1)
    deg, graph = fractal_graph.generate(params)
    return deg, graph


def make_path(n):
    return fractal_graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def make_star(n):
    return fractal_graph.from_edges(n, [(0, i) for i in range(1, n)])


def make_complete(n):
    return fractal_graph.from_edges(
        n, [(i, j) for i in range(n) for j in range(i + 1, n)])

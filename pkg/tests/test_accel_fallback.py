"""The pure-Python/numpy fallback path must match the compiled kernels."""

import json
import os
import subprocess
import sys

SCRIPT = r"""
import json
import numpy as np
from fracd2d import _accel, fractal_graph as fg, spatial_grid as sg, sympoly, traffic

params = fg.FractalParams(n=40, gamma=2.5, epsilon=2.5, seed=11)
_, graph = fg.generate(params)
layout = sg.place_nodes(40, 11)
grid = sg.grid_config(40)
est = traffic.estimate_mean_hops(graph, layout, grid,
                                 traffic.TrafficModel(rule="uniform"), 2000, 11)
table = sympoly.esp_all([0.5, 1.5, 2.5, 3.5], 4)
print(json.dumps({
    "numba": _accel.NUMBA_ENABLED,
    "mean": est.mean,
    "stderr": est.stderr,
    "logs": table.logs.tolist(),
    "edges": int(graph.edge_count),
}))
"""


def _run(disable):
    env = dict(os.environ)
    if disable:
        env["FRACD2D_DISABLE_NUMBA"] = "1"
    else:
        env.pop("FRACD2D_DISABLE_NUMBA", None)
    res = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True,
                         text=True, env=env)
    assert res.returncode == 0, res.stderr
    return json.loads(res.stdout.strip().splitlines()[-1])


def test_fallback_bit_identical():
    fast = _run(disable=False)
    slow = _run(disable=True)
    assert fast["numba"] is True
    assert slow["numba"] is False
    assert slow["mean"] == fast["mean"]
    assert slow["stderr"] == fast["stderr"]
    assert slow["logs"] == fast["logs"]
    assert slow["edges"] == fast["edges"]

"""Configuration-driven sweep runner emitting deterministic CSV/NDJSON.

Config files are flat ``key=value`` text; repeating a key builds a list.
Unknown keys are rejected.  Example::

    n=1024
    n=2048
    gamma=2.5
    epsilon=2.4
    rule=uniform
    rule=powerlaw
    beta=1
    beta=2.5
    level_policy=direct
    trials=20000
    seed=1

Each sweep point derives every RNG stream from its own (point, seed) pair,
so records are reproducible under any thread count; records are written in
configuration order regardless of completion order.  The timing column is
last and excluded from determinism comparisons.
"""

import json
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import capacity, fractal_graph, spatial_grid, traffic
from .errors import ParameterError, SchemaError

SCHEMA_LINE = "# schema=1"
UNIFORM_BETA_SENTINEL = -1.0

COLUMNS = [
    "experiment_id", "n", "gamma", "epsilon", "rule", "beta", "level_policy",
    "l_max", "trials", "seed", "r_n", "cell_side", "mean_hops", "stderr",
    "skip_fraction", "capacity_estimate", "theory_hop_exponent",
    "theory_capacity",
    "k_bar_emp_1", "k_bar_emp_2", "k_bar_emp_3", "k_bar_emp_4",
    "k_bar_th_1", "k_bar_th_2", "k_bar_th_3", "k_bar_th_4",
    "wall_time_ms",
]

_LIST_KEYS = {"n", "epsilon", "rule", "beta", "level_policy", "seed"}
_SCALAR_KEYS = {"gamma", "trials", "c_r", "c1", "delta", "out"}


@dataclass
class ExperimentConfig:
    n_values: list
    gamma: float
    epsilons: list
    rules: list                  # subset of {"uniform", "powerlaw"}
    betas: list                  # used by the powerlaw rule
    level_policies: list         # subset of {"direct", "hierarchical"}
    trials: int
    seeds: list
    c_r: float = 1.0
    c1: float = 1.0
    delta: float = 1.0
    out: str = "sweep.csv"

    def validate(self):
        if not self.n_values or any(n < 8 for n in self.n_values):
            raise ParameterError("need n values >= 8")
        if not self.seeds:
            raise ParameterError("need at least one seed")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        for r in self.rules:
            if r not in ("uniform", "powerlaw"):
                raise ParameterError(f"unknown rule {r!r}")
        for p in self.level_policies:
            if p not in ("direct", "hierarchical"):
                raise ParameterError(f"unknown level policy {p!r}")
        if "powerlaw" in self.rules and not self.betas:
            raise ParameterError("powerlaw rule needs at least one beta")

    def points(self):
        """Deterministic enumeration of all sweep points."""
        for n in self.n_values:
            for eps in self.epsilons:
                for rule in self.rules:
                    beta_list = [None] if rule == "uniform" else self.betas
                    for beta in beta_list:
                        for policy in self.level_policies:
                            for seed in self.seeds:
                                yield SweepPoint(n=n, gamma=self.gamma,
                                                 epsilon=eps, rule=rule,
                                                 beta=beta, level_policy=policy,
                                                 trials=self.trials, seed=seed,
                                                 c_r=self.c_r, c1=self.c1,
                                                 delta=self.delta)


@dataclass(frozen=True)
class SweepPoint:
    n: int
    gamma: float
    epsilon: float
    rule: str
    beta: object
    level_policy: str
    trials: int
    seed: int
    c_r: float
    c1: float
    delta: float

    @property
    def experiment_id(self):
        b = "na" if self.beta is None else f"{self.beta:g}"
        return (f"{self.rule}-b{b}-{self.level_policy}-n{self.n}"
                f"-g{self.gamma:g}-e{self.epsilon:g}-s{self.seed}")


def default_config():
    """The default sweep grid covering every predicted regime boundary."""
    return ExperimentConfig(
        n_values=[2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13, 2 ** 14],
        gamma=2.5,
        epsilons=[2.4, 2.7, 3.0],
        rules=["uniform", "powerlaw"],
        betas=[0.0, 1.0, 2.0, 2.5, 3.0, 4.0],
        level_policies=["direct", "hierarchical"],
        trials=20000,
        seeds=[1],
    )


def parse_config(text):
    """Parse flat key=value text (repeated keys accumulate into lists)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _LIST_KEYS | _SCALAR_KEYS:
            raise SchemaError(f"line {lineno}: unknown key {key!r}")
        if key in _LIST_KEYS:
            values.setdefault(key, []).append(val)
        else:
            if key in values:
                raise SchemaError(f"line {lineno}: duplicate scalar key {key!r}")
            values[key] = val
    base = default_config()
    cfg = ExperimentConfig(
        n_values=[int(v) for v in values.get("n", [])] or base.n_values,
        gamma=float(values.get("gamma", base.gamma)),
        epsilons=[float(v) for v in values.get("epsilon", [])] or base.epsilons,
        rules=values.get("rule", base.rules),
        betas=[float(v) for v in values.get("beta", [])] or base.betas,
        level_policies=values.get("level_policy", base.level_policies),
        trials=int(values.get("trials", base.trials)),
        seeds=[int(v) for v in values.get("seed", [])] or base.seeds,
        c_r=float(values.get("c_r", base.c_r)),
        c1=float(values.get("c1", base.c1)),
        delta=float(values.get("delta", base.delta)),
        out=values.get("out", base.out),
    )
    cfg.validate()
    return cfg


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


class _InstanceCache:
    """Graph/layout/grid shared across sweep points of one (n, eps, seed)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._data = {}

    def get(self, point):
        key = (point.n, point.gamma, point.epsilon, point.seed,
               point.c_r, point.c1, point.delta)
        with self._lock:
            if key in self._data:
                return self._data[key]
        params = fractal_graph.FractalParams(n=point.n, gamma=point.gamma,
                                             epsilon=point.epsilon, seed=point.seed)
        _, graph = fractal_graph.generate(params)
        layout = spatial_grid.place_nodes(point.n, point.seed)
        grid = spatial_grid.grid_config(point.n, point.c_r, point.c1, point.delta)
        k_bar_emp = fractal_graph.mean_level_degrees(graph, 4)
        bundle = (graph, layout, grid, k_bar_emp)
        with self._lock:
            self._data[key] = bundle
        return bundle


def run_point(point, cache=None):
    """Simulate one sweep point and return its record dict."""
    t0 = time.perf_counter()
    cache = cache or _InstanceCache()
    graph, layout, grid, k_bar_emp = cache.get(point)
    beta = point.beta
    model = traffic.TrafficModel(rule=point.rule,
                                 beta=0.0 if beta is None else float(beta),
                                 level_policy="direct")
    if point.level_policy == "direct":
        est = traffic.estimate_mean_hops(graph, layout, grid, model,
                                         point.trials, point.seed)
        l_max = 1
    else:
        est = traffic.estimate_hierarchical_hops(graph, layout, grid, model,
                                                 point.gamma, point.epsilon,
                                                 point.seed, point.trials)
        l_max = capacity.theoretical_hierarchy(point.gamma, point.epsilon,
                                               point.n).l_max
    direct_pred = capacity.theoretical_direct(point.n,
                                              None if beta is None else float(beta))
    theory_cap = float(direct_pred.capacity_order.evaluate(point.n))
    if point.level_policy == "hierarchical":
        pred = capacity.theoretical_hierarchy(point.gamma, point.epsilon, point.n)
        theory_cap = capacity.hierarchical_capacity(theory_cap, pred, point.n)
    k_bar_th = capacity.level_degree_curve(point.gamma, point.epsilon, 4)
    record = {
        "experiment_id": point.experiment_id,
        "n": point.n,
        "gamma": point.gamma,
        "epsilon": point.epsilon,
        "rule": point.rule,
        "beta": UNIFORM_BETA_SENTINEL if beta is None else float(beta),
        "level_policy": point.level_policy,
        "l_max": l_max,
        "trials": est.trials,
        "seed": point.seed,
        "r_n": grid.r_n,
        "cell_side": grid.cell_side,
        "mean_hops": est.mean,
        "stderr": est.stderr,
        "skip_fraction": est.skip_fraction,
        "capacity_estimate": capacity.capacity_from_hops(est.mean, point.n),
        "theory_hop_exponent": direct_pred.hop_exponent,
        "theory_capacity": theory_cap,
        "k_bar_emp_1": float(k_bar_emp[0]),
        "k_bar_emp_2": float(k_bar_emp[1]),
        "k_bar_emp_3": float(k_bar_emp[2]),
        "k_bar_emp_4": float(k_bar_emp[3]),
        "k_bar_th_1": float(k_bar_th[0]),
        "k_bar_th_2": float(k_bar_th[1]),
        "k_bar_th_3": float(k_bar_th[2]),
        "k_bar_th_4": float(k_bar_th[3]),
        "wall_time_ms": int((time.perf_counter() - t0) * 1000),
    }
    _check_record(record)
    return record


def _check_record(record):
    for key in COLUMNS:
        if key not in record:
            raise SchemaError(f"record missing column {key}")
        val = record[key]
        if isinstance(val, float) and not math.isfinite(val):
            raise SchemaError(f"non-finite value in column {key}")


def _format_value(val):
    if isinstance(val, float):
        return format(val, ".10g")
    return str(val)


def format_record_csv(record):
    return ",".join(_format_value(record[c]) for c in COLUMNS)


def write_header(fh, json_mode):
    if not json_mode:
        fh.write(SCHEMA_LINE + "\n")
        fh.write(",".join(COLUMNS) + "\n")


def write_record(fh, record, json_mode):
    if json_mode:
        fh.write(json.dumps({"schema": 1, **record}) + "\n")
    else:
        fh.write(format_record_csv(record) + "\n")


def run_sweep(config, out_path=None, threads=1, json_mode=False, echo=None):
    """Run every sweep point, streaming records to `out_path` in order."""
    config.validate()
    points = list(config.points())
    path = out_path or config.out
    cache = _InstanceCache()
    records = []
    # fail on unwritable output before any simulation starts
    with open(path, "w", encoding="utf-8") as fh:
        write_header(fh, json_mode)
        if threads <= 1:
            results = (run_point(p, cache) for p in points)
        else:
            pool = ThreadPoolExecutor(max_workers=threads)
            results = pool.map(lambda p: run_point(p, cache), points)
        for point, record in zip(points, results):
            write_record(fh, record, json_mode)
            fh.flush()
            records.append(record)
            if echo:
                echo(f"{point.experiment_id}: mean_hops="
                     f"{record['mean_hops']:.4g} +- {record['stderr']:.2g}")
        if threads > 1:
            pool.shutdown()
    return records


def read_csv(path):
    """Parse a sweep CSV back into record dicts (schema checked)."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise SchemaError(f"line 1: expected {SCHEMA_LINE!r}, got {first!r}")
        header = fh.readline().rstrip("\n").split(",")
        if header != COLUMNS:
            raise SchemaError("line 2: column header mismatch")
        records = []
        for lineno, line in enumerate(fh, 3):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(COLUMNS):
                raise SchemaError(f"line {lineno}: expected {len(COLUMNS)} fields")
            rec = {}
            for col, raw in zip(COLUMNS, parts):
                if col in ("experiment_id", "rule", "level_policy"):
                    rec[col] = raw
                elif col in ("n", "l_max", "trials", "seed", "wall_time_ms"):
                    rec[col] = int(raw)
                else:
                    rec[col] = float(raw)
            records.append(rec)
    return records

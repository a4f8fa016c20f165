"""Acceptance suite: one check per criterion, shared by CLI and pytest.

Each check returns a CheckResult and is self-contained (generates its own
instances, pins its own seeds and tolerances).  `run_checks` prints one
pass/fail line per criterion.
"""

import itertools
import math
import os
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import capacity, experiments, fractal_graph, fractality, spatial_grid, sympoly, traffic
from .errors import ParameterError


@dataclass
class CheckResult:
    check_id: str
    title: str
    passed: bool
    detail: str
    seconds: float


def _instance(n, gamma, epsilon, seed, c_r=1.0, c1=1.0, delta=1.0):
    params = fractal_graph.FractalParams(n=n, gamma=gamma, epsilon=epsilon, seed=seed)
    _, graph = fractal_graph.generate(params)
    layout = spatial_grid.place_nodes(n, seed)
    grid = spatial_grid.grid_config(n, c_r, c1, delta)
    return graph, layout, grid


def check_a1_exact_vs_monte_carlo():
    """Exact evaluator agrees with the Monte-Carlo estimator within 3 SE."""
    seeds = range(1, 41)
    hits_u = 0
    hits_b = 0
    for seed in seeds:
        graph, layout, grid = _instance(50, 2.5, 2.5, seed)
        a_u = sympoly.analytic_hops_uniform(graph, layout, grid)
        est_u = traffic.estimate_mean_hops(
            graph, layout, grid, traffic.TrafficModel(rule="uniform"), 100000, seed)
        if abs(est_u.mean - a_u) <= 3 * est_u.stderr:
            hits_u += 1
        a_b = sympoly.analytic_hops_powerlaw(graph, layout, grid, 2.5)
        est_b = traffic.estimate_mean_hops(
            graph, layout, grid, traffic.TrafficModel(rule="powerlaw", beta=2.5),
            100000, seed)
        if abs(est_b.mean - a_b) <= 3 * est_b.stderr:
            hits_b += 1
    passed = hits_u >= 38 and hits_b >= 38
    return passed, (f"uniform {hits_u}/40 within 3 SE, powerlaw(beta=2.5) "
                    f"{hits_b}/40 within 3 SE (need >= 38)")


def check_a2_symmetric_polynomial_brute_force():
    """Log-space sigma tables match exact rational subset enumeration."""
    rng = np.random.default_rng(20240817)
    worst_sigma = 0.0
    worst_excl = 0.0
    worst_norm = 0.0
    for _case in range(100):
        n = int(rng.integers(2, 13))
        vals = rng.random(n) * (10.0 ** rng.integers(-6, 6, n))
        fr = [Fraction(float(v)) for v in vals]
        table = sympoly.esp_all(vals, n)
        for p in range(n + 1):
            exact = sum((math.prod(c) for c in itertools.combinations(fr, p)),
                        Fraction(0))
            if exact > 0:
                rel = abs(math.exp(table.logs[p] - math.log(float(exact))) - 1)
                worst_sigma = max(worst_sigma, rel)
        for q in range(1, n):
            pis = sympoly.contact_inclusion_probs(vals, q)
            worst_norm = max(worst_norm, abs(float(pis.sum()) - q))
            k = int(rng.integers(n))
            sub = [f for i, f in enumerate(fr) if i != k]
            exact = sum((math.prod(c) for c in itertools.combinations(sub, q)),
                        Fraction(0))
            if exact > 0:
                rel = abs(math.exp(sympoly.esp_excluding(vals, k, q)
                                   - math.log(float(exact))) - 1)
                worst_excl = max(worst_excl, rel)
    passed = worst_sigma < 1e-9 and worst_excl < 1e-9 and worst_norm < 1e-8
    return passed, (f"max rel err: sigma {worst_sigma:.2e}, exclusion "
                    f"{worst_excl:.2e} (tol 1e-9); normalization {worst_norm:.2e} "
                    f"(tol 1e-8); 100 cases N<=12")


_SWEEP_NS = [2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13, 2 ** 14]
_sweep_cache = {}


def _sweep_instance(n, epsilon=2.5):
    key = (n, epsilon)
    if key not in _sweep_cache:
        _sweep_cache[key] = _instance(n, 2.5, epsilon, 1)
    return _sweep_cache[key]


def _slope_for_rule(model, trials=10000):
    hops = []
    for n in _SWEEP_NS:
        graph, layout, grid = _sweep_instance(n)
        est = traffic.estimate_mean_hops(graph, layout, grid, model, trials, 1)
        hops.append(est.mean)
    slope, _, _ = capacity.fit_loglog(_SWEEP_NS, hops)
    return slope, hops


def check_a3_uniform_slope():
    """Mean hops grow like sqrt(n) (slope 0.5 +- 0.1) under the uniform rule."""
    slope, hops = _slope_for_rule(traffic.TrafficModel(rule="uniform"))
    passed = abs(slope - 0.5) <= 0.1
    return passed, f"slope {slope:.3f} (need 0.50 +- 0.10); hops {np.round(hops, 2)}"


def check_a4_powerlaw_regimes():
    """Distance-biased destinations follow the three predicted slope regimes."""
    expect = {1.0: 0.5, 2.5: 0.25, 4.0: 0.0}
    details = []
    ok = True
    for beta, target in expect.items():
        slope, _ = _slope_for_rule(traffic.TrafficModel(rule="powerlaw", beta=beta))
        good = abs(slope - target) <= 0.1
        ok = ok and good
        details.append(f"beta={beta:g}: slope {slope:.3f} (need {target:.2f} +- 0.10)"
                       + ("" if good else " FAIL"))
    return ok, "; ".join(details)


def check_a5_level_degree_curve():
    """Measured mean level-L degrees vs the branching prediction (25%)."""
    details = []
    ok = True
    gamma = 2.5
    for epsilon in (2.4, 3.0):
        params = fractal_graph.FractalParams(n=5000, gamma=gamma, epsilon=epsilon, seed=1)
        _, graph = fractal_graph.generate(params)
        measured = fractal_graph.mean_level_degrees(graph, 3)
        theory = capacity.level_degree_curve(gamma, epsilon, 3)
        rel = np.abs(measured / theory - 1.0)
        good = bool(np.all(rel <= 0.25))
        if epsilon == 3.0:
            flat = measured.max() / max(measured.min(), 1e-12)
            good = good and flat < 1.5
            details.append(f"eps=3.0 flatness max/min {flat:.2f} (need < 1.5)")
        ok = ok and good
        details.append(f"eps={epsilon}: measured {np.round(measured, 2)} vs theory "
                       f"{np.round(theory, 2)} (rel dev {np.round(rel, 2)}, tol 0.25)")
    return ok, "; ".join(details)


def check_a6_hierarchy_regimes():
    """All-levels/direct hop inflation: log n growth below the boundary, n at it."""
    ns = [2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13]
    details = []
    ok = True
    for epsilon, axis in ((2.5, "ln_n"), (3.0, "n")):
        ratios = []
        for n in ns:
            graph, layout, grid = _instance(n, 2.5, epsilon, 1)
            est = traffic.estimate_hierarchical_hops(
                graph, layout, grid, traffic.TrafficModel(rule="uniform"),
                2.5, epsilon, 1, 20000)
            ratios.append(est.mean / est.per_level_means[0])
        xs = np.log(ns) if axis == "ln_n" else np.array(ns, dtype=np.float64)
        _, _, r2 = capacity.fit_linear(xs, ratios)
        good = r2 > 0.9
        ok = ok and good
        details.append(f"eps={epsilon}: ratios {np.round(ratios, 2)} linear in "
                       f"{axis} R2={r2:.3f} (need > 0.9)")
    return ok, "; ".join(details)


def check_a7_grid_geometry():
    """4x ring sizes hold exhaustively; TDMA slots partition with spacing T."""
    grid = spatial_grid.grid_config(10 ** 4)  # 33x33 cells
    m = grid.cells_per_side
    if m != 33:
        return False, f"expected 33 cells per side, got {m}"
    half = m // 2 - 1
    bad = 0
    for cx in range(m):
        for cy in range(m):
            interior_max = min(cx, cy, m - 1 - cx, m - 1 - cy)
            for x in range(1, min(half, interior_max) + 1):
                if len(spatial_grid.ring_cells(grid, (cx, cy), x)) != 4 * x:
                    bad += 1
    slots = spatial_grid.concurrent_cells(grid)
    t = grid.t_spacing
    all_cells = [c for slot in slots for c in slot]
    partition_ok = (len(all_cells) == m * m
                    and len(set(all_cells)) == m * m)
    spacing_ok = True
    for slot in slots:
        for (a, b), (c, d) in itertools.combinations(slot, 2):
            if a != c and abs(a - c) < t:
                spacing_ok = False
            if b != d and abs(b - d) < t:
                spacing_ok = False
            if a == c and b == d:
                spacing_ok = False
    passed = bad == 0 and partition_ok and spacing_ok
    return passed, (f"ring mismatches {bad}; partition {partition_ok}; "
                    f"slot spacing >= T={t}: {spacing_ok}")


def check_a8_ratio_bounds():
    """Equal-weight ratio closed form is exact; random weights stay banded."""
    exact_ok = True
    for n, q in ((5, 2), (10, 3), (64, 5)):
        got = sympoly.lemma1_ratio([1.0] * n, q)
        if abs(got - n / (n - q)) > 1e-9 * n:
            exact_ok = False
    rng = np.random.default_rng(99)
    q = 5
    band_ok = True
    worst_lo, worst_hi = math.inf, 0.0
    for n in (100, 1000):
        for _ in range(100):
            vals = rng.random(n) + 1e-9
            ratio = sympoly.lemma1_ratio(vals, q) / (n / (n - q))
            worst_lo = min(worst_lo, ratio)
            worst_hi = max(worst_hi, ratio)
            if not (0.2 <= ratio <= 5.0):
                band_ok = False
    passed = exact_ok and band_ok
    return passed, (f"equal-weight closed form exact: {exact_ok}; normalized "
                    f"ratio range [{worst_lo:.3f}, {worst_hi:.3f}] in [0.2, 5] "
                    f"as N grows 10x: {band_ok}")


def _min_cover_size(graph, l_b):
    """Exhaustive minimal covering via pruned partition search (N <= 10)."""
    n = graph.n
    dist = np.full((n, n), 10 ** 9, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for v in graph.adjacency(u):
                    if dist[s, v] > d:
                        dist[s, v] = d
                        nxt.append(int(v))
            frontier = nxt
    best = [n]
    assign = np.full(n, -1, dtype=np.int64)

    def rec(i, nboxes):
        if nboxes >= best[0]:
            return
        if i == n:
            best[0] = nboxes
            return
        for b in range(nboxes):
            if all(dist[i, j] <= l_b for j in range(i) if assign[j] == b):
                assign[i] = b
                rec(i + 1, nboxes)
        assign[i] = nboxes
        rec(i + 1, nboxes + 1)
        assign[i] = -1

    rec(0, 0)
    return best[0]


def check_a9_box_covering():
    """Path dimension ~1, greedy within 2x of minimal, coverings valid."""
    n = 2048
    path = fractal_graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    rep = fractality.estimate_exponents(path, [4, 8, 16, 32])
    path_ok = abs(rep.d_b - 1.0) <= 0.15
    rng = np.random.default_rng(7)
    worst = 1.0
    for _case in range(40):
        nn = int(rng.integers(4, 11))
        p = rng.uniform(0.15, 0.6)
        edges = [(i, j) for i in range(nn) for j in range(i + 1, nn)
                 if rng.random() < p]
        g = fractal_graph.from_edges(nn, edges)
        for l_b in (1, 2, 3):
            cov = fractality.box_cover(g, l_b)
            if not fractality.covering_is_valid(g, cov):
                return False, f"invalid covering on case {_case} l_b={l_b}"
            exact = _min_cover_size(g, l_b)
            worst = max(worst, cov.n_boxes / exact)
    ratio_ok = worst <= 2.0
    params = fractal_graph.FractalParams(n=2000, gamma=2.5, epsilon=2.5, seed=5)
    _, gen = fractal_graph.generate(params)
    gen_ok = all(fractality.covering_is_valid(gen, fractality.box_cover(gen, l_b))
                 for l_b in (2, 3, 4))
    passed = path_ok and ratio_ok and gen_ok
    return passed, (f"path d_B {rep.d_b:.3f} (need 1 +- 0.15); greedy/minimal "
                    f"worst {worst:.2f} (need <= 2); generated coverings valid: {gen_ok}")


def _reduced_default_config():
    cfg = experiments.default_config()
    cfg.n_values = [128, 256]
    cfg.trials = 400
    return cfg


def check_a10_determinism():
    """Byte-identical CSV across reruns and thread counts (timing excluded)."""

    def strip_timing(path):
        with open(path, "r", encoding="utf-8") as fh:
            return [line.rsplit(",", 1)[0] for line in fh.read().splitlines()]

    with tempfile.TemporaryDirectory() as tmp:
        paths = [os.path.join(tmp, f"run{i}.csv") for i in range(3)]
        cfg = _reduced_default_config()
        experiments.run_sweep(cfg, out_path=paths[0], threads=1)
        experiments.run_sweep(cfg, out_path=paths[1], threads=1)
        records = experiments.run_sweep(cfg, out_path=paths[2], threads=4)
        rerun_same = strip_timing(paths[0]) == strip_timing(paths[1])
        threads_same = strip_timing(paths[0]) == strip_timing(paths[2])
        cap_ok = all(
            abs(r["capacity_estimate"] - 1.0 / (math.log(r["n"]) * r["mean_hops"]))
            <= 1e-12 * abs(r["capacity_estimate"])
            for r in records if r["mean_hops"] > 0)
    passed = rerun_same and threads_same and cap_ok
    return passed, (f"rerun identical: {rerun_same}; threads 1 vs 4 identical: "
                    f"{threads_same}; capacity column consistent: {cap_ok}")


# (id, title, callable, wall-clock budget in seconds; None = unbounded)
CHECKS = [
    ("A1", "exact vs Monte-Carlo oracle agreement", check_a1_exact_vs_monte_carlo, 120),
    ("A2", "symmetric polynomials vs brute force", check_a2_symmetric_polynomial_brute_force, None),
    ("A3", "uniform-rule hop-count slope", check_a3_uniform_slope, 300),
    ("A4", "distance-rule slope regimes", check_a4_powerlaw_regimes, None),
    ("A5", "level-degree branching curve", check_a5_level_degree_curve, None),
    ("A6", "hierarchical inflation regimes", check_a6_hierarchy_regimes, 600),
    ("A7", "grid rings and TDMA schedule", check_a7_grid_geometry, None),
    ("A8", "weighted-ratio order bounds", check_a8_ratio_bounds, None),
    ("A9", "box-covering quality and validity", check_a9_box_covering, None),
    ("A10", "sweep determinism", check_a10_determinism, None),
]


def run_checks(only=None, echo=print):
    """Run the acceptance checks; returns (results, all_passed).

    `only` is an iterable of check ids; an empty selection is an error.
    """
    if only is not None:
        wanted = [w.strip().upper() for w in only if w.strip()]
        selected = [c for c in CHECKS if c[0] in wanted]
        unknown = set(wanted) - {c[0] for c in CHECKS}
        if unknown:
            raise ParameterError(f"unknown check ids: {sorted(unknown)}")
        if not selected:
            raise ParameterError("no tests selected")
    else:
        selected = CHECKS
    results = []
    for cid, title, fn, budget in selected:
        t0 = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        if budget is not None and dt > budget:
            passed = False
            detail += f"; exceeded the {budget}s runtime budget"
        results.append(CheckResult(cid, title, passed, detail, dt))
        if echo:
            status = "PASS" if passed else "FAIL"
            echo(f"[{status}] {cid} {title} ({dt:.1f}s): {detail}")
    return results, all(r.passed for r in results)

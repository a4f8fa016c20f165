"""Destination selection rules and Monte-Carlo hop-count estimation.

Direct transmissions are simulated against the frozen instance (target
degrees + positions): each trial picks a uniform source, draws a fresh
contact set from the product-weight law over the source's admissible pool
(all users of smaller-or-equal target degree), picks the destination per
the configured rule, and records the grid hop count.  Trials whose source
has an empty admissible pool count as zero hops, mirroring the exact
evaluator in `sympoly`, so the two paths estimate the same quantity.

Hierarchical transmissions draw a social level L from the theoretical level
shares, select a destination among the source's BFS level-L contacts on the
wired graph, and charge the sum of per-edge grid hops along the (lowest-id)
BFS tree path.  Trials hitting an empty level set are skipped and reported
via the skip fraction.

Per-trial RNG streams derive from (seed, trial index): estimates are
identical under any partitioning of the trial range across workers.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import capacity
from ._instance import prepare_instance
from ._kernels import (CODE_EMPTY_POOL, CODE_SKIP, max_observed_level,
                       mc_direct_trials, mc_hier_trials)
from .errors import ParameterError

_UNSET = -1


@dataclass(frozen=True)
class TrafficModel:
    """Destination rule (uniform | powerlaw) and level policy."""

    rule: str = "uniform"
    beta: float = 0.0
    level_policy: str = "direct"
    l_max: int = 1

    def __post_init__(self):
        if self.rule not in ("uniform", "powerlaw"):
            raise ParameterError("rule must be 'uniform' or 'powerlaw'")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise ParameterError("beta must be finite and >= 0")
        if self.level_policy not in ("direct", "hierarchical"):
            raise ParameterError("level_policy must be 'direct' or 'hierarchical'")
        if self.level_policy == "hierarchical" and self.l_max < 1:
            raise ParameterError("l_max must be >= 1 for hierarchical traffic")

    @property
    def uses_beta(self):
        return self.rule == "powerlaw" and self.beta > 0


@dataclass
class HopEstimate:
    mean: float
    stderr: float
    trials: int                       # trials entering the mean
    requested_trials: int
    skip_fraction: float = 0.0        # empty level sets (hierarchical)
    empty_pool_fraction: float = 0.0  # sources with no admissible candidate
    per_level_means: Optional[np.ndarray] = None
    per_level_stderr: Optional[np.ndarray] = None
    per_level_counts: Optional[np.ndarray] = None
    per_level_ratio: Optional[np.ndarray] = None
    level_weights: Optional[np.ndarray] = None
    extrapolated_weight: float = 0.0


def pick_destination_uniform(contacts, rng):
    """Uniform draw from a contact set; None when the set is empty."""
    contacts = np.asarray(contacts, dtype=np.int64)
    if contacts.size == 0:
        return None
    return int(contacts[rng.integers(contacts.size)])


def destination_probabilities(source, contacts, layout, beta, d_min=0.0):
    """Selection law d_k^-beta / sum_j d_j^-beta over a concrete contact set."""
    contacts = np.asarray(contacts, dtype=np.int64)
    src = layout.positions[source]
    d = np.linalg.norm(layout.positions[contacts] - src, axis=1)
    d = np.maximum(d, d_min)
    if np.any(d == 0):
        raise ParameterError("zero distance needs a positive d_min clamp")
    w = d ** (-float(beta))
    return w / w.sum()


def pick_destination_powerlaw(source, contacts, layout, beta, rng, d_min=0.0):
    """Distance-biased draw (probability prop. to d^-beta); None when empty."""
    contacts = np.asarray(contacts, dtype=np.int64)
    if contacts.size == 0:
        return None
    p = destination_probabilities(source, contacts, layout, beta, d_min)
    return int(contacts[rng.choice(contacts.size, p=p)])


def _run_chunked(total, threads, runner):
    if total <= 0:
        return
    if threads <= 1:
        runner(0, total)
        return
    runner(0, 0)  # trigger any JIT compilation before forking threads
    bounds = np.linspace(0, total, threads + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futs = [pool.submit(runner, int(bounds[i]), int(bounds[i + 1]))
                for i in range(threads)]
        for f in futs:
            f.result()


def _direct_arrays(prep, model, trials, seed, threads, degree_range):
    out_x = np.zeros(trials)
    out_code = np.zeros(trials, dtype=np.int64)
    lo, hi = (1, 1 << 60) if degree_range is None else degree_range

    def runner(t0, t1):
        mc_direct_trials(np.uint64(seed), t0, t1, prep.deg_s, prep.w_s,
                         prep.logw_s, prep.cellx_s, prep.celly_s,
                         prep.posx_s, prep.posy_s, prep.uniq_vals,
                         prep.prefix_end, prep.c_by_deg, prep.snap_off,
                         prep.snap_flat, float(model.beta), model.uses_beta,
                         prep.d_min, lo, hi, out_x[t0:t1], out_code[t0:t1])

    _run_chunked(trials, threads, runner)
    return out_x, out_code


def _summarize(out_x, out_code, requested):
    valid = out_code != CODE_SKIP
    xs = out_x[valid]
    cnt = int(xs.size)
    mean = float(np.sum(xs) / cnt) if cnt else math.nan
    std = float(np.std(xs, ddof=1)) if cnt > 1 else 0.0
    return HopEstimate(
        mean=mean,
        stderr=std / math.sqrt(cnt) if cnt else math.nan,
        trials=cnt,
        requested_trials=requested,
        skip_fraction=float(np.sum(~valid)) / requested,
        empty_pool_fraction=float(np.sum(out_code == CODE_EMPTY_POOL)) / requested,
    )


def estimate_mean_hops(graph, layout, grid, model, trials, seed, threads=1,
                       source_degree_range=None):
    """Monte-Carlo mean grid hops per transmission under a traffic model.

    source_degree_range=(lo, hi) restricts trials to sources whose target
    degree lies in [lo, hi] (conditional estimation).
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    prep = prepare_instance(graph.degrees_target, layout, grid, graph.epsilon)
    if model.level_policy == "direct" or model.l_max == 1:
        # a one-level hierarchy is exactly direct traffic (same seed stream)
        out_x, out_code = _direct_arrays(prep, model, trials, seed, threads,
                                         source_degree_range)
        return _summarize(out_x, out_code, trials)
    if source_degree_range is not None:
        raise ParameterError("conditional estimation is direct-only")
    if not math.isfinite(graph.gamma):
        raise ParameterError("hierarchical traffic needs the graph's gamma")
    pred = capacity.theoretical_hierarchy(graph.gamma, graph.epsilon, graph.n)
    l_eff = min(model.l_max, pred.l_max)
    weights = pred.r_weights[:l_eff]
    weights = weights / weights.sum()
    cdf = np.cumsum(weights)
    cdf[-1] = 1.0
    out_x, out_code, out_level = _hier_run(graph, layout, grid, prep, model,
                                           cdf, 0, trials, seed, threads)
    est = _summarize(out_x, out_code, trials)
    est.level_weights = weights
    lvls = np.arange(1, l_eff + 1)
    means = np.full(l_eff, math.nan)
    counts = np.zeros(l_eff, dtype=np.int64)
    for li, l in enumerate(lvls):
        sel = (out_level == l) & (out_code != CODE_SKIP)
        counts[li] = int(sel.sum())
        if counts[li]:
            means[li] = float(out_x[sel].mean())
    est.per_level_means = means
    est.per_level_counts = counts
    return est


def _hier_run(graph, layout, grid, prep, model, cdf, fixed_level, trials, seed,
              threads, salt=0):
    n = graph.n
    out_x = np.zeros(trials)
    out_code = np.zeros(trials, dtype=np.int64)
    out_level = np.zeros(trials, dtype=np.int64)
    posx_id = layout.positions[:, 0].copy()
    posy_id = layout.positions[:, 1].copy()
    cellx_id = np.empty(n, dtype=np.int64)
    celly_id = np.empty(n, dtype=np.int64)
    cellx_id[prep.order] = prep.cellx_s
    celly_id[prep.order] = prep.celly_s

    def runner(t0, t1):
        dist = np.zeros(n, dtype=np.int64)
        parent = np.full(n, -1, dtype=np.int64)
        order = np.zeros(n, dtype=np.int64)
        epoch = np.zeros(n, dtype=np.int64)
        members = np.zeros(n, dtype=np.int64)
        gcum = np.zeros(n)
        mc_hier_trials(np.uint64(seed), salt, t0, t1, cdf, fixed_level,
                       graph.indptr, graph.indices,
                       prep.deg_s, prep.w_s, prep.logw_s,
                       prep.cellx_s, prep.celly_s, prep.posx_s, prep.posy_s,
                       prep.uniq_vals, prep.prefix_end, prep.c_by_deg,
                       prep.snap_off, prep.snap_flat, prep.sorted_of_id,
                       cellx_id, celly_id, posx_id, posy_id,
                       float(model.beta), model.uses_beta, prep.d_min,
                       dist, parent, order, epoch, members, gcum,
                       out_x[t0:t1], out_code[t0:t1], out_level[t0:t1])

    _run_chunked(trials, threads, runner)
    return out_x, out_code, out_level


def observed_max_level(graph, sample=64):
    """Largest BFS eccentricity over an evenly spaced sample of sources."""
    ids = np.unique(np.linspace(0, graph.n - 1, min(sample, graph.n)).astype(np.int64))
    n = graph.n
    dist = np.zeros(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    order = np.zeros(n, dtype=np.int64)
    epoch = np.zeros(n, dtype=np.int64)
    return int(max_observed_level(graph.indptr, graph.indices, ids,
                                  dist, parent, order, epoch))


# Levels probed per estimate; deeper levels carry negligible extra
# information once the linear path-cost ratio has stabilized near 1.
_LEVEL_PROBE_CAP = 12


def estimate_hierarchical_hops(graph, layout, grid, base_model, gamma, epsilon,
                               seed, trials, threads=1):
    """Stratified per-level estimate of the all-levels mean hop count.

    The traffic mix over levels is defined by the theoretical level shares
    R^(L), L = 1..L_max.  For each level up to the largest observed social
    distance (capped) a dedicated trial batch measures the level-L mean hop
    cost directly; the measured ratios E_L / (L * E_1) validate the linear
    path-cost approximation, which then prices the deeper levels the mix
    requires but the finite graph cannot exhibit (their share is reported
    as extrapolated_weight).  The estimate is

        E_H = sum_L R^(L) * E_L,   E_L = measured, or L * E_1 beyond reach.
    """
    if not (2 < epsilon <= 3):
        raise ParameterError("epsilon must lie in (2, 3]")
    pred = capacity.theoretical_hierarchy(gamma, epsilon, graph.n)
    l_cap = max(1, min(pred.l_max, observed_max_level(graph), _LEVEL_PROBE_CAP))
    prep = prepare_instance(graph.degrees_target, layout, grid, epsilon)
    per_trials = max(256, trials // l_cap)
    dummy_cdf = np.ones(1)

    means = np.full(l_cap, math.nan)
    stderrs = np.full(l_cap, math.nan)
    counts = np.zeros(l_cap, dtype=np.int64)
    skipped = 0
    for l in range(1, l_cap + 1):
        out_x, out_code, _ = _hier_run(graph, layout, grid, prep, base_model,
                                       dummy_cdf, l, per_trials, seed, threads,
                                       salt=l)
        valid = out_code != CODE_SKIP
        skipped += int(np.sum(~valid))
        xs = out_x[valid]
        counts[l - 1] = xs.size
        if xs.size:
            means[l - 1] = float(xs.mean())
            if xs.size > 1:
                stderrs[l - 1] = float(np.std(xs, ddof=1) / math.sqrt(xs.size))

    measurable = counts > 0
    if not measurable[0] or not (means[0] > 0):
        raise ParameterError("level-1 traffic is unmeasurable on this instance")
    e1 = means[0]
    levels_all = np.arange(1, pred.l_max + 1, dtype=np.float64)
    e_all = levels_all * e1
    err_all = np.zeros(pred.l_max)
    for l in range(1, l_cap + 1):
        if measurable[l - 1]:
            e_all[l - 1] = means[l - 1]
            err_all[l - 1] = stderrs[l - 1]
    w = pred.r_weights
    mean_h = float(np.sum(w * e_all))
    stderr_h = float(np.sqrt(np.sum((w[:l_cap] * err_all[:l_cap]) ** 2)))
    extrapolated = float(w[l_cap:].sum() + w[:l_cap][~measurable].sum())
    ratio = np.full(l_cap, math.nan)
    for l in range(1, l_cap + 1):
        if measurable[l - 1]:
            ratio[l - 1] = means[l - 1] / (l * e1)
    total = per_trials * l_cap
    est = HopEstimate(mean=mean_h, stderr=stderr_h, trials=int(counts.sum()),
                      requested_trials=total,
                      skip_fraction=skipped / total,
                      per_level_means=means, per_level_stderr=stderrs,
                      per_level_counts=counts, per_level_ratio=ratio,
                      level_weights=w)
    est.extrapolated_weight = extrapolated
    return est

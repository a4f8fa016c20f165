"""Numerically stable elementary symmetric polynomials and exact mean hops.

sigma_{p,N}(Q) = sum over p-subsets of the product of weights.  All tables
are carried in log space (log-sum-exp additions), so weights like k^-eps
never underflow.  Deleting one variable uses the backward recurrence
sigma^(k-bar)_p = sigma_p - q_k * sigma^(k-bar)_{p-1}; when that subtraction
cancels catastrophically the implementation recomputes with a fresh forward
pass over the reduced weight vector.

The exact mean hop count of a direct transmission evaluates, per source,

    E[hops | src] = sum_k  hops(src, k) * P(k in C) * g_k / Z

over the admissible pool (all users with target degree <= the source's,
excluding the source itself), where P(k in C) = q_k^-eps *
sigma^(k-bar)_{q-1, N-1} / sigma_{q, N} is the inclusion probability of the
product-weight contact-set law, g_k = d_k^-beta (1 for the uniform rule),
and Z normalizes.  For the uniform rule Z = q exactly since inclusion
probabilities sum to the set size.  Sources whose pool is empty contribute
zero, and the estimate is the plain average over all sources, mirroring the
Monte-Carlo estimator in `traffic`.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._instance import prepare_instance
from ._kernels import (NEG_INF, analytic_hops_eval, esp_backward_delete,
                       esp_log_forward, esp_log_forward_excluding)
from .errors import DegenerateWeightsError, ParameterError


@dataclass(frozen=True)
class WeightVector:
    """Non-negative weights stored alongside their logarithms."""

    values: np.ndarray
    logs: np.ndarray

    @classmethod
    def from_values(cls, values):
        vals = np.asarray(values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise ParameterError("weights must be a non-empty 1-D array")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ParameterError("weights must be finite and >= 0")
        with np.errstate(divide="ignore"):
            logs = np.where(vals > 0, np.log(np.where(vals > 0, vals, 1.0)), NEG_INF)
        return cls(values=vals, logs=logs)

    @property
    def n(self):
        return self.values.size


@dataclass(frozen=True)
class EspTable:
    """logs[p] = log sigma_{p,N}; logs[0] = 0 always."""

    logs: np.ndarray
    n: int

    def sigma(self, p):
        return math.exp(self.logs[p])


def esp_all(q, p_max):
    """All log sigma_{p,N} for p = 0..p_max via the add-one-item recurrence."""
    if not isinstance(q, WeightVector):
        q = WeightVector.from_values(q)
    if p_max < 0 or p_max > q.n:
        raise ParameterError("p_max must lie in [0, N]")
    logs = esp_log_forward(q.logs, int(p_max))
    return EspTable(logs=logs, n=q.n)


def esp_excluding(q, k, p):
    """log sigma^(k-bar)_{p, N-1}: the table with weight k deleted."""
    if not isinstance(q, WeightVector):
        q = WeightVector.from_values(q)
    if not (0 <= k < q.n):
        raise ParameterError("k out of range")
    if p < 0 or p > q.n - 1:
        raise ParameterError("p must lie in [0, N-1]")
    base = esp_log_forward(q.logs, int(p))
    out = np.empty(p + 1)
    ok = esp_backward_delete(base, q.logs[k], int(p), out)
    if ok:
        return float(out[p])
    fresh = esp_log_forward_excluding(q.logs, int(k), -1, int(p))
    return float(fresh[p])


def lemma1_ratio(q, order):
    """sigma_1 * sigma_q / ((q+1) * sigma_{q+1}), the N/(N-q)-order ratio."""
    if not isinstance(q, WeightVector):
        q = WeightVector.from_values(q)
    if q.n < 2:
        raise ParameterError("need N >= 2")
    if not (1 <= order < q.n):
        raise ParameterError("need 1 <= q < N")
    logs = esp_log_forward(q.logs, int(order) + 1)
    if logs[order + 1] == NEG_INF:
        raise DegenerateWeightsError("sigma_{q+1} vanishes for these weights")
    return math.exp(logs[1] + logs[order] - math.log(order + 1.0) - logs[order + 1])


def contact_inclusion_probs(q, set_size):
    """P(k in C) for every k: q_k * sigma^(k-bar)_{q-1,N-1} / sigma_{q,N}.

    These sum to the set size exactly (testable normalization identity).
    """
    if not isinstance(q, WeightVector):
        q = WeightVector.from_values(q)
    if not (1 <= set_size <= q.n):
        raise ParameterError("set size must lie in [1, N]")
    base = esp_log_forward(q.logs, int(set_size))
    denom = base[set_size]
    if denom == NEG_INF:
        raise DegenerateWeightsError("sigma_q vanishes for these weights")
    out = np.empty(q.n)
    scratch = np.empty(set_size)
    for k in range(q.n):
        ok = esp_backward_delete(base, q.logs[k], set_size - 1, scratch)
        if ok:
            num = scratch[set_size - 1]
        else:
            num = esp_log_forward_excluding(q.logs, k, -1, set_size - 1)[set_size - 1]
        out[k] = math.exp(q.logs[k] + num - denom)
    return out


def _analytic_hops(graph, layout, grid, beta, use_beta):
    prep = prepare_instance(graph.degrees_target, layout, grid, graph.epsilon)
    contrib = np.zeros(prep.n)
    analytic_hops_eval(prep.deg_s, prep.logw_s, prep.cellx_s, prep.celly_s,
                       prep.posx_s, prep.posy_s, prep.uniq_vals, prep.prefix_end,
                       prep.snap_off, prep.snap_flat,
                       float(beta), use_beta, prep.d_min, contrib)
    return float(np.sum(contrib) / prep.n)


def analytic_hops_uniform(graph, layout, grid):
    """Exact mean grid hops per transmission, uniform destination rule."""
    return _analytic_hops(graph, layout, grid, 0.0, False)


def analytic_hops_powerlaw(graph, layout, grid, beta):
    """Exact mean grid hops with destinations biased by distance^-beta.

    beta = 0 reduces exactly to the uniform rule.  Distances are clamped
    below by one tenth of the cell side so co-located users stay finite.
    """
    if beta < 0 or not math.isfinite(beta):
        raise ParameterError("beta must be finite and >= 0")
    if beta == 0:
        return _analytic_hops(graph, layout, grid, 0.0, False)
    return _analytic_hops(graph, layout, grid, float(beta), True)

"""Theoretical capacity predictors and scaling-fit utilities.

All closed forms are order-of-magnitude representatives with constant 1;
cross-checks against simulation compare growth (log-log slopes), never
absolute levels.  Natural logarithms throughout.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class CapacityOrder:
    """lambda(n) = n^n_exponent * (log_scale * ln n)^log_exponent."""

    n_exponent: float
    log_exponent: float
    log_scale: float = 1.0

    def evaluate(self, n):
        n = np.asarray(n, dtype=np.float64)
        return n ** self.n_exponent * (self.log_scale * np.log(n)) ** self.log_exponent


@dataclass(frozen=True)
class TheoryPrediction:
    regime: str                      # "uniform" or "powerlaw"
    beta: float
    hop_exponent: float              # d log E[hops] / d log n
    capacity_order: CapacityOrder


@dataclass(frozen=True)
class HierarchyPrediction:
    gamma: float
    epsilon: float
    alpha: float                     # 1 / (epsilon - 2)
    k_bar: np.ndarray                # mean level-L degree, L = 1..l_max
    r_weights: np.ndarray            # level traffic shares, sum to 1
    l_max: int
    reduction_regime: str            # "log_n" (2<eps<3) or "linear_n" (eps=3)


def capacity_from_hops(mean_hops, n):
    """Per-user rate representative 1 / (ln n * E[hops]).

    A zero hop count means co-located traffic; the rate is then unbounded
    and the +inf sentinel is returned.
    """
    if n < 2:
        raise ParameterError("n must be >= 2")
    if mean_hops < 0:
        raise ParameterError("mean_hops must be >= 0")
    if mean_hops == 0:
        return math.inf
    return 1.0 / (math.log(n) * mean_hops)


def theoretical_direct(n, beta=None):
    """Predicted hop-growth exponent and capacity order for direct traffic.

    Uniform rule (beta None) and 0 <= beta <= 2 share the baseline regime;
    2 < beta < 3 interpolates; beta >= 3 pins hops at constant order.
    """
    if n < 2:
        raise ParameterError("n must be >= 2")
    if beta is None:
        return TheoryPrediction(regime="uniform", beta=math.nan, hop_exponent=0.5,
                                capacity_order=CapacityOrder(-0.5, -0.5))
    if beta < 0:
        raise ParameterError("beta must be >= 0")
    if beta <= 2:
        return TheoryPrediction(regime="powerlaw", beta=float(beta), hop_exponent=0.5,
                                capacity_order=CapacityOrder(-0.5, -0.5))
    if beta < 3:
        return TheoryPrediction(regime="powerlaw", beta=float(beta),
                                hop_exponent=(3.0 - beta) / 2.0,
                                capacity_order=CapacityOrder(-(3.0 - beta) / 2.0, -0.5,
                                                             log_scale=beta - 1.0))
    return TheoryPrediction(regime="powerlaw", beta=float(beta), hop_exponent=0.0,
                            capacity_order=CapacityOrder(0.0, -1.0))


def level_degree_curve(gamma, epsilon, levels):
    """Mean level-L degree alpha^(L-1) * (gamma-1)/(gamma-2), any epsilon > 2.

    For epsilon > 3 the factor alpha < 1 and the sequence decays: the
    network stops branching and no capacity is defined (diagnostic only).
    """
    if gamma <= 2:
        raise ParameterError("gamma must be > 2")
    if epsilon <= 2:
        raise ParameterError("epsilon must be > 2")
    alpha = 1.0 / (epsilon - 2.0)
    base = (gamma - 1.0) / (gamma - 2.0)
    ls = np.arange(1, levels + 1, dtype=np.float64)
    return base * alpha ** (ls - 1.0)


def theoretical_hierarchy(gamma, epsilon, n):
    """Level-degree curve, level traffic shares, and the maximum level.

    For 2 < epsilon < 3 the level count grows like log n and total capacity
    loses a log n factor; at the epsilon = 3 boundary the level shares are
    flat, the level count grows linearly, and the loss factor is n.
    """
    if gamma <= 2:
        raise ParameterError("gamma must be > 2")
    if not (2 < epsilon <= 3):
        raise ParameterError("epsilon must lie in (2, 3]; larger values are "
                             "non-extensible (see level_degree_curve)")
    if n < 3:
        raise ParameterError("n must be >= 3")
    base = (gamma - 1.0) / (gamma - 2.0)
    if epsilon == 3.0:
        alpha = 1.0
        l_max = max(1, round((gamma - 2.0) * (n - 1.0) / (gamma - 1.0)))
        k_bar = np.full(l_max, base)
        regime = "linear_n"
    else:
        alpha = 1.0 / (epsilon - 2.0)
        inner = (gamma - 2.0) * (alpha - 1.0) * (n - 1.0) / (gamma - 1.0) + 1.0
        l_max = max(1, math.ceil(math.log(inner) / math.log(alpha)))
        k_bar = base * alpha ** np.arange(l_max, dtype=np.float64)
        regime = "log_n"
    r = k_bar / (n - 1.0)
    r = r / r.sum()
    return HierarchyPrediction(gamma=float(gamma), epsilon=float(epsilon),
                               alpha=alpha, k_bar=k_bar, r_weights=r,
                               l_max=int(l_max), reduction_regime=regime)


def hierarchical_capacity(direct_capacity, pred, n):
    """Capacity after opening all social levels: direct rate / loss factor."""
    if n < 3:
        raise ParameterError("n must be >= 3")
    if pred.reduction_regime == "linear_n":
        return direct_capacity / n
    return direct_capacity / math.log(n)


def fit_loglog(xs, ys):
    """Least squares on (ln x, ln y); returns (slope, intercept, r_squared)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size != ys.size or xs.size < 3:
        raise ParameterError("need at least 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ParameterError("log-log fit needs positive values")
    lx = np.log(xs)
    ly = np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), float(intercept), float(r2)


def fit_linear(xs, ys):
    """Plain least squares; returns (slope, intercept, r_squared)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size != ys.size or xs.size < 3:
        raise ParameterError("need at least 3 points")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), float(intercept), float(r2)

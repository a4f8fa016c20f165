"""Counter-based RNG streams.

Every stochastic routine derives independent child streams with
``child_seed = mix(seed, index)`` (splitmix64 over the pair), so results do
not depend on scheduling or worker count.  The same mixing function is
compiled into the numba kernels; this module holds the Python-side twins.
"""

import numpy as np

from ._accel import njit

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def splitmix64(state):
    """One splitmix64 step; returns (new_state, output)."""
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def child_seed(seed, index):
    """Derive the seed of child stream `index` from a 64-bit parent seed."""
    s = np.uint64(seed) ^ (np.uint64(index) * np.uint64(0xD2B74407B1CE6E93))
    s, z = splitmix64(s)
    s, z2 = splitmix64(s)
    return z ^ (z2 >> np.uint64(17))


@njit(cache=True)
def rand_u01(state):
    """Uniform double in [0, 1); returns (new_state, value)."""
    state, z = splitmix64(state)
    return state, (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def rand_below(state, n):
    """Uniform integer in [0, n); returns (new_state, value)."""
    state, u = rand_u01(state)
    k = int(u * n)
    if k >= n:
        k = n - 1
    return state, k


def numpy_rng(seed, index=0):
    """numpy Generator seeded from the same child-stream derivation."""
    return np.random.default_rng(int(child_seed(np.uint64(seed), np.uint64(index))))

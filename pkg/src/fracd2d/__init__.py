"""Capacity experiments for fractal D2D social overlay networks.

Subpackages by concern: `fractal_graph` (scale-free generation, level
sets), `sympoly` (stable elementary symmetric polynomials, exact mean
hops), `spatial_grid` (placement, routing grid, TDMA slots), `traffic`
(Monte-Carlo estimators), `capacity` (theoretical predictors and fits),
`fractality` (box covering), `experiments` (sweep runner), `cli`.
"""

from ._accel import NUMBA_ENABLED

__version__ = "0.1.0"

__all__ = ["NUMBA_ENABLED", "__version__"]

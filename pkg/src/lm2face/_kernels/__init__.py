"""Kernel dispatch: use the compiled extension when built, numpy otherwise.

``IMPLEMENTATION`` names the active backend ("cython" or "numpy"); both
backends are importable directly for the equivalence tests and benchmarks
(``lm2face._kernels.slow`` and, when built, ``lm2face._kernels._fast``).
"""

from . import slow

try:
    from . import _fast as _active  # type: ignore[attr-defined]
except ImportError:
    _active = slow

IMPLEMENTATION = _active.IMPLEMENTATION
gaussian_max_heatmap = _active.gaussian_max_heatmap
lbp_codes = _active.lbp_codes

__all__ = ["IMPLEMENTATION", "gaussian_max_heatmap", "lbp_codes", "slow"]

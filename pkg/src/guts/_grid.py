"""Parameter grids for sweeps."""

import math

import numpy as np


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Grid ``lo, lo + step, ...`` that includes ``hi`` only if it lies on
    the grid (within rounding)."""
    if step <= 0 or hi < lo:
        raise ValueError("need step > 0 and hi >= lo")
    k = math.floor((hi - lo) / step + 1e-9)
    pts = lo + step * np.arange(k + 1)
    pts = np.round(pts, 12)
    return pts[pts <= hi + 1e-12]

"""Small argument checks used across modules."""

from __future__ import annotations

import math
import numbers

from .exceptions import InputError, ParameterError


def check_threshold(p, name: str = "threshold") -> float:
    """Return ``p`` as a float after checking it lies in [0, 1]."""
    if isinstance(p, bool) or not isinstance(p, numbers.Real):
        raise InputError(f"{name} must be a real number, got {p!r}")
    p = float(p)
    if not math.isfinite(p) or p < 0.0 or p > 1.0:
        raise InputError(f"{name} must lie in [0, 1], got {p!r}")
    return p


def check_players(n, minimum: int = 2, name: str = "n") -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {n}")
    return n


def check_finite(x, name: str) -> float:
    if isinstance(x, bool) or not isinstance(x, numbers.Real):
        raise InputError(f"{name} must be a real number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"{name} must be finite, got {x!r}")
    return x


def check_count(k, name: str, minimum: int = 0) -> int:
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {k!r}")
    k = int(k)
    if k < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {k}")
    return k

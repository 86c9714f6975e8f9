"""Deterministic quadrature oracle for continuous threshold profiles.

The round is decomposed by hold pattern.  Given the pattern, hands of
holders are uniform on ``[p_j, 1]`` and hands of droppers uniform on
``[0, p_j]``, all independent, so player 1's chance of having the best
hand is a one-dimensional integral of a product of truncated uniform CDFs.
Those integrands are piecewise polynomials with breakpoints at the
thresholds, so piecewise Gauss-Legendre quadrature is exact up to rounding.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from ._validation import check_players, check_threshold
from .exceptions import InputError, UnsupportedConfigurationError
from .recursive import StagePayoff

__all__ = ["QUADRATURE_MAX_PLAYERS", "quadrature_alpha", "win_probability"]

QUADRATURE_MAX_PLAYERS = 6


def _integrate(fn, lo: float, hi: float, breaks: Sequence[float], order: int) -> float:
    """Piecewise Gauss-Legendre integral of ``fn`` over [lo, hi]."""
    if hi <= lo:
        return 0.0
    pts = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = []
    for a, b in zip(pts[:-1], pts[1:]):
        x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        total.append(0.5 * (b - a) * float(np.dot(weights, fn(x))))
    return math.fsum(total)


def win_probability(own: tuple[float, float], others: Sequence[tuple[float, float]]) -> float:
    """Probability that a uniform hand on ``own`` beats independent uniform
    hands on each interval in ``others``."""
    lo, hi = own
    if hi <= lo:
        raise InputError("own interval must have positive length")

    def integrand(x):
        out = np.ones_like(x)
        for a, b in others:
            if b <= a:
                out = out * (x >= b)
                continue
            # tiny widths overflow to +-inf, which the clip maps correctly
            with np.errstate(over="ignore"):
                out = out * np.clip((x - a) / (b - a), 0.0, 1.0)
        return out

    breaks = [v for ab in others for v in ab]
    order = max(2, len(others) + 1)
    return _integrate(integrand, lo, hi, breaks, order) / (hi - lo)


def quadrature_alpha(n: int, profile: Sequence[float], weenie: bool = False) -> StagePayoff:
    """Stage payoff of player 1 by exhaustive hold-pattern integration.

    Parameters
    ----------
    n : int
        Number of players, at most ``QUADRATURE_MAX_PLAYERS``.
    profile : sequence of float
        Thresholds ``p_1 .. p_n``.
    weenie : bool
        Apply the Weenie rule when every player drops.

    Returns
    -------
    StagePayoff
    """
    n = check_players(n)
    if n > QUADRATURE_MAX_PLAYERS:
        raise UnsupportedConfigurationError(
            f"quadrature oracle supports n <= {QUADRATURE_MAX_PLAYERS}, got n={n}"
        )
    ps = [check_threshold(p, f"threshold[{k}]") for k, p in enumerate(profile)]
    if len(ps) != n:
        raise InputError(f"profile has {len(ps)} thresholds, expected {n}")

    alpha_terms, beta_terms = [], []
    for holds in itertools.product((False, True), repeat=n):
        prob = math.prod((1.0 - p) if h else p for p, h in zip(ps, holds))
        if prob == 0.0:
            continue
        r = sum(holds)
        if r >= 2:
            beta_terms.append(prob * (r - 1))
            if holds[0]:
                others = [(ps[j], 1.0) for j in range(1, n) if holds[j]]
                w = win_probability((ps[0], 1.0), others)
                ret = w * (n + r - 2) + (1.0 - w) * (-n + r - 2)
            else:
                ret = r - 2
        elif r == 1:
            ret = (n - 1) if holds[0] else -1
        else:
            if weenie:
                beta_terms.append(2.0 * prob)
                others = [(0.0, ps[j]) for j in range(1, n)]
                w = win_probability((0.0, ps[0]), others)
                ret = -(n - 1) * w + (1.0 - w)
            else:
                beta_terms.append(prob)
                ret = 0.0
        alpha_terms.append(prob * ret)
    return StagePayoff(math.fsum(alpha_terms), math.fsum(beta_terms))

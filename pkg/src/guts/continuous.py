"""Closed-form payoffs, best responses and coalitions for continuous Guts.

Every player receives an independent uniform hand on [0, 1] and plays a
threshold strategy: hold iff the hand is at least the threshold.  The
functions here return the expected one-shot return ``alpha`` to player 1
and the expected stakes multiplier ``beta`` for a single round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, sqrt
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._validation import check_finite, check_players, check_threshold
from .exceptions import InvariantViolation, ParameterError, UnsupportedConfigurationError
from .quadrature import QUADRATURE_MAX_PLAYERS, quadrature_alpha
from .recursive import StagePayoff

__all__ = [
    "ThresholdProfile",
    "FiniteMixedProfile",
    "BestResponseReport",
    "symmetric_threshold",
    "weenie_threshold",
    "payoff2",
    "best_response2",
    "payoff3",
    "alpha_a",
    "alpha_b",
    "alpha_b_roots",
    "best_response3",
    "bloc_n",
    "bloc_delta",
    "bloc_slope",
    "general_beta",
    "coalition",
    "stage_payoff",
    "mixed_stage_payoff",
    "nonbloc_probe",
    "weenie_bloc",
]


@dataclass(frozen=True)
class ThresholdProfile:
    """One cutoff per player; player j holds iff its hand is >= thresholds[j]."""

    thresholds: tuple[float, ...]

    def __post_init__(self):
        ts = tuple(
            check_threshold(p, f"threshold[{k}]") for k, p in enumerate(self.thresholds)
        )
        if len(ts) < 2:
            raise ParameterError("a profile needs at least two players")
        object.__setattr__(self, "thresholds", ts)

    @property
    def n(self) -> int:
        return len(self.thresholds)

    @property
    def is_bloc(self) -> bool:
        return len(set(self.thresholds[1:])) == 1


@dataclass(frozen=True)
class FiniteMixedProfile:
    """Finite mixture over opponent threshold tuples ``(p_2, ..., p_n)``."""

    atoms: tuple[tuple[tuple[float, ...], float], ...]

    def __post_init__(self):
        if not self.atoms:
            raise InvariantViolation("a mixture needs at least one atom")
        atoms = []
        for opp, w in self.atoms:
            opp = tuple(check_threshold(p, "opponent threshold") for p in opp)
            w = check_finite(w, "weight")
            if w <= 0:
                raise InvariantViolation(f"atom weights must be positive, got {w}")
            atoms.append((opp, w))
        if len({len(opp) for opp, _ in atoms}) != 1:
            raise InvariantViolation("all atoms must have the same arity")
        total = math.fsum(w for _, w in atoms)
        if abs(total - 1.0) > 1e-12:
            raise InvariantViolation(f"atom weights sum to {total!r}, not 1")
        object.__setattr__(self, "atoms", tuple(atoms))

    @property
    def n(self) -> int:
        return len(self.atoms[0][0]) + 1


@dataclass(frozen=True)
class BestResponseReport:
    """Opponents' best response to a fixed player-1 threshold.

    ``value`` is the minimum of alpha over opponent thresholds and
    ``minimizer`` the opponent tuple attaining it.  ``formula_value`` holds the
    analytic candidate minimum when one exists (it may be infeasible, see
    :func:`best_response3`).
    """

    p1: float
    value: float
    minimizer: tuple[float, ...]
    branch: str
    formula_value: float | None = None


def symmetric_threshold(n: int) -> float:
    """The symmetric optimal cutoff ``(1/2)^(1/(n-1))``."""
    n = check_players(n)
    return 0.5 ** (1.0 / (n - 1))


def weenie_threshold(n: int) -> float:
    """The optimal cutoff ``(1/3)^(1/(n-1))`` under the Weenie rule."""
    n = check_players(n)
    return (1.0 / 3.0) ** (1.0 / (n - 1))


def general_beta(thresholds: Sequence[float], weenie: bool = False) -> float:
    """Expected stakes multiplier for an arbitrary threshold profile.

    With ``r`` holders the multiplier is ``r - 1`` for ``r >= 2``, 0 for
    ``r = 1`` and 1 (2 under the Weenie rule) for ``r = 0``, which sums to
    ``E[r] - 1 + 2 P(r = 0)`` (plus ``P(r = 0)`` more with the Weenie rule).
    """
    ps = [check_threshold(p) for p in thresholds]
    p_none = math.prod(ps)
    beta = math.fsum(1.0 - p for p in ps) - 1.0 + 2.0 * p_none
    if weenie:
        beta += p_none
    return max(beta, 0.0)


# ---------------------------------------------------------------- 2 players


def payoff2(p1: float, p2: float) -> StagePayoff:
    """Stage payoff of the two-player game.

    Examples
    --------
    >>> payoff2(0.5, 0.75).alpha
    0.125
    """
    p1 = check_threshold(p1, "p1")
    p2 = check_threshold(p2, "p2")
    beta = p1 * p2 + (1.0 - p1) * (1.0 - p2)
    if p2 <= p1:
        alpha = (1.0 - 2.0 * p1) * (p1 - p2)
    else:
        alpha = (1.0 - 2.0 * p2) * (p1 - p2)
    return StagePayoff(alpha, beta)


def best_response2(p1: float) -> BestResponseReport:
    """Minimum of the two-player alpha over the opponent's threshold."""
    p1 = check_threshold(p1, "p1")
    if p1 < 0.5:
        value = -((1.0 - 2.0 * p1) ** 2) / 8.0
        q = (2.0 * p1 + 1.0) / 4.0
        branch = "interior"
    else:
        value = (1.0 - 2.0 * p1) * p1
        q = 0.0
        branch = "always_hold"
    return BestResponseReport(p1, value, (q,), branch, value)


# ---------------------------------------------------------------- 3 players

# Region formulas keyed by the ascending order of (p1, p2, p3) as indices.
_REGION = {
    (0, 1, 2): 1,
    (0, 2, 1): 2,
    (1, 0, 2): 3,
    (2, 0, 1): 4,
    (1, 2, 0): 5,
    (2, 1, 0): 6,
}


def _alpha3_region(region: int, a: float, b: float, c: float) -> float:
    if region == 1:
        return 2 * a - b - c + c**3 + 3 * b * b * c - 4 * a * b * c
    if region == 2:
        return 2 * a - c - b + b**3 + 3 * c * c * b - 4 * a * b * c
    if region == 3:
        return 2 * a - b - c + c**3 - 3 * a * a * c + 2 * a * b * c
    if region == 4:
        return 2 * a - b - c + b**3 - 3 * a * a * b + 2 * a * b * c
    # regions 5 and 6 share one formula
    return 2 * a - b - c - 2 * a**3 + 2 * a * b * c


def _region3(p1: float, p2: float, p3: float) -> int:
    order = tuple(sorted(range(3), key=lambda k: (p1, p2, p3)[k]))
    return _REGION[order]


def payoff3(p1: float, p2: float, p3: float) -> StagePayoff:
    """Stage payoff of the three-player game for arbitrary thresholds.

    Ties between thresholds are resolved by a stable sort; the region
    formulas agree on their common boundaries.
    """
    p1 = check_threshold(p1, "p1")
    p2 = check_threshold(p2, "p2")
    p3 = check_threshold(p3, "p3")
    beta = 2.0 - p1 - p2 - p3 + 2.0 * p1 * p2 * p3
    alpha = _alpha3_region(_region3(p1, p2, p3), p1, p2, p3)
    return StagePayoff(alpha, beta)


def alpha_a(p1: float) -> float:
    """Analytic minimum over symmetric opponents (interior stationary point)."""
    p = float(p1)
    return -((4 * p * p + 6) ** 1.5 + 8 * p**3 - 36 * p) / 27.0


def alpha_b(p1: float) -> float:
    """Analytic minimum with one opponent always holding (stationary point)."""
    p = float(p1)
    return -2.0 * ((9 * p * p + 3) ** 1.5 - 27 * p) / 27.0


def alpha_b_roots(tol: float = 1e-6) -> tuple[float, ...]:
    """Sign changes of :func:`alpha_b` on [0, 1], located by bracketing."""
    grid = np.linspace(0.0, 1.0, 1001)
    vals = np.array([alpha_b(x) for x in grid])
    roots = []
    for k in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        roots.append(brentq(alpha_b, grid[k], grid[k + 1], xtol=tol))
    return tuple(roots)


def _family_min(f, p1: float) -> tuple[float, float]:
    """Minimise a piecewise-cubic function of one opponent threshold."""
    best_q, best_v = 0.0, f(0.0)
    for q in (p1, 1.0):
        v = f(q)
        if v < best_v:
            best_q, best_v = q, v
    for lo, hi in ((0.0, p1), (p1, 1.0)):
        if hi - lo <= 0:
            continue
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < best_v:
            best_q, best_v = float(res.x), float(res.fun)
    return best_q, best_v


def best_response3(p1: float) -> BestResponseReport:
    """Opponents' joint best response in the three-player game.

    Two families of opponent replies are searched exactly: symmetric replies
    ``(q, q)`` and replies with one opponent always holding, ``(0, s)``.
    The analytic stationary values :func:`alpha_a` and :func:`alpha_b` are
    attained inside these families whenever their minimisers are feasible;
    the reported ``value`` is the true constrained minimum and
    ``formula_value`` is ``min(alpha_a, alpha_b)``.
    """
    p1 = check_threshold(p1, "p1")
    qa, va = _family_min(lambda q: payoff3(p1, q, q).alpha, p1)
    sb, vb = _family_min(lambda s: payoff3(p1, 0.0, s).alpha, p1)
    fa, fb = alpha_a(p1), alpha_b(p1)
    if va < vb:
        return BestResponseReport(p1, va, (qa, qa), "alpha_a", min(fa, fb))
    return BestResponseReport(p1, vb, (0.0, sb), "alpha_b", min(fa, fb))


# ---------------------------------------------------------------- bloc, n players


def bloc_delta(n: int, p1: float, p2: float) -> float:
    """Correction term of the bloc alpha for ``p1 > p2``.

    Conditioning on the number ``m`` of opponents whose hands fall in
    ``[p2, p1)``, the correction is
    ``(p1 - p2) * sum_m d_m C(n-1, m) p2^(n-1-m) (p1 - p2)^m`` with
    ``d_m = 2((n-1)m - 1)/(m + 1)``.  Returns 0 when ``p1 <= p2``.
    """
    n = check_players(n)
    p1 = check_threshold(p1, "p1")
    p2 = check_threshold(p2, "p2")
    d = p1 - p2
    if d <= 0:
        return 0.0
    terms = [
        2.0 * ((n - 1) * m - 1) / (m + 1) * comb(n - 1, m) * p2 ** (n - 1 - m) * d**m
        for m in range(1, n)
    ]
    return d * math.fsum(terms)


def bloc_n(n: int, p1: float, p2: float) -> StagePayoff:
    """Stage payoff when players 2..n all use threshold ``p2``.

    For ``p1 <= p2`` alpha is linear in ``p1``,
    ``(n-1)(p2 - p1)(2 p2^(n-1) - 1)``.  For ``p1 > p2`` it is
    ``(n-1)(p2 - p1)(2 p1^(n-1) - 1) + delta`` with ``delta`` from
    :func:`bloc_delta`.
    """
    n = check_players(n)
    p1 = check_threshold(p1, "p1")
    p2 = check_threshold(p2, "p2")
    if p1 <= p2:
        alpha = (n - 1) * (p2 - p1) * (2.0 * p2 ** (n - 1) - 1.0)
    else:
        alpha = (n - 1) * (p2 - p1) * (2.0 * p1 ** (n - 1) - 1.0) + bloc_delta(n, p1, p2)
    beta = (1.0 - p1) + (n - 1) * (1.0 - p2) - 1.0 + 2.0 * p1 * p2 ** (n - 1)
    return StagePayoff(alpha, max(beta, 0.0))


def bloc_slope(n: int, p: float) -> float:
    """Derivative of the symmetric-point alpha in player 1's threshold."""
    n = check_players(n)
    p = check_threshold(p, "p")
    return (n - 1) * (1.0 - 2.0 * p ** (n - 1))


def weenie_bloc(n: int, p1: float, p2: float) -> StagePayoff:
    """Bloc stage payoff under the Weenie rule.

    If everyone drops, the holder of the highest hand matches the pot and
    the round is replayed at double stakes.
    """
    base = bloc_n(n, p1, p2)
    p1 = float(p1)
    p2 = float(p2)
    if p1 <= p2:
        extra = p1 * (p2 ** (n - 1) - p1 ** (n - 1))
    else:
        extra = (n - 1) * p2 ** (n - 1) * (p2 - p1)
    return StagePayoff(base.alpha + extra, base.beta + p1 * p2 ** (n - 1))


# ---------------------------------------------------------------- dispatch and mixtures


def stage_payoff(thresholds: Sequence[float], weenie: bool = False) -> tuple[StagePayoff, str]:
    """Evaluate a pure profile with the best available exact method.

    Returns the payoff and the name of the evaluator used.  Raises
    :class:`UnsupportedConfigurationError` when no evaluator applies.
    """
    prof = ThresholdProfile(tuple(thresholds))
    ts = prof.thresholds
    n = prof.n
    if prof.is_bloc:
        if weenie:
            return weenie_bloc(n, ts[0], ts[1]), "weenie_bloc"
        return bloc_n(n, ts[0], ts[1]), "bloc_n"
    if n == 3 and not weenie:
        return payoff3(*ts), "payoff3"
    if n <= QUADRATURE_MAX_PLAYERS:
        return quadrature_alpha(n, ts, weenie=weenie), "quadrature"
    raise UnsupportedConfigurationError(
        f"no evaluator for a non-bloc profile with n={n} players"
        f"{' under the Weenie rule' if weenie else ''}; closed forms cover n <= 3 and"
        f" bloc profiles, quadrature covers n <= {QUADRATURE_MAX_PLAYERS}"
    )


def mixed_stage_payoff(n: int, mix: FiniteMixedProfile, p1: float) -> StagePayoff:
    """Weight-averaged stage payoff of player 1 against a finite mixture."""
    n = check_players(n)
    p1 = check_threshold(p1, "p1")
    if mix.n != n:
        raise InvariantViolation(f"mixture arity is for n={mix.n}, expected n={n}")
    alphas, betas = [], []
    for opp, w in mix.atoms:
        sp, _ = stage_payoff((p1,) + opp)
        alphas.append(w * sp.alpha)
        betas.append(w * sp.beta)
    return StagePayoff(math.fsum(alphas), math.fsum(betas))


def coalition(n: int, eps: float, delta: float, C: float) -> FiniteMixedProfile:
    """Mixed opponent strategy that holds player 1 to a negative return.

    Atom A puts every opponent at ``p* - eps`` with weight ``1 - C eps^2``.
    Atom B puts one opponent at 0 and the others at ``p* + delta`` with
    weight ``C eps^2``.  Here ``p* = (1/2)^(1/(n-1))``.
    """
    n = check_players(n, minimum=3)
    eps = check_finite(eps, "eps")
    delta = check_finite(delta, "delta")
    C = check_finite(C, "C")
    if eps <= 0 or delta <= 0 or C <= 0:
        raise ParameterError("eps, delta and C must all be positive")
    w = C * eps * eps
    if w >= 1.0:
        raise ParameterError(f"C*eps^2 must be < 1, got {w}")
    ps = symmetric_threshold(n)
    if ps - eps < 0 or ps + delta > 1:
        raise ParameterError("p* - eps and p* + delta must stay inside [0, 1]")
    atom_a = ((ps - eps,) * (n - 1), 1.0 - w)
    atom_b = ((0.0,) + (ps + delta,) * (n - 2), w)
    return FiniteMixedProfile((atom_a, atom_b))


def nonbloc_probe(n: int, h: float) -> float:
    """Player-1 alpha at ``p*`` against opponents ``(0, p*+h, ..., p*+h)``."""
    n = check_players(n, minimum=3)
    h = check_finite(h, "h")
    if h < 0:
        raise ParameterError("h must be >= 0")
    ps = symmetric_threshold(n)
    if ps + h > 1.0:
        raise ParameterError(f"p* + h = {ps + h} exceeds 1")
    sp, _ = stage_payoff((ps, 0.0) + (ps + h,) * (n - 2))
    return sp.alpha

"""Single-state generalized recursive games.

A game is described by a payoff matrix ``A`` (one-shot returns to the row
player in units of the base stake), a nonnegative stakes matrix ``B`` (the
factor by which the stakes grow when play continues) and a termination
constant ``t`` (the fee, in units of current stake, charged when play is cut
off).  The value map ``T(V) = Value(A + B V)`` is iterated from ``-t`` or
``+t`` to produce lower and upper truncated values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from ._validation import check_count, check_finite
from .exceptions import InputError, InvariantViolation, ParameterError

__all__ = [
    "MatrixGamePair",
    "StagePayoff",
    "ValueTrace",
    "MatrixValue",
    "TerminationCheck",
    "matrix_value",
    "value_map_iterate",
    "termination_toolkit",
]

_GAP_TOL = 1e-9


def _as_matrix(a, name: str) -> np.ndarray:
    try:
        arr = np.array(a, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not a numeric matrix: {exc}") from None
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StagePayoff:
    """Expected one-shot return ``alpha`` and stakes multiplier ``beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        a = check_finite(self.alpha, "alpha")
        b = check_finite(self.beta, "beta")
        if b < 0.0:
            raise InvariantViolation(f"beta must be >= 0, got {b}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class MatrixGamePair:
    """Payoff matrix ``A``, stakes matrix ``B`` and termination constant ``t``.

    Parameters
    ----------
    A : array_like, shape (m, k)
        One-shot payoffs to player 1.
    B : array_like, shape (m, k)
        Expected stakes multipliers; every entry must be nonnegative.
    t : float
        Termination constant, ``t >= 0``.
    """

    A: np.ndarray
    B: np.ndarray
    t: float = 1.0

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        if A.shape != B.shape:
            raise InputError(f"A and B shapes differ: {A.shape} vs {B.shape}")
        if np.any(B < 0):
            raise InvariantViolation("every entry of B must be >= 0")
        t = check_finite(self.t, "t")
        if t < 0:
            raise InvariantViolation(f"t must be >= 0, got {t}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "t", t)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    @classmethod
    def from_dict(cls, doc: dict) -> "MatrixGamePair":
        if not isinstance(doc, dict):
            raise InputError("game document must be a JSON object")
        missing = [key for key in ("A", "B") if key not in doc]
        if missing:
            raise InputError(f"game document is missing {missing}")
        return cls(doc["A"], doc["B"], doc.get("t", 1.0))

    @classmethod
    def from_json(cls, text: str) -> "MatrixGamePair":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid game JSON: {exc}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "B": self.B.tolist(), "t": self.t}


class MatrixValue(NamedTuple):
    value: float
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class ValueTrace:
    """Truncated values ``V_0 .. V_n`` of the value-map iteration."""

    t: float
    direction: str
    values: tuple[float, ...] = field(repr=False)
    converged: bool
    residual: float

    @property
    def limit(self) -> float:
        return self.values[-1]

    def to_csv(self) -> str:
        rows = ["n,V_n"]
        rows += [f"{k},{v:.9g}" for k, v in enumerate(self.values)]
        return "\n".join(rows) + "\n"


class TerminationCheck(NamedTuple):
    criterion_met: bool
    v_n: float


def _normalise(w: np.ndarray) -> np.ndarray:
    w = np.clip(w, 0.0, None)
    s = w.sum()
    if s <= 0:
        raise ArithmeticError("degenerate mixed strategy")
    return w / s


def _row_strategy(A: np.ndarray) -> np.ndarray:
    """Maximin strategy for the row player via linear programming."""
    m, k = A.shape
    # variables: x_1..x_m, v ; maximise v subject to (A^T x)_j >= v
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-A.T, np.ones((k, 1))])
    b_ub = np.zeros(k)
    A_eq = np.zeros((1, m + 1))
    A_eq[0, :m] = 1.0
    bounds = [(0, None)] * m + [(None, None)]
    res = linprog(
        c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10,
                 "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise ArithmeticError(f"LP solve failed: {res.message}")
    return _normalise(res.x[:m])


def _equalize(A: np.ndarray, x: np.ndarray, y: np.ndarray):
    """Refine an approximate equilibrium by solving the equalizer equations
    on the current supports."""
    sx = np.flatnonzero(x > 1e-12)
    sy = np.flatnonzero(y > 1e-12)
    sub = A[np.ix_(sx, sy)]
    # y on sy equalizes rows in sx; x on sx equalizes columns in sy
    ky, kx = len(sy), len(sx)
    My = np.zeros((kx + 1, ky + 1))
    My[:kx, :ky] = sub
    My[:kx, ky] = -1.0
    My[kx, :ky] = 1.0
    ry = np.zeros(kx + 1)
    ry[kx] = 1.0
    Mx = np.zeros((ky + 1, kx + 1))
    Mx[:ky, :kx] = sub.T
    Mx[:ky, kx] = -1.0
    Mx[ky, :kx] = 1.0
    rx = np.zeros(ky + 1)
    rx[ky] = 1.0
    soly = np.linalg.lstsq(My, ry, rcond=None)[0]
    solx = np.linalg.lstsq(Mx, rx, rcond=None)[0]
    if np.any(soly[:ky] < -1e-12) or np.any(solx[:kx] < -1e-12):
        return None
    x2 = np.zeros_like(x)
    y2 = np.zeros_like(y)
    x2[sx] = solx[:kx]
    y2[sy] = soly[:ky]
    return _normalise(x2), _normalise(y2)


def _gap(A, x, y):
    lo = float(np.min(x @ A))
    hi = float(np.max(A @ y))
    return lo, hi


def matrix_value(A) -> MatrixValue:
    """Minimax value of a finite zero-sum matrix game.

    Parameters
    ----------
    A : array_like, shape (m, k)
        Payoffs to the row (maximising) player.

    Returns
    -------
    MatrixValue
        ``(value, x, y)`` where ``x`` and ``y`` are optimal mixed strategies
        for the row and column players.  The certificate satisfies
        ``min_j (x^T A)_j >= value - 1e-9`` and ``max_i (A y)_i <= value + 1e-9``.

    Notes
    -----
    A pure saddle point is detected first and returned exactly.  Otherwise
    both players' LPs are solved with HiGHS and the solution is polished by
    solving the equalizer equations on the detected supports.
    """
    A = _as_matrix(A, "A")
    m, k = A.shape
    row_min = A.min(axis=1)
    col_max = A.max(axis=0)
    i = int(np.argmax(row_min))
    j = int(np.argmin(col_max))
    if row_min[i] == col_max[j]:
        x = np.zeros(m)
        y = np.zeros(k)
        x[i] = 1.0
        y[j] = 1.0
        return MatrixValue(float(A[i, j]), x, y)

    x = _row_strategy(A)
    y = _row_strategy(-A.T)
    lo, hi = _gap(A, x, y)
    if hi - lo > 1e-13:
        polished = _equalize(A, x, y)
        if polished is not None:
            lo2, hi2 = _gap(A, *polished)
            if hi2 - lo2 < hi - lo:
                x, y = polished
                lo, hi = lo2, hi2
    if hi - lo > 2 * _GAP_TOL:
        raise ArithmeticError(f"duality gap {hi - lo:.3g} exceeds tolerance")
    return MatrixValue(0.5 * (lo + hi), x, y)


def value_map_iterate(
    game: MatrixGamePair,
    direction: str = "lower",
    n_max: int = 10_000,
    tol: float = 1e-12,
) -> ValueTrace:
    """Iterate ``V <- Value(A + B V)`` from ``-t`` (lower) or ``+t`` (upper).

    Parameters
    ----------
    game : MatrixGamePair
    direction : {"lower", "upper"}
    n_max : int
        Maximum number of map applications.
    tol : float
        Stop once ``|V_{n+1} - V_n| < tol``.

    Returns
    -------
    ValueTrace
    """
    if not isinstance(game, MatrixGamePair):
        raise InputError("game must be a MatrixGamePair")
    if direction not in ("lower", "upper"):
        raise InputError(f"direction must be 'lower' or 'upper', got {direction!r}")
    n_max = check_count(n_max, "n_max")
    tol = check_finite(tol, "tol")
    if tol < 0:
        raise ParameterError("tol must be >= 0")

    v = -game.t if direction == "lower" else game.t
    values = [v]
    residual = math.inf
    converged = False
    for _ in range(n_max):
        nxt = matrix_value(game.A + game.B * v).value
        residual = abs(nxt - v)
        values.append(nxt)
        v = nxt
        if residual < tol:
            converged = True
            break
    return ValueTrace(game.t, direction, tuple(values), converged, residual)


def termination_toolkit(
    payoff: StagePayoff, alpha0: float, t: float, eps: float, n: int
) -> TerminationCheck:
    """Check the stage termination criterion and evaluate its lower bound.

    The criterion holds when ``alpha >= alpha0 >= 0``, ``beta >= 0`` and
    ``alpha >= t (beta - 1) + eps``.  The returned ``v_n`` is the
    exponentially converging lower bound on the n-stage truncated value,
    ``alpha0 - alpha0 (1 - eps/t)^max(0, n-1) - t (1 - eps/t)^n``.
    """
    t = check_finite(t, "t")
    eps = check_finite(eps, "eps")
    alpha0 = check_finite(alpha0, "alpha0")
    n = check_count(n, "n")
    if t <= 0:
        raise ParameterError(f"t must be > 0, got {t}")
    if not 0 < eps < t:
        raise ParameterError(f"eps must satisfy 0 < eps < t, got eps={eps}, t={t}")
    if alpha0 < 0:
        raise ParameterError(f"alpha0 must be >= 0, got {alpha0}")
    a, b = payoff.alpha, payoff.beta
    met = a >= alpha0 and b >= 0 and a >= t * (b - 1.0) + eps
    q = 1.0 - eps / t
    v_n = alpha0 - alpha0 * q ** max(0, n - 1) - t * q**n
    return TerminationCheck(bool(met), float(v_n))


"""Seeded Monte-Carlo simulation of Guts rounds and recursive play.

Round bookkeeping follows the virtual-ante convention: every player's
ante for the replay is credited immediately, so each round's returns are
small integers (in units of the current stake) that sum to zero exactly.
With ``r`` holders the returns are

* ``r = 0``: all zero, stakes unchanged (doubled under the Weenie rule, where
  the highest hand pays ``-(n-1)`` and everyone else ``+1``);
* ``r = 1``: the holder gets ``n - 1``, everyone else ``-1``, play stops;
* ``r >= 2``: the best holder gets ``n + r - 2``, other holders ``r - n - 2``,
  droppers ``r - 2``, and play continues at ``r - 1`` times the stakes.

Samples are split into fixed-size chunks, each driven by its own
``SeedSequence(seed, spawn_key=(chunk,))`` stream, and chunk results are
combined in chunk order.  Estimates therefore do not depend on how many
threads run the chunks (set ``GUTS_THREADS`` to cap the pool).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._validation import check_count, check_finite, check_players, check_threshold
from .exceptions import InputError, ParameterError

__all__ = [
    "RoundRules",
    "RoundOutcome",
    "SimEstimate",
    "RecursiveSimConfig",
    "BookkeepingAudit",
    "play_round",
    "round_table",
    "estimate_stage_payoff",
    "estimate_total_return",
    "audit_bookkeeping",
]

CHUNK = 1 << 16
_MAX_SEED = (1 << 64) - 1


@dataclass(frozen=True)
class RoundRules:
    """Player count, Weenie flag and hand model.

    ``hand_model`` is ``"continuous"`` (uniform hands on [0, 1]) or
    ``"discrete"``, in which case ``deck`` cards are dealt without
    replacement, ``cards`` per player.  One-card hands are ranked by card
    index ``1..deck``; two-card hands (52-card deck only) by their index in
    :func:`guts.discrete.build_hand_order`.
    """

    n: int
    weenie: bool = False
    hand_model: str = "continuous"
    deck: int = 52
    cards: int = 1

    def __post_init__(self):
        check_players(self.n)
        if self.hand_model not in ("continuous", "discrete"):
            raise InputError(f"unknown hand model {self.hand_model!r}")
        if self.hand_model == "discrete":
            if self.cards not in (1, 2):
                raise InputError("discrete hands must have 1 or 2 cards")
            if self.cards == 2 and self.deck != 52:
                raise InputError("two-card hands require the 52-card deck")
            if self.deck < 2 or self.n * self.cards > self.deck:
                raise InputError(
                    f"cannot deal {self.n} hands of {self.cards} from {self.deck} cards"
                )

    @property
    def discrete(self) -> bool:
        return self.hand_model == "discrete"

    @property
    def n_hands(self) -> int:
        """Number of distinct hand values in the discrete model."""
        if self.cards == 1:
            return self.deck
        return math.comb(self.deck, 2)


@dataclass(frozen=True)
class RoundOutcome:
    holder_set: frozenset[int]
    winner: int | None
    returns: tuple[int, ...]
    multiplier: int
    terminated: bool


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    stderr: float
    samples: int
    truncated_fraction: float | None = None

    def z(self, target: float) -> float:
        """Standardized distance of ``target`` from the mean."""
        if self.stderr == 0:
            return 0.0 if target == self.mean else math.inf
        return abs(self.mean - target) / self.stderr


@dataclass(frozen=True)
class RecursiveSimConfig:
    max_rounds: int = 64
    t: float = 1.0
    seed: int = 0

    def __post_init__(self):
        check_count(self.max_rounds, "max_rounds", minimum=1)
        t = check_finite(self.t, "t")
        if t < 0:
            raise ParameterError("t must be >= 0")
        _check_seed(self.seed)


@dataclass(frozen=True)
class BookkeepingAudit:
    rounds: int
    zero_sum_violations: int
    multiplier_violations: int
    holder_histogram: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.zero_sum_violations == 0 and self.multiplier_violations == 0


def _check_seed(seed) -> int:
    seed = check_count(seed, "seed")
    if seed > _MAX_SEED:
        raise ParameterError("seed must fit in 64 bits")
    return seed


def _threads() -> int:
    env = os.environ.get("GUTS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def _check_profile(rules: RoundRules, profile) -> np.ndarray:
    ts = getattr(profile, "thresholds", profile)
    ts = list(ts)
    if len(ts) != rules.n:
        raise InputError(f"profile has {len(ts)} thresholds, expected {rules.n}")
    if rules.discrete:
        out = []
        for k, t in enumerate(ts):
            t = check_count(t, f"threshold[{k}]")
            if t > rules.n_hands:
                raise InputError(f"threshold[{k}] must lie in 0..{rules.n_hands}")
            out.append(t)
        return np.array(out, dtype=np.int64)
    return np.array([check_threshold(t, f"threshold[{k}]") for k, t in enumerate(ts)])


# ---------------------------------------------------------------- one round


def round_table(hands: np.ndarray, thresholds: np.ndarray, weenie: bool, strict: bool):
    """Vectorised round bookkeeping.

    Parameters
    ----------
    hands : ndarray, shape (T, n)
        Hand values; larger is better and values within a row are distinct.
    thresholds : ndarray, shape (n,)
    weenie : bool
    strict : bool
        Hold iff ``hand > threshold`` (discrete) instead of ``>=``.

    Returns
    -------
    returns : ndarray of int64, shape (T, n)
    multiplier : ndarray of int64, shape (T,)
    holds : ndarray of bool, shape (T, n)
    """
    T, n = hands.shape
    holds = hands > thresholds if strict else hands >= thresholds
    r = holds.sum(axis=1)
    masked = np.where(holds, hands, -np.inf if hands.dtype.kind == "f" else -1)
    best = masked.argmax(axis=1)
    rows = np.arange(T)

    returns = np.zeros((T, n), dtype=np.int64)
    # r >= 2: base r - 2 for all, winner +n, losing holders -n
    many = r >= 2
    base = np.where(many, r - 2, 0)
    returns += base[:, None]
    returns -= np.where(many[:, None] & holds, n, 0)
    returns[rows[many], best[many]] += 2 * n
    # r == 1
    one = r == 1
    returns[one] = -1
    returns[rows[one], best[one]] = n - 1

    multiplier = np.where(many, r - 1, 0).astype(np.int64)
    none = r == 0
    if weenie:
        top = hands.argmax(axis=1)
        returns[none] = 1
        returns[rows[none], top[none]] = -(n - 1)
        multiplier[none] = 2
    else:
        multiplier[none] = 1
    return returns, multiplier, holds


def play_round(rules: RoundRules, profile, hands: Sequence) -> RoundOutcome:
    """Play one round with given hands.

    Continuous hands are reals in [0, 1] and a player holds iff its hand is
    at least its threshold.  Discrete hands are hand indices and a player
    holds iff its hand index exceeds its threshold index.
    """
    thr = _check_profile(rules, profile)
    hands = list(hands)
    if len(hands) != rules.n:
        raise InputError(f"got {len(hands)} hands for {rules.n} players")
    if rules.discrete:
        hv = np.array([check_count(h, "hand") for h in hands], dtype=np.int64)
        if np.any(hv < 1) or np.any(hv > rules.n_hands):
            raise InputError(f"hand indices must lie in 1..{rules.n_hands}")
        if rules.cards == 1:
            used = hv.tolist()
        else:
            from .discrete import build_hand_order

            order = build_hand_order()
            used = [c for h in hv for c in order.cards[h - 1]]
        if len(set(used)) != len(used):
            raise InputError("duplicate cards across players")
    else:
        hv = np.array([check_threshold(h, "hand") for h in hands])
        if len(set(hv.tolist())) != len(hv):
            raise InputError("continuous hands must be distinct")
    ret, mult, holds = round_table(hv[None, :], thr, rules.weenie, rules.discrete)
    holders = frozenset(int(k) for k in np.flatnonzero(holds[0]))
    winner = None
    if holders:
        winner = max(holders, key=lambda k: hv[k])
    elif rules.weenie:
        winner = None
    m = int(mult[0])
    return RoundOutcome(holders, winner, tuple(int(x) for x in ret[0]), m, m == 0)


# ---------------------------------------------------------------- dealing


def _dealer(rules: RoundRules) -> Callable[[np.random.Generator, int], np.ndarray]:
    n = rules.n
    if not rules.discrete:
        return lambda rng, T: rng.random((T, n))
    if rules.cards == 1:
        def deal1(rng, T):
            perm = np.argsort(rng.random((T, rules.deck)), axis=1)[:, :n]
            return perm + 1
        return deal1

    from .discrete import build_hand_order

    lookup = build_hand_order().lookup

    def deal2(rng, T):
        perm = np.argsort(rng.random((T, 52)), axis=1)[:, : 2 * n] + 1
        return lookup[perm[:, 0::2], perm[:, 1::2]]
    return deal2


def _rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _chunks(samples: int) -> list[tuple[int, int]]:
    out = []
    start = 0
    k = 0
    while start < samples:
        size = min(CHUNK, samples - start)
        out.append((k, size))
        start += size
        k += 1
    return out


def _run_chunks(fn, samples: int):
    chunks = _chunks(samples)
    workers = min(_threads(), len(chunks))
    if workers <= 1:
        return [fn(k, size) for k, size in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ks: fn(*ks), chunks))


def _int_estimate(total: int, total_sq: int, samples: int) -> SimEstimate:
    mean = total / samples
    if samples > 1:
        var = (total_sq - total * total / samples) / (samples - 1)
        stderr = math.sqrt(max(var, 0.0) / samples)
    else:
        stderr = 0.0
    return SimEstimate(mean, stderr, samples)


# ---------------------------------------------------------------- estimators


def estimate_stage_payoff(rules: RoundRules, profile, samples: int = 1_000_000,
                          seed: int = 0) -> tuple[SimEstimate, SimEstimate]:
    """Estimate player 1's one-shot return and the stakes multiplier.

    Parameters
    ----------
    rules : RoundRules
    profile : sequence or ThresholdProfile
        One threshold per player.
    samples : int
        Number of independent rounds, at least 1000.
    seed : int
        64-bit seed; equal seeds give bit-identical estimates.

    Returns
    -------
    alpha, beta : SimEstimate
    """
    thr = _check_profile(rules, profile)
    samples = check_count(samples, "samples", minimum=1000)
    seed = _check_seed(seed)
    deal = _dealer(rules)

    def work(k, size):
        rng = _rng(seed, k)
        ret, mult, _ = round_table(deal(rng, size), thr, rules.weenie, rules.discrete)
        a = ret[:, 0]
        return (int(a.sum()), int((a * a).sum()), int(mult.sum()), int((mult * mult).sum()))

    parts = _run_chunks(work, samples)
    sa = sum(p[0] for p in parts)
    sa2 = sum(p[1] for p in parts)
    sb = sum(p[2] for p in parts)
    sb2 = sum(p[3] for p in parts)
    return _int_estimate(sa, sa2, samples), _int_estimate(sb, sb2, samples)


def audit_bookkeeping(rules: RoundRules, profile, samples: int = 1_000_000,
                      seed: int = 0) -> BookkeepingAudit:
    """Simulate rounds and count zero-sum and multiplier-law violations."""
    thr = _check_profile(rules, profile)
    samples = check_count(samples, "samples", minimum=1)
    seed = _check_seed(seed)
    deal = _dealer(rules)
    n = rules.n

    def work(k, size):
        rng = _rng(seed, k)
        ret, mult, holds = round_table(deal(rng, size), thr, rules.weenie, rules.discrete)
        r = holds.sum(axis=1)
        expected = np.where(r >= 2, r - 1, np.where(r == 1, 0, 2 if rules.weenie else 1))
        zs = int(np.count_nonzero(ret.sum(axis=1) != 0))
        ml = int(np.count_nonzero((mult != expected) | (mult < 0) | (mult > n - 1 + (r == 0))))
        return zs, ml, np.bincount(r, minlength=n + 1)

    parts = _run_chunks(work, samples)
    hist = np.sum([p[2] for p in parts], axis=0)
    return BookkeepingAudit(
        samples,
        sum(p[0] for p in parts),
        sum(p[1] for p in parts),
        tuple(int(h) for h in hist),
    )


def estimate_total_return(rules: RoundRules, profile, config: RecursiveSimConfig,
                          samples: int = 100_000) -> SimEstimate:
    """Estimate player 1's total return over repeated play.

    Each trial replays rounds with the same profile, accumulating round
    returns times the current stakes, until the game terminates.  A trial
    still running after ``config.max_rounds`` rounds is charged
    ``-t`` times the current stakes and counted as truncated.
    """
    thr = _check_profile(rules, profile)
    samples = check_count(samples, "samples", minimum=1)
    deal = _dealer(rules)

    def work(k, size):
        rng = _rng(config.seed, k)
        total = np.zeros(size)
        stakes = np.ones(size)
        active = np.arange(size)
        for _ in range(config.max_rounds):
            if active.size == 0:
                break
            ret, mult, _ = round_table(deal(rng, active.size), thr,
                                       rules.weenie, rules.discrete)
            total[active] += ret[:, 0] * stakes[active]
            stakes[active] *= mult
            active = active[mult != 0]
        total[active] -= config.t * stakes[active]
        return math.fsum(total), math.fsum(total * total), int(active.size)

    parts = _run_chunks(work, samples)
    s = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    trunc = sum(p[2] for p in parts)
    mean = s / samples
    if samples > 1:
        var = max(s2 - s * s / samples, 0.0) / (samples - 1)
        stderr = math.sqrt(var / samples)
    else:
        stderr = 0.0
    return SimEstimate(mean, stderr, samples, trunc / samples)

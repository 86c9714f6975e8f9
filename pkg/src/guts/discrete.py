"""Two-player Guts with hands dealt from a finite deck.

Hands are totally ordered and indexed ``1..N``.  A discrete strategy is an
index ``i``: hold for hands with index strictly greater than ``i`` and drop
otherwise, so ``p(i) = i/N`` is the probability of dropping.  Dealing
without replacement couples the two players' hands; the conditional
probability ``ptilde(i : j)`` that the opponent's hand has index ``<= i``
given our hand ``j`` is computed by exhaustive enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._validation import check_count
from .exceptions import InputError, ParameterError

__all__ = [
    "Card",
    "Hand2",
    "HandOrder",
    "DiscretePayoff",
    "Optimal2Card",
    "build_hand_order",
    "hand_index_formula",
    "card_index",
    "payoff_1card",
    "optimal_1card",
    "exclusion_count",
    "exclusion_case",
    "exclusion_log",
    "conditional_probs",
    "pbar",
    "payoff_2card",
    "optimal_2card",
    "search_window",
]

RANK_NAMES = ("2", "3", "4", "5", "6", "7", "8", "9", "10", "J", "Q", "K", "A")
SUIT_NAMES = ("C", "H", "D", "S")
DECK = 52
HANDS_REMOVED = math.comb(DECK, 2) - math.comb(DECK - 2, 2)  # M = 101


def card_index(rank: int, suit: int) -> int:
    """Single-card order index ``4 (rank - 1) + suit`` in 1..52."""
    return 4 * (rank - 1) + suit


@dataclass(frozen=True, order=True)
class Card:
    """A card; ``rank`` 1..13 denotes card number ``rank + 1`` (13 is the ace)
    and ``suit`` 1..4 is C, H, D, S."""

    rank: int
    suit: int

    def __post_init__(self):
        if not (1 <= self.rank <= 13 and 1 <= self.suit <= 4):
            raise InputError(f"invalid card (rank={self.rank}, suit={self.suit})")

    @property
    def index(self) -> int:
        return card_index(self.rank, self.suit)

    @classmethod
    def from_index(cls, idx: int) -> "Card":
        if not 1 <= idx <= DECK:
            raise InputError(f"card index must lie in 1..52, got {idx}")
        return cls((idx - 1) // 4 + 1, (idx - 1) % 4 + 1)

    @classmethod
    def parse(cls, text: str) -> "Card":
        text = text.strip().upper()
        rank_txt, suit_txt = text[:-1], text[-1:]
        if rank_txt not in RANK_NAMES or suit_txt not in SUIT_NAMES:
            raise InputError(f"cannot parse card {text!r}")
        return cls(RANK_NAMES.index(rank_txt) + 1, SUIT_NAMES.index(suit_txt) + 1)

    def __str__(self) -> str:
        return RANK_NAMES[self.rank - 1] + SUIT_NAMES[self.suit - 1]


@dataclass(frozen=True)
class Hand2:
    """Two distinct cards with ``high`` above ``low`` in single-card order."""

    high: Card
    low: Card

    def __post_init__(self):
        if self.high.index <= self.low.index:
            raise InputError(f"high card {self.high} must rank above low card {self.low}")

    @property
    def is_pair(self) -> bool:
        return self.high.rank == self.low.rank

    @property
    def cards(self) -> tuple[int, int]:
        return (self.high.index, self.low.index)

    @classmethod
    def parse(cls, text: str) -> "Hand2":
        try:
            a, b = text.split("/")
        except ValueError:
            raise InputError(f"hand must look like 'JS/7C', got {text!r}") from None
        c1, c2 = sorted((Card.parse(a), Card.parse(b)), key=lambda c: c.index)
        return cls(c2, c1)

    def __str__(self) -> str:
        return f"{self.high}/{self.low}"


def hand_index_formula(hand: Hand2) -> int:
    """Closed-form index of a non-pair hand ``(j, k)/(l, m)`` with ``j > l``."""
    j, k = hand.high.rank, hand.high.suit
    l, m = hand.low.rank, hand.low.suit
    if j <= l:
        raise InputError("the index formula applies to non-pair hands only")
    return 16 * ((j - 1) * (j - 2) // 2 + (l - 1)) + 4 * (k - 1) + m


@dataclass(frozen=True, eq=False)
class HandOrder:
    """All 1326 two-card hands, indexed 1..1326 from weakest to strongest.

    Non-pairs come first, ordered by high rank, low rank, high suit, low
    suit; pairs follow, ordered by rank and then suits.

    Attributes
    ----------
    hands : tuple of Hand2
        ``hands[i - 1]`` is the hand with index ``i``.
    cards : ndarray, shape (N, 2)
        Card indices ``(high, low)`` per hand.
    lookup : ndarray, shape (53, 53)
        Hand index for an unordered card pair (0 on the diagonal).
    le_disjoint : ndarray, shape (N + 1, N)
        ``le_disjoint[i, j - 1]`` counts hands of index ``<= i`` sharing no
        card with hand ``j``.
    """

    hands: tuple[Hand2, ...]
    cards: np.ndarray = field(repr=False)
    lookup: np.ndarray = field(repr=False)
    le_disjoint: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.hands)

    @property
    def n_nonpairs(self) -> int:
        return sum(not h.is_pair for h in self.hands)

    @property
    def M(self) -> int:
        """Number of hands that share a card with any fixed hand."""
        return HANDS_REMOVED

    def hand(self, i: int) -> Hand2:
        self._check(i)
        return self.hands[i - 1]

    def index_of(self, hand: Hand2 | str) -> int:
        if isinstance(hand, str):
            hand = Hand2.parse(hand)
        return int(self.lookup[hand.high.index, hand.low.index])

    def _check(self, i, name: str = "index") -> int:
        i = check_count(i, name)
        if not 1 <= i <= self.N:
            raise InputError(f"{name} must lie in 1..{self.N}, got {i}")
        return i

    def disjoint(self, a: int, b: int) -> bool:
        return not set(self.hand(a).cards) & set(self.hand(b).cards)


@lru_cache(maxsize=1)
def build_hand_order() -> HandOrder:
    """Enumerate and index every two-card hand of a 52-card deck."""
    all_cards = [Card.from_index(c) for c in range(1, DECK + 1)]
    hands = [Hand2(b, a) for a, b in itertools.combinations(all_cards, 2)]
    nonpairs = sorted(
        (h for h in hands if not h.is_pair),
        key=lambda h: (h.high.rank, h.low.rank, h.high.suit, h.low.suit),
    )
    pairs = sorted(
        (h for h in hands if h.is_pair),
        key=lambda h: (h.high.rank, h.high.suit, h.low.suit),
    )
    ordered = tuple(nonpairs + pairs)
    n = len(ordered)
    cards = np.array([h.cards for h in ordered], dtype=np.int64)
    lookup = np.zeros((DECK + 1, DECK + 1), dtype=np.int64)
    lookup[cards[:, 0], cards[:, 1]] = np.arange(1, n + 1)
    lookup[cards[:, 1], cards[:, 0]] = np.arange(1, n + 1)

    incidence = np.zeros((n, DECK + 1), dtype=np.int32)
    incidence[np.arange(n), cards[:, 0]] = 1
    incidence[np.arange(n), cards[:, 1]] = 1
    disjoint = (incidence @ incidence.T) == 0
    le = np.zeros((n + 1, n), dtype=np.int32)
    np.cumsum(disjoint, axis=0, out=le[1:])
    for arr in (cards, lookup, le):
        arr.setflags(write=False)
    return HandOrder(ordered, cards, lookup, le)


@dataclass(frozen=True)
class DiscretePayoff:
    """Stage payoff of a discrete profile with the quantities behind it.

    ``pbar`` is the averaged conditional probability entering alpha.
    ``beta_approx`` is the stakes multiplier obtained by replacing the
    conditional probabilities with the unconditioned averages; ``beta`` is
    exact.
    """

    alpha: float
    beta: float
    p1: float
    p2: float
    pbar: float
    beta_approx: float


# ---------------------------------------------------------------- one card


def _check_deck(N) -> int:
    N = check_count(N, "N")
    if N < 2:
        raise ParameterError(f"deck size must be >= 2, got {N}")
    return N


def payoff_1card(i1: int, i2: int, N: int = DECK) -> DiscretePayoff:
    """Stage payoff for one-card hands from an ``N``-card deck.

    Strategy ``i`` holds iff the card index exceeds ``i``; indices range
    over ``0..N`` (0 always holds, N always drops).
    """
    N = _check_deck(N)
    i1 = check_count(i1, "i1")
    i2 = check_count(i2, "i2")
    if i1 > N or i2 > N:
        raise InputError(f"indices must lie in 0..{N}")
    p = lambda i: i / N  # noqa: E731
    pt = lambda i: (i - 1) / (N - 1)  # noqa: E731
    if i2 <= i1:
        pb = pt(i1)
    else:
        pb = pt(i2)
    alpha = (1.0 - 2.0 * pb) * (p(i1) - p(i2))
    beta_approx = p(i1) * pt(i2) + (1.0 - p(i1)) * (1.0 - pt(i2))
    # exact: count ordered pairs of distinct cards
    lo, hi = min(i1, i2), max(i1, i2)
    both_drop = i1 * i2 - lo
    both_hold = (N - i1) * (N - i2) - (N - hi)
    beta = (both_drop + both_hold) / (N * (N - 1))
    return DiscretePayoff(alpha, beta, p(i1), p(i2), pb, beta_approx)


def optimal_1card(N: int = DECK) -> tuple[int, ...]:
    """Optimal one-card thresholds, verified by scanning every reply."""
    N = _check_deck(N)
    cands = (N // 2,) if N % 2 == 0 else ((N - 1) // 2, (N + 1) // 2)
    for i1 in cands:
        worst = min(payoff_1card(i1, i2, N).alpha for i2 in range(N + 1))
        if worst < -1e-15:
            raise ArithmeticError(f"candidate {i1} fails the exhaustive check")
    return cands


# ---------------------------------------------------------------- two cards


def conditional_probs(order: HandOrder, i: int, j: int) -> float:
    """``ptilde(i : j)``: probability the opponent's hand index is ``<= i``
    given our hand ``j``."""
    j = order._check(j, "j")
    i = check_count(i, "i")
    if i > order.N:
        raise InputError(f"i must lie in 0..{order.N}")
    return order.le_disjoint[i, j - 1] / (order.N - order.M)


def _ptilde_row(order: HandOrder, i: int) -> np.ndarray:
    return order.le_disjoint[i] / (order.N - order.M)


def pbar(order: HandOrder, i2: int, i1: int) -> float:
    """Mean of ``ptilde(i2 : j)`` over ``i1 < j <= i2``."""
    i2 = order._check(i2, "i2")
    i1 = check_count(i1, "i1")
    if not i1 < i2:
        raise InputError(f"pbar needs i1 < i2, got i1={i1}, i2={i2}")
    row = order.le_disjoint[i2, i1:i2]
    return float(row.sum()) / ((i2 - i1) * (order.N - order.M))


def payoff_2card(order: HandOrder, i1: int, i2: int) -> DiscretePayoff:
    """Stage payoff for two-card hands.

    Strategy ``i`` holds iff the hand index exceeds ``i`` (``0..N``).
    """
    N = order.N
    i1 = check_count(i1, "i1")
    i2 = check_count(i2, "i2")
    if i1 > N or i2 > N:
        raise InputError(f"indices must lie in 0..{N}")
    p1, p2 = i1 / N, i2 / N
    if i1 == i2:
        pb = 0.5
    elif i2 < i1:
        pb = pbar(order, i1, i2)
    else:
        pb = pbar(order, i2, i1)
    alpha = (1.0 - 2.0 * pb) * (p1 - p2) if i1 != i2 else 0.0

    row = _ptilde_row(order, i2)
    low = math.fsum(row[:i1])
    high = math.fsum(1.0 - row[i1:])
    beta = (low + high) / N
    mean_all = float(row[1:i2].mean()) if i2 > 1 else 0.0
    mean_hi = float(row[i1:].mean()) if i1 < N else 0.0
    beta_approx = p1 * mean_all + (1.0 - p1) * (1.0 - mean_hi)
    return DiscretePayoff(alpha, beta, p1, p2, pb, beta_approx)


# ---------------------------------------------------------------- exclusion counts


def exclusion_case(order: HandOrder, i1: int, i2: int) -> str:
    """Which case of the closed-form exclusion count applies to ``(i1, i2)``."""
    h1, h2 = order.hand(i1), order.hand(i2)
    j1, k1, l1 = h1.high.rank, h1.high.suit, h1.low.rank
    j2, k2, l2 = h2.high.rank, h2.high.suit, h2.low.rank
    if h1.is_pair or h2.is_pair:
        return "pair"
    if not i2 < i1:
        return "uncovered"
    if j1 > j2:
        return "i"
    if l1 > l2:
        return "ii"
    if k1 > k2:
        return "iii"
    return "iv"


def exclusion_count(
    order: HandOrder, i1: int, i2: int, mode: str = "oracle", case1_constant: int = -9
) -> int:
    """Number of hands with index ``<= i1`` sharing a card with hand ``i2``.

    Parameters
    ----------
    mode : {"oracle", "closed_form"}
        ``oracle`` counts by enumeration.  ``closed_form`` evaluates the
        four-case counting formula, which is defined for non-pair hands
        with ``i2 < i1``.
    case1_constant : int
        Constant term of the first case of the closed form.
    """
    i1 = order._check(i1, "i1")
    i2 = order._check(i2, "i2")
    if mode == "oracle":
        return int(i1 - order.le_disjoint[i1, i2 - 1])
    if mode != "closed_form":
        raise InputError(f"mode must be 'oracle' or 'closed_form', got {mode!r}")
    case = exclusion_case(order, i1, i2)
    if case == "pair":
        raise InputError("the closed form excludes pair hands")
    if case == "uncovered":
        raise InputError("the closed form needs i2 < i1")
    h1, h2 = order.hand(i1), order.hand(i2)
    j1, k1, l1, m1 = h1.high.rank, h1.high.suit, h1.low.rank, h1.low.suit
    j2, k2, m2 = h2.high.rank, h2.high.suit, h2.low.suit
    Nc = card_index
    if case == "i":
        chi = int(Nc(j2, k2) <= Nc(l1, m1))
        return Nc(j1, k1) + Nc(j1 - 1, 4) + case1_constant + k1 * chi
    if case == "ii":
        return Nc(j1, 4) + Nc(l1 - 1, 4) - 5 + 4 * int(k2 < k1) + m1 * int(k2 == k1)
    if case == "iii":
        return Nc(j1, k1 - 1) + Nc(l1, 4) - 5 + int(m2 <= m1)
    return Nc(j1, k1) + Nc(l1, m1) - 5


def search_window(order: HandOrder) -> tuple[int, int]:
    """Integer range of candidate optima implied by the crude bounds
    ``(i - M)/(N - M) <= 1/2 <= (i + 1)/(N - M)``."""
    half = (order.N - order.M) / 2.0
    return math.ceil(half - 1), math.floor(half + order.M)


def exclusion_log(order: HandOrder, lo: int | None = None, hi: int | None = None,
                  case1_constant: int = -9) -> list[dict]:
    """Compare oracle and closed-form exclusion counts on ``lo <= i2 < i1 <= hi``.

    Each row records ``i1, i2, S_oracle, S_closed, case`` and whether the
    pair satisfies the formula's stated hypothesis on the low suit of
    ``i1`` (``m1 >= 2``).
    """
    if lo is None or hi is None:
        lo, hi = search_window(order)
    rows = []
    for i1 in range(lo, hi + 1):
        m1 = order.hand(i1).low.suit
        for i2 in range(lo, i1):
            case = exclusion_case(order, i1, i2)
            s_or = exclusion_count(order, i1, i2, "oracle")
            s_cf = exclusion_count(order, i1, i2, "closed_form", case1_constant)
            rows.append({
                "i1": i1, "i2": i2, "S_oracle": s_or, "S_closed": s_cf,
                "case": case, "in_hypothesis": m1 >= 2,
            })
    return rows


# ---------------------------------------------------------------- optimum search


@dataclass(frozen=True)
class Optimal2Card:
    """Result of the window scan for optimal two-card thresholds.

    ``indices`` are the thresholds meeting both averaged conditions inside
    the window; ``verified`` lists those with ``alpha >= 0`` against every
    reply ``0..N``.  ``conditions`` holds one row per window index.
    """

    indices: tuple[int, ...]
    hands: tuple[str, ...]
    verified: tuple[int, ...]
    window: tuple[int, int]
    conditions: tuple[dict, ...] = field(repr=False)
    findings: tuple[str, ...] = ()
    shifted_local: tuple[int, ...] = ()


EXPECTED_2CARD = 669


def optimal_2card(order: HandOrder | None = None) -> Optimal2Card:
    """Scan the candidate window for optimal two-card thresholds.

    For each ``i1`` in the window the two averaged conditions are
    (i) ``pbar(i1, i2) <= 1/2`` for every ``i2 < i1`` and
    (ii) ``pbar(i2, i1) >= 1/2`` for every ``i2 > i1``, both over the
    window.  Surviving indices are then checked against every reply.
    A result different from the expected optimum (JS/7C, index 669) is
    recorded in ``findings``.
    """
    if order is None:
        order = build_hand_order()
    lo, hi = search_window(order)
    N = order.N
    rows = []
    passing = []
    for i1 in range(lo, hi + 1):
        below = [pbar(order, i1, i2) for i2 in range(lo, i1)]
        above = [pbar(order, i2, i1) for i2 in range(i1 + 1, hi + 1)]
        max_below = max(below) if below else -math.inf
        min_above = min(above) if above else math.inf
        cond_i = max_below <= 0.5
        cond_ii = min_above >= 0.5
        local_lo = pbar(order, i1, i1 - 1)
        local_hi = pbar(order, i1 + 1, i1)
        rows.append({
            "i1": i1,
            "hand": str(order.hand(i1)),
            "max_pbar_below": max_below,
            "min_pbar_above": min_above,
            "cond_i": cond_i,
            "cond_ii": cond_ii,
            "pbar_self_prev": local_lo,
            "pbar_next_self": local_hi,
            "local_condition": local_lo <= 0.5 <= local_hi,
        })
        if cond_i and cond_ii:
            passing.append(i1)

    verified = []
    for i1 in passing:
        worst = min(payoff_2card(order, i1, i2).alpha for i2 in range(N + 1))
        if worst >= 0.0:
            verified.append(i1)

    findings = []
    if tuple(passing) != (EXPECTED_2CARD,):
        exp = order.hand(EXPECTED_2CARD)
        msg = (
            f"window scan optimum set {sorted(passing)} differs from the expected"
            f" optimum {{{EXPECTED_2CARD}}} ({exp})"
        )
        bad = [r for r in rows if r["i1"] == EXPECTED_2CARD]
        if bad:
            r = bad[0]
            worst_i2 = min(range(N + 1), key=lambda i2: payoff_2card(order, EXPECTED_2CARD, i2).alpha)
            msg += (
                f"; at {EXPECTED_2CARD}: cond_i={r['cond_i']} (max pbar below"
                f" {r['max_pbar_below']:.9g}), cond_ii={r['cond_ii']} (min pbar above"
                f" {r['min_pbar_above']:.9g}); worst reply {worst_i2}"
                f" ({order.hand(worst_i2) if worst_i2 else 'always hold'}) gives alpha"
                f" {payoff_2card(order, EXPECTED_2CARD, worst_i2).alpha:.9g}"
            )
        findings.append(msg)
    # Local test with the conditioning hand shifted down by one index, i.e.
    # ptilde(i : i-1) in place of ptilde(i : i).  Kept as a diagnostic.
    D = N - order.M
    shifted = tuple(
        i for i in range(lo, hi + 1)
        if (i - exclusion_count(order, i, i - 1)) / D <= 0.5
        <= (i + 1 - exclusion_count(order, i + 1, i)) / D
    )
    if findings and shifted == (EXPECTED_2CARD,):
        findings.append(
            "conditioning the local test on hand i-1 instead of hand i"
            f" reproduces {{{EXPECTED_2CARD}}}"
        )
    return Optimal2Card(
        tuple(passing),
        tuple(str(order.hand(i)) for i in passing),
        tuple(verified),
        (lo, hi),
        tuple(rows),
        tuple(findings),
        shifted,
    )

from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, strategies as st

from guts import discrete as dg
from guts.exceptions import InputError

ORDER = dg.build_hand_order()
N = ORDER.N


@lru_cache(maxsize=1)
def disjoint_matrix():
    c = ORDER.cards
    same = (c[:, None, 0] == c[None, :, 0]) | (c[:, None, 0] == c[None, :, 1])
    same |= (c[:, None, 1] == c[None, :, 0]) | (c[:, None, 1] == c[None, :, 1])
    return ~same


def brute_force(i1, i2, values, valid):
    """Average two-player returns over every ordered deal with hand values
    ``values`` (strength order) and deal mask ``valid``."""
    h1 = values[:, None] > i1
    h2 = values[None, :] > i2
    win = values[:, None] > values[None, :]
    ret = np.where(h1 & h2, np.where(win, 2, -2), 0)
    ret = np.where(h1 & ~h2, 1, ret)
    ret = np.where(~h1 & h2, -1, ret)
    mult = (h1 & h2) | (~h1 & ~h2)
    n = valid.sum()
    return ret[valid].sum() / n, mult[valid].sum() / n


def brute_2card(i1, i2):
    return brute_force(i1, i2, np.arange(1, N + 1), disjoint_matrix())


def brute_1card(i1, i2, deck=52):
    v = np.arange(1, deck + 1)
    return brute_force(i1, i2, v, ~np.eye(deck, dtype=bool))


# ---------------------------------------------------------------- cards and hands


def test_card_round_trip():
    for i in range(1, 53):
        c = dg.Card.from_index(i)
        assert c.index == i
        assert dg.Card.parse(str(c)) == c
    assert str(dg.Card.from_index(1)) == "2C"
    assert str(dg.Card.from_index(52)) == "AS"


def test_hand_parsing():
    h = dg.Hand2.parse("JS/7C")
    assert str(h.high) == "JS" and str(h.low) == "7C"
    assert dg.Hand2.parse("7C/JS") == h
    for bad in ("JS", "JS/JS", "1S/7C", "JX/7C"):
        with pytest.raises(InputError):
            dg.Hand2.parse(bad)


def test_hand_order_counts():
    assert N == 1326 and ORDER.n_nonpairs == 1248
    assert all(ORDER.hand(i).is_pair for i in range(1249, 1327))
    assert len({frozenset(h.cards) for h in ORDER.hands}) == 1326


def test_index_formula_on_all_nonpairs():
    assert all(dg.hand_index_formula(ORDER.hand(i)) == i for i in range(1, 1249))


def test_named_hands():
    assert ORDER.index_of("JS/7C") == 669
    assert str(ORDER.hand(668)) == "JD/7S"
    assert ORDER.index_of("3C/2C") == 1
    assert ORDER.index_of("AS/AD") == 1326


def test_pairs_beat_every_nonpair_and_order_by_rank():
    ranks = [ORDER.hand(i).high.rank for i in range(1249, 1327)]
    assert ranks == sorted(ranks)


def test_excluded_hand_count():
    d = disjoint_matrix()
    assert (d.sum(axis=1) == N - ORDER.M).all()
    assert ORDER.M == 101


# ---------------------------------------------------------------- one card


@given(st.integers(0, 52), st.integers(0, 52))
def test_one_card_against_enumeration(i1, i2):
    p = dg.payoff_1card(i1, i2)
    a, b = brute_1card(i1, i2)
    assert p.alpha == pytest.approx(a, abs=1e-14)
    assert p.beta == pytest.approx(b, abs=1e-14)


@given(st.integers(2, 30), st.data())
def test_one_card_small_decks(deck, data):
    i1 = data.draw(st.integers(0, deck))
    i2 = data.draw(st.integers(0, deck))
    p = dg.payoff_1card(i1, i2, deck)
    a, b = brute_1card(i1, i2, deck)
    assert p.alpha == pytest.approx(a, abs=1e-14)
    assert p.beta == pytest.approx(b, abs=1e-14)


@pytest.mark.parametrize("deck", [2, 3, 7, 10, 52])
def test_one_card_optimum_by_exhaustion(deck):
    maximin = [min(brute_1card(i1, i2, deck)[0] for i2 in range(deck + 1))
               for i1 in range(deck + 1)]
    best = max(maximin)
    expect = tuple(i for i, v in enumerate(maximin) if v >= best - 1e-15)
    assert dg.optimal_1card(deck) == expect


def test_one_card_saddle_bound():
    for i2 in range(53):
        assert dg.payoff_1card(26, i2).alpha >= abs(i2 - 26) / 2652 - 1e-15
    assert dg.payoff_1card(26, 27).alpha == pytest.approx(1 / 2652, abs=1e-16)


# ---------------------------------------------------------------- two cards


@given(st.integers(0, N), st.integers(0, N))
def test_two_card_against_enumeration(i1, i2):
    p = dg.payoff_2card(ORDER, i1, i2)
    a, b = brute_2card(i1, i2)
    assert p.alpha == pytest.approx(a, abs=1e-12)
    assert p.beta == pytest.approx(b, abs=1e-12)


@pytest.mark.parametrize("i1,i2", [(669, 668), (668, 669), (612, 713), (1326, 0), (0, 0)])
def test_two_card_against_enumeration_fixed(i1, i2):
    p = dg.payoff_2card(ORDER, i1, i2)
    a, b = brute_2card(i1, i2)
    assert p.alpha == pytest.approx(a, abs=1e-12)
    assert p.beta == pytest.approx(b, abs=1e-12)


def test_two_card_optimum_by_exhaustion():
    res = dg.optimal_2card(ORDER)
    assert res.indices == res.verified == (668,)
    worst = min(brute_2card(668, i2)[0] for i2 in range(N + 1))
    assert worst >= -1e-15
    assert brute_2card(669, 668)[0] < 0
    assert res.findings


def test_shifted_conditioning_reproduces_669():
    assert dg.optimal_2card(ORDER).shifted_local == (669,)


@given(st.integers(0, N), st.integers(1, N))
def test_conditional_probs_bounds(i, j):
    pt = dg.conditional_probs(ORDER, i, j)
    D = N - ORDER.M
    assert max(0, i - ORDER.M) / D - 1e-15 <= pt <= min(i, D) / D + 1e-15


@given(st.integers(1, N), st.integers(0, N))
def test_exclusion_count_matches_direct_count(i2, i1):
    if i1 == 0:
        return
    shared = sum(not ORDER.disjoint(k, i2) for k in range(1, i1 + 1))
    assert dg.exclusion_count(ORDER, i1, i2) == shared


def test_exclusion_counts_for_worked_example():
    i1 = ORDER.index_of("10C/7H")
    got = [dg.exclusion_count(ORDER, i1, ORDER.index_of(h)) for h in ("10C/7C", "10C/6S", "9S/7C")]
    closed = [dg.exclusion_count(ORDER, i1, ORDER.index_of(h), "closed_form")
              for h in ("10C/7C", "10C/6S", "9S/7C")]
    assert got == closed == [50, 53, 56]


def test_closed_form_exact_in_window():
    log = dg.exclusion_log(ORDER)
    lo, hi = dg.search_window(ORDER)
    assert (lo, hi) == (612, 713)
    assert len(log) == (hi - lo + 1) * (hi - lo) // 2
    assert all(r["S_oracle"] == r["S_closed"] for r in log)


def test_closed_form_cases_ii_to_iv_everywhere():
    rng = np.random.default_rng(0)
    for _ in range(3000):
        i1, i2 = sorted(rng.integers(1, 1249, 2), reverse=True)
        if i1 == i2:
            continue
        case = dg.exclusion_case(ORDER, i1, i2)
        if case == "i" or ORDER.hand(i1).low.suit < 2:
            continue
        assert dg.exclusion_count(ORDER, i1, i2, "closed_form") == dg.exclusion_count(ORDER, i1, i2)


def test_closed_form_domain():
    with pytest.raises(InputError):
        dg.exclusion_count(ORDER, 100, 200, "closed_form")
    with pytest.raises(InputError):
        dg.exclusion_count(ORDER, 1300, 10, "closed_form")
    with pytest.raises(InputError):
        dg.exclusion_count(ORDER, 10, 5, "bogus")


def test_pbar_near_p_in_window():
    lo, hi = dg.search_window(ORDER)
    D = N - ORDER.M
    worst = max(abs(dg.pbar(ORDER, a, b) - a / N)
                for a in range(lo, hi + 1) for b in range(lo, a))
    assert worst <= 2 * ORDER.M / D


def test_pbar_is_mean_of_conditional_probs():
    a, b = 700, 650
    direct = np.mean([dg.conditional_probs(ORDER, a, j) for j in range(b + 1, a + 1)])
    assert dg.pbar(ORDER, a, b) == pytest.approx(direct, abs=1e-15)


def test_approximate_beta_is_close_but_not_exact():
    p = dg.payoff_2card(ORDER, 669, 700)
    assert p.beta_approx == pytest.approx(p.beta, abs=2e-3)


@given(st.integers(0, N), st.integers(0, N))
def test_two_card_antisymmetry(i1, i2):
    a = dg.payoff_2card(ORDER, i1, i2).alpha
    b = dg.payoff_2card(ORDER, i2, i1).alpha
    assert a == pytest.approx(-b, abs=1e-14)


def test_input_validation():
    with pytest.raises(InputError):
        dg.payoff_1card(53, 0)
    with pytest.raises(InputError):
        dg.payoff_2card(ORDER, 1327, 0)
    with pytest.raises(InputError):
        dg.payoff_1card(-1, 0)
    with pytest.raises(InputError):
        ORDER.hand(0)

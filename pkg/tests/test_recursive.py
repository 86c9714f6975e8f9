import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from guts.exceptions import InputError, ParameterError
from guts.recursive import (
    MatrixGamePair,
    StagePayoff,
    matrix_value,
    termination_toolkit,
    value_map_iterate,
)

entries = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def small_matrices(max_side=3):
    shape = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shape.flatmap(lambda s: arrays(np.float64, s, elements=entries))


def simplex_grid(k, steps):
    """All points of the k-simplex with coordinates in multiples of 1/steps."""
    for c in itertools.product(range(steps + 1), repeat=k - 1):
        if sum(c) <= steps:
            yield np.array(list(c) + [steps - sum(c)]) / steps


def brute_value(A, steps=60):
    A = np.asarray(A, float)
    lower = max(float((x @ A).min()) for x in simplex_grid(A.shape[0], steps))
    upper = min(float((A @ y).max()) for y in simplex_grid(A.shape[1], steps))
    return lower, upper


# ---------------------------------------------------------------- matrix_value


def test_rock_paper_scissors():
    mv = matrix_value([[0, -1, 1], [1, 0, -1], [-1, 1, 0]])
    assert abs(mv.value) <= 1e-9
    np.testing.assert_allclose(mv.x, [1 / 3] * 3, atol=1e-9)
    np.testing.assert_allclose(mv.y, [1 / 3] * 3, atol=1e-9)


def test_saddle_point_is_exact():
    mv = matrix_value([[3.0, 1.0], [4.0, 2.0]])
    assert mv.value == 2.0
    assert list(mv.x) == [0.0, 1.0]


def test_two_by_two_mixed():
    # equalising strategies give value (ad - bc)/(a + d - b - c)
    mv = matrix_value([[3.0, 0.0], [1.0, 2.0]])
    assert mv.value == pytest.approx(1.5, abs=1e-12)


def test_one_by_one():
    assert matrix_value([[-0.25]]).value == -0.25


@given(small_matrices())
def test_value_is_certified_by_strategies(A):
    mv = matrix_value(A)
    assert float((mv.x @ A).min()) >= mv.value - 1e-9
    assert float((A @ mv.y).max()) <= mv.value + 1e-9
    assert mv.x.sum() == pytest.approx(1.0) and mv.y.sum() == pytest.approx(1.0)
    assert (mv.x >= 0).all() and (mv.y >= 0).all()


@given(small_matrices())
def test_transpose_negation_duality(A):
    assert matrix_value(-A.T).value == pytest.approx(-matrix_value(A).value, abs=1e-9)


@given(small_matrices(), st.floats(-3, 3), st.floats(0.1, 4))
def test_affine_equivariance(A, shift, scale):
    v = matrix_value(A).value
    assert matrix_value(scale * A + shift).value == pytest.approx(scale * v + shift, abs=1e-8)


@given(small_matrices(max_side=3))
def test_against_simplex_grid_search(A):
    lower, upper = brute_value(A, steps=30)
    v = matrix_value(A).value
    assert lower - 1e-9 <= v <= upper + 1e-9


def test_four_by_four_against_grid_search():
    rng = np.random.default_rng(3)
    for _ in range(3):
        A = rng.uniform(-1, 1, (4, 4))
        lower, upper = brute_value(A, steps=16)
        v = matrix_value(A).value
        assert lower - 1e-9 <= v <= upper + 1e-9


def test_rejects_bad_matrices():
    with pytest.raises(InputError):
        matrix_value([[np.nan]])
    with pytest.raises(InputError):
        matrix_value(np.zeros((0, 2)))


# ---------------------------------------------------------------- value map


def test_scalar_game_converges_to_geometric_limit():
    # V = a + b V  =>  V = a / (1 - b)
    game = MatrixGamePair([[0.3]], [[0.4]], 1.0)
    lo = value_map_iterate(game, "lower")
    hi = value_map_iterate(game, "upper")
    assert lo.converged and hi.converged
    assert lo.limit == pytest.approx(0.5, abs=1e-10)
    assert hi.limit == pytest.approx(0.5, abs=1e-10)


def test_trace_starts_at_minus_and_plus_t():
    game = MatrixGamePair([[0.0]], [[0.5]], 2.0)
    assert value_map_iterate(game, "lower", n_max=3).values[0] == -2.0
    assert value_map_iterate(game, "upper", n_max=3).values[0] == 2.0


def test_antisymmetric_game_has_value_zero():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    B = np.array([[0.5, 0.2], [0.2, 0.5]])
    trace = value_map_iterate(MatrixGamePair(A, B, 1.0), "lower", tol=1e-13)
    assert trace.limit == pytest.approx(0.0, abs=1e-9)


@given(arrays(np.float64, (2, 2), elements=st.floats(-1, 1)),
       arrays(np.float64, (2, 2), elements=st.floats(0, 0.9)))
def test_traces_are_monotone_and_agree(A, B):
    # with |A| <= 0.1 and B <= 0.9 the fixed point lies in [-1, 1] = [-t, t]
    A = 0.1 * A
    game = MatrixGamePair(A, B, 1.0)
    lo = value_map_iterate(game, "lower", n_max=3000, tol=1e-12)
    hi = value_map_iterate(game, "upper", n_max=3000, tol=1e-12)
    assert np.all(np.diff(lo.values) >= -1e-12)
    assert np.all(np.diff(hi.values) <= 1e-12)
    assert lo.limit == pytest.approx(hi.limit, abs=1e-7)
    assert abs(lo.limit - matrix_value(A + B * lo.limit).value) <= 1e-8


def test_trace_csv_header_and_rows():
    trace = value_map_iterate(MatrixGamePair([[0.0]], [[0.5]], 1.0), "lower", n_max=3, tol=0.0)
    lines = trace.to_csv().strip().splitlines()
    assert lines[0] == "n,V_n"
    assert lines[1] == "0,-1"
    assert len(lines) == 5


def test_game_json_round_trip():
    game = MatrixGamePair([[0.0, 1.0]], [[0.5, 0.25]], 1.5)
    again = MatrixGamePair.from_json(__import__("json").dumps(game.to_dict()))
    np.testing.assert_array_equal(again.A, game.A)
    np.testing.assert_array_equal(again.B, game.B)
    assert again.t == 1.5


def test_game_validation():
    with pytest.raises(InputError):
        MatrixGamePair([[0.0]], [[-0.1]], 1.0)
    with pytest.raises(InputError):
        MatrixGamePair([[0.0, 1.0]], [[0.5]], 1.0)
    with pytest.raises(InputError):
        MatrixGamePair([[0.0]], [[0.5]], -1.0)


# ---------------------------------------------------------------- termination


def test_termination_example_with_zero_alpha0():
    chk = termination_toolkit(StagePayoff(0.0, 0.5), 0.0, 1.0, 0.4, 3)
    assert chk.criterion_met
    assert chk.v_n == pytest.approx(-(0.6**3), abs=1e-15)


def test_termination_fails_without_margin():
    chk = termination_toolkit(StagePayoff(0.0, 1.0), 0.0, 1.0, 1e-6, 5)
    assert not chk.criterion_met


def test_termination_parameter_errors():
    with pytest.raises(ParameterError):
        termination_toolkit(StagePayoff(0.0, 0.5), 0.0, 0.0, 0.1, 1)
    with pytest.raises(ParameterError):
        termination_toolkit(StagePayoff(0.0, 0.5), 0.0, 1.0, 1.5, 1)


def test_stage_payoff_rejects_negative_beta():
    with pytest.raises(InputError):
        StagePayoff(0.0, -0.1)


@given(st.floats(0, 1), st.floats(0.01, 0.99), st.integers(0, 50))
def test_lower_bound_matches_scalar_iteration(alpha0, eps, n):
    # the scalar game A = alpha0, B = 1 - eps attains the bound when alpha0 = 0,
    # and lies above it otherwise
    game = MatrixGamePair([[alpha0]], [[1.0 - eps]], 1.0)
    trace = value_map_iterate(game, "lower", n_max=n, tol=0.0)
    vn = termination_toolkit(StagePayoff(alpha0, 1.0 - eps), alpha0, 1.0, eps, n).v_n
    assert trace.values[n] >= vn - 1e-12
    if alpha0 == 0:
        assert trace.values[n] == pytest.approx(vn, abs=1e-12)


def test_bound_tends_to_alpha0_minus_nothing():
    v = termination_toolkit(StagePayoff(0.2, 0.5), 0.2, 1.0, 0.5, 200).v_n
    assert v == pytest.approx(0.2, abs=1e-12)
    assert math.isfinite(v)

"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary.
"""

import pytest

from guts import verify

SAMPLES = 1_000_000


def check(acceptance_line, number, res, label=None):
    label = label or res.name
    status = "PASS" if res.passed else "FAIL"
    acceptance_line(f"[{number:>2}] {status}  {label}")
    for d in res.details:
        print("      " + d)
    for f in res.findings:
        acceptance_line(f"       finding: {f}")
    assert res.passed, "\n".join(d for d in res.details if d.startswith("FAIL"))


def test_01_two_player_optimum(acceptance_line):
    check(acceptance_line, 1, verify.two_player_optimum())


def test_02_oracle_triangle(acceptance_line):
    check(acceptance_line, 2, verify.oracle_triangle(samples=SAMPLES))


def test_03_three_player_impossibility(acceptance_line):
    check(acceptance_line, 3, verify.three_player_impossibility())


def test_04_coalition_sweep(acceptance_line):
    res = verify.coalition_sweep()
    check(acceptance_line, 4, res, f"{res.name}: max alpha {res.data['max_alpha']:.6g}")


@pytest.mark.parametrize("n", range(2, 9))
def test_05_bloc_suite(acceptance_line, n):
    check(acceptance_line, 5, verify.bloc_suite(n))


def test_06_derivative_checks(acceptance_line):
    check(acceptance_line, 6, verify.derivative_checks())


def test_07_bound_sharpness(acceptance_line):
    check(acceptance_line, 7, verify.sharpness())


def test_08_matrix_solver(acceptance_line):
    check(acceptance_line, 8, verify.matrix_solver())


def test_09_one_card(acceptance_line):
    check(acceptance_line, 9, verify.one_card())


def test_10_two_card(acceptance_line):
    check(acceptance_line, 10, verify.two_card())


def test_11_weenie_rule(acceptance_line):
    check(acceptance_line, 11, verify.weenie_checks(samples=SAMPLES))


def test_12_bookkeeping(acceptance_line):
    check(acceptance_line, 12, verify.bookkeeping(samples=SAMPLES))


def test_13_symmetry_identities(acceptance_line):
    check(acceptance_line, 13, verify.symmetry(samples=SAMPLES))

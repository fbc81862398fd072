import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fuzmet import expr as ex
from fuzmet.expr import BinOp, Num, Pow, Var


def test_precedence_shapes():
    assert ex.parse("n+1/n") == BinOp("+", Var(), BinOp("/", Num(1.0), Var()))
    assert ex.parse("1/2^n") == BinOp("/", Num(1.0), Pow(Num(2.0), Var()))


@pytest.mark.parametrize("text,offset", [("n+)", 2), ("", 0), ("n n", 2), ("2^(n)", 2), ("(n", 2), ("n$", 1), ("1e3", 1)])
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ex.ExprSyntaxError) as info:
        ex.parse(text)
    assert info.value.offset == offset
    assert f"offset {offset}" in str(info.value)


@pytest.mark.parametrize("text,n,want", [
    ("n+1/n", 2, 2.5),
    ("1/2^n", 3, 0.125),
    ("1/2+1/(2*n)", 1, 1.0),
    ("3/4+(-1)^n/(4*n)", 1, 0.5),
    # unary minus binds inside the power base
    ("-n^2", 3, 9.0),
    ("-(n^2)", 3, -9.0),
    ("1.5*2 - n", 5, -2.0),
])
def test_evaluate(text, n, want):
    assert ex.evaluate(ex.parse(text), n) == want


def test_division_by_zero_is_reported():
    with pytest.raises(ex.EvalError, match="division by zero"):
        ex.evaluate(ex.parse("1/(n-1)"), 1)
    assert ex.evaluate(ex.parse("1/(n-1)"), 2) == 1.0


def test_overflow_is_reported():
    with pytest.raises(ex.EvalError, match="non-finite"):
        ex.evaluate(ex.parse("10^n"), 400)


def test_vectorised_masks():
    values, divzero, nonfinite = ex.evaluate_many(ex.parse("1/(n-2)"), np.arange(1, 5))
    assert divzero.tolist() == [False, True, False, False]
    assert not nonfinite.any()
    assert values[0] == -1.0 and values[3] == 0.5


def test_parse_constant():
    assert ex.parse_constant("inf") == math.inf
    assert ex.parse_constant("-inf") == -math.inf
    assert ex.parse_constant("1/2") == 0.5
    assert ex.parse_constant(3) == 3.0
    with pytest.raises(ValueError):
        ex.parse_constant("n")


def test_has_var():
    assert ex.has_var(ex.parse("2*(1+n)"))
    assert not ex.has_var(ex.parse("2^3"))


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), depth=st.integers(1, 5))
def test_print_parse_round_trip(seed, depth):
    e = ex.random_expr(np.random.default_rng(seed), depth)
    assert ex.parse(ex.to_text(e)) == e
    text = ex.to_text(e)
    assert ex.parse(ex.to_text(ex.parse(text))) == ex.parse(text)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10**6))
def test_evaluation_is_total_modulo_errors(seed, n):
    e = ex.random_expr(np.random.default_rng(seed), 5)
    try:
        v = ex.evaluate(e, n)
    except ex.EvalError:
        return
    assert math.isfinite(v)
    assert ex.evaluate(e, n) == v

import math

import numpy as np
import pytest

from vidg.expr import ParseError, compile_expr
from vidg.functions import constant_value


@pytest.mark.parametrize("text,t,expected", [
    ("1 + 2 * t", 0.5, 2.0),
    ("2^3^2", 0.0, 512.0),
    ("-t**2", 3.0, -9.0),
    ("(1 + t) / 4", 1.0, 0.5),
    ("exp(-t) * t^1.5", 0.7, 0.7**1.5 * math.exp(-0.7)),
    ("sin(pi * t) + cos(t)", 0.25, math.sin(math.pi / 4) + math.cos(0.25)),
    ("sqrt(t) * gamma(2.5)", 4.0, 2 * math.gamma(2.5)),
    ("pow(t, 0.5)", 9.0, 3.0),
    ("ml(1, -t)", 0.5, math.exp(-0.5)),
    ("ml(2, -t^2)", 1.0, math.cos(1.0)),
    ("1e-3 * t + .5", 2.0, 0.502),
])
def test_values(text, t, expected):
    assert float(compile_expr(text)(t)) == pytest.approx(expected, rel=1e-13)


def test_vectorized_and_constant_folding():
    f = compile_expr("t * exp(t)")
    t = np.linspace(0, 1, 7)
    assert np.allclose(f(t), t * np.exp(t))
    c = compile_expr("1 / gamma(0.5)")
    assert constant_value(c) == pytest.approx(1 / math.sqrt(math.pi))
    assert c(t).shape == t.shape
    assert constant_value(compile_expr(2)) == 2.0


def test_offending_token_reported():
    with pytest.raises(ParseError) as info:
        compile_expr("t +* 2")
    assert info.value.token == "*" and info.value.pos == 3
    assert "'*'" in str(info.value)


@pytest.mark.parametrize("text", ["", "t +", "foo(t)", "exp(t, 2)", "(t", "t)", "2 $ t", "import os",
                                  "ml(t, t)", "pow(t)"])
def test_rejects(text):
    with pytest.raises(ParseError):
        compile_expr(text)


def test_non_string_rejected():
    with pytest.raises(ParseError):
        compile_expr(["t"])

import math

import pytest

from hdicho.expressions import ExpressionError, parse_expression


@pytest.mark.parametrize(
    "src,t,expected",
    [
        ("1 + 2*3", 0.0, 7.0),
        ("2^3^2", 0.0, 512.0),  # right-associative power
        ("-t^2", 3.0, -9.0),
        ("(1 + t)/2", 3.0, 2.0),
        ("exp(t)", 1.5, math.exp(1.5)),
        ("log(t)", 2.0, math.log(2.0)),
        ("sin(t)*cos(t)", 0.7, math.sin(0.7) * math.cos(0.7)),
        ("1/t - 2/t", 4.0, -0.25),
        ("3.5e-2 + t", 1.0, 1.035),
        ("--t", 2.0, 2.0),
    ],
)
def test_evaluation(src, t, expected):
    fn = parse_expression(src)
    assert fn(t) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize(
    "src",
    ["", "   ", "1 +", "sin 2", "foo(t)", "(1", "1 2", "t @ 2", "exp()"],
)
def test_rejects_malformed(src):
    with pytest.raises(ExpressionError):
        parse_expression(src)


def test_error_carries_position():
    with pytest.raises(ExpressionError) as info:
        parse_expression("1 + foo(t)")
    assert info.value.position == 4

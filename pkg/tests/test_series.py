from fractions import Fraction

import pytest

from cylg.series import (LaurentPoly, MultiPoly, PowerSeries, SeriesMismatch, monomials, ps_exp, ps_log,
                         ps_qddq)


def test_binomial_square():
    a = PowerSeries([1, 1], 5)
    assert (a * a).coeffs == [1, 2, 1]


def test_truncation_takes_the_smaller_order():
    s = PowerSeries([1], 4) + PowerSeries([1], 6)
    assert s.order == 4 and s.coeffs == [2]


def test_exp_log_inverse():
    x = PowerSeries([0, 1, Fraction(1, 3)], 8)
    assert ps_exp(x).coeffs[:5] == [1, 1, Fraction(5, 6), Fraction(1, 2), Fraction(19, 72)]
    assert ps_log(ps_exp(x)) == x


def test_exp_log_domain():
    with pytest.raises(ValueError):
        ps_exp(PowerSeries([1, 1], 4))
    with pytest.raises(ValueError):
        ps_log(PowerSeries([2, 1], 4))


def test_variable_mismatch():
    with pytest.raises(SeriesMismatch):
        PowerSeries([1, 1], 5) + PowerSeries([1], 5, var="u")


def test_qddq_is_a_derivation():
    a, b = PowerSeries([1, 2, 0, 5], 6), PowerSeries([3, 0, 1, 1, 7], 6)
    assert ps_qddq(a * b) == ps_qddq(a) * b + a * ps_qddq(b)


def test_half_integer_grid():
    s = PowerSeries.from_dict({Fraction(1, 2): 2, 1: 1}, 3, grid=2)
    assert list(s.terms()) == [(Fraction(1, 2), 2), (1, 1)]
    with pytest.raises(SeriesMismatch):
        PowerSeries.from_dict({Fraction(1, 3): 1}, 3, grid=2)


def test_payload_roundtrip():
    s = PowerSeries([Fraction(1, 3), 0, -2, Fraction(7, 2**80)], 6)
    assert PowerSeries.from_payload(s.to_payload(), 6) == s


def test_multipoly_arithmetic():
    vs = ("a", "b")
    a, b = MultiPoly.var(vs, "a"), MultiPoly.var(vs, "b")
    p = (a + b) * (a + b)
    assert p.terms == {(2, 0): 1, (1, 1): 2, (0, 2): 1}
    assert p.partial("a").terms == {(1, 0): 2, (0, 1): 2}
    assert p.substitute({"a": b}).terms == {(0, 2): 4}
    assert p.degree() == 2
    assert MultiPoly.from_json(p.to_json()) == p


def test_monomials():
    assert list(monomials(2, 2)) == [(2, 0), (1, 1), (0, 2)]


def test_laurent():
    p = LaurentPoly({-1: 2, 0: 1})
    assert (p * p).terms == {-2: 4, -1: 4, 0: 1}
    assert p.min_exponent() == -1
    assert p.rename("s").var == "s"

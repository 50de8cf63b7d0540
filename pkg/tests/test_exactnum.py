from fractions import Fraction

import mpmath
import pytest

from cylg.exactnum import (I, ISQRT2, SQRT2, InconsistentSystem, NoStableFit, QExt, qext_embed,
                           rationalize, solve_exact, to_fraction)


def test_field_relations():
    assert SQRT2 * SQRT2 == QExt(2)
    assert I * I == QExt(-1)
    assert I * SQRT2 == ISQRT2
    assert ISQRT2 * ISQRT2 == QExt(-2)


def test_inverse_and_division():
    a = QExt(Fraction(1, 3), 2, -1, Fraction(5, 7))
    assert a * a.inverse() == QExt(1)
    assert (a / a) == QExt(1)
    with pytest.raises(ZeroDivisionError):
        QExt(0).inverse()


def test_conjugations_are_automorphisms():
    a, b = QExt(1, 2, 3, 4), QExt(-1, Fraction(1, 2), 0, 1)
    for conj in (QExt.conj_sqrt2, QExt.conj_i):
        assert conj(a * b) == conj(a) * conj(b)
        assert conj(a + b) == conj(a) + conj(b)


def test_rational_views():
    assert QExt(Fraction(3, 4)).is_rational()
    assert QExt(Fraction(3, 4)).to_fraction() == Fraction(3, 4)
    assert not SQRT2.is_rational()
    assert to_fraction(Fraction(5, 2)) == Fraction(5, 2)


def test_json_roundtrip():
    a = QExt(Fraction(-7, 3), Fraction(1, 2**70), 0, 11)
    assert QExt.from_json(a.to_json()) == a


def test_embed():
    v = qext_embed(QExt(1, 1, 1, 0), 200)
    with mpmath.workprec(200):
        assert abs(v - (1 + mpmath.sqrt(2) + 1j)) < mpmath.mpf(2) ** -190


def test_rationalize_recovers_field_element():
    target = QExt(Fraction(289, 2642411520), Fraction(-3, 17), Fraction(1, 32), 0)

    def at(p):
        return qext_embed(target, p)

    assert rationalize(at(192), v_high=at(320)) == target


def test_rationalize_rejects_transcendental():
    with mpmath.workprec(320):
        pi_hi = +mpmath.pi
    with mpmath.workprec(192):
        pi_lo = +mpmath.pi
    with pytest.raises(NoStableFit):
        rationalize(pi_lo, max_denominator=10**6, v_high=pi_hi)


def test_solve_exact():
    rows = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(-1)]]
    sol, free = solve_exact(rows, [Fraction(3), Fraction(0)])
    assert sol == [1, 1] and not free
    with pytest.raises(InconsistentSystem):
        solve_exact([[Fraction(1)], [Fraction(1)]], [Fraction(0), Fraction(1)])

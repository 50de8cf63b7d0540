from fractions import Fraction

import mpmath
import pytest

from cylg.cayley import (Sl2Element, a_cylg, cayley_rationalize, cayley_taylor, desired_expansions, ode_residual,
                         ode_taylor, sl2_apply, sl2_on_potential, sl2_scaling, taylor_from_qseries)
from cylg.exactnum import SQRT2, QExt

TOL = mpmath.mpf(10) ** -40


def worst(res):
    return max((abs(v) for vs in res.values() for v in vs), default=0)


@pytest.fixture(scope="module")
def at_minus_one():
    return taylor_from_qseries(-1, 8, precision=256)


@pytest.fixture(scope="module")
def cayley():
    return cayley_taylor(n_coeffs=9, precision=256)


def test_a_cylg_is_unimodular():
    A = a_cylg(256)
    assert A.check(tol=mpmath.mpf(10) ** -60)


def test_qseries_taylor_solves_the_system(at_minus_one):
    with mpmath.workprec(256):
        assert worst(ode_residual(at_minus_one.coeffs)) < TOL


def test_sl2_action_preserves_the_system(at_minus_one):
    with mpmath.workprec(256):
        c = mpmath.mpf(1) / 5
        A = Sl2Element(mpmath.mpf(4) / 5, mpmath.mpf(-1), c, mpmath.mpf(1))
        assert A.check(tol=TOL)
        fa = sl2_apply(A, at_minus_one, tol=TOL)
        assert worst(ode_residual(fa.coeffs)) < TOL


def test_scaling_preserves_the_system(at_minus_one):
    with mpmath.workprec(256):
        fs = sl2_scaling(mpmath.mpf(3) / 2, at_minus_one)
        assert worst(ode_residual(fs.coeffs)) < TOL
    with pytest.raises(ValueError):
        sl2_scaling(0, at_minus_one)


def test_sl2_modes_agree(at_minus_one):
    with mpmath.workprec(256):
        A = Sl2Element(mpmath.mpf(4) / 5, mpmath.mpf(-1), mpmath.mpf(1) / 5, mpmath.mpf(1))
        p1 = sl2_on_potential(A, at_minus_one, mode="substitution", degree=3)
        p2 = sl2_on_potential(A, at_minus_one, mode="formula", degree=3)
        keys = set(p1.terms) | set(p2.terms)
        assert keys
        diff = max(abs(mpmath.mpmathify(p1.terms.get(k, 0) - p2.terms.get(k, 0))) for k in keys)
        assert diff < mpmath.mpf(10) ** -30


def test_w_shift_sign():
    with mpmath.workprec(256):
        good = cayley_taylor(n_coeffs=6, precision=256, w_shift=1)
        bad = cayley_taylor(n_coeffs=6, precision=256, w_shift=-1)
        assert worst(ode_residual(good.coeffs)) < TOL
        assert worst(ode_residual(bad.coeffs)) > mpmath.mpf(10) ** -3


def test_desired_expansions(cayley):
    with mpmath.workprec(256):
        d = desired_expansions(cayley)
        want = ((1, 0), (0, mpmath.mpf(-1) / 4), (1 / mpmath.sqrt(2), 0))
        for got, exp in zip(d, want):
            assert abs(got[0] - exp[0]) < TOL and abs(got[1] - exp[1]) < TOL


def test_cayley_coefficients_are_in_q_sqrt2(cayley):
    hi = cayley_taylor(n_coeffs=9, precision=384)
    r = cayley_rationalize(cayley, hi)
    assert not r.flags
    assert r.rationalized["z"][0] == QExt(Fraction(1, 2))
    assert r.rationalized["x"][0] + r.rationalized["y"][0] == SQRT2 * QExt(Fraction(1, 2))


def test_exact_ode_taylor():
    init = {"x": Fraction(1), "y": Fraction(1, 2), "z": Fraction(1, 5), "w": Fraction(1, 3)}
    s = ode_taylor(init, 7)
    assert all(isinstance(c, (int, Fraction)) for cs in s.values() for c in cs)
    assert all(v == 0 for vs in ode_residual(s).values() for v in vs)


def test_pipeline(pipeline):
    assert pipeline.mode == "exact"
    assert pipeline.all_rational and pipeline.ode_check and pipeline.cubic_block_ok
    assert pipeline.matches == len(pipeline.comparisons) == 15
    assert pipeline.coefficient(("12", "21", "22"), 8) == Fraction(289, 2642411520)
    assert pipeline.coefficient(("21", "21", "31"), 5) == Fraction(-1, 61440)

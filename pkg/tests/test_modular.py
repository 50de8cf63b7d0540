import mpmath
import pytest

from cylg.modular import (NoFit, eisenstein_f, fit_ode_rhs, gamma34, numeric_constants, ode_residuals,
                          theta_closed_forms, theta_logderiv, theta_qexp, theta_value, xyzw_qexp)
from cylg.series import ps_qddq


def sigma1(n):
    return sum(d for d in range(1, n + 1) if n % d == 0)


def test_theta_series_in_q8():
    # theta_3(q) = 1 + 2 sum q^(k^2/2), so theta_3(q^8) has support on 4 k^2
    assert theta_qexp(3, 8, 20).coeffs == [1, 0, 0, 0, 2] + [0] * 11 + [2]
    assert theta_qexp(4, 8, 20).coeffs == [1, 0, 0, 0, -2] + [0] * 11 + [2]
    assert theta_qexp(2, 8, 20).coeffs == [0, 2] + [0] * 7 + [2]


def test_jacobi_quartic_identity():
    n = 60
    t2, t3, t4 = (theta_qexp(p, 8, n) for p in (2, 3, 4))
    assert (t3 ** 4 - t2 ** 4 - t4 ** 4).is_zero()


def test_leading_terms():
    m = xyzw_qexp(8)
    assert m.x.coeffs == [1, 0, 0, 0, 4]
    assert m.y.coeffs == [0, 0, 4]
    assert m.z.coeffs == [0, 4, 0, 0, 0, 8]
    assert m.w.coeffs == [1, 0, 0, 0, -8]


def test_eisenstein(mfs200):
    f = eisenstein_f(201)
    assert f[0] == 1
    assert all(f[n] == -24 * sigma1(n) for n in range(1, 201))


def test_z_squared(mfs200):
    m = mfs200
    assert (m.z * m.z - 4 * m.x * m.y).is_zero()


def test_ode_residuals(mfs200):
    res = ode_residuals(200, mfs200)
    for key in ("r1", "r3", "r2_fitted", "rz"):
        assert res[key].is_zero(), key
    # the printed form of the second equation is off already at q^2
    assert next(iter(res["r2"].terms())) == (2, -4)


def test_fit_recovers_y_equation(mfs200):
    m = mfs200
    fit = fit_ode_rhs(ps_qddq(m.y), 4, 200, subject=m.y, mfs=m)
    assert fit == {"x^2": 1, "w": 1}


def test_fit_reports_failure():
    m = xyzw_qexp(8)
    with pytest.raises(NoFit):
        fit_ode_rhs(m.x, 0, 8, subject=m.y, mfs=m)


def test_gamma34_against_library():
    with mpmath.workprec(256):
        assert abs(gamma34(256) - mpmath.gamma(mpmath.mpf(3) / 4)) < mpmath.mpf(10) ** -70


def test_constants_relations():
    nc = numeric_constants(256)
    with mpmath.workprec(256):
        assert abs(nc.Theta - 2 * nc.K) < mpmath.mpf(10) ** -70
        assert abs(nc.kappa ** 2 - mpmath.pi * 1j / 2) < mpmath.mpf(10) ** -70
        assert mpmath.re(nc.kappa) > 0


def test_theta_values_at_i():
    cf = theta_closed_forms(256)
    with mpmath.workprec(256):
        for p in (2, 3, 4):
            assert abs(theta_value(p, 1j, 256) - cf[f"theta{p}"]) < mpmath.mpf(10) ** -50
            assert abs(theta_logderiv(p, 1j, 256) - cf[f"X{p}"]) < mpmath.mpf(10) ** -50


def test_theta_value_domain():
    with pytest.raises(ValueError):
        theta_value(3, -1j)

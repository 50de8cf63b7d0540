"""Theta constants, the second Eisenstein series and the functions x, y, z, w.

Two layers live here. The formal layer produces exact integer q-expansions.
The numeric layer evaluates theta constants at points of the upper half
plane with nome exp(pi i tau), plus the closed-form constants at tau = i
built from an AGM evaluation of Gamma(3/4).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .exactnum import InconsistentSystem, solve_exact
from .series import PowerSeries, ps_qddq

__all__ = [
    "ModularFunctionSet",
    "NumericConstants",
    "NoFit",
    "ThetaPrecisionError",
    "theta_qexp",
    "eisenstein_f",
    "xyzw_qexp",
    "ode_residuals",
    "fit_ode_rhs",
    "theta_value",
    "theta_logderiv",
    "gamma34",
    "numeric_constants",
    "theta_closed_forms",
]


class NoFit(ValueError):
    """The requested polynomial right-hand side does not exist."""


class ThetaPrecisionError(ArithmeticError):
    """The theta sum cannot reach the requested precision within budget."""


# ---------------------------------------------------------------------------
# formal q-expansions


def theta_qexp(p: int, argpower: int, order: int) -> PowerSeries:
    """theta_p(q**m) mod q**order with theta_3(q) = 1 + 2 sum q^(k^2/2) etc.

    The result lives on the half-integer grid when any exponent is not an
    integer (theta_2(q^4) and the m = 1 cases), otherwise on the integer grid.
    """
    if p not in (2, 3, 4):
        raise ValueError("p must be 2, 3 or 4")
    m = argpower
    if m < 1:
        raise ValueError("argpower must be positive")
    terms = {}
    if p == 2:
        # sum over k in Z of q^(m (k+1/2)^2 / 2) = 2 sum_{k >= 0}
        k = 0
        while True:
            e = Fraction(m * (2 * k + 1) ** 2, 8)
            if e >= order:
                break
            terms[e] = terms.get(e, 0) + 2
            k += 1
    else:
        terms[Fraction(0)] = 1
        k = 1
        while True:
            e = Fraction(m * k * k, 2)
            if e >= order:
                break
            sign = -1 if (p == 4 and k % 2) else 1
            terms[e] = terms.get(e, 0) + 2 * sign
            k += 1
    grid = 1 if all(e.denominator == 1 for e in terms) else 2
    return PowerSeries.from_dict(terms, order, grid)


def _sigma1_table(n: int) -> list:
    sig = [0] * n
    for d in range(1, n):
        for k in range(d, n, d):
            sig[k] += d
    return sig


def eisenstein_f(order: int) -> PowerSeries:
    """f(q) = 1 - 24 sum sigma_1(n) q^n mod q**order."""
    if order < 1:
        raise ValueError("order must be at least 1")
    sig = _sigma1_table(order)
    return PowerSeries([1] + [-24 * s for s in sig[1:]], order)


@dataclass(frozen=True)
class ModularFunctionSet:
    x: PowerSeries
    y: PowerSeries
    z: PowerSeries
    w: PowerSeries
    order: int

    def as_dict(self):
        return {"x": self.x, "y": self.y, "z": self.z, "w": self.w}


def xyzw_qexp(order: int, check: bool = True) -> ModularFunctionSet:
    """x = theta_3(q^8)^2, y = theta_2(q^8)^2, z = theta_2(q^4)^2 and
    w = (f(q^4) - 2 f(q^8) + 4 f(q^16)) / 3, all with integer coefficients."""
    if order < 1:
        raise ValueError("order must be at least 1")
    n = order
    x = theta_qexp(3, 8, n) ** 2
    y = theta_qexp(2, 8, n) ** 2
    z = (theta_qexp(2, 4, n) ** 2).to_grid(1)
    f = eisenstein_f(n // 4 + 1)
    comb = f.subs_power(4).truncate(n) - 2 * f.subs_power(8).truncate(n) + 4 * f.subs_power(16).truncate(n)
    comb = comb.truncate(n)
    cs = []
    for c in comb.coeffs:
        if c % 3:
            raise ArithmeticError("w has a non-integral coefficient")
        cs.append(c // 3)
    w = PowerSeries(cs, n)
    x, y, z = x.truncate(n), y.truncate(n), z.truncate(n)
    if check and not (z * z - 4 * x * y).is_zero():
        raise ArithmeticError("identity z^2 = 4xy failed")
    return ModularFunctionSet(x, y, z, w, n)


def ode_residuals(order: int, mfs: ModularFunctionSet | None = None) -> dict:
    """Residuals of the displayed first-order system, with ' = q d/dq.

    Keys r1, r2, r3 follow the printed equations; r2_fitted is the residual
    of the repaired second equation y' = y (x^2 + w) and rz that of the
    derived z' = z (y^2 + w). Nothing is asserted here.
    """
    m = mfs or xyzw_qexp(order)
    x, y, z, w = m.x, m.y, m.z, m.w
    x2, y2 = x * x, y * y
    return {
        "r1": ps_qddq(x) - x * (2 * y2 - x2 + w),
        "r2": ps_qddq(y) - y * (2 * x2 - y2 + w),
        "r3": ps_qddq(w) - (w * w - x2 * x2),
        "r2_fitted": ps_qddq(y) - y * (x2 + w),
        "rz": ps_qddq(z) - z * (y2 + w),
    }


# weights of x, y, z, w in the fitting basis (theta^2 has weight 1, so x, y, z
# carry weight 2 in units of half the modular weight, w carries 4)
_FIT_WEIGHTS = {"x": 2, "y": 2, "z": 2, "w": 4}


def _fit_basis(degree: int):
    """Monomials x^a y^b z^c w^e of weighted degree <= degree with c <= 1.

    Higher powers of z are reduced through z^2 = 4xy, so they are omitted
    to keep the basis linearly independent.
    """
    out = []
    wx = _FIT_WEIGHTS["x"]
    ww = _FIT_WEIGHTS["w"]
    for e in range(degree // ww + 1):
        rest = degree - ww * e
        for c in (0, 1):
            for a in range(rest // wx + 1):
                for b in range(rest // wx + 1):
                    if wx * (a + b + c) + ww * e <= degree:
                        out.append((a, b, c, e))
    return sorted(set(out), key=lambda t: (sum(t) + t[3], t))


def _monomial_label(exps) -> str:
    parts = []
    for name, k in zip("xyzw", exps):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    return "*".join(parts) or "1"


def fit_ode_rhs(target: PowerSeries, basis_degree: int, order: int, subject: PowerSeries | None = None,
                mfs: ModularFunctionSet | None = None) -> dict:
    """Find P in Q[x,y,z,w] of weighted degree <= basis_degree with
    target = subject * P (or target = P) mod q**order.

    Returns {monomial label: Fraction} for the non-zero coefficients. Raises
    NoFit when the overdetermined system is inconsistent or the fit is not
    unique.
    """
    m = mfs or xyzw_qexp(order)
    gens = {"x": m.x, "y": m.y, "z": m.z, "w": m.w}
    basis = _fit_basis(basis_degree)
    cols = []
    for exps in basis:
        s = PowerSeries([1], order)
        for name, k in zip("xyzw", exps):
            if k:
                s = s * gens[name] ** k
        if subject is not None:
            s = s * subject
        cols.append(s.truncate(order))
    n = min(order, target.order)
    rows = [[Fraction(c[k]) for c in cols] for k in range(n)]
    rhs = [Fraction(target[k]) for k in range(n)]
    try:
        sol, free = solve_exact(rows, rhs)
    except InconsistentSystem as exc:
        raise NoFit(f"no polynomial of weighted degree <= {basis_degree} fits: {exc}") from None
    if free:
        raise NoFit(f"fit is not unique ({len(free)} free monomials); raise the order")
    return {_monomial_label(e): v for e, v in zip(basis, sol) if v}


# ---------------------------------------------------------------------------
# numeric layer


def _theta_terms(p: int, nome, prec: int, derivative: bool, max_terms: int):
    """Number of terms so the dropped tail is below 2**-(prec+16)."""
    r = abs(nome)
    if r >= 1:
        raise ValueError("need Im(tau) > 0")
    target = mpmath.mpf(2) ** (-(prec + 16))
    # exponent of the first dropped term is (M + 1/2)^2 >= M^2; the tail is
    # majorized by a geometric series with ratio r^(2M+1) <= r
    for m in range(1, max_terms):
        lead = r ** (m * m)
        if derivative:
            lead *= (m + 1) ** 2 * mpmath.pi
        if lead / (1 - r) < target:
            return m + 1
    raise ThetaPrecisionError(f"more than {max_terms} terms needed for {prec} bits")


def _theta_sum(p: int, tau, precision: int, derivative: bool, max_terms: int):
    with mpmath.workprec(precision + 24):
        tau = mpmath.mpc(tau)
        if tau.imag <= 0:
            raise ValueError("need Im(tau) > 0")
        nome = mpmath.exp(mpmath.pi * 1j * tau)
        m = _theta_terms(p, nome, precision, derivative, max_terms)
        ipi = mpmath.pi * 1j
        val = mpmath.mpc(0)
        if p == 2:
            for k in range(m):
                e = mpmath.mpf(2 * k + 1) ** 2 / 4
                term = 2 * mpmath.exp(ipi * tau * e)
                val += term * ipi * e if derivative else term
        else:
            if not derivative:
                val += 1
            for k in range(1, m):
                sign = -1 if (p == 4 and k % 2) else 1
                term = 2 * sign * nome ** (k * k)
                val += term * ipi * k * k if derivative else term
    return val


def theta_value(p: int, tau, precision: int = 256, max_terms: int = 100000):
    """theta_p(tau) with nome exp(pi i tau): theta_3 = sum exp(pi i n^2 tau)."""
    if p not in (2, 3, 4):
        raise ValueError("p must be 2, 3 or 4")
    v = _theta_sum(p, tau, precision, False, max_terms)
    with mpmath.workprec(precision):
        return +v


def theta_logderiv(p: int, tau, precision: int = 256, max_terms: int = 100000):
    """X_p(tau) = 2 d/dtau log theta_p(tau) in the same convention."""
    if p not in (2, 3, 4):
        raise ValueError("p must be 2, 3 or 4")
    with mpmath.workprec(precision + 24):
        v = 2 * _theta_sum(p, tau, precision, True, max_terms) / _theta_sum(p, tau, precision, False, max_terms)
    with mpmath.workprec(precision):
        return +v


def gamma34(precision: int = 256):
    """Gamma(3/4) from Gamma(1/4)^2 = 2 sqrt(2 pi) pi / AGM(1, sqrt 2) and the
    reflection Gamma(1/4) Gamma(3/4) = pi sqrt 2."""
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    with mpmath.workprec(precision + 32):
        pi = mpmath.pi
        g14sq = 2 * mpmath.sqrt(2 * pi) * pi / mpmath.agm(1, mpmath.sqrt(2))
        g34 = pi * mpmath.sqrt(2) / mpmath.sqrt(g14sq)
    with mpmath.workprec(precision):
        return +g34


@dataclass(frozen=True)
class NumericConstants:
    precision: int
    gamma34: object
    Theta: object
    K: object
    kappa: object
    omega0: object


def numeric_constants(precision: int = 256) -> NumericConstants:
    """Theta = sqrt(2 pi)/Gamma(3/4)^2, K = sqrt(pi)/(sqrt 2 Gamma(3/4)^2),
    kappa = sqrt(pi i / 2) (principal branch) and omega0 = 2 K kappa."""
    with mpmath.workprec(precision + 16):
        g = gamma34(precision + 16)
        pi = mpmath.pi
        theta = mpmath.sqrt(2 * pi) / g ** 2
        k = mpmath.sqrt(pi) / (mpmath.sqrt(2) * g ** 2)
        kappa = mpmath.sqrt(pi * 1j / 2)
        omega0 = 2 * k * kappa
    with mpmath.workprec(precision):
        return NumericConstants(precision, +g, +theta, +k, +kappa, +omega0)


def theta_closed_forms(precision: int = 256) -> dict:
    """Closed forms of theta_p(i) and X_p(i) in terms of Gamma(3/4)."""
    with mpmath.workprec(precision + 16):
        g = gamma34(precision + 16)
        pi = mpmath.pi
        t3 = pi ** mpmath.mpf(0.25) / g
        t2 = t3 / mpmath.mpf(2) ** mpmath.mpf(0.25)
        corr = 1j * pi ** 2 / (4 * g ** 4)
        out = {
            "theta2": t2, "theta3": t3, "theta4": t2,
            "X2": corr + 0.5j, "X3": mpmath.mpc(0, 0.5), "X4": -corr + 0.5j,
        }
    with mpmath.workprec(precision):
        return {k: +v for k, v in out.items()}

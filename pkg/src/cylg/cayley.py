"""SL(2,C) action on potentials and on (x, y, z, w), Cayley-type expansions
at an interior point, and the exact CY/LG pipeline from P^1(4,4,2) to the
E7-tilde FJRW potential."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .exactnum import NoStableFit, QExt, qext_embed, rationalize
from .modular import ThetaPrecisionError, numeric_constants, xyzw_qexp
from .potential import MODULAR_VARS, e7_fixture_table, f0_p442_symbolic
from .series import MultiPoly
from .statespace import E7_VARS, P442_VARS, cov_matrix

__all__ = [
    "Sl2Element",
    "CoefficientFunctions",
    "CayleyExpansion",
    "RationalityFailure",
    "FixtureMismatch",
    "PipelineResult",
    "a_cylg",
    "sl2_scaling",
    "sl2_apply",
    "sl2_on_potential",
    "taylor_from_qseries",
    "cayley_taylor",
    "cayley_rationalize",
    "desired_expansions",
    "ode_taylor",
    "ode_residual",
    "cylg_pipeline",
]

FUNCS = ("x", "y", "z", "w")
# weight of each function under t -> alpha^2 t scalings
_WEIGHT = {"x": 1, "y": 1, "z": 1, "w": 2}


class RationalityFailure(ValueError):
    """A final coefficient has a nonzero sqrt2 or imaginary part."""


class FixtureMismatch(ValueError):
    """Pipeline output disagrees with the displayed E7-tilde potential."""


# ---------------------------------------------------------------------------
# truncated univariate series over any field (lists of coefficients)


def _smul(a, b, n):
    out = [0] * n
    for i, ai in enumerate(a[:n]):
        if ai == 0:
            continue
        for j in range(min(len(b), n - i)):
            out[i + j] = out[i + j] + ai * b[j]
    return out


def _sadd(a, b, n):
    out = [0] * n
    for k in range(n):
        if k < len(a):
            out[k] = out[k] + a[k]
        if k < len(b):
            out[k] = out[k] + b[k]
    return out


def _sscale(a, c):
    return [c * x for x in a]


def _geometric(r, c, n):
    """Series of c / (1 - r t) = c sum (r t)^k."""
    out, p = [], c
    for _ in range(n):
        out.append(p)
        p = p * r
    return out


def _compose(coeffs, g, n):
    """sum_k coeffs[k] g^k for a series g with g(0) = 0 (coeffs already /k!)."""
    out = [0] * n
    gp = [1] + [0] * (n - 1)
    for k in range(n):
        if k >= len(coeffs):
            break
        out = _sadd(out, _sscale(gp, coeffs[k]), n)
        gp = _smul(gp, g, n)
    return out


# ---------------------------------------------------------------------------
# SL(2,C)


@dataclass(frozen=True)
class Sl2Element:
    a: object
    b: object
    c: object
    d: object

    def det(self):
        return self.a * self.d - self.b * self.c

    def check(self, tol=None) -> bool:
        dv = self.det() - 1
        if tol is None:
            return dv == 0
        return abs(dv) < tol

    def __matmul__(self, o: "Sl2Element") -> "Sl2Element":
        return Sl2Element(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                          self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)


def a_cylg(precision: int = 256) -> Sl2Element:
    """A^{CY/LG} = [[1/(2 Theta), -pi Theta / 2], [1/(pi Theta), Theta]]."""
    nc = numeric_constants(precision)
    with mpmath.workprec(precision):
        th = nc.Theta
        return Sl2Element(1 / (2 * th), -mpmath.pi * th / 2, 1 / (mpmath.pi * th), th)


@dataclass
class CoefficientFunctions:
    """Taylor coefficients of x, y, z, w at ``center`` in the top variable.

    ``coeffs[f][k]`` is the k-th Taylor coefficient (derivative / k!).
    """

    center: object
    coeffs: dict
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return min(len(v) for v in self.coeffs.values())

    def combo(self, sx, sy, sz=0, sw=0):
        n = self.n
        return [sx * self.coeffs["x"][k] + sy * self.coeffs["y"][k] + sz * self.coeffs["z"][k]
                + sw * self.coeffs["w"][k] for k in range(n)]


def sl2_scaling(alpha, fs: CoefficientFunctions) -> CoefficientFunctions:
    """(x, y, z, w)(t) -> (a x(a^2 t), a y(a^2 t), a z(a^2 t), a^2 w(a^2 t)),
    expanded at t = center / a^2."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    out = {}
    for f, cs in fs.coeffs.items():
        wt = _WEIGHT[f]
        out[f] = [c * alpha ** (wt + 2 * k) for k, c in enumerate(cs)]
    return CoefficientFunctions(fs.center / alpha ** 2, out, dict(fs.meta))


def sl2_apply(A: Sl2Element, fs: CoefficientFunctions, tol=None) -> CoefficientFunctions:
    """x^A(t) = x(phi(t)) / (ct + d), w^A = w(phi) / (ct + d)^2 - c / (ct + d),
    phi(t) = (at + b) / (ct + d); ``fs`` must be centered at phi(0) = b / d.
    The result is centered at t = 0."""
    if A.d == 0:
        raise ValueError("d = 0: phi(0) is not finite")
    base = A.b / A.d
    gap = base - fs.center
    if (gap != 0) if tol is None else (abs(gap) > tol):
        raise ValueError("coefficient functions are not centered at b/d")
    n = fs.n
    # phi(t) - b/d = t / (d (ct + d)) = (t / d^2) sum (-c t / d)^j
    g = [0] + _geometric(-A.c / A.d, 1 / A.d ** 2, n - 1)
    inv = _geometric(-A.c / A.d, 1 / A.d, n)  # 1 / (ct + d)
    inv2 = _smul(inv, inv, n)
    out = {}
    for f in FUNCS:
        comp = _compose(fs.coeffs[f], g, n)
        if _WEIGHT[f] == 1:
            out[f] = _smul(comp, inv, n)
        else:
            out[f] = _sadd(_smul(comp, inv2, n), _sscale(inv, -A.c), n)
    return CoefficientFunctions(0, out, dict(fs.meta))


def taylor_from_qseries(center, n_coeffs: int, precision: int = 256, mfs=None) -> CoefficientFunctions:
    """Taylor data of x(e^t), ... at t = center (Re center < 0) from the
    integer q-expansions: d^k/dt^k sum a_n e^{n t} = sum n^k a_n e^{n t}."""
    with mpmath.workprec(precision + 32):
        t0 = mpmath.mpmathify(center)
        r = -mpmath.re(t0)
        if r <= 0:
            raise ValueError("center must have negative real part")
        order = _qorder_needed(r, n_coeffs, precision)
        m = mfs if mfs is not None and mfs.order >= order else xyzw_qexp(order, check=False)
        q = mpmath.exp(t0)
        out = {}
        for f in FUNCS:
            s = getattr(m, f)
            cs = [mpmath.mpf(0)] * n_coeffs
            qn = mpmath.mpf(1)
            for nn in range(order):
                a = s[nn]
                if nn:
                    qn = qn * q
                if a:
                    term = a * qn
                    for k in range(n_coeffs):
                        cs[k] += term * mpmath.mpf(nn) ** k
            out[f] = [c / math.factorial(k) for k, c in enumerate(cs)]
    return CoefficientFunctions(center, out, {"precision": precision, "qorder": order})


def _qorder_needed(r, n_coeffs, precision):
    """Smallest N with N^(K+2) e^{-r N} < 2^-(P+20) and the bound decreasing."""
    target = (precision + 20) * math.log(2)
    rr = float(r)
    k = n_coeffs + 2
    n = max(2, int(k / rr) + 2)
    while k * math.log(n) - rr * n > -target:
        n += 1
        if n > 200000:
            raise ThetaPrecisionError("q-expansion order needed exceeds 200000")
    return n


def sl2_on_potential(A: Sl2Element, fs: CoefficientFunctions, mode: str = "substitution",
                     degree: int = 4, sym: MultiPoly | None = None) -> MultiPoly:
    """A . F for the appendix potential, as a polynomial in t0..t8 truncated
    at t-degree ``degree`` (t0..t7) and t8-degree < number of Taylor terms.

    ``substitution``: replace x, y, z, w by x^A, ..., w^A.
    ``formula``: t0 block + c Q^2 / (2(c t8 + d)) + (c t8 + d)^2 H(t / (c t8 + d); x(phi), ...).
    """
    sym = sym or f0_p442_symbolic()
    n = fs.n
    tv = P442_VARS[:8]
    if mode == "substitution":
        fa = sl2_apply(A, fs, tol=_tol_for(fs))
        return _substitute_series(sym, fa.coeffs, n, degree)
    if mode != "formula":
        raise ValueError(f"unknown mode {mode!r}")
    g = [0] + _geometric(-A.c / A.d, 1 / A.d ** 2, n - 1)
    comp = {f: _compose(fs.coeffs[f], g, n) for f in FUNCS}
    t0 = sym.vars.index("t0")
    H = MultiPoly(sym.vars, {e: c for e, c in sym.terms.items() if not e[t0]})
    block = MultiPoly(sym.vars, {e: c for e, c in sym.terms.items() if e[t0]})
    ct_d = {}  # power p of (c t8 + d) as a series
    out = _substitute_series(block, {f: [0] * n for f in FUNCS}, n, degree)
    idx = {v: sym.vars.index(v) for v in tv}
    grouped = _group_by_t(H, tv)
    for te, poly in grouped.items():
        deg = sum(te)
        if deg > degree:
            continue
        p = 2 - deg
        if p not in ct_d:
            ct_d[p] = _ctd_power(A, p, n)
        coeff = _smul(_eval_modular(poly, comp, n), ct_d[p], n)
        out = out + _series_monomial(te, coeff, n)
    # quadratic correction c Q^2 / (2 (c t8 + d))
    Q = _Q(sym.vars, idx)
    inv = _ctd_power(A, -1, n)
    Q2 = Q * Q
    for e, c in Q2.terms.items():
        te = tuple(e[idx[v]] for v in tv)
        if sum(te) > degree:
            continue
        out = out + _series_monomial(te, _sscale(inv, A.c * c / 2), n)
    return out


def _tol_for(fs):
    prec = fs.meta.get("precision")
    return None if prec is None else mpmath.mpf(2) ** (-(prec // 2))


def _ctd_power(A, p, n):
    """Series of (c t + d)^p."""
    if p >= 0:
        base = [A.d, A.c]
        out = [1] + [0] * (n - 1)
        for _ in range(p):
            out = _smul(out, base, n)
        return out
    inv = _geometric(-A.c / A.d, 1 / A.d, n)
    out = [1] + [0] * (n - 1)
    for _ in range(-p):
        out = _smul(out, inv, n)
    return out


def _Q(vars_, idx):
    R = Fraction

    def v(name):
        return MultiPoly.var(vars_, name, R(1))

    return (v("t2") * v("t2") + v("t5") * v("t5") + v("t7") * v("t7") * 2
            + v("t1") * v("t3") * 2 + v("t4") * v("t6") * 2) * R(1, 8)


def _group_by_t(sym: MultiPoly, tv):
    """{t-exponents: {modular exponents: coeff}} for terms free of t8."""
    tidx = [sym.vars.index(v) for v in tv]
    midx = [sym.vars.index(v) for v in MODULAR_VARS]
    t8 = sym.vars.index("t8")
    out = {}
    for e, c in sym.terms.items():
        if e[t8]:
            continue
        te = tuple(e[i] for i in tidx)
        me = tuple(e[i] for i in midx)
        out.setdefault(te, {})[me] = c
    return out


def _eval_modular(poly: dict, series: dict, n):
    """sum c x^a y^b z^c w^d for series x, y, z, w (lists of length n)."""
    powers = {}

    def pw(f, k):
        if (f, k) not in powers:
            powers[(f, k)] = [1] + [0] * (n - 1) if k == 0 else _smul(pw(f, k - 1), series[f], n)
        return powers[(f, k)]

    acc = [0] * n
    for me, c in poly.items():
        s = [1] + [0] * (n - 1)
        for f, k in zip(MODULAR_VARS, me):
            if k:
                s = _smul(s, pw(f, k), n)
        acc = _sadd(acc, _sscale(s, c), n)
    return acc


def _series_monomial(te, coeff, n):
    terms = {}
    for k, c in enumerate(coeff[:n]):
        if c != 0:
            terms[te + (k,)] = c
    return MultiPoly(P442_VARS, terms)


def _substitute_series(sym, series, n, degree):
    tv = P442_VARS[:8]
    out = MultiPoly(P442_VARS, {})
    for te, poly in _group_by_t(sym, tv).items():
        if sum(te) > degree:
            continue
        out = out + _series_monomial(te, _eval_modular(poly, series, n), n)
    # t8 only appears in t0^2 t8 / 2, with a constant coefficient
    t8 = sym.vars.index("t8")
    for e, c in sym.terms.items():
        if e[t8]:
            te = tuple(e[sym.vars.index(v)] for v in tv)
            out = out + MultiPoly(P442_VARS, {te + (e[t8],): c})
    return out


# ---------------------------------------------------------------------------
# Cayley-type expansion at (tau0, omega0)


@dataclass
class CayleyExpansion:
    tau0: object
    omega0: object
    coeffs: dict
    precision: int
    w_shift: int
    rationalized: dict | None = None
    flags: dict = field(default_factory=dict)

    @property
    def n(self):
        return min(len(v) for v in self.coeffs.values())

    def as_functions(self) -> CoefficientFunctions:
        return CoefficientFunctions(0, self.coeffs, {"precision": self.precision})


def cayley_taylor(tau0=None, omega0=None, n_coeffs: int = 9, precision: int = 256,
                  w_shift: int = 1, mfs=None) -> CayleyExpansion:
    """Taylor coefficients at tau = 0 of x^{(tau0, omega0)}, ..., w^{(tau0, omega0)}.

    With D = 2 i omega0^2 Im(tau0), T(tau) = (D tau0 - conj(tau0) tau) / (D - tau):
      x^{(.)} = 2 i omega0 Im(tau0) / (D - tau) * kappa x(q(T)),  q = exp(2 pi i T / 4)
      w^{(.)} = (2 i omega0 Im(tau0))^2 / (D - tau)^2 * kappa^2 w(q(T)) + w_shift / (D - tau).
    w_shift = +1 is the sign for which w' = w^2 - x^4 is preserved; -1 gives
    the other sign for comparison. Defaults: tau0 = i, omega0 = 2 K kappa.
    """
    if precision < 192:
        raise ValueError("precision must be at least 192 bits")
    nc = numeric_constants(precision)
    with mpmath.workprec(precision + 32):
        tau0 = mpmath.mpc(0, 1) if tau0 is None else mpmath.mpc(tau0)
        omega0 = nc.omega0 if omega0 is None else mpmath.mpc(omega0)
        im = mpmath.im(tau0)
        if im <= 0:
            raise ValueError("tau0 must lie in the upper half plane")
        kappa = nc.kappa
        D = 2j * omega0 ** 2 * im
        n = n_coeffs
        # T - tau0 = 2 i Im(tau0) tau / (D - tau)
        g = [0] + _geometric(1 / D, 2j * im / D, n - 1)
        pre = _geometric(1 / D, 2j * omega0 * im / D, n)  # 2 i omega0 Im / (D - tau)
        shift = _geometric(1 / D, 1 / D, n)  # 1 / (D - tau)
        hq = 2j * mpmath.pi / 4  # d/dT = hq * q d/dq
        q0 = mpmath.exp(hq * tau0)
        order = _qorder_needed(-mpmath.log(abs(q0)), n, precision)
        m = mfs if mfs is not None and mfs.order >= order else xyzw_qexp(order, check=False)
        derivs = {}
        for f in FUNCS:
            s = getattr(m, f)
            cs = [mpmath.mpc(0)] * n
            qn = mpmath.mpc(1)
            for nn in range(order):
                if nn:
                    qn = qn * q0
                a = s[nn]
                if a:
                    term = a * qn
                    hn = hq * nn
                    p = mpmath.mpc(1)
                    for k in range(n):
                        cs[k] += term * p
                        p = p * hn
            derivs[f] = [c / math.factorial(k) for k, c in enumerate(cs)]
        out = {}
        for f in ("x", "y", "z"):
            out[f] = _sscale(_smul(pre, _compose(derivs[f], g, n), n), kappa)
        pre2 = _smul(pre, pre, n)
        wt = _sscale(_smul(pre2, _compose(derivs["w"], g, n), n), kappa ** 2)
        out["w"] = _sadd(wt, _sscale(shift, w_shift), n)
    return CayleyExpansion(tau0, omega0, out, precision, w_shift)


def desired_expansions(e: CayleyExpansion):
    """Constant and linear coefficients of x - y + z, x - y - z, x + y."""
    c = e.coeffs
    out = []
    with mpmath.workprec(e.precision):
        for sx, sy, sz in ((1, -1, 1), (1, -1, -1), (1, 1, 0)):
            out.append(tuple(sx * c["x"][k] + sy * c["y"][k] + sz * c["z"][k] for k in (0, 1)))
    return out


def cayley_rationalize(e: CayleyExpansion, e_high: CayleyExpansion | None = None,
                       max_denominator: int = 10**15) -> CayleyExpansion:
    """Recognize each coefficient in Q(i, sqrt2) from two precisions.

    Coefficients without a stable fit are left numeric and flagged."""
    if e_high is None:
        e_high = cayley_taylor(e.tau0, e.omega0, e.n, e.precision + 128, e.w_shift)
    rat, flags = {}, {}
    for f in FUNCS:
        rat[f] = []
        for k in range(e.n):
            try:
                rat[f].append(rationalize(e.coeffs[f][k], max_denominator, (e.precision, e_high.precision),
                                          e_high.coeffs[f][k]))
            except NoStableFit as exc:
                rat[f].append(None)
                flags[(f, k)] = str(exc)
    return CayleyExpansion(e.tau0, e.omega0, e.coeffs, e.precision, e.w_shift, rat, flags)


# ---------------------------------------------------------------------------
# ODE oracle


def ode_rhs(x, y, z, w, n):
    """Right-hand sides of the (repaired) system for series x, y, z, w."""
    x2, y2 = _smul(x, x, n), _smul(y, y, n)
    fx = _smul(x, _sadd(_sadd(_sscale(y2, 2), _sscale(x2, -1), n), w, n), n)
    fy = _smul(y, _sadd(x2, w, n), n)
    fz = _smul(z, _sadd(y2, w, n), n)
    fw = _sadd(_smul(w, w, n), _sscale(_smul(x2, x2, n), -1), n)
    return {"x": fx, "y": fy, "z": fz, "w": fw}


def ode_taylor(init: dict, n: int) -> dict:
    """Exact Taylor solution of
        x' = x(2y^2 - x^2 + w), y' = y(x^2 + w), z' = z(y^2 + w), w' = w^2 - x^4
    from initial values (any field elements)."""
    s = {f: [init[f]] for f in FUNCS}
    for k in range(n - 1):
        cur = {f: s[f] + [0] * (n - len(s[f])) for f in FUNCS}
        rhs = ode_rhs(cur["x"], cur["y"], cur["z"], cur["w"], k + 1)
        for f in FUNCS:
            s[f].append(rhs[f][k] / (k + 1))
    return s


def ode_residual(coeffs: dict, n: int | None = None) -> dict:
    """{f: [residual_k]} for f' - rhs_f, using coefficients up to n - 1."""
    n = n or min(len(v) for v in coeffs.values())
    rhs = ode_rhs(coeffs["x"], coeffs["y"], coeffs["z"], coeffs["w"], n)
    out = {}
    for f in FUNCS:
        c = coeffs[f]
        out[f] = [(k + 1) * c[k + 1] - rhs[f][k] for k in range(n - 1)]
    return out


# ---------------------------------------------------------------------------
# exact pipeline


@dataclass
class PipelineResult:
    poly: MultiPoly
    cayley: CayleyExpansion
    comparisons: list
    matches: int
    cubic_block_ok: bool
    all_rational: bool
    ode_check: bool
    mode: str

    def coefficient(self, monomial_labels, t33_power=0):
        e = [0] * 9
        for lab in monomial_labels:
            e[E7_VARS.index("tt" + lab)] += 1
        e[E7_VARS.index("tt33")] += t33_power
        return self.poly.coefficient(tuple(e))


def _linear_forms():
    """t_i as linear forms in the tt variables (QExt coefficients)."""
    M = cov_matrix()
    forms = {}
    for i, v in enumerate(P442_VARS):
        forms[v] = MultiPoly(E7_VARS, {tuple(1 if k == j else 0 for k in range(9)): M[i][j]
                                       for j in range(9) if not M[i][j].is_zero()})
    return forms


def _to_e7(p442: MultiPoly, forms) -> MultiPoly:
    """Apply t = M tt; t8 maps to tt33 exactly."""
    out = MultiPoly(E7_VARS, {})
    cache = {}

    def power(v, k):
        if (v, k) not in cache:
            cache[(v, k)] = forms[v] if k == 1 else power(v, k - 1) * forms[v]
        return cache[(v, k)]

    for e, c in p442.terms.items():
        m = MultiPoly.const(E7_VARS, c)
        for v, k in zip(P442_VARS, e):
            if k:
                m = m * power(v, k)
        out = out + m
    return out


def cylg_pipeline(n_terms: int = 9, degree: int = 4, precision: int = 256, high_precision: int = 384,
                  check_fixture: bool = True) -> PipelineResult:
    """F^{E7} = A^{CY/LG} . F^{P442} through the Cayley expansion at (i, 2 K kappa).

    The Cayley coefficients are certified in Q(sqrt2) from two precisions;
    the appendix polynomial is evaluated on them exactly and mapped by the
    change of variables. If some coefficient has no stable fit, the assembly
    is done numerically and only final coefficients are rationalized.
    """
    lo = cayley_taylor(n_coeffs=n_terms, precision=precision)
    hi = cayley_taylor(n_coeffs=n_terms, precision=high_precision)
    ce = cayley_rationalize(lo, hi)
    sym = f0_p442_symbolic()
    forms = _linear_forms()
    if not ce.flags:
        series = {f: ce.rationalized[f] for f in FUNCS}
        p442 = _substitute_series(sym, series, n_terms, degree)
        e7 = _to_e7(p442, forms)
        mode = "exact"
        init = {f: series[f][0] for f in FUNCS}
        ode_ok = ode_taylor(init, n_terms) == series
    else:
        e7 = _numeric_assembly(sym, lo, hi, forms, n_terms, degree, precision, high_precision)
        mode = "numeric-then-rationalize"
        ode_ok = False
    bad = [c for c in e7.terms.values() if not QExt.coerce(c).is_rational()]
    all_rational = not bad
    e7 = e7.map_coeffs(lambda c: QExt.coerce(c).to_fraction() if QExt.coerce(c).is_rational() else c)
    result = PipelineResult(e7, ce, [], 0, False, all_rational, ode_ok, mode)
    _compare(result, n_terms)
    if not all_rational:
        raise RationalityFailure(f"{len(bad)} coefficients are not rational")
    if check_fixture and (result.matches < len(result.comparisons) or not result.cubic_block_ok):
        raise FixtureMismatch(f"{result.matches}/{len(result.comparisons)} fixture coefficients match")
    return result


def _numeric_assembly(sym, lo, hi, forms, n, degree, p1, p2):
    vals = []
    for e, prec in ((lo, p1), (hi, p2)):
        with mpmath.workprec(prec):
            nforms = {v: f.map_coeffs(lambda c: qext_embed(c, prec)) for v, f in forms.items()}
            p442 = _substitute_series(sym, e.coeffs, n, degree)
            vals.append(_to_e7(p442.map_coeffs(lambda c: mpmath.mpc(c)), nforms))
    out = {}
    for k in set(vals[0].terms) | set(vals[1].terms):
        v1, v2 = vals[0].coefficient(k), vals[1].coefficient(k)
        try:
            out[k] = rationalize(v1, 10**15, (p1, p2), v2)
        except NoStableFit:
            if abs(v2) < mpmath.mpf(2) ** (-(p2 // 2)):
                continue
            raise RationalityFailure(f"coefficient of {k} has no exact form") from None
    return MultiPoly(E7_VARS, out)


def _compare(result: PipelineResult, n_terms):
    """Fill the fixture comparison table and the cubic-block verdict."""
    table = e7_fixture_table()
    rows = []
    for (mono, p), want in sorted(table.items()):
        if p >= n_terms:
            continue
        got = result.coefficient(mono, p)
        rows.append({"monomial": " ".join("tt" + m for m in mono), "t33_power": p,
                     "expected": want, "got": got, "match": got == want})
    result.comparisons = rows
    result.matches = sum(r["match"] for r in rows)
    # cubic block: every monomial of degree 3 in the non-unit, non-top
    # variables, at every tt33 power, must equal the displayed value (0 if absent)
    plus = [E7_VARS.index(v) for v in E7_VARS if v not in ("tt11", "tt33")]
    i33 = E7_VARS.index("tt33")
    i11 = E7_VARS.index("tt11")
    ok = True
    for e, c in result.poly.terms.items():
        if e[i11]:
            continue
        if sum(e[i] for i in plus) != 3:
            continue
        labels = tuple(sorted(E7_VARS[i][2:] for i in plus for _ in range(e[i])))
        if table.get((labels, e[i33]), 0) != c:
            ok = False
    for (mono, p), want in table.items():
        if p < n_terms and result.coefficient(mono, p) != want:
            ok = False
    # the unit block: tt11 (sum of pairing monomials) and tt11^2 tt33 / 2
    unit = {e: c for e, c in result.poly.terms.items() if e[i11]}
    expect = {
        ((2, 0, 0, 0, 0, 0, 0, 0, 1)): Fraction(1, 2),
        ((1, 0, 0, 1, 0, 1, 0, 0, 0)): 1,
        ((1, 1, 0, 0, 0, 0, 0, 1, 0)): 1,
        ((1, 0, 1, 0, 0, 0, 1, 0, 0)): 1,
        ((1, 0, 0, 0, 2, 0, 0, 0, 0)): Fraction(1, 2),
    }
    if unit != expect:
        ok = False
    result.cubic_block_ok = ok

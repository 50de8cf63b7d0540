"""Genus-zero primary potentials: the P^1(4,4,2) potential with its modular
coefficients, the E7-tilde fixture, WDVV checks and WDVV reconstruction."""

from __future__ import annotations

import csv
import functools
import io
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import InconsistentSystem, QExt, solve_exact
from .modular import xyzw_qexp
from .series import MultiPoly, PowerSeries, is_zero, ps_qddq
from .statespace import (
    E7_VARS,
    P442_VARS,
    PairingSpec,
    e7_basis,
    e7_elem,
    pairings,
    sector_info,
    selection_linebundle,
)

__all__ = [
    "Potential",
    "CorrelatorTable",
    "InconsistentSeeds",
    "Underdetermined",
    "MODULAR_VARS",
    "f0_p442_symbolic",
    "build_f0_p442",
    "wdvv_residual",
    "wdvv_sweep",
    "homogeneity_grades",
    "homogeneity_residual",
    "f0_e7_fixture",
    "e7_fixture_table",
    "correlator_from_potential",
    "aut_factor",
    "reconstruct_wdvv",
    "e7_seeds",
    "e7_primitive_labels",
    "e7_symmetries",
    "e7_torus_weight",
]

MODULAR_VARS = ("x", "y", "z", "w")


class InconsistentSeeds(ValueError):
    """Two WDVV instances force different values for the same correlator."""


class Underdetermined(ValueError):
    """Some correlator is not fixed by the available WDVV equations."""


# ---------------------------------------------------------------------------
# the P^1(4,4,2) potential

# t1..t3 = t_{1,k}, t4..t6 = t_{2,k}, t7 = t_{3,1}, t0 the unit, t8 = t_{-1}
_APPENDIX = """
-R(1,4128768)*(x**6-5*x**4*y**2-5*x**2*y**4+y**6)*(t3**8+t6**8)
+R(1,294912)*x*y*(x**4+14*x**2*y**2+y**4)*t3**2*t6**2*(t3**4+t6**4)
+R(1,294912)*z*(8*x**4+8*y**4+19*z**4)*t6**3*t7*t3**3
+R(1,73728)*x*(x**2+y**2)**2*(t2*t3**6+t5*t6**6)
+R(1,73728)*y*(x**2+y**2)**2*(t3**6*t5+t2*t6**6)
+R(5,73728)*x**2*y**2*(x**2+y**2)*t6**4*t3**4
-R(1,30720)*(x**4-6*x**2*y**2+y**4)*(t1*t3**5+t4*t6**5)
-R(1,3072)*(x**4-3*x**2*y**2)*(t2**2*t3**4+t5**2*t6**4)
+R(1,3072)*(3*x**2*y**2-y**4)*(t3**4*t5**2+t2**2*t6**4)
+R(1,6144)*x*y*z*(x**2+y**2)*t3*t6*(t3**4+t6**4)*t7
+R(1,6144)*x**2*y*(x**2+4*y**2)*t3**2*t6**2*(t2*t3**2+t5*t6**2)
+R(1,6144)*x*y**2*(4*x**2+y**2)*t3**2*t6**2*(t3**2*t5+t2*t6**2)
+R(1,1536)*x*y*(x**2+y**2)*(t3**2*t6**2*(t1*t3+t4*t6)+t2*t5*(t3**4+t6**4))
+R(1,1536)*x**2*y**2*t3*t6*(t3**3*t4+t1*t6**3)
+R(1,1536)*x*z*(x**2+7*y**2)*t3*t6*t7*(t3**2*t5+t2*t6**2)
+R(1,1536)*y*z*(7*x**2+y**2)*t3*t6*t7*(t2*t3**2+t5*t6**2)
+R(1,512)*x*y*(x**2+y**2)*t3**2*t6**2*(t2**2+t5**2)
+R(1,384)*x**2*y**2*(t3**4+t6**4)*t7**2
+R(1,384)*x*(x**2+y**2)*(t1*t2*t3**3+t4*t5*t6**3)
+R(1,384)*y*(x**2+y**2)*(t1*t3**3*t5+t2*t4*t6**3)
+R(1,384)*(x**2+y**2)*z*t7*(t3**3*t4+t1*t6**3)
+R(1,384)*x**3*(t2**3*t3**2+t5**3*t6**2)
+R(1,384)*y**3*(t3**2*t5**3+t2**3*t6**2)
-R(1,384)*(3*w-x**2+2*y**2)*(t2**4+t5**4)
+R(1,128)*x*y**2*t2*t5*(t3**2*t5+t2*t6**2)
+R(1,128)*x**2*y*t2*t5*(t2*t3**2+t5*t6**2)
+R(1,128)*x**2*y**2*t2*t5*t6**2*t3**2
+R(1,128)*x*y*(x**2+y**2)*t6**2*t7**2*t3**2
+R(1,96)*(2*x**2-y**2-3*w)*t7**4
+R(1,64)*x*y**2*t3*t6*(t2*t3*t4+t1*t5*t6)
+R(1,64)*x**2*y*t3*t6*(t3*t4*t5+t1*t2*t6)
+R(1,192)*x*y*z*t3*t6*t7*(3*t2**2+3*t1*t3+3*t5**2+3*t4*t6+4*t7**2)
+R(1,64)*z*(x**2+y**2)*t2*t5*t6*t7*t3
-R(1,64)*(w-x**2)*(2*t5**2*t7**2+t2**2*t5**2+2*t2**2*t7**2)
-R(1,64)*(2*w-x**2+y**2)*(t1**2*t3**2+t4**2*t6**2)
+R(1,32)*x*y**2*(t2*t7**2*t3**2+t5*t6**2*t7**2)
+R(1,32)*x**2*y*(t5*t7**2*t3**2+t2*t6**2*t7**2)
+R(1,32)*x*y*(2*t1*t2*t5*t3+t1**2*t6**2+t4**2*t3**2)
-R(1,32)*w*(t4*t5**2*t6+t1*t2**2*t3)
+R(1,32)*(x**2-y**2-w)*(t1*t5**2*t3+t2**2*t4*t6)
-R(1,16)*(w-x**2)*(t1*t7**2*t3+t1*t4*t6*t3+t4*t6*t7**2)
+R(1,16)*x*y*t2*t5*(t4*t6+2*t7**2)
+R(1,16)*x*z*t7*(t2*t4*t3+t1*t5*t6)
+R(1,16)*y*z*t7*(t3*t4*t5+t1*t2*t6)
+R(1,8)*x*(t1**2*t2+t4**2*t5)
+R(1,8)*y*(t2*t4**2+t1**2*t5)
+R(1,4)*z*t1*t4*t7
+R(1,8)*t0*(t2**2+t5**2+2*t7**2+2*t1*t3+2*t4*t6)
+R(1,2)*t0**2*t8
"""

def f0_p442_symbolic() -> MultiPoly:
    """The appendix potential as a polynomial in t0..t8 and x, y, z, w."""
    allvars = P442_VARS + MODULAR_VARS
    ns = {v: MultiPoly.var(allvars, v, Fraction(1)) for v in allvars}
    ns["R"] = Fraction
    return eval(_APPENDIX.replace("\n", " "), {"__builtins__": {}}, ns)  # noqa: S307 - fixed literal


@dataclass
class Potential:
    """A genus-zero primary potential.

    ``poly`` has coefficients that are scalars or PowerSeries in q; when
    ``divisor_var`` is set, q = exp(divisor_var) and derivatives along it act
    on coefficients as q d/dq.
    """

    poly: MultiPoly
    pairing: PairingSpec
    grading: dict
    unit_var: str
    top_var: str
    divisor_var: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def vars(self):
        return self.poly.vars

    def partial(self, var: str) -> MultiPoly:
        return _partial(self.poly, var, self.divisor_var)


def _coeff_qddq(c):
    return ps_qddq(c) if isinstance(c, PowerSeries) else 0


def _partial(poly: MultiPoly, var: str, divisor_var):
    if var == divisor_var:
        return poly.partial(var, coeff_derivation=_coeff_qddq)
    return poly.partial(var)


def _substitute_modular(sym: MultiPoly, series: dict, order: int) -> MultiPoly:
    """Replace x, y, z, w in a symbolic potential by q-series."""
    tvars = tuple(v for v in sym.vars if v not in MODULAR_VARS)
    tidx = [sym.vars.index(v) for v in tvars]
    midx = [sym.vars.index(v) for v in MODULAR_VARS]
    powers = {}

    def power(name, k):
        key = (name, k)
        if key not in powers:
            powers[key] = PowerSeries([1], order) if k == 0 else power(name, k - 1) * series[name]
        return powers[key]

    grouped = {}
    for e, c in sym.terms.items():
        te = tuple(e[i] for i in tidx)
        me = tuple(e[i] for i in midx)
        grouped.setdefault(te, []).append((me, c))
    out = {}
    for te, items in grouped.items():
        acc = PowerSeries([], order)
        for me, c in items:
            s = PowerSeries([1], order)
            for name, k in zip(MODULAR_VARS, me):
                if k:
                    s = s * power(name, k)
            acc = acc + s.scale(c)
        acc = acc.truncate(order)
        if not acc.is_zero():
            out[te] = acc
    return MultiPoly(tvars, out, order)


def p442_grading() -> dict:
    # deg in units where deg(t0) = 0 and the top class has degree 1
    g = {"t0": Fraction(0), "t8": Fraction(1)}
    for v, (i, j) in zip(("t1", "t2", "t3", "t4", "t5", "t6", "t7"),
                         ((1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1))):
        a = 4 if i in (1, 2) else 2
        g[v] = Fraction(j, a)
    return g


def build_f0_p442(order: int = 24, mfs=None) -> Potential:
    """The appendix potential with x, y, z, w replaced by order-N q-series."""
    if order < 1:
        raise ValueError("order must be at least 1")
    m = mfs or xyzw_qexp(order)
    sym = f0_p442_symbolic()
    poly = _substitute_modular(sym, m.as_dict(), order)
    return Potential(poly, pairings("P442"), p442_grading(), "t0", "t8", "t8", {"order": order})


# ---------------------------------------------------------------------------
# WDVV


def _third(F: Potential, i, j, k, cache):
    key = tuple(sorted((i, j, k)))
    if key not in cache:
        a, b, c = key
        if (a, b) not in cache:
            cache[(a, b)] = _partial(_partial(F.poly, a, F.divisor_var), b, F.divisor_var)
        cache[key] = _partial(cache[(a, b)], c, F.divisor_var)
    return cache[key]


def _A(F: Potential, i, j, k, l, cache):
    eta = F.pairing
    out = MultiPoly(F.vars, {}, F.poly.qorder)
    for p in F.vars:
        fijp = None
        for q in F.vars:
            e = eta.inv(p, q)
            if e == 0:
                continue
            if fijp is None:
                fijp = _third(F, i, j, p, cache)
            out = out + fijp * _third(F, q, k, l, cache) * e
    return out


def wdvv_residual(F: Potential, i, j, k, l, cache=None) -> MultiPoly:
    """sum F_ijp eta^pq F_qkl - sum F_ikp eta^pq F_qjl as an exact polynomial."""
    cache = {} if cache is None else cache
    for v in (i, j, k, l):
        if v not in F.vars:
            raise ValueError(f"unknown variable {v}")
    res = _A(F, i, j, k, l, cache) - _A(F, i, k, j, l, cache)
    n = F.poly.qorder
    if n is None:
        return res
    # every coefficient of F is known mod q^n, so the residual is too
    return res.map_coeffs(lambda c: c.truncate(n) if isinstance(c, PowerSeries) else c)


class _Packed:
    """q-series mod q^N stored as one integer, b bits per coefficient."""

    def __init__(self, order: int, bits: int):
        self.n = order
        self.b = bits
        self.mod = 1 << (bits * order)
        self.half = self.mod >> 1
        self.mask = (1 << bits) - 1
        self.hb = 1 << (bits - 1)

    def pack(self, coeffs) -> int:
        v = 0
        for k in range(min(len(coeffs), self.n) - 1, -1, -1):
            v = (v << self.b) + int(coeffs[k])
        return v

    def unpack(self, v: int) -> list:
        out = []
        for _ in range(self.n):
            d = v & self.mask
            if d >= self.hb:
                d -= 1 << self.b
            out.append(d)
            v = (v - d) >> self.b
        return out

    def mul(self, a: int, b: int) -> int:
        v = (a * b) % self.mod
        return v - self.mod if v >= self.half else v


def wdvv_sweep(F: Potential, quadruples=None, progress=None) -> dict:
    """Exact WDVV check over index quadruples using packed integer series.

    All coefficients are scaled by a common denominator so that every series
    is integral; A(ij|kl) = sum F_ijp eta^pq F_qkl is cached per unordered
    pair of pairs and the three pairings of each 4-multiset are compared.
    Returns {"checked": n, "failures": [...], "distinct_products": m}.
    """
    order = F.poly.qorder
    vars_ = F.vars
    nv = len(vars_)
    den = 1
    for c in F.poly.terms.values():
        cs = c.coeffs if isinstance(c, PowerSeries) else [c]
        for x in cs:
            den = math.lcm(den, Fraction(x).denominator)
    eta_inv = [[F.pairing.inv(p, q) for q in vars_] for p in vars_]
    for row in eta_inv:
        for e in row:
            if Fraction(e).denominator != 1:
                raise ValueError("inverse pairing must be integral for the packed sweep")
    eta_pairs = [(p, q, int(eta_inv[p][q])) for p in range(nv) for q in range(nv) if eta_inv[p][q] != 0]

    def as_list(c):
        if isinstance(c, PowerSeries):
            return [int(Fraction(x) * den) for x in c.coeffs]
        return [int(Fraction(c) * den)]

    scaled = MultiPoly(vars_, {e: as_list(c) for e, c in F.poly.terms.items()})
    div = vars_.index(F.divisor_var) if F.divisor_var else None

    def d(poly: dict, v: int) -> dict:
        out = {}
        for e, cs in poly.items():
            if e[v]:
                f = e[:v] + (e[v] - 1,) + e[v + 1:]
                acc = out.get(f)
                new = [x * e[v] for x in cs]
                out[f] = new if acc is None else _addl(acc, new)
            if v == div:
                new = [k * x for k, x in enumerate(cs)]
                if any(new):
                    acc = out.get(e)
                    out[e] = new if acc is None else _addl(acc, new)
        return {e: cs for e, cs in out.items() if any(cs)}

    first = {v: d(scaled.terms, v) for v in range(nv)}
    second = {}
    for a in range(nv):
        for b in range(a, nv):
            second[(a, b)] = d(first[a], b)
    third_raw = {}
    maxc = 1
    for a in range(nv):
        for b in range(a, nv):
            for c in range(b, nv):
                t = d(second[(a, b)], c)
                third_raw[(a, b, c)] = t
                for cs in t.values():
                    for x in cs:
                        maxc = max(maxc, abs(x))
    maxterms = max((len(t) for t in third_raw.values()), default=1)
    bits = 2 * maxc.bit_length() + order.bit_length() + (4 * len(eta_pairs) * maxterms * maxterms).bit_length() + 4
    pk = _Packed(order, bits)
    third = {k: {e: pk.pack(cs) for e, cs in t.items()} for k, t in third_raw.items()}

    def T(a, b, c):
        return third[tuple(sorted((a, b, c)))]

    acache = {}

    def A(i, j, k, l):
        p1, p2 = tuple(sorted((i, j))), tuple(sorted((k, l)))
        key = (p1, p2) if p1 <= p2 else (p2, p1)
        if key in acache:
            return acache[key]
        (i, j), (k, l) = key
        out = {}
        for p, q, e in eta_pairs:
            left = T(i, j, p)
            if not left:
                continue
            right = T(q, k, l)
            if not right:
                continue
            for e1, c1 in left.items():
                for e2, c2 in right.items():
                    m = tuple(x + y for x, y in zip(e1, e2))
                    out[m] = out.get(m, 0) + e * pk.mul(c1, c2)
        out = {m: v for m, v in out.items() if v}
        acache[key] = out
        return out

    if quadruples is None:
        quadruples = list(itertools.combinations_with_replacement(range(nv), 4))
    else:
        quadruples = [tuple(vars_.index(v) if isinstance(v, str) else v for v in qd) for qd in quadruples]
    failures = []
    for n, (i, j, k, l) in enumerate(quadruples):
        a1 = A(i, j, k, l)
        a2 = A(i, k, j, l)
        a3 = A(i, l, j, k)
        if a1 != a2 or a1 != a3:
            failures.append(tuple(vars_[x] for x in (i, j, k, l)))
        if progress and n % 50 == 0:
            progress(n, len(quadruples))
    return {"checked": len(quadruples), "failures": failures, "distinct_products": len(acache),
            "order": order, "denominator": den, "slot_bits": bits}


def _addl(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for k, x in enumerate(b):
        out[k] += x
    return out


# ---------------------------------------------------------------------------
# homogeneity


def homogeneity_grades(sym: MultiPoly | None = None) -> dict:
    """alpha-grade of every monomial of H (the potential minus the t0 block):
    (# t_{i,j} factors) - (# x, y, z factors) - 2 (# w factors)."""
    sym = sym or f0_p442_symbolic()
    idx = {v: sym.vars.index(v) for v in sym.vars}
    tij = [idx[v] for v in ("t1", "t2", "t3", "t4", "t5", "t6", "t7")]
    out = {}
    for e, c in sym.terms.items():
        if e[idx["t0"]]:
            continue
        g = sum(e[i] for i in tij) - e[idx["x"]] - e[idx["y"]] - e[idx["z"]] - 2 * e[idx["w"]]
        out[e] = g
    return out


def homogeneity_residual(sym: MultiPoly | None = None) -> MultiPoly:
    """H(alpha t_ij; x/alpha, y/alpha, z/alpha, w/alpha^2) - alpha^2 H as a
    polynomial in the extra variable alpha (zero iff every grade is 2)."""
    sym = sym or f0_p442_symbolic()
    grades = homogeneity_grades(sym)
    vars_ = sym.vars + ("alpha",)
    out = {}
    for e, g in grades.items():
        if g == 2:
            continue
        if g < 0:
            raise ValueError(f"negative alpha-grade {g} at {e}")
        c = sym.terms[e]
        out[e + (g,)] = out.get(e + (g,), 0) + c
        out[e + (2,)] = out.get(e + (2,), 0) - c
    return MultiPoly(vars_, out)


# ---------------------------------------------------------------------------
# E7-tilde fixture and correlators


def _e7_poly(terms: dict) -> MultiPoly:
    idx = {v[2:]: k for k, v in enumerate(E7_VARS)}
    out = {}
    for key, c in terms.items():
        e = [0] * 9
        for lab in key:
            e[idx[lab]] += 1
        out[tuple(e)] = out.get(tuple(e), 0) + Fraction(c)
    return MultiPoly(E7_VARS, out)


def e7_fixture_table() -> dict:
    """{(sorted t+ monomial labels, power of tt33): coefficient} for every
    displayed coefficient; monomials absent from the display are zero up to
    tt33^8 in degree three."""
    R = Fraction
    series = {
        ("12", "21", "22"): {0: R(1), 2: R(1, 32), 4: R(1, 6144), 6: R(1, 327680), 8: R(289, 2642411520)},
        ("13", "21", "21"): {0: R(1, 2), 4: R(1, 3072), 8: R(1, 330301440)},
        ("12", "12", "31"): {0: R(1, 2), 4: R(1, 3072), 8: R(1, 330301440)},
        ("12", "12", "13"): {1: R(-1, 8), 5: R(-1, 61440)},
        ("21", "21", "31"): {1: R(-1, 8), 5: R(-1, 61440)},
    }
    out = {}
    for mono, cs in series.items():
        for p, c in cs.items():
            out[(mono, p)] = c
    return out


def f0_e7_fixture() -> Potential:
    """The displayed E7-tilde potential through tt33^8 in the cubic part."""
    terms = {
        ("11", "11", "33"): Fraction(1, 2),
        ("11", "21", "23"): 1,
        ("11", "12", "32"): 1,
        ("11", "13", "31"): 1,
        ("11", "22", "22"): Fraction(1, 2),
    }
    for (mono, p), c in e7_fixture_table().items():
        terms[tuple(mono) + ("33",) * p] = c
    poly = _e7_poly(terms)
    grading = {v: sector_info(e7_elem(v[2:])).iota for v in E7_VARS}
    eta = pairings("E7")
    eta = PairingSpec(E7_VARS, eta.matrix, eta.inverse)
    return Potential(poly, eta, grading, "tt11", "tt33", None, {"tt33_order": 9})


def aut_factor(insertions) -> int:
    out = 1
    for k in Counter(insertions).values():
        out *= math.factorial(k)
    return out


def correlator_from_potential(F: Potential, insertions):
    """Coefficient of the insertion monomial times |Aut(insertions)|."""
    vars_ = F.vars
    names = [x if x in vars_ else _e7_var(x) for x in insertions]
    e = [0] * len(vars_)
    for v in names:
        e[vars_.index(v)] += 1
    lim = F.meta.get("tt33_order")
    if lim is not None and F.top_var in vars_ and e[vars_.index(F.top_var)] >= lim:
        raise ValueError("monomial beyond the stored truncation")
    return F.poly.coefficient(tuple(e)) * aut_factor(names)


def _e7_var(label) -> str:
    return "tt" + str(label)


# ---------------------------------------------------------------------------
# reconstruction


@dataclass
class CorrelatorTable:
    """Correlators keyed by sorted insertion tuples, with provenance tags."""

    values: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def set(self, insertions, value, tag: str):
        key = tuple(sorted(insertions))
        self.values[key] = value
        self.provenance[key] = tag

    def get(self, insertions, default=None):
        return self.values.get(tuple(sorted(insertions)), default)

    def __contains__(self, insertions):
        return tuple(sorted(insertions)) in self.values

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["insertions", "value", "provenance"])
        for key in sorted(self.values, key=lambda k: (len(k), k)):
            v = QExt.coerce(self.values[key])
            w.writerow([" ".join(key), str(v), self.provenance[key]])
        return buf.getvalue()


def e7_seeds(four_point=Fraction(-1, 8), corrupt=None) -> CorrelatorTable:
    """3-point structure constants of the E7-tilde algebra plus the basic
    4-point seeds with one rho1^3 rho2^3 rho3 insertion.

    ``four_point`` is the monomial coefficient of tt33 tt21^2 tt31 (and of
    tt33 tt12^2 tt13); ``corrupt`` optionally replaces the second one.
    """
    t = CorrelatorTable()
    eta = pairings("E7")
    for a in eta.labels:
        for b in eta.labels:
            if eta(a, b) and a <= b:
                t.set(("11", a, b), eta(a, b), "seed")
    t.set(("12", "21", "22"), 1, "seed")
    t.set(("13", "21", "21"), 1, "seed")
    t.set(("12", "12", "31"), 1, "seed")
    t.set(("21", "21", "31", "33"), 2 * Fraction(four_point), "seed")
    second = four_point if corrupt is None else corrupt
    t.set(("12", "12", "13", "33"), 2 * Fraction(second), "seed")
    return t


def e7_primitive_labels(table: CorrelatorTable | None = None):
    """Sectors of positive degree that are not products of two positive-degree
    sectors in the algebra at the origin."""
    table = table or e7_seeds()
    eta = pairings("E7")
    labels = [l for l in eta.labels if l != "11"]
    products = set()
    for a in labels:
        for b in labels:
            for c in eta.labels:
                v = table.get((a, b, c), 0)
                if v:
                    # a * b = sum_c <a b c> eta^{c d} d
                    for dd in eta.labels:
                        if eta.inv(c, dd):
                            products.add(dd)
    return [l for l in labels if l not in products]


@functools.lru_cache(maxsize=None)
def _admissible_sorted(labels, c_hat) -> bool:
    hs = [e7_elem(l) for l in labels]
    n = len(hs)
    if sum((sector_info(h).iota for h in hs), Fraction(0)) != c_hat + n - 3:
        return False
    return selection_linebundle(0, hs)[1]


def _admissible(labels, c_hat=1) -> bool:
    """Degree and selection-rule filter for E7-tilde correlators."""
    return _admissible_sorted(tuple(sorted(labels)), c_hat)


def _candidates(n: int, labels):
    for combo in itertools.combinations_with_replacement(labels, n):
        if _admissible(combo):
            yield combo


def _multiset_splits(S):
    """All ordered splits S = S1 + S2 of a sorted tuple, as sorted tuples."""
    cnt = Counter(S)
    keys = sorted(cnt)
    for parts in itertools.product(*(range(cnt[k] + 1) for k in keys)):
        s1, s2 = [], []
        for k, m in zip(keys, parts):
            s1 += [k] * m
            s2 += [k] * (cnt[k] - m)
        yield tuple(s1), tuple(s2)


def e7_symmetries():
    """The swap x1 <-> x2 of W = x1^4 + x2^4 + x3^2, acting as ab -> ba."""
    return [{f"{a}{b}": f"{b}{a}" for a, b in e7_basis()}]


def e7_torus_weight(insertions) -> int:
    """sum (a - b) over insertions phi_ab; phi_ab -> alpha^(a-b) phi_ab
    preserves the pairing and the 3-point block."""
    return sum(int(str(l)[0]) - int(str(l)[1]) for l in insertions)


def reconstruct_wdvv(seeds: CorrelatorTable, max_points: int = 5, pairing: PairingSpec | None = None,
                     c_hat=1, symmetries=()) -> CorrelatorTable:
    """Determine all primary genus-0 correlators with n <= max_points from the
    seeds by solving WDVV layer by layer.

    Correlators of n points are unknowns; they enter linearly the WDVV
    relations with n - 3 extra insertions (the other factor being a known
    3-point value). Every equation in a layer is imposed, so corrupted seeds
    surface as an inconsistent system. Unit correlators with n >= 4 vanish.

    ``symmetries`` are label permutations of the theory; each one adds the
    linear constraints <sigma(S)> = <S> in every layer, seeds included.
    """
    eta = pairing or pairings("E7")
    labels = list(eta.labels)
    table = CorrelatorTable(dict(seeds.values), dict(seeds.provenance))
    pairs = [(p, q, eta.inv(p, q)) for p in labels for q in labels if eta.inv(p, q)]
    for n in range(4, max_points + 1):
        unknowns = []
        for combo in _candidates(n, labels):
            if "11" in combo:
                if combo not in table:
                    table.set(combo, Fraction(0), "reconstructed")
                continue
            if combo not in table:
                unknowns.append(combo)
        index = {u: k for k, u in enumerate(unknowns)}
        rows, rhs = [], []

        def corr(ins):
            """Known value (Fraction) or ('u', index) for a current unknown."""
            key = tuple(sorted(ins))
            if len(key) > n:
                raise AssertionError("unexpected correlator size")
            if key in table:
                return table.get(key)
            if len(key) == n and key in index:
                return ("u", index[key])
            if not _admissible(key):
                return Fraction(0)
            if len(key) < n:
                raise Underdetermined(f"correlator {key} is unknown at layer {len(key)}")
            return Fraction(0)

        def lin(key):
            v = corr(key)
            row = [Fraction(0)] * len(unknowns)
            if isinstance(v, tuple):
                row[v[1]] = Fraction(1)
                return row, Fraction(0)
            return row, Fraction(v)

        for sigma in symmetries:
            for combo in _candidates(n, labels):
                image = tuple(sorted(sigma[l] for l in combo))
                r1, c1 = lin(combo)
                r2, c2 = lin(image)
                row = [a - b for a, b in zip(r1, r2)]
                if any(row):
                    rows.append(row)
                    rhs.append(c2 - c1)
                elif c1 != c2:
                    raise InconsistentSeeds(f"{combo} and its image {image} differ: {c1} vs {c2}")

        m = n - 3
        for S in itertools.combinations_with_replacement(labels, m):
            for i, j, k, l in itertools.combinations_with_replacement(labels, 4):
                row = [Fraction(0)] * len(unknowns)
                const = Fraction(0)
                for sign, (a, b, c, d) in ((1, (i, j, k, l)), (-1, (i, k, j, l))):
                    for S1, S2 in _multiset_splits(S):
                        w = Fraction(sign, aut_factor(S1) * aut_factor(S2)) * aut_factor(S)
                        for p, q, e in pairs:
                            x = corr((a, b, p) + S1)
                            if x == 0:
                                continue
                            y = corr((q, c, d) + S2)
                            if y == 0:
                                continue
                            if isinstance(x, tuple) and isinstance(y, tuple):
                                raise AssertionError("quadratic term in a linear layer")
                            if isinstance(x, tuple):
                                row[x[1]] += w * e * y
                            elif isinstance(y, tuple):
                                row[y[1]] += w * e * x
                            else:
                                const += w * e * x * y
                if any(row) or const:
                    rows.append(row)
                    rhs.append(-const)
        if not unknowns:
            bad = [r for r in rhs if r != 0]
            if bad:
                raise InconsistentSeeds(f"layer {n}: seeds violate WDVV")
            continue
        if not rows:
            raise Underdetermined(f"layer {n}: no equations constrain {len(unknowns)} unknowns")
        try:
            sol, free = solve_exact(rows, rhs)
        except InconsistentSystem as exc:
            raise InconsistentSeeds(f"layer {n}: {exc}") from None
        if free:
            raise Underdetermined(f"layer {n}: unresolved {[unknowns[f] for f in free][:5]}")
        for u, v in zip(unknowns, sol):
            table.set(u, v, "reconstructed")
    return table

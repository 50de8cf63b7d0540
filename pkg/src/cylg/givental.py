"""Givental-type actions on genus-zero data.

Contents:

* Bernoulli polynomials and the diagonal twisting element R^tw;
* the untwisted theory (multinomial psi-integrals on the admissible
  sectors) and its identification with copies of the point theory;
* twisted correlators as the R-matrix graph sum over stable trees applied
  to the untwisted theory, their specialization s_0 = -ln(lam),
  s_l = (l-1)!/lam^l and the non-equivariant limit;
* a genus-zero quantized action on truncated descendant potentials;
* the genus-zero topological recursion relation;
* the numeric CY/LG check through S^tau, S_0^c and R^sigma.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from .exactnum import I, QExt, qext_embed
from .series import LaurentPoly, MultiPoly
from .statespace import (A1, A3, E7, E7_VARS, P442_VARS, GroupElem, LGConfig, e7_elem,
                         sector_info, selection_linebundle)

__all__ = [
    "TruncationOverflow",
    "NegativePowers",
    "IdentityFailure",
    "MissingPrimary",
    "bernoulli_number",
    "bernoulli_poly",
    "rtw_log_coefficients",
    "rtw_element",
    "rtw_symplectic_check",
    "psi_integral",
    "untwisted_correlator",
    "untwisted_primary_potential",
    "untwisted_factor_change",
    "TwistedValue",
    "twisted_correlator",
    "specialize",
    "nonequiv_limit",
    "stable_trees",
    "TriangularElement",
    "DescendentPotential",
    "untwisted_descendent_potential",
    "quantize_apply",
    "s0c_apply",
    "trr_descendent",
    "composite_cylg_numeric",
    "correlator_of",
]


class TruncationOverflow(ValueError):
    """The requested output needs coefficients beyond the input truncation."""


class NegativePowers(ValueError):
    """A specialized twisted correlator still has negative powers of lam."""


class IdentityFailure(ValueError):
    """A claimed change of variables does not hold."""


class MissingPrimary(KeyError):
    """A primary correlator needed by the recursion is not available."""


# ---------------------------------------------------------------------------
# Bernoulli polynomials


@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """B_n with B_1 = -1/2."""
    if n == 0:
        return Fraction(1)
    return -sum((math.comb(n + 1, k) * bernoulli_number(k) for k in range(n)), Fraction(0)) / (n + 1)


def bernoulli_poly(n: int, x) -> Fraction:
    if n < 0 or n > 12:
        raise ValueError("Bernoulli polynomials are tabulated for 0 <= n <= 12")
    x = Fraction(x)
    return sum((math.comb(n, k) * bernoulli_number(k) * x ** (n - k) for k in range(n + 1)), Fraction(0))


# ---------------------------------------------------------------------------
# the twisting element


def _svars(L: int):
    return tuple(f"s{l}" for l in range(1, L + 1))


def rtw_log_coefficients(h: GroupElem, L: int) -> list:
    """[c_0, ..., c_L] with c_l = sum_k B_{l+1}(i_k(h) + q_k) / (l+1)!.

    The l-th coefficient of log R^tw on phi_h is s_l * c_l.
    """
    if L > 11:
        raise ValueError("z-order is limited to 11")
    ms = [ik + q for ik, q in zip(sector_info(h).ik, h.config.weights)]
    return [sum((bernoulli_poly(l + 1, m) for m in ms), Fraction(0)) / math.factorial(l + 1)
            for l in range(L + 1)]


def _exp_series(a: list, L: int, vars_):
    """exp of sum_{l>=1} a[l] z^l as a list of L+1 MultiPoly coefficients."""
    one = MultiPoly.const(vars_, Fraction(1))
    e = [one] + [MultiPoly(vars_, {}) for _ in range(L)]
    for n in range(1, L + 1):
        acc = MultiPoly(vars_, {})
        for k in range(1, n + 1):
            if k < len(a) and not a[k].is_zero():
                acc = acc + a[k] * e[n - k] * Fraction(k)
        e[n] = acc * Fraction(1, n)
    return e


@dataclass(frozen=True)
class RtwEntry:
    """Diagonal entry exp(s_0 c_0) * (sum_l zseries[l] z^l) of R^tw or its inverse."""

    h: GroupElem
    s0_coefficient: Fraction
    zseries: tuple
    log: tuple


def rtw_element(h: GroupElem, L: int, inverse: bool = False) -> RtwEntry:
    """The phi_h entry of R^tw = exp(sum_l s_l c_l(h) z^l) to order z^L.

    The s_0 part is kept as the exponent coefficient; the z-series has
    coefficients that are polynomials in s_1 ... s_L.
    """
    vars_ = _svars(L)
    c = rtw_log_coefficients(h, L)
    sign = -1 if inverse else 1
    log = [None] + [MultiPoly.var(vars_, f"s{l}", sign * c[l]) for l in range(1, L + 1)]
    return RtwEntry(h, sign * c[0], tuple(_exp_series(log, L, vars_)),
                    tuple(sign * x for x in c))


def rtw_symplectic_check(config: LGConfig = E7, L: int = 11) -> bool:
    """c_l(h) + (-1)^l c_l(h^-1) = 0 for l >= 1, i.e. r(z) + r(-z)^* = 0.

    For l = 0 the sum is the number of zero phases of h, which is the
    exponent in the twisted pairing.
    """
    for h in config.elements():
        a, b = rtw_log_coefficients(h, L), rtw_log_coefficients(h.inv(), L)
        zeros = sum(1 for t in h.theta() if t == 0)
        if a[0] + b[0] != zeros:
            return False
        if any(a[l] + (-1) ** l * b[l] != 0 for l in range(1, L + 1)):
            return False
    return True


# ---------------------------------------------------------------------------
# untwisted theory


def psi_integral(exps) -> int:
    """int over M_{0,n} of prod psi_i^{a_i}: multinomial(n-3; a) or 0."""
    exps = list(exps)
    n = len(exps)
    if n < 3 or any(a < 0 for a in exps) or sum(exps) != n - 3:
        return 0
    out = math.factorial(n - 3)
    for a in exps:
        out //= math.factorial(a)
    return out


def _admissible(hs) -> bool:
    return selection_linebundle(0, hs)[1]


def untwisted_correlator(hs, exps=None) -> int:
    hs = list(hs)
    if len(hs) < 3:
        raise ValueError("need n >= 3")
    exps = [0] * len(hs) if exps is None else list(exps)
    if not _admissible(hs):
        return 0
    return psi_integral(exps)


def _factor_labels(config: LGConfig):
    """Untwisted sector variables t_a <-> J^(a+1), a = 0 .. d-1 (one-variable factors)."""
    if len(config.weights) != 1:
        raise ValueError("factor labels are defined for one-variable theories")
    d = config.orders[0]
    return [GroupElem((a + 1,), config) for a in range(d)]


def untwisted_primary_potential(config: LGConfig):
    """F^un as a cubic MultiPoly in t0 .. t_{d-1}, t_a <-> J^(a+1)."""
    elems = _factor_labels(config)
    vars_ = tuple(f"t{a}" for a in range(len(elems)))
    terms = {}
    for combo in itertools.combinations_with_replacement(range(len(elems)), 3):
        v = untwisted_correlator([elems[a] for a in combo])
        if v:
            e = [0] * len(vars_)
            for a in combo:
                e[a] += 1
            aut = 1
            for k in e:
                aut *= math.factorial(k)
            terms[tuple(e)] = QExt(Fraction(v, aut))
    return MultiPoly(vars_, terms)


def _sum_cubes(vars_, rows):
    out = MultiPoly(vars_, {})
    for row in rows:
        u = MultiPoly(vars_, {tuple(1 if k == j else 0 for k in range(len(vars_))): QExt.coerce(c)
                              for j, c in enumerate(row) if not QExt.coerce(c).is_zero()})
        out = out + u * u * u * QExt(Fraction(1, 6))
    return out


def _ratio(a: MultiPoly, b: MultiPoly):
    """lam with a = lam * b, or None."""
    if b.is_zero() or set(a.terms) != set(b.terms):
        return None
    lam = None
    for e, c in b.terms.items():
        r = QExt.coerce(a.terms[e]) * QExt.coerce(c).inverse()
        if lam is None:
            lam = r
        elif r != lam:
            return None
    return lam


A3_CHANGE = (
    (1, -1, 1, -1),
    (1, 1, 1, 1),
    (-1, -I, 1, I),
    (-1, I, 1, -I),
)


def untwisted_factor_change(strict: bool = False) -> dict:
    """Compare F^un of the A3 and A1 factors with sum u_k^3/6.

    For A3 the u_k are the displayed linear forms; for A1 the matrix is found
    by search over entries in {0, +-1, +-i}. Each report records the ratio
    lam with sum u_k^3/6 = lam * F^un and whether lam = 1. With ``strict``,
    lam != 1 raises IdentityFailure.
    """
    out = {}
    f3 = untwisted_primary_potential(A3)
    s3 = _sum_cubes(f3.vars, A3_CHANGE)
    lam3 = _ratio(s3, f3)
    out["A3"] = {"matrix": A3_CHANGE, "potential": f3, "sum_cubes": s3, "ratio": lam3,
                 "exact": lam3 == QExt(1)}
    f1 = untwisted_primary_potential(A1)
    if f1.is_zero():
        raise IdentityFailure("zero potential")
    entries = (QExt(0), QExt(1), QExt(-1), I, -I)
    found = []
    for m in itertools.product(entries, repeat=4):
        rows = (m[:2], m[2:])
        lam = _ratio(_sum_cubes(f1.vars, rows), f1)
        if lam is not None and lam.is_rational():
            found.append((rows, lam))
    if not found:
        raise IdentityFailure("no change of variables for the A1 factor")
    best = min(found, key=lambda rl: abs(rl[1].to_fraction() - 1))
    out["A1"] = {"matrix": best[0], "potential": f1, "sum_cubes": _sum_cubes(f1.vars, best[0]),
                 "ratio": best[1], "exact": best[1] == QExt(1), "solutions": len(found)}
    if strict:
        for name, rep in out.items():
            if not rep["exact"]:
                raise IdentityFailure(f"{name}: sum u^3/6 = {rep['ratio']} * F^un")
    return out


# ---------------------------------------------------------------------------
# stable trees


def stable_trees(n: int):
    """Genus-zero stable trees with legs 0..n-1, as tuples of splits.

    A split is the frozenset of legs on the side without leg 0; splits in a
    tree are nested or disjoint.
    """
    legs = range(1, n)
    splits = [frozenset(c) for k in range(2, n - 1) for c in itertools.combinations(legs, k)]

    def ok(a, b):
        return a <= b or b <= a or not (a & b)

    def rec(start, chosen):
        yield tuple(chosen)
        for i in range(start, len(splits)):
            s = splits[i]
            if all(ok(s, c) for c in chosen):
                yield from rec(i + 1, chosen + [s])

    yield from rec(0, [])


def _tree_vertices(n, splits):
    """Vertices as (legs, child splits); the root has key None."""
    parent = {}
    for s in splits:
        above = [t for t in splits if s < t]
        parent[s] = min(above, key=len) if above else None
    verts = {None: ([], [])}
    for s in splits:
        verts[s] = ([], [])
    for s in splits:
        verts[parent[s]][1].append(s)
    for i in range(n):
        owner = None
        for s in splits:
            if i in s and (owner is None or len(s) < len(owner)):
                owner = s
        verts[owner][0].append(i)
    return verts, parent


# ---------------------------------------------------------------------------
# twisted correlators


@dataclass
class TwistedValue:
    """exp(s0 * s0_exponent) * poly(s_1, ..., s_L)."""

    s0_exponent: int
    poly: MultiPoly
    hs: tuple = ()
    exps: tuple = ()

    def poly_at(self, values: dict):
        """The s_1 ... s_L part evaluated at the given values (exact if they are)."""
        acc = 0
        for e, c in self.poly.terms.items():
            t = c
            for v, k in zip(self.poly.vars, e):
                if k:
                    t = t * values[v] ** k
            acc = acc + t
        return acc

    def at_s(self, values: dict):
        """Evaluate at numeric s_l (s0 must be given if s0_exponent != 0)."""
        acc = 0
        for e, c in self.poly.terms.items():
            t = c
            for v, k in zip(self.poly.vars, e):
                if k:
                    t = t * values[v] ** k
            acc = acc + t
        if self.s0_exponent:
            acc = acc * mpmath.exp(values["s0"] * self.s0_exponent)
        return acc


def _elem_from_theta(theta, config):
    return GroupElem(tuple(int(t * d) for t, d in zip(theta, config.orders)), config)


def _node_sector(hs, side, config):
    """Sector on the child half-edge of the node cutting off ``side``."""
    n = len(side) + 1
    th = []
    for k, q in enumerate(config.weights):
        s = q * (n - 2) - sum((hs[i].theta()[k] for i in side), Fraction(0))
        th.append(s - math.floor(s))
    return _elem_from_theta(th, config)


def _edge_poly(gc, L, vars_):
    """(1 - Rinv_gc(x) Rinv_gc^-1(y)) / (x + y) as {(i, j): coeff}, total degree < L."""
    a = rtw_element(gc, L, inverse=True).zseries
    b = rtw_element(gc.inv(), L, inverse=True).zseries
    num = {}
    for i in range(L + 1):
        for j in range(L + 1 - i):
            c = a[i] * b[j]
            if (i, j) == (0, 0):
                c = c - MultiPoly.const(vars_, Fraction(1))
            if not c.is_zero():
                num[(i, j)] = -c
    q = {}
    zero = MultiPoly(vars_, {})
    for d in range(1, L + 1):
        # (x + y) Q_{d-1} = N_d; solve from the pure x^d coefficient down
        prev = zero
        for i in range(d, 0, -1):
            cur = num.get((i, d - i), zero) - prev
            if not cur.is_zero():
                q[(i - 1, d - i)] = cur
            prev = cur
        if not (num.get((0, d), zero) - prev).is_zero():
            raise ArithmeticError("edge numerator is not divisible by x + y")
    return q


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _vertex_integral(bs, kappa_coeffs, vars_):
    """int over M_{0,N} with extra kappa points weighted by T(z) = z(1 - Rinv_j(z))."""
    N = len(bs)
    D = N - 3 - sum(bs)
    if D < 0:
        return MultiPoly(vars_, {})
    out = MultiPoly(vars_, {})
    for m in range(0, D + 1):
        for comp in _compositions(D, m):
            w = MultiPoly.const(vars_, Fraction(psi_integral(list(bs) + [f + 1 for f in comp]),
                                                math.factorial(m)))
            for f in comp:
                w = w * kappa_coeffs[f + 1]
            out = out + w
    return out


def twisted_correlator(hs, exps=None, L: int | None = None) -> TwistedValue:
    """Genus-zero twisted correlator <tau_{a_1}(phi_h1) ... >^tw as a formal
    function of s_0, s_1, ..., s_L.

    The s_0 dependence is exp(s0 * sum_k chi_k) with chi_k = deg + 1 of the
    modified line bundles; the remaining part is the R-matrix graph sum with
    R = exp(sum_{l>=1} s_l c_l z^l): legs carry R^-1(psi), edges
    (1 - R^-1(psi') R^-1(psi''))/(psi' + psi''), and kappa points carry
    z(1 - R^-1_j(z)) applied to the unit.
    """
    hs = tuple(hs)
    n = len(hs)
    if n < 3:
        raise ValueError("need n >= 3")
    config = hs[0].config
    exps = tuple([0] * n if exps is None else exps)
    L = max(n - 3, 1) if L is None else L
    vars_ = _svars(L)
    zero = MultiPoly(vars_, {})
    if not _admissible(hs) or sum(exps) > n - 3:
        return TwistedValue(0, zero, hs, exps)
    degs, _ = selection_linebundle(0, hs, use_m_values=True)
    s0_exp = sum(int(d) + 1 for d in degs)
    legs = [rtw_element(h, L, inverse=True).zseries for h in hs]
    rj = rtw_element(config.j(), L, inverse=True).zseries
    kappa = {e: -rj[e - 1] for e in range(2, L + 2)}
    total = zero
    for splits in stable_trees(n):
        verts, parent = _tree_vertices(n, splits)
        # half-edge slots: legs 0..n-1, then (child end, parent end) per split
        slot_vertex = {}
        for key, (vlegs, _) in verts.items():
            for i in vlegs:
                slot_vertex[("leg", i)] = key
        for s in splits:
            slot_vertex[("c", s)] = s
            slot_vertex[("p", s)] = parent[s]
        factors = []
        for i in range(n):
            factors.append(((("leg", i),), {(exps[i] + p,): legs[i][p]
                                            for p in range(L + 1) if not legs[i][p].is_zero()}))
        for s in splits:
            factors.append(((("c", s), ("p", s)), _edge_poly(_node_sector(hs, s, config), L, vars_)))
        # expand the product, tracking psi exponents per slot
        states = {(): MultiPoly.const(vars_, Fraction(1))}
        for slots, table in factors:
            new = {}
            for key, c in states.items():
                for ex, cc in table.items():
                    k2 = key + tuple(zip(slots, ex))
                    new[k2] = new.get(k2, zero) + c * cc
            states = new
        for key, c in states.items():
            per_vertex = {v: [] for v in verts}
            for slot, e in key:
                per_vertex[slot_vertex[slot]].append(e)
            w = c
            for v, bs in per_vertex.items():
                w = w * _vertex_integral(bs, kappa, vars_)
                if w.is_zero():
                    break
            total = total + w
    return TwistedValue(s0_exp, total, hs, exps)


def specialize(tv: TwistedValue, var: str = "lam") -> LaurentPoly:
    """s_0 = -ln(lam), s_l = (l-1)!/lam^l: a Laurent polynomial in lam."""
    out = LaurentPoly({}, var)
    for e, c in tv.poly.terms.items():
        power = 0
        coeff = Fraction(c)
        for l, k in enumerate(e, start=1):
            power -= l * k
            coeff *= Fraction(math.factorial(l - 1)) ** k
        out = out + LaurentPoly({power: coeff}, var)
    return out * LaurentPoly({-tv.s0_exponent: 1}, var)


def nonequiv_limit(expr: LaurentPoly):
    """The lam^0 coefficient, provided no negative powers are present."""
    low = expr.min_exponent()
    if low is not None and low < 0:
        raise NegativePowers(f"lowest power lam^{low}")
    return expr.coeff(0)


# ---------------------------------------------------------------------------
# genus-zero quantized action on truncated descendant potentials


@dataclass
class TriangularElement:
    """exp(sum_l m_l z^l) (upper) or exp(sum_l m_l z^-l) (lower).

    ``mats[l]`` maps (alpha, beta) to the entry (m_l)^alpha_beta; missing
    entries are zero.
    """

    kind: str
    labels: tuple
    mats: dict
    unit: str = ""

    def entry(self, l, a, b):
        return self.mats.get(l, {}).get((a, b), 0)

    def symplectic_defect(self, eta, eta_inv):
        """max |m_l - (-1)^(l+1) m_l^*| over entries, * the eta-adjoint."""
        worst = 0
        for l, m in self.mats.items():
            for a in self.labels:
                for b in self.labels:
                    adj = sum((eta_inv.get((a, c), 0) * self.entry(l, d, c) * eta.get((d, b), 0)
                               for c in self.labels for d in self.labels), 0)
                    d = self.entry(l, a, b) + (-1) ** l * adj
                    worst = max(worst, abs(complex(d)) if not isinstance(d, Fraction) else abs(d))
        return worst


@dataclass
class DescendentPotential:
    """Genus-zero descendant potential truncated at polynomial degree ``degree``.

    Variables are t{l}_{label} for l <= levels. The potential is complete up
    to ``degree``: every monomial of total degree <= degree is present.
    Coordinates are unshifted; the dilaton shift enters through the first
    term of the quantized operator. ``dim_rule`` records that correlators
    vanish unless sum of psi-exponents = n - 3.
    """

    labels: tuple
    levels: int
    poly: MultiPoly
    degree: int
    eta_inv: dict
    unit: str
    dim_rule: bool = True

    @staticmethod
    def var_name(l, a):
        return f"t{l}_{a}"


def untwisted_descendent_potential(config: LGConfig, degree: int) -> DescendentPotential:
    """All untwisted correlators with n <= degree points (psi-degree n - 3)."""
    elems = list(config.elements())
    labels = tuple("".join(map(str, h.exps)) for h in elems)
    levels = max(degree - 3, 0)
    vars_ = tuple(DescendentPotential.var_name(l, a) for l in range(levels + 1) for a in labels)
    slots = [(l, i) for l in range(levels + 1) for i in range(len(elems))]
    terms = {}
    for n in range(3, degree + 1):
        for combo in itertools.combinations_with_replacement(range(len(slots)), n):
            ls = [slots[c][0] for c in combo]
            if sum(ls) != n - 3:
                continue
            v = untwisted_correlator([elems[slots[c][1]] for c in combo], ls)
            if v:
                e = [0] * len(vars_)
                for c in combo:
                    e[c] += 1
                aut = 1
                for k in e:
                    aut *= math.factorial(k)
                terms[tuple(e)] = Fraction(v, aut)
    eta_inv = {(a, "".join(map(str, h.inv().exps))): 1 for a, h in zip(labels, elems)}
    unit = "".join(map(str, config.j().exps))
    return DescendentPotential(labels, levels, MultiPoly(vars_, terms), degree, eta_inv, unit)


def _generator(T: TriangularElement, Z: DescendentPotential, F: MultiPoly) -> MultiPoly:
    """Genus-zero part of r-hat acting on exp(F/hbar), divided by exp(F/hbar)."""
    vn = Z.var_name
    vars_ = F.vars
    out = MultiPoly(vars_, {})

    def d(l, a):
        name = vn(l, a)
        return F.partial(name) if name in vars_ else None

    for l, mat in T.mats.items():
        if l < 1:
            raise ValueError("only z^l with l >= 1 is quantized here")
        # dilaton term
        for (a, b), v in mat.items():
            if b == Z.unit and v:
                p = d(l + 1, a)
                if p is not None:
                    out = out - p * v
        # transport t^{d,b} d/dt^{d+l,a}
        for dd in range(Z.levels + 1):
            for (a, b), v in mat.items():
                if not v:
                    continue
                p = d(dd + l, a)
                if p is None or p.is_zero():
                    continue
                out = out + MultiPoly.var(vars_, vn(dd, b), v) * p
        # (1/2) sum_{i+j=l-1} (-1)^{i+1} r^{ab} dF/dt^{i,a} dF/dt^{j,b}
        raised = {}
        for (a, c), v in mat.items():
            for (c2, b), w in Z.eta_inv.items():
                if c2 == c and v and w:
                    raised[(a, b)] = raised.get((a, b), 0) + v * w
        for i in range(l):
            j = l - 1 - i
            for (a, b), v in raised.items():
                pa, pb = d(i, a), d(j, b)
                if pa is None or pb is None or pa.is_zero() or pb.is_zero():
                    continue
                out = out + pa * pb * (Fraction((-1) ** (i + 1), 2) * v)
    return out


def quantize_apply(T: TriangularElement, Z: DescendentPotential, out_degree: int | None = None,
                   max_iter: int = 64) -> DescendentPotential:
    """exp(r-hat) on exp(F/hbar) at genus zero, by Picard iteration of
    dF/de = r-hat(F) on e in [0, 1].

    The dilaton term reads degree d + 1 to produce degree d; under the
    dimension rule a degree-d output needs input up to degree 2d - 3.
    """
    if T.kind != "upper":
        raise ValueError("quantize_apply handles upper-triangular elements")
    if not T.mats or all(not any(m.values()) for m in T.mats.values()):
        return Z
    has_dilaton = any(b == Z.unit and v for m in T.mats.values() for (a, b), v in m.items())
    if has_dilaton:
        if not Z.dim_rule:
            raise TruncationOverflow("dilaton term without a dimension bound")
        safe = (Z.degree + 3) // 2
    else:
        safe = Z.degree
    out_degree = safe if out_degree is None else out_degree
    if out_degree > safe:
        raise TruncationOverflow(f"degree {out_degree} needs input degree beyond {Z.degree}")
    evar = "__e"
    vars_ = Z.poly.vars + (evar,)
    F0 = Z.poly.reorder(vars_) if hasattr(Z.poly, "reorder") else Z.poly
    ie = len(vars_) - 1
    tdeg = Z.degree

    def trunc(P):
        return MultiPoly(vars_, {e: c for e, c in P.terms.items() if sum(e) - e[ie] <= tdeg})

    def integrate(P):
        out = {}
        for e, c in P.terms.items():
            k = e[ie]
            out[e[:ie] + (k + 1,)] = c * Fraction(1, k + 1)
        return MultiPoly(vars_, out)

    Zx = DescendentPotential(Z.labels, Z.levels, F0, Z.degree, Z.eta_inv, Z.unit, Z.dim_rule)
    F = F0
    for _ in range(max_iter):
        new = trunc(F0 + integrate(_generator(T, Zx, F)))
        if new == F:
            break
        F = new
    else:
        raise ArithmeticError("Picard iteration did not stabilize")
    at1 = {}
    for e, c in F.terms.items():
        if sum(e) - e[ie] <= out_degree:
            k = e[:ie]
            at1[k] = at1.get(k, 0) + c
    poly = MultiPoly(Z.poly.vars, at1)
    return DescendentPotential(Z.labels, Z.levels, poly, out_degree, Z.eta_inv, Z.unit, Z.dim_rule)


def s0c_apply(Z: DescendentPotential, c, top: str, middle=None) -> DescendentPotential:
    """t^{l,unit} fixed, t^{l,middle} -> c t, t^{l,top} -> c^2 t and hbar -> c^2 hbar,
    so that F_0 -> F_0(t_unit, c t_mid, c^2 t_top) / c^2."""
    if c == 0:
        raise ValueError("c must be nonzero")
    scale = {}
    for l in range(Z.levels + 1):
        for a in Z.labels:
            w = 0 if a == Z.unit else 2 if a == top else 1
            scale[Z.var_name(l, a)] = c ** w
    terms = {}
    for e, coeff in Z.poly.terms.items():
        f = coeff
        for v, k in zip(Z.poly.vars, e):
            if k:
                f = f * scale[v] ** k
        terms[e] = f / c ** 2
    return DescendentPotential(Z.labels, Z.levels, MultiPoly(Z.poly.vars, terms), Z.degree,
                               Z.eta_inv, Z.unit, Z.dim_rule)


def correlator_of(Z: DescendentPotential, insertions):
    """<tau_{l1}(a1) ...> from the potential: coefficient times |Aut|."""
    e = [0] * len(Z.poly.vars)
    for l, a in insertions:
        e[Z.poly.vars.index(Z.var_name(l, a))] += 1
    if sum(e) > Z.degree:
        raise TruncationOverflow("correlator beyond the truncation")
    aut = 1
    for k in e:
        aut *= math.factorial(k)
    return Z.poly.coefficient(tuple(e)) * aut


# ---------------------------------------------------------------------------
# topological recursion


def trr_descendent(primary, labels, eta_inv, insertions):
    """Genus-zero correlator <tau_{a1}(g1) ... tau_{an}(gn)> from primary data.

    ``primary(tuple_of_labels)`` returns the primary correlator (raising
    MissingPrimary or KeyError if unknown); ``eta_inv`` maps (a, b) to the
    inverse pairing. The recursion uses psi_1 = sum of boundary divisors
    separating point 1 from points 2 and 3.
    """
    ins = [(int(a), g) for a, g in insertions]
    n = len(ins)
    if n < 3:
        raise ValueError("need n >= 3")
    if sum(a for a, _ in ins) > n - 3:
        return 0
    k = next((i for i, (a, _) in enumerate(ins) if a > 0), None)
    if k is None:
        try:
            return primary(tuple(g for _, g in ins))
        except KeyError as exc:
            raise MissingPrimary(str(exc)) from None
    ins = [ins[k]] + ins[:k] + ins[k + 1:]
    (a1, g1), p2, p3 = ins[0], ins[1], ins[2]
    rest = ins[3:]
    total = 0
    for r in range(1, len(rest) + 1):
        for idx in itertools.combinations(range(len(rest)), r):
            left = [(a1 - 1, g1)] + [rest[i] for i in idx]
            right = [p2, p3] + [rest[i] for i in range(len(rest)) if i not in idx]
            for (al, be), w in eta_inv.items():
                if not w:
                    continue
                lv = trr_descendent(primary, labels, eta_inv, left + [(0, al)])
                if not lv:
                    continue
                rv = trr_descendent(primary, labels, eta_inv, [(0, be)] + right)
                if rv:
                    total = total + lv * w * rv
    return total


# ---------------------------------------------------------------------------
# CY/LG through S^tau, S_0^c, R^sigma


def _r_sigma_flow(F: MultiPoly, sigma, max_degree: int, unit="t0", top="t8"):
    """Solve dF/dsig = t_top (E - 2) F - (1/2) (dF/dt_unit)^2 to sig = ``sigma``.

    This is the genus-zero primary shadow of exp(sig E_{unit,top} z)^:
    the transport term pairs with the dilaton equation to give t_top (E - 2) F
    and the hbar-term gives -(1/2)(d_unit F)^2. The flow is nilpotent on
    polynomials of bounded degree.
    """
    sv = "__sig"
    vars_ = F.vars + (sv,)
    isg = len(vars_) - 1
    F0 = MultiPoly(vars_, {e + (0,): c for e, c in F.terms.items() if sum(e) <= max_degree})
    tt = MultiPoly.var(vars_, top, 1)

    def euler_minus_2(P):
        return MultiPoly(vars_, {e: c * (sum(e) - e[isg] - 2) for e, c in P.terms.items()})

    def trunc(P):
        return MultiPoly(vars_, {e: c for e, c in P.terms.items() if sum(e) - e[isg] <= max_degree})

    def integrate(P):
        return MultiPoly(vars_, {e[:isg] + (e[isg] + 1,): c / (e[isg] + 1) for e, c in P.terms.items()})

    G = F0
    for _ in range(max_degree + 2):
        d0 = G.partial(unit)
        rhs = trunc(tt * euler_minus_2(G)) - trunc(d0 * d0) * mpmath.mpf(0.5)
        new = trunc(F0 + integrate(trunc(rhs)))
        if new == G:
            break
        G = new
    out = {}
    for e, c in G.terms.items():
        k = e[:isg]
        out[k] = out.get(k, 0) + c * sigma ** e[isg]
    return MultiPoly(F.vars, out)


def _embed(x, precision):
    if isinstance(x, QExt):
        return qext_embed(x, precision)
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return x
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


@dataclass
class CompositeReport:
    precision: int
    tau: object
    c: object
    sigma: object
    comparisons: list = field(default_factory=list)
    max_error: object = None
    cubic_max_error: object = None
    tolerance: object = None
    passed: bool = False


def composite_cylg_numeric(precision: int = 256, max_degree: int = 5, tol=None) -> CompositeReport:
    """R^sigma S_0^c S^tau applied to the primary P442 potential, numerically.

    S^tau recentres the divisor variable at tau = -pi/2 (q = e^{-pi/2});
    the t0^2 term produced by the quantized S^tau cancels against the shift
    of t0^2 t8/2. S_0^c rescales with c = 1/Theta and R^sigma is the flow
    above with sigma = -1/(pi Theta^2). The result is mapped to the E7
    variables and compared with the fixture through degree ``max_degree``
    (3-point block, and t33-insertions beyond).
    """
    if precision < 192:
        raise ValueError("precision must be at least 192")
    from .cayley import _linear_forms, _substitute_series, _to_e7, taylor_from_qseries
    from .modular import numeric_constants
    from .potential import f0_e7_fixture, f0_p442_symbolic

    tol = mpmath.mpf(10) ** -30 if tol is None else tol
    with mpmath.workprec(precision):
        theta = numeric_constants(precision).Theta
        tau = -mpmath.pi / 2
        c = 1 / theta
        sigma = -1 / (mpmath.pi * theta ** 2)
        n_coeffs = max_degree - 1
        fs = taylor_from_qseries(tau, n_coeffs, precision)
        F = _substitute_series(f0_p442_symbolic(), fs.coeffs, n_coeffs, max_degree)
        F = MultiPoly(P442_VARS, {e: mpmath.mpc(_embed(cf, precision)) for e, cf in F.terms.items()
                                    if sum(e) <= max_degree})
        weights = {"t0": 0, "t8": 2}
        scaled = {}
        for e, cf in F.terms.items():
            w = sum(k * weights.get(v, 1) for v, k in zip(P442_VARS, e))
            scaled[e] = cf * c ** w / c ** 2
        F = MultiPoly(P442_VARS, scaled)
        F = _r_sigma_flow(F, sigma, max_degree)
        forms = {v: f.map_coeffs(lambda z: qext_embed(z, precision)) for v, f in _linear_forms().items()}
        e7 = _to_e7(F, forms)
        fix = f0_e7_fixture().poly
        report = CompositeReport(precision, tau, c, sigma, tolerance=tol)
        worst = cubic = mpmath.mpf(0)
        keys = set(k for k in e7.terms if sum(k) <= max_degree) | set(k for k in fix.terms if sum(k) <= max_degree)
        for k in sorted(keys):
            expect = fix.coefficient(k)
            if sum(k) > 3 and not expect:
                continue        # the fixture lists only some higher terms
            got = e7.coefficient(k)
            err = abs(mpmath.mpc(got) - _embed(expect, precision))
            report.comparisons.append((k, got, expect, err))
            worst = max(worst, err)
            if sum(k) == 3:
                cubic = max(cubic, err)
        report.max_error = worst
        report.cubic_max_error = cubic
        report.passed = worst < tol
    return report

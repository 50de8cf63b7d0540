"""Truncated power series in q and sparse multivariate polynomials.

A ``PowerSeries`` stores a dense coefficient list in an internal variable u
with q = u**grid (grid 1: integer exponents, grid 2: half-integer ones).  The
truncation order is tracked in q: coefficients are valid for exponents below
``order``.  Coefficients may be any ring element (int, Fraction, QExt, mpc).

``MultiPoly`` is a dict from exponent tuples to coefficients; coefficients
may themselves be power series, which is how the potentials are stored.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .exactnum import QExt

__all__ = [
    "PowerSeries",
    "MultiPoly",
    "SeriesMismatch",
    "VariableMismatch",
    "ps_arith",
    "ps_exp",
    "ps_log",
    "ps_qddq",
    "ps_eval",
    "ps_tail_bound",
    "mp_ops",
    "is_zero",
    "LaurentPoly",
    "monomials",
]


class SeriesMismatch(ValueError):
    pass


class VariableMismatch(ValueError):
    pass


def is_zero(c) -> bool:
    if isinstance(c, (PowerSeries, MultiPoly)):
        return c.is_zero()
    return c == 0


def _all_int(seq) -> bool:
    return all(type(c) is int for c in seq)


def _kron_mul(a: list, b: list, n: int) -> list:
    """Truncated product of two integer lists via big-integer packing."""
    a, b = a[:n], b[:n]
    if not a or not b:
        return []
    bound = max(map(abs, a)) * max(map(abs, b)) * min(len(a), len(b))
    if bound == 0:
        return []
    shift = bound.bit_length() + 2
    base = 1 << shift
    half = base >> 1

    def pack(lst):
        acc = 0
        for c in reversed(lst):
            acc = (acc << shift) + c
        return acc

    prod = pack(a) * pack(b)
    m = min(n, len(a) + len(b) - 1)
    out = []
    mask = base - 1
    for _ in range(m):
        d = prod & mask
        prod >>= shift
        if d >= half:
            d -= base
            prod += 1
        out.append(d)
    return out


def _dense_mul(a: list, b: list, n: int) -> list:
    if _all_int(a) and _all_int(b):
        return _kron_mul(a, b, n)
    m = min(n, len(a) + len(b) - 1) if a and b else 0
    out = [0] * m
    for i, ai in enumerate(a[:m]):
        if is_zero(ai):
            continue
        for j in range(min(len(b), m - i)):
            bj = b[j]
            if is_zero(bj):
                continue
            out[i + j] = out[i + j] + ai * bj
    return out


class PowerSeries:
    """Truncated series sum c_k u^k with q = u**grid, valid mod q**order."""

    __slots__ = ("coeffs", "order", "grid", "var")

    def __init__(self, coeffs, order: int, grid: int = 1, var: str = "q"):
        if grid not in (1, 2):
            raise ValueError("grid must be 1 (integer) or 2 (half-integer)")
        if order < 0:
            raise ValueError("order must be non-negative")
        n = order * grid
        cs = list(coeffs)[:n]
        while cs and is_zero(cs[-1]):
            cs.pop()
        self.coeffs = cs
        self.order = order
        self.grid = grid
        self.var = var

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_dict(cls, terms: dict, order: int, grid: int = 1, var: str = "q"):
        """Build from {q-exponent (int or Fraction): coeff}."""
        n = order * grid
        cs = [0] * n
        for e, c in terms.items():
            k = Fraction(e) * grid
            if k.denominator != 1:
                raise SeriesMismatch(f"exponent {e} is off the grid")
            k = int(k)
            if 0 <= k < n:
                cs[k] = cs[k] + c
            elif k < 0:
                raise SeriesMismatch("negative exponents are not supported")
        return cls(cs, order, grid, var)

    @classmethod
    def constant(cls, c, order: int, grid: int = 1, var: str = "q"):
        return cls([c], order, grid, var)

    # -- inspection -----------------------------------------------------
    def __getitem__(self, e):
        """Coefficient of q**e (e may be a half-integer on grid 2)."""
        k = Fraction(e) * self.grid
        if k.denominator != 1:
            return 0
        k = int(k)
        if k >= self.order * self.grid:
            raise IndexError(f"q^{e} is beyond the truncation order {self.order}")
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def terms(self):
        """Yield (q-exponent, coeff) for non-zero coefficients."""
        for k, c in enumerate(self.coeffs):
            if not is_zero(c):
                yield (Fraction(k, self.grid) if self.grid > 1 else k), c

    def valuation(self):
        for k, c in enumerate(self.coeffs):
            if not is_zero(c):
                return Fraction(k, self.grid)
        return None

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        shown = ", ".join(f"{e}: {c}" for e, c in list(self.terms())[:6])
        return f"PowerSeries({{{shown}{', ...' if len(self.coeffs) > 6 else ''}}}, order={self.order}, grid={self.grid})"

    def __eq__(self, other):
        if isinstance(other, PowerSeries):
            if (self.grid, self.var) != (other.grid, other.var):
                return False
            n = min(self.order, other.order) * self.grid
            return _trim(self.coeffs[:n]) == _trim(other.coeffs[:n])
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((tuple(self.coeffs), self.order, self.grid))

    # -- grid handling --------------------------------------------------
    def _check(self, other: "PowerSeries"):
        if self.var != other.var:
            raise SeriesMismatch(f"variable mismatch {self.var} vs {other.var}")
        if self.grid != other.grid:
            raise SeriesMismatch("grid mismatch: integer vs half-integer series")

    def to_grid(self, grid: int) -> "PowerSeries":
        if grid == self.grid:
            return self
        if grid == 2 and self.grid == 1:
            cs = []
            for c in self.coeffs:
                cs.extend([c, 0])
            return PowerSeries(cs, self.order, 2, self.var)
        if any(not is_zero(c) for c in self.coeffs[1::2]):
            raise SeriesMismatch("series has half-integer exponents")
        return PowerSeries(self.coeffs[0::2], self.order, 1, self.var)

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.coeffs, min(order, self.order), self.grid, self.var)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PowerSeries):
            self._check(other)
            return other
        return PowerSeries([other], self.order, self.grid, self.var)

    def __add__(self, other):
        if not isinstance(other, PowerSeries) and isinstance(other, (MultiPoly,)):
            return NotImplemented
        o = self._coerce(other)
        order = min(self.order, o.order)
        n = order * self.grid
        a, b = self.coeffs[:n], o.coeffs[:n]
        m = max(len(a), len(b))
        cs = [(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(m)]
        return PowerSeries(cs, order, self.grid, self.var)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries([-c for c in self.coeffs], self.order, self.grid, self.var)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PowerSeries) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PowerSeries":
        return PowerSeries([x * c for x in self.coeffs], self.order, self.grid, self.var)

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            return NotImplemented
        if not isinstance(other, PowerSeries):
            if is_zero(other):
                return PowerSeries([], self.order, self.grid, self.var)
            return self.scale(other)
        self._check(other)
        va, vb = self.valuation(), other.valuation()
        if va is None:
            va = self.order
        if vb is None:
            vb = other.order
        order = min(self.order + vb, other.order + va)
        order = int(math.floor(order))
        n = order * self.grid
        return PowerSeries(_dense_mul(self.coeffs, other.coeffs, n), order, self.grid, self.var)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = PowerSeries([1], self.order, self.grid, self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def subs_power(self, m: int) -> "PowerSeries":
        """q -> q**m."""
        cs = [0] * (len(self.coeffs) * m)
        for k, c in enumerate(self.coeffs):
            cs[k * m] = c
        return PowerSeries(cs, self.order * m, self.grid, self.var)

    def map(self, f) -> "PowerSeries":
        return PowerSeries([f(c) for c in self.coeffs], self.order, self.grid, self.var)

    # -- serialization --------------------------------------------------
    def to_payload(self):
        out = []
        for e, c in self.terms():
            e = Fraction(e)
            out.append([str(e.numerator), str(e.denominator), QExt.coerce(c).to_json()])
        return out

    @classmethod
    def from_payload(cls, payload, order: int, grid: int = 1, var: str = "q"):
        terms = {}
        for num, den, c in payload:
            q = QExt.from_json(c)
            terms[Fraction(int(num), int(den))] = q.c1 if q.is_rational() else q
        return cls.from_dict(terms, order, grid, var)


def _trim(lst):
    lst = list(lst)
    while lst and is_zero(lst[-1]):
        lst.pop()
    return lst


def ps_arith(a: PowerSeries, b: PowerSeries, op: str) -> PowerSeries:
    if not (isinstance(a, PowerSeries) and isinstance(b, PowerSeries)):
        raise TypeError("ps_arith expects two PowerSeries")
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def ps_exp(a: PowerSeries) -> PowerSeries:
    """exp of a series with zero constant term (or a pure constant 0)."""
    if a.coeffs and not is_zero(a.coeffs[0]):
        raise ValueError("ps_exp needs a vanishing constant term")
    n = a.order * a.grid
    # e' = a' e  =>  k e_k = sum_j j a_j e_{k-j}
    ak = a.coeffs
    e = [Fraction(1)] + [0] * (n - 1) if n else []
    for k in range(1, n):
        s = 0
        for j in range(1, min(k, len(ak) - 1) + 1):
            if not is_zero(ak[j]):
                s = s + j * ak[j] * e[k - j]
        e[k] = s / k if not isinstance(s, int) else Fraction(s, k)
    return PowerSeries(e, a.order, a.grid, a.var)


def ps_log(a: PowerSeries) -> PowerSeries:
    """log of a series with constant term 1."""
    if not a.coeffs or a.coeffs[0] != 1:
        raise ValueError("ps_log needs constant term 1")
    n = a.order * a.grid
    ak = a.coeffs + [0] * (n - len(a.coeffs))
    # a l' = a'  =>  k l_k = k a_k - sum_{j<k} j l_j a_{k-j}
    lg = [0] * n
    for k in range(1, n):
        s = k * ak[k]
        for j in range(1, k):
            if not is_zero(ak[k - j]) and not is_zero(lg[j]):
                s = s - j * lg[j] * ak[k - j]
        lg[k] = Fraction(s, k) if isinstance(s, int) else s / k
    return PowerSeries(lg, a.order, a.grid, a.var)


def ps_qddq(a: PowerSeries) -> PowerSeries:
    """q d/dq, acting by multiplication with the q-exponent."""
    g = a.grid
    cs = []
    for k, c in enumerate(a.coeffs):
        if g == 1:
            cs.append(k * c)
        else:
            cs.append(c * Fraction(k, 2) if k % 2 else (k // 2) * c)
    return PowerSeries(cs, a.order, a.grid, a.var)


def ps_tail_bound(a: PowerSeries, q0, coeff_bound=None):
    """Crude geometric majorant of the truncated-away tail at |q| = |q0|.

    ``coeff_bound(k)`` bounds |c_k| for internal exponents k >= len; when
    omitted a polynomial growth k**4 is assumed (valid for the theta and
    Eisenstein products used here up to modest degree).
    """
    r = abs(mpmath.mpc(q0)) ** (mpmath.mpf(1) / a.grid)
    n = a.order * a.grid
    if r >= 1:
        return mpmath.inf
    bound = coeff_bound or (lambda k: mpmath.mpf(k + 1) ** 4)
    return bound(n) * r ** n / (1 - r) ** 5


def ps_eval(a: PowerSeries, q0):
    """Numeric evaluation at q = q0 (principal branch of q**(1/2) on grid 2)."""
    if not a.coeffs:
        return mpmath.mpf(0)
    u = mpmath.mpc(q0) if a.grid == 1 else mpmath.sqrt(mpmath.mpc(q0))
    acc = mpmath.mpf(0)
    for c in reversed(a.coeffs):
        acc = acc * u + _to_mp(c)
    if isinstance(acc, mpmath.mpc) and acc.imag == 0 and not isinstance(q0, mpmath.mpc):
        return acc.real
    return acc


def _to_mp(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    if isinstance(c, QExt):
        s = mpmath.sqrt(2)
        re = _to_mp(c.c1) + s * _to_mp(c.cs)
        im = _to_mp(c.ci) + s * _to_mp(c.cis)
        return mpmath.mpc(re, im)
    if isinstance(c, int):
        return mpmath.mpf(c)
    return c


# ---------------------------------------------------------------------------


class MultiPoly:
    """Sparse polynomial {exponent tuple: coeff} in an ordered variable list."""

    __slots__ = ("vars", "terms", "qorder")

    def __init__(self, vars, terms=None, qorder=None):
        self.vars = tuple(vars)
        self.terms = {}
        self.qorder = qorder
        nv = len(self.vars)
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != nv:
                raise VariableMismatch(f"exponent {e} does not match {nv} variables")
            if not is_zero(c):
                self.terms[e] = c

    # -- constructors ---------------------------------------------------
    @classmethod
    def var(cls, vars, name, coeff=1):
        vars = tuple(vars)
        e = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, {e: coeff})

    @classmethod
    def const(cls, vars, c):
        return cls(vars, {(0,) * len(tuple(vars)): c})

    # -- inspection -----------------------------------------------------
    def is_zero(self):
        return not self.terms

    def coefficient(self, exps):
        if isinstance(exps, dict):
            exps = tuple(exps.get(v, 0) for v in self.vars)
        return self.terms.get(tuple(exps), 0)

    def degree(self, which=None):
        if not self.terms:
            return -1
        if which is None:
            return max(sum(e) for e in self.terms)
        idx = [self.vars.index(v) for v in which]
        return max(sum(e[i] for i in idx) for e in self.terms)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"MultiPoly({self.vars}, {len(self.terms)} terms)"

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            if self.vars != other.vars:
                return False
            keys = set(self.terms) | set(other.terms)
            return all(is_zero(self.terms.get(k, 0) - other.terms.get(k, 0)) for k in keys)
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def _same(self, other: "MultiPoly"):
        if self.vars != other.vars:
            raise VariableMismatch(f"{self.vars} vs {other.vars}")

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(self.vars, other)
        self._same(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            if e in out:
                s = out[e] + c
                if is_zero(s):
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return MultiPoly(self.vars, out, _min_order(self.qorder, other.qorder))

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()}, self.qorder)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            if is_zero(other):
                return MultiPoly(self.vars, {}, self.qorder)
            return MultiPoly(self.vars, {e: c * other for e, c in self.terms.items()}, self.qorder)
        self._same(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                p = c1 * c2
                if e in out:
                    out[e] = out[e] + p
                else:
                    out[e] = p
        return MultiPoly(self.vars, out, _min_order(self.qorder, other.qorder))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int):
        out = MultiPoly.const(self.vars, 1)
        for _ in range(n):
            out = out * self
        return out

    def map_coeffs(self, f) -> "MultiPoly":
        return MultiPoly(self.vars, {e: f(c) for e, c in self.terms.items()}, self.qorder)

    def partial(self, var, coeff_derivation=None) -> "MultiPoly":
        """Formal derivative; ``coeff_derivation`` (if given) is added as the
        derivation of the coefficients along the same direction."""
        i = self.vars.index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                f = tuple(f)
                out[f] = out.get(f, 0) + c * e[i]
        res = MultiPoly(self.vars, out, self.qorder)
        if coeff_derivation is not None:
            res = res + MultiPoly(self.vars, {e: coeff_derivation(c) for e, c in self.terms.items()}, self.qorder)
        return res

    def substitute(self, mapping: dict, new_vars=None) -> "MultiPoly":
        """Replace variables by MultiPolys (in ``new_vars``) or scalars/series."""
        new_vars = tuple(new_vars) if new_vars is not None else self.vars
        keep = [(i, v) for i, v in enumerate(self.vars) if v not in mapping]
        for _, v in keep:
            if v not in new_vars:
                raise VariableMismatch(f"variable {v} not present in target variables")
        images = {}
        for v, img in mapping.items():
            if v not in self.vars:
                raise VariableMismatch(f"unknown variable {v}")
            if not isinstance(img, MultiPoly):
                img = MultiPoly.const(new_vars, img)
            elif img.vars != new_vars:
                raise VariableMismatch("substitution images must share the target variables")
            images[self.vars.index(v)] = img
        cache = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                cache[key] = MultiPoly.const(new_vars, 1) if k == 0 else power(i, k - 1) * images[i]
            return cache[key]

        out = MultiPoly(new_vars, {}, self.qorder)
        pos = {v: new_vars.index(v) for _, v in keep}
        for e, c in self.terms.items():
            base = [0] * len(new_vars)
            for i, v in keep:
                base[pos[v]] += e[i]
            term = MultiPoly(new_vars, {tuple(base): c})
            for i in images:
                if e[i]:
                    term = term * power(i, e[i])
            out = out + term
        return out

    def reorder(self, new_vars) -> "MultiPoly":
        new_vars = tuple(new_vars)
        idx = []
        for v in self.vars:
            if v not in new_vars:
                if any(e[self.vars.index(v)] for e in self.terms):
                    raise VariableMismatch(f"variable {v} is used but missing from target")
            idx.append(new_vars.index(v) if v in new_vars else None)
        out = {}
        for e, c in self.terms.items():
            f = [0] * len(new_vars)
            for k, j in zip(e, idx):
                if j is not None:
                    f[j] += k
            out[tuple(f)] = c
        return MultiPoly(new_vars, out, self.qorder)

    def truncate_degree(self, max_degree: int, which=None) -> "MultiPoly":
        idx = range(len(self.vars)) if which is None else [self.vars.index(v) for v in which]
        return MultiPoly(self.vars, {e: c for e, c in self.terms.items() if sum(e[i] for i in idx) <= max_degree}, self.qorder)

    # -- serialization --------------------------------------------------
    def to_json(self):
        terms = []
        for e in sorted(self.terms):
            c = self.terms[e]
            coeff = c.to_payload() if isinstance(c, PowerSeries) else QExt.coerce(c).to_json()
            terms.append({"exps": list(e), "coeff": coeff})
        return {"vars": list(self.vars), "terms": terms, "qorder": self.qorder}

    @classmethod
    def from_json(cls, data, grid: int = 1):
        qorder = data.get("qorder")
        terms = {}
        for t in data["terms"]:
            c = t["coeff"]
            if _is_series_payload(c):
                if qorder is None:
                    raise ValueError("series coefficients need a qorder")
                terms[tuple(t["exps"])] = PowerSeries.from_payload(c, qorder, grid)
            else:
                q = QExt.from_json(c)
                terms[tuple(t["exps"])] = q.c1 if q.is_rational() else q
        return cls(data["vars"], terms, qorder)


def _is_series_payload(c) -> bool:
    # QExt payloads are four [num, den] pairs; series payloads are triples
    return len(c) != 4 or any(len(x) == 3 for x in c)


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def mp_ops(a: MultiPoly, b, op: str):
    """Dispatcher mirroring the documented operation names."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "partial":
        return a.partial(b)
    if op == "substitute":
        return a.substitute(b)
    if op == "coefficient":
        return a.coefficient(b)
    raise ValueError(f"unknown op {op!r}")


def monomials(nvars: int, degree: int):
    """All exponent tuples of total degree exactly ``degree``."""
    if nvars == 0:
        if degree == 0:
            yield ()
        return
    for k in range(degree, -1, -1):
        for rest in monomials(nvars - 1, degree - k):
            yield (k,) + rest


# ---------------------------------------------------------------------------


class LaurentPoly:
    """Finite Laurent polynomial {integer exponent: coeff} in one variable.

    Used for the equivariant parameter lambda and for the formal symbol
    exp(-s0); the two coincide under s0 = -ln(lambda).
    """

    __slots__ = ("terms", "var")

    def __init__(self, terms=None, var: str = "lam"):
        self.terms = {int(e): c for e, c in (terms or {}).items() if not is_zero(c)}
        self.var = var

    @classmethod
    def monomial(cls, e: int, c=1, var: str = "lam"):
        return cls({e: c}, var)

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            if other.var != self.var:
                raise VariableMismatch(f"{self.var} vs {other.var}")
            return other
        return LaurentPoly({0: other}, self.var)

    def __add__(self, other):
        o = self._coerce(other)
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.terms.items()}, self.var)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials can be inverted")
            (e, c), = self.terms.items()
            return LaurentPoly({-e * (-n): (1 / Fraction(c)) ** (-n)}, self.var)
        out = LaurentPoly({0: 1}, self.var)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.var == other.var and self.terms == other.terms
        return self.terms == ({0: other} if not is_zero(other) else {})

    def __hash__(self):
        return hash((self.var, tuple(sorted(self.terms.items()))))

    def coeff(self, e: int):
        return self.terms.get(e, 0)

    def min_exponent(self):
        return min(self.terms) if self.terms else None

    def rename(self, var: str) -> "LaurentPoly":
        return LaurentPoly(self.terms, var)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{self.var}^{e}" for e, c in sorted(self.terms.items()))

"""Exact scalars in Q and Q(i, sqrt2), plus numeric-to-exact recognition.

Big complex numbers are plain ``mpmath.mpc`` values computed under an
explicit working precision (``mpmath.workprec``); callers are responsible for
supplying values computed at two precisions when asking for a certified fit.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC

import mpmath

__all__ = [
    "QExt",
    "NoStableFit",
    "qext_arith",
    "qext_embed",
    "rationalize",
    "rationalize_real",
    "to_fraction",
    "SQRT2",
    "I",
    "ISQRT2",
    "InconsistentSystem",
    "solve_exact",
]


class NoStableFit(ValueError):
    """Raised when fits at two precisions disagree or do not certify."""


def to_fraction(x) -> Fraction:
    """Exact conversion of int/Fraction/mpf (binary) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, _RationalABC):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, mpmath.mpf):
        sign, man, exp, _ = x._mpf_
        if man == 0:
            return Fraction(0)
        v = Fraction(int(man)) * (Fraction(2) ** exp)
        return -v if sign else v
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def _sq2_mul(a1, a2, b1, b2):
    # (a1 + a2 s)(b1 + b2 s) with s^2 = 2
    return a1 * b1 + 2 * a2 * b2, a1 * b2 + a2 * b1


class QExt:
    """Element c1 + cs*sqrt2 + ci*i + cis*i*sqrt2 of Q(i, sqrt2)."""

    __slots__ = ("c1", "cs", "ci", "cis")

    def __init__(self, c1=0, cs=0, ci=0, cis=0):
        object.__setattr__(self, "c1", Fraction(c1))
        object.__setattr__(self, "cs", Fraction(cs))
        object.__setattr__(self, "ci", Fraction(ci))
        object.__setattr__(self, "cis", Fraction(cis))

    def __setattr__(self, name, value):
        raise AttributeError("QExt is immutable")

    # -- coercion -------------------------------------------------------
    @staticmethod
    def coerce(x) -> "QExt":
        if isinstance(x, QExt):
            return x
        if isinstance(x, (int, Fraction)) or isinstance(x, _RationalABC):
            return QExt(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to QExt")

    @property
    def parts(self):
        return (self.c1, self.cs, self.ci, self.cis)

    def is_rational(self) -> bool:
        return self.cs == 0 and self.ci == 0 and self.cis == 0

    def is_zero(self) -> bool:
        return not (self.c1 or self.cs or self.ci or self.cis)

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c1

    # -- ring operations ------------------------------------------------
    def __add__(self, other):
        try:
            o = QExt.coerce(other)
        except TypeError:
            return NotImplemented
        return QExt(self.c1 + o.c1, self.cs + o.cs, self.ci + o.ci, self.cis + o.cis)

    __radd__ = __add__

    def __neg__(self):
        return QExt(-self.c1, -self.cs, -self.ci, -self.cis)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = QExt.coerce(other)
        except TypeError:
            return NotImplemented
        return QExt(self.c1 - o.c1, self.cs - o.cs, self.ci - o.ci, self.cis - o.cis)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QExt(self.c1 * other, self.cs * other, self.ci * other, self.cis * other)
        try:
            o = QExt.coerce(other)
        except TypeError:
            return NotImplemented
        # write as (p + i r)(u + i v) with p, r, u, v in Q(sqrt2)
        pu = _sq2_mul(self.c1, self.cs, o.c1, o.cs)
        rv = _sq2_mul(self.ci, self.cis, o.ci, o.cis)
        pv = _sq2_mul(self.c1, self.cs, o.ci, o.cis)
        ru = _sq2_mul(self.ci, self.cis, o.c1, o.cs)
        return QExt(pu[0] - rv[0], pu[1] - rv[1], pv[0] + ru[0], pv[1] + ru[1])

    __rmul__ = __mul__

    def inverse(self) -> "QExt":
        if self.is_zero():
            raise ZeroDivisionError("QExt division by zero")
        # 1/(p + i r) = (p - i r)/(p^2 + r^2); p^2 + r^2 = a + b sqrt2
        p2 = _sq2_mul(self.c1, self.cs, self.c1, self.cs)
        r2 = _sq2_mul(self.ci, self.cis, self.ci, self.cis)
        a, b = p2[0] + r2[0], p2[1] + r2[1]
        nrm = a * a - 2 * b * b
        ia, ib = a / nrm, -b / nrm
        re = _sq2_mul(self.c1, self.cs, ia, ib)
        im = _sq2_mul(-self.ci, -self.cis, ia, ib)
        return QExt(re[0], re[1], im[0], im[1])

    def __truediv__(self, other):
        try:
            o = QExt.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QExt.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = QExt(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- Galois action --------------------------------------------------
    def conj_sqrt2(self) -> "QExt":
        return QExt(self.c1, -self.cs, self.ci, -self.cis)

    def conj_i(self) -> "QExt":
        return QExt(self.c1, self.cs, -self.ci, -self.cis)

    # -- comparison / hashing ------------------------------------------
    def __eq__(self, other):
        try:
            o = QExt.coerce(other)
        except TypeError:
            return NotImplemented
        return self.parts == o.parts

    def __hash__(self):
        if self.is_rational():
            return hash(self.c1)
        return hash(self.parts)

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"QExt({self.c1}, {self.cs}, {self.ci}, {self.cis})"

    def __str__(self):
        names = ("", "*sqrt2", "*i", "*i*sqrt2")
        bits = [f"({c}){n}" if n else f"({c})" for c, n in zip(self.parts, names) if c]
        return " + ".join(bits) if bits else "0"

    # -- serialization --------------------------------------------------
    def to_json(self):
        return [[str(c.numerator), str(c.denominator)] for c in self.parts]

    @classmethod
    def from_json(cls, data) -> "QExt":
        if len(data) != 4:
            raise ValueError("QExt payload needs four [num, den] pairs")
        return cls(*(Fraction(int(n), int(d)) for n, d in data))


SQRT2 = QExt(0, 1)
I = QExt(0, 0, 1)
ISQRT2 = QExt(0, 0, 0, 1)


def qext_arith(a, b, op: str) -> QExt:
    a, b = QExt.coerce(a), QExt.coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def qext_embed(a, precision: int = 256):
    """Numeric value of an exact scalar as an mpc at ``precision`` bits."""
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    a = QExt.coerce(a)
    with mpmath.workprec(precision + 8):
        s = mpmath.sqrt(2)
        re = mpmath.mpf(a.c1.numerator) / a.c1.denominator + s * (mpmath.mpf(a.cs.numerator) / a.cs.denominator)
        im = mpmath.mpf(a.ci.numerator) / a.ci.denominator + s * (mpmath.mpf(a.cis.numerator) / a.cis.denominator)
    with mpmath.workprec(precision):
        return mpmath.mpc(+re, +im)


# ---------------------------------------------------------------------------
# recognition


def _fit_real(v, max_denominator: int, tol):
    """Return (a, b) rationals with |v - (a + b sqrt2)| < tol, or None."""
    if abs(v) < tol:
        return Fraction(0), Fraction(0)
    r = to_fraction(v).limit_denominator(max_denominator)
    if abs(v - mpmath.mpf(r.numerator) / r.denominator) < tol:
        return r, Fraction(0)
    rel = mpmath.pslq([v, mpmath.mpf(1), mpmath.sqrt(2)], tol=tol, maxcoeff=max_denominator, maxsteps=10**5)
    if rel is None or rel[0] == 0:
        return None
    n0, n1, n2 = rel
    a, b = Fraction(-n1, n0), Fraction(-n2, n0)
    s = mpmath.sqrt(2)
    if abs(v - (mpmath.mpf(a.numerator) / a.denominator + s * mpmath.mpf(b.numerator) / b.denominator)) < tol:
        return a, b
    return None


def rationalize_real(v, max_denominator: int, precision: int):
    """Single-precision fit of a real mpf to a + b sqrt2; None when no fit."""
    with mpmath.workprec(precision):
        # acceptance is much tighter than the 2^(-P/2) contract so that
        # continued-fraction convergents (error ~ 1/den^2) are never accepted
        tol = mpmath.mpf(2) ** (-(3 * precision) // 4) * max(1, abs(v))
        return _fit_real(mpmath.mpf(v), max_denominator, tol)


def rationalize(v, max_denominator: int = 10**15, precisions=(192, 320), v_high=None) -> QExt:
    """Certified recognition of a numeric value as an element of Q(i, sqrt2).

    ``v`` is the value computed at ``precisions[0]`` bits and ``v_high`` the
    same quantity at ``precisions[1]`` bits (``v`` is reused when omitted,
    which only makes sense for values that are exact at both precisions).
    The real and imaginary parts are each fitted as a + b*sqrt2.
    """
    p1, p2 = precisions
    if not p1 < p2:
        raise ValueError("precision pair must be strictly increasing")
    if v_high is None:
        v_high = v
    fits = []
    for val, prec in ((v, p1), (v_high, p2)):
        with mpmath.workprec(prec):
            z = mpmath.mpc(val)
            re = rationalize_real(z.real, max_denominator, prec)
            im = rationalize_real(z.imag, max_denominator, prec)
        if re is None or im is None:
            raise NoStableFit(f"no Q(i,sqrt2) fit at {prec} bits for {mpmath.nstr(mpmath.mpc(val), 20)}")
        fits.append(QExt(re[0], re[1], im[0], im[1]))
    if fits[0] != fits[1]:
        raise NoStableFit(f"fits disagree between precisions: {fits[0]} vs {fits[1]}")
    return fits[1]


# ---------------------------------------------------------------------------
# exact linear algebra


class InconsistentSystem(ValueError):
    """A linear system over the rationals has no solution."""


def solve_exact(rows, rhs):
    """Solve ``rows @ x = rhs`` exactly over the field of the entries.

    Returns ``(solution, free)`` where ``free`` lists the column indices left
    undetermined (their value is set to zero in ``solution``). Raises
    InconsistentSystem when no solution exists.
    """
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(aug)) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c] if not isinstance(aug[r][c], int) else Fraction(1, aug[r][c])
        aug[r] = [v * inv for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == len(aug):
            break
    for i in range(r, len(aug)):
        if aug[i][ncols] != 0:
            raise InconsistentSystem(f"row {i} reduces to 0 = {aug[i][ncols]}")
    sol = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        sol[c] = aug[i][ncols]
    free = [c for c in range(ncols) if c not in set(pivots)]
    return sol, free

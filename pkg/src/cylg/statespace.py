"""Diagonal symmetry groups of Fermat polynomials, FJRW sector data and the
two pairings identified by the CY/LG change of variables.

Group elements are stored as exponent vectors (e_1, ..., e_N) modulo the
orders (1/q_1, ..., 1/q_N); the element with exponents e acts with phases
Theta_k = e_k q_k. The E7-tilde instance W = x^4 + y^4 + z^2 has weights
(1/4, 1/4, 1/2); the A3 and A1 factors reuse the same code with one weight.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .exactnum import I, QExt, SQRT2

__all__ = [
    "LGConfig",
    "E7",
    "A3",
    "A1",
    "GroupElem",
    "GroupElemE7",
    "SectorInfo",
    "PairingSpec",
    "group_ops",
    "sector_info",
    "selection_linebundle",
    "degree_axiom_dim",
    "pairings",
    "e7_basis",
    "e7_label",
    "e7_elem",
    "P442_VARS",
    "E7_VARS",
    "cov_matrix",
    "cov_check",
    "sector_table_csv",
    "frac_part",
]


def frac_part(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class LGConfig:
    """A Fermat polynomial sum x_k^(1/q_k) with its maximal diagonal group."""

    name: str
    weights: tuple

    @property
    def orders(self):
        return tuple(Fraction(q).denominator for q in self.weights)

    @property
    def c_hat(self) -> Fraction:
        return sum((1 - 2 * Fraction(q) for q in self.weights), Fraction(0))

    @property
    def group_order(self) -> int:
        out = 1
        for d in self.orders:
            out *= d
        return out

    def elements(self):
        for e in itertools.product(*(range(d) for d in self.orders)):
            yield GroupElem(e, self)

    def j(self) -> "GroupElem":
        return GroupElem((1,) * len(self.weights), self)


E7 = LGConfig("E7", (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)))
A3 = LGConfig("A3", (Fraction(1, 4),))
A1 = LGConfig("A1", (Fraction(1, 2),))


class GroupElem:
    """rho_1^e_1 ... rho_N^e_N in the maximal diagonal group of ``config``."""

    __slots__ = ("exps", "config")

    def __init__(self, exps, config: LGConfig = E7):
        exps = tuple(int(e) % d for e, d in zip(exps, config.orders))
        if len(exps) != len(config.weights):
            raise ValueError("exponent vector has the wrong length")
        object.__setattr__(self, "exps", exps)
        object.__setattr__(self, "config", config)

    def __setattr__(self, name, value):
        raise AttributeError("GroupElem is immutable")

    def __mul__(self, other: "GroupElem") -> "GroupElem":
        return GroupElem(tuple(a + b for a, b in zip(self.exps, other.exps)), self.config)

    def inv(self) -> "GroupElem":
        return GroupElem(tuple(-a for a in self.exps), self.config)

    def __pow__(self, n: int) -> "GroupElem":
        return GroupElem(tuple(a * n for a in self.exps), self.config)

    def theta(self) -> tuple:
        return tuple(Fraction(e, d) for e, d in zip(self.exps, self.config.orders))

    def is_identity(self) -> bool:
        return not any(self.exps)

    def narrow(self) -> bool:
        return all(e != 0 for e in self.exps)

    def __eq__(self, other):
        return isinstance(other, GroupElem) and self.exps == other.exps and self.config == other.config

    def __hash__(self):
        return hash((self.exps, self.config.name))

    def __repr__(self):
        parts = [f"rho{k + 1}^{e}" for k, e in enumerate(self.exps) if e]
        return "*".join(parts) or "id"

    def m_values(self) -> tuple:
        """Theta_k, with zero components replaced by 1 (i_k + q_k)."""
        return tuple(t if t != 0 else Fraction(1) for t in self.theta())


def GroupElemE7(a: int, b: int, c: int) -> GroupElem:
    return GroupElem((a, b, c), E7)


def group_ops(h1: GroupElem, h2=None, op: str = "mul"):
    if op == "mul":
        return h1 * h2
    if op == "inv":
        return h1.inv()
    if op == "theta":
        return h1.theta()
    if op == "pow":
        return h1 ** h2
    raise ValueError(f"unknown op {op!r}")


@dataclass(frozen=True)
class SectorInfo:
    h: GroupElem
    narrow: bool
    iota: Fraction
    degW: Fraction
    ik: tuple


def sector_info(h: GroupElem) -> SectorInfo:
    qs = h.config.weights
    th = h.theta()
    iota = sum((t - q for t, q in zip(th, qs)), Fraction(0))
    n_h = sum(1 for t in th if t == 0)
    ik = tuple(frac_part(t - q) for t, q in zip(th, qs))
    return SectorInfo(h, n_h == 0, iota, n_h + 2 * iota, ik)


def selection_linebundle(g: int, hs, use_m_values: bool = False):
    """Line bundle degrees d_k = q_k (2g - 2 + n) - sum_i Theta_k(h_i) and
    whether all of them are integers.

    With ``use_m_values`` the zero phases are replaced by 1, which gives the
    degrees of the modified bundles of the extended theory.
    """
    hs = list(hs)
    if not hs:
        raise ValueError("need at least one insertion")
    cfg = hs[0].config
    n = len(hs)
    degs = []
    for k, q in enumerate(cfg.weights):
        s = sum(((h.m_values() if use_m_values else h.theta())[k] for h in hs), Fraction(0))
        degs.append(q * (2 * g - 2 + n) - s)
    return tuple(degs), all(d.denominator == 1 for d in degs)


def degree_axiom_dim(g: int, hs) -> Fraction:
    """2((c_hat - 3)(1 - g) + n - sum iota(h_i)); a non-integer (or odd
    multiple of 1/2) value flags a vanishing psi-free correlator."""
    hs = list(hs)
    cfg = hs[0].config
    return 2 * ((cfg.c_hat - 3) * (1 - g) + len(hs) - sum((sector_info(h).iota for h in hs), Fraction(0)))


# ---------------------------------------------------------------------------
# bases and pairings

P442_VARS = ("t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8")
E7_VARS = ("tt11", "tt12", "tt13", "tt21", "tt22", "tt23", "tt31", "tt32", "tt33")


def e7_basis():
    """Labels (a, b) of the narrow sectors rho1^a rho2^b rho3, 1 <= a, b <= 3."""
    return [(a, b) for a in (1, 2, 3) for b in (1, 2, 3)]


def e7_label(h: GroupElem) -> str:
    a, b, c = h.exps
    if c != 1 or a == 0 or b == 0:
        raise ValueError(f"{h} is not a narrow E7 sector")
    return f"{a}{b}"


def e7_elem(label) -> GroupElem:
    s = str(label)
    return GroupElemE7(int(s[0]), int(s[1]), 1)


@dataclass
class PairingSpec:
    labels: tuple
    matrix: list
    inverse: list

    def __call__(self, a, b):
        return self.matrix[self.labels.index(a)][self.labels.index(b)]

    def inv(self, a, b):
        return self.inverse[self.labels.index(a)][self.labels.index(b)]

    def check(self) -> bool:
        n = len(self.labels)
        sym = all(self.matrix[i][j] == self.matrix[j][i] for i in range(n) for j in range(n))
        return sym and _matmul(self.inverse, self.matrix) == _identity(n)


def _identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum((a[i][k] * b[k][j] for k in range(m)), Fraction(0)) for j in range(p)] for i in range(n)]


def _transpose(a):
    return [list(r) for r in zip(*a)]


def _mat_inverse(a):
    """Gauss-Jordan inverse over Q or Q(i, sqrt2)."""
    n = len(a)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    for c in range(n):
        p = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [v / piv for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [r[n:] for r in aug]


def _p442_matrix():
    # Delta_0 = t0, Delta_{1,k} = t_k, Delta_{2,k} = t_{k+3}, Delta_{3,1} = t7, Delta_{-1} = t8
    n = 9
    m = [[Fraction(0)] * n for _ in range(n)]
    m[0][8] = m[8][0] = Fraction(1)
    for base, a in ((1, 4), (4, 4)):
        for j in range(1, a):
            for l in range(1, a):
                if j + l == a:
                    m[base + j - 1][base + l - 1] = Fraction(1, a)
    m[7][7] = Fraction(1, 2)
    return m


def _e7_matrix():
    labels = [f"{a}{b}" for a, b in e7_basis()]
    m = [[Fraction(0)] * 9 for _ in range(9)]
    for i, (a, b) in enumerate(e7_basis()):
        j = labels.index(f"{4 - a}{4 - b}")
        m[i][j] = Fraction(1)
    return labels, m


def pairings(theory: str = "E7", s0_symbol: str = "es0") -> PairingSpec:
    """Exact pairings.

    ``E7``: narrow basis, eta(phi_h, phi_{h^-1}) = 1.
    ``P442``: eta(Delta_0, Delta_-1) = 1, eta(Delta_ij, Delta_kl) = delta_ik delta_{j+l, a_i} / a_i.
    ``E7twisted``: all 32 group elements; exp(-s0) per zero phase, returned
    as a LaurentPoly in the symbol ``s0_symbol`` = exp(-s0). Renaming that
    symbol to lambda performs the s0 = -ln(lambda) specialization.
    """
    if theory == "P442":
        m = _p442_matrix()
        return PairingSpec(P442_VARS, m, _mat_inverse(m))
    if theory == "E7":
        labels, m = _e7_matrix()
        return PairingSpec(tuple(labels), m, _mat_inverse(m))
    if theory == "E7twisted":
        from .series import LaurentPoly

        elems = list(E7.elements())
        n = len(elems)
        m = [[LaurentPoly({}, s0_symbol) for _ in range(n)] for _ in range(n)]
        inv = [[LaurentPoly({}, s0_symbol) for _ in range(n)] for _ in range(n)]
        for i, h in enumerate(elems):
            j = elems.index(h.inv())
            zeros = sum(1 for t in h.theta() if t == 0)
            m[i][j] = LaurentPoly({zeros: 1}, s0_symbol)
            inv[j][i] = LaurentPoly({-zeros: 1}, s0_symbol)
        return PairingSpec(tuple(elems), m, inv)
    raise ValueError(f"unknown theory {theory!r}")


def cov_matrix():
    """9x9 matrix M over Q(i, sqrt2) with t = M tt (rows P442_VARS, columns E7_VARS)."""
    col = {v: k for k, v in enumerate(E7_VARS)}
    isq = I * SQRT2
    rows = {
        "t0": {"tt11": 1},
        "t1": {"tt12": isq, "tt21": -isq},
        "t2": {"tt13": -1, "tt22": SQRT2, "tt31": -1},
        "t3": {"tt23": isq, "tt32": -isq},
        "t4": {"tt12": SQRT2, "tt21": SQRT2},
        "t5": {"tt13": 1, "tt22": SQRT2, "tt31": 1},
        "t6": {"tt23": SQRT2, "tt32": SQRT2},
        "t7": {"tt13": I, "tt31": -I},
        "t8": {"tt33": 1},
    }
    m = [[QExt(0)] * 9 for _ in range(9)]
    for i, v in enumerate(P442_VARS):
        for name, c in rows[v].items():
            m[i][col[name]] = QExt.coerce(c)
    return m


def cov_check():
    """Return (ok, residual) for M^T eta_P442 M = eta_E7."""
    m = cov_matrix()
    etap = pairings("P442").matrix
    etae = pairings("E7").matrix
    lhs = _matmul(_transpose(m), _matmul(etap, m))
    res = [[QExt.coerce(lhs[i][j]) - etae[i][j] for j in range(9)] for i in range(9)]
    ok = all(x.is_zero() for r in res for x in r)
    return ok, res


def sector_table_csv(config: LGConfig = E7) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["h", "theta", "iota", "deg_W", "narrow"])
    for h in config.elements():
        s = sector_info(h)
        w.writerow([repr(h), " ".join(str(t) for t in h.theta()), str(s.iota), str(s.degW), str(s.narrow).lower()])
    return buf.getvalue()

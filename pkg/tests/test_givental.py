import itertools
from fractions import Fraction

import mpmath
import pytest

from cylg.givental import (IdentityFailure, MissingPrimary, NegativePowers, TriangularElement, TruncationOverflow,
                           _r_sigma_flow, bernoulli_number, bernoulli_poly, correlator_of, nonequiv_limit,
                           psi_integral, quantize_apply, rtw_element, rtw_log_coefficients, rtw_symplectic_check,
                           s0c_apply, specialize, stable_trees, trr_descendent, twisted_correlator,
                           untwisted_correlator, untwisted_descendent_potential, untwisted_factor_change)
from cylg.series import LaurentPoly, MultiPoly
from cylg.statespace import A1, A3, E7, GroupElem, e7_elem, selection_linebundle


def psi_oracle(exps):
    """Genus-zero psi integrals from the string equation alone."""
    exps = sorted(exps, reverse=True)
    n = len(exps)
    if sum(exps) != n - 3 or min(exps) < 0:
        return 0
    if n == 3:
        return 1
    rest = exps[:-1]  # the last one is a zero: sum = n - 3 < n
    return sum(psi_oracle(rest[:i] + [rest[i] - 1] + rest[i + 1:]) for i in range(len(rest)) if rest[i])


def test_bernoulli():
    assert [bernoulli_number(n) for n in range(5)] == [1, Fraction(-1, 2), Fraction(1, 6), 0, Fraction(-1, 30)]
    for n in range(1, 9):
        for x in (Fraction(1, 4), Fraction(1, 3)):
            assert bernoulli_poly(n, 1 - x) == (-1) ** n * bernoulli_poly(n, x)


def test_rtw_coefficients_of_j():
    assert rtw_log_coefficients(E7.j(), 2) == [Fraction(-1, 2), Fraction(-1, 16), Fraction(1, 64)]


def test_rtw_inverse():
    h = e7_elem("23")
    r, ri = rtw_element(h, 5), rtw_element(h, 5, inverse=True)
    assert r.s0_coefficient + ri.s0_coefficient == 0
    for n in range(6):
        prod = sum((r.zseries[k] * ri.zseries[n - k] for k in range(n + 1)), MultiPoly(r.zseries[0].vars, {}))
        assert prod == (r.zseries[0] if n == 0 else MultiPoly(prod.vars, {}))


def test_rtw_symplectic():
    assert rtw_symplectic_check(E7)
    assert rtw_symplectic_check(A3)


def test_psi_integrals_against_string_equation():
    for n in range(3, 8):
        for exps in itertools.product(range(n - 2), repeat=n):
            assert psi_integral(exps) == psi_oracle(list(exps))


def test_stable_tree_counts():
    assert [len(list(stable_trees(n))) for n in (3, 4, 5, 6)] == [1, 4, 26, 236]


def test_untwisted_selection():
    assert untwisted_correlator([e7_elem(l) for l in ("12", "21", "22")]) == 1
    assert untwisted_correlator([e7_elem(l) for l in ("12", "12", "12")]) == 0
    assert untwisted_correlator([e7_elem(l) for l in ("21", "21", "31", "33")], [1, 0, 0, 0]) == 1


def test_factor_change_ratios():
    ch = untwisted_factor_change()
    assert ch["A3"]["ratio"].to_fraction() == 4
    assert ch["A1"]["ratio"].to_fraction() == 2
    with pytest.raises(IdentityFailure):
        untwisted_factor_change(strict=True)


def test_three_point_twisted_values():
    els = list(E7.elements())
    for t in itertools.combinations_with_replacement(els, 3):
        degs, ok = selection_linebundle(0, t)
        if not ok:
            continue
        tv = twisted_correlator(t)
        mdegs, _ = selection_linebundle(0, t, use_m_values=True)
        assert tv.s0_exponent == sum(d + 1 for d in mdegs)
        assert tv.poly.terms == {(0,) * len(tv.poly.vars): 1}


def test_twisted_four_point_profile():
    tv = twisted_correlator([e7_elem(l) for l in ("21", "21", "31", "33")])
    assert tv.s0_exponent == -1
    lp = specialize(tv)
    assert lp.terms == {0: Fraction(1, 4)}
    assert nonequiv_limit(lp) == Fraction(1, 4)


def test_nonequiv_limit_needs_no_negative_powers():
    with pytest.raises(NegativePowers):
        nonequiv_limit(LaurentPoly({-1: 1, 0: 2}))
    assert nonequiv_limit(LaurentPoly({1: 5})) == 0


@pytest.fixture(scope="module")
def z_a3():
    return untwisted_descendent_potential(A3, 5)


def test_untwisted_descendants_are_multinomial(z_a3):
    assert correlator_of(z_a3, [(1, "1"), (0, "1"), (0, "2"), (0, "0")]) == 0
    # labels are exponents of J: the selection rule needs sum theta = 3/4 mod 1 at n = 5
    assert correlator_of(z_a3, [(2, "1"), (0, "1"), (0, "1"), (0, "1"), (0, "3")]) == 1
    assert correlator_of(z_a3, [(1, "1"), (1, "1"), (0, "1"), (0, "1"), (0, "3")]) == 2
    assert correlator_of(z_a3, [(1, "1"), (1, "1"), (0, "1"), (0, "1"), (0, "1")]) == 0
    with pytest.raises(TruncationOverflow):
        correlator_of(z_a3, [(0, "1")] * 6)


def test_identity_element_is_trivial(z_a3):
    T = TriangularElement("upper", z_a3.labels, {}, z_a3.unit)
    assert quantize_apply(T, z_a3) is z_a3


def test_quantized_rtw_matches_graph_sum(z_a3):
    # the quantization reproduces the graph sum with log R = -sum s_l c_l z^l
    sv = {"s1": Fraction(1, 3), "s2": Fraction(2, 7)}
    mats = {l: {(a, a): -sv[f"s{l}"] * rtw_log_coefficients(h, 2)[l]
                for h, a in zip(A3.elements(), z_a3.labels)} for l in (1, 2)}
    W = quantize_apply(TriangularElement("upper", z_a3.labels, mats, z_a3.unit), z_a3)
    assert W.degree == 4
    els = list(A3.elements())
    checked = 0
    for n in (3, 4):
        for combo in itertools.combinations_with_replacement(range(4), n):
            for exps in itertools.product(range(n - 2), repeat=n):
                if sum(exps) > n - 3:
                    continue
                hs = [els[c] for c in combo]
                tv = twisted_correlator(hs, exps, L=2)
                want = tv.poly_at(sv) if tv.poly.terms else 0
                got = correlator_of(W, [(e, z_a3.labels[c]) for e, c in zip(exps, combo)])
                assert got == want, (combo, exps)
                checked += 1
    assert checked > 100


def test_dilaton_truncation_guard(z_a3):
    mats = {1: {(a, a): Fraction(1, 5) for a in z_a3.labels}}
    T = TriangularElement("upper", z_a3.labels, mats, z_a3.unit)
    with pytest.raises(TruncationOverflow):
        quantize_apply(T, z_a3, out_degree=5)


def _primary_part(Z):
    idx = [i for i, v in enumerate(Z.poly.vars) if v.startswith("t0_")]
    names = tuple(Z.poly.vars[i] for i in idx)
    return MultiPoly(names, {tuple(e[i] for i in idx): c for e, c in Z.poly.terms.items()
                             if all(e[j] == 0 for j in range(len(e)) if j not in idx)})


def test_r_sigma_against_flow(z_a3):
    sigma = Fraction(1, 3)
    T = TriangularElement("upper", z_a3.labels, {1: {("1", "3"): sigma}}, z_a3.unit)
    W = quantize_apply(T, z_a3)
    P = _primary_part(W)
    G = _r_sigma_flow(_primary_part(z_a3), sigma, W.degree, unit="t0_1", top="t0_3")
    keys = set(P.terms) | set(G.terms)
    assert len(keys) == 15
    for k in keys:
        exact = Fraction(P.terms.get(k, 0))
        assert abs(mpmath.mpf(exact.numerator) / exact.denominator - G.terms.get(k, 0)) < mpmath.mpf(10) ** -40


def test_s0c_rescaling(z_a3):
    Z2 = s0c_apply(z_a3, Fraction(2), top="3")
    # weights: unit "1" 0, top "3" 2, others 1; the potential is divided by c^2
    assert correlator_of(Z2, [(0, "2"), (0, "2"), (0, "1")]) == 1
    assert correlator_of(Z2, [(0, "0"), (0, "2"), (0, "3")]) == 4
    assert correlator_of(Z2, [(0, "3")] * 3) == 16
    with pytest.raises(ValueError):
        s0c_apply(z_a3, 0, top="3")


def _primary(labels):
    return untwisted_correlator([GroupElem(l, E7) for l in labels])


def _eta_inv():
    # the untwisted theory lives on all 32 sectors with eta(h, h^-1) = 1
    return {(h.exps, h.inv().exps): 1 for h in E7.elements()}


def _ex(label):
    return e7_elem(label).exps


def test_trr_gives_multinomials():
    labels = [h.exps for h in E7.elements()]
    cases = {("21", "21", "31", "33"): 1, ("12", "12", "13", "33"): 1, ("12", "13", "31", "33"): 0,
             ("22", "22", "22", "22"): 0}
    for combo, want in cases.items():
        assert untwisted_correlator([e7_elem(c) for c in combo], [1, 0, 0, 0]) == want
        for k in range(4):
            ins = [(int(i == k), _ex(c)) for i, c in enumerate(combo)]
            assert trr_descendent(_primary, labels, _eta_inv(), ins) == want
    five = [(2, "21"), (0, "21"), (0, "31"), (0, "33"), (0, "12")]
    hs = [e7_elem(c) for _, c in five]
    want = untwisted_correlator(hs, [2, 0, 0, 0, 0])
    assert trr_descendent(_primary, labels, _eta_inv(), [(a, h.exps) for (a, _), h in zip(five, hs)]) == want


def test_trr_dilaton():
    labels = [h.exps for h in E7.elements()]
    for abc in [("12", "21", "22"), ("13", "21", "21"), ("11", "33", "11"), ("11", "11", "11")]:
        ins = [(1, _ex("11"))] + [(0, _ex(x)) for x in abc]
        assert trr_descendent(_primary, labels, _eta_inv(), ins) == _primary([_ex(x) for x in abc])


def test_trr_missing_primary():
    def partial(labels):
        raise KeyError(labels)

    with pytest.raises(MissingPrimary):
        trr_descendent(partial, (), _eta_inv(), [(0, _ex("12")), (0, _ex("21")), (0, _ex("22"))])


def test_quantized_rtw_matches_graph_sum_a1():
    Z = untwisted_descendent_potential(A1, 5)
    sv = {"s1": Fraction(-2, 5), "s2": Fraction(3, 11)}
    mats = {l: {(a, a): -sv[f"s{l}"] * rtw_log_coefficients(h, 2)[l] for h, a in zip(A1.elements(), Z.labels)}
            for l in (1, 2)}
    W = quantize_apply(TriangularElement("upper", Z.labels, mats, Z.unit), Z)
    els = list(A1.elements())
    for n in (3, 4):
        for combo in itertools.combinations_with_replacement(range(len(els)), n):
            for exps in itertools.product(range(n - 2), repeat=n):
                if sum(exps) > n - 3:
                    continue
                tv = twisted_correlator([els[c] for c in combo], exps, L=2)
                want = tv.poly_at(sv) if tv.poly.terms else 0
                assert correlator_of(W, [(e, Z.labels[c]) for e, c in zip(exps, combo)]) == want

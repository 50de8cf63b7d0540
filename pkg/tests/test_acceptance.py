"""The twelve acceptance criteria, each printing one PASS/FAIL line.

Criteria 9 and 10 each contain a literal identity that the computation does
not reproduce; those parts are strict xfails and the criterion line reads
FAIL. The analysis is in notes/decisions.md.
"""

import itertools
import random
import time
from fractions import Fraction

import mpmath
import pytest

from cylg.cayley import cayley_taylor, cylg_pipeline, desired_expansions
from cylg.givental import (NegativePowers, composite_cylg_numeric, nonequiv_limit, psi_integral, specialize,
                           twisted_correlator, untwisted_correlator, untwisted_factor_change)
from cylg.modular import (eisenstein_f, fit_ode_rhs, gamma34, ode_residuals, theta_closed_forms, theta_logderiv,
                          theta_value, xyzw_qexp)
from cylg.potential import (InconsistentSeeds, aut_factor, build_f0_p442, e7_seeds, e7_symmetries,
                            homogeneity_grades, reconstruct_wdvv, wdvv_sweep)
from cylg.series import ps_qddq
from cylg.statespace import E7, cov_check, e7_elem, selection_linebundle


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    return emit


def sigma1(n):
    return sum(d for d in range(1, n + 1) if n % d == 0)


def psi_oracle(exps):
    """Genus-zero psi integrals from the string equation alone."""
    exps = sorted(exps, reverse=True)
    n = len(exps)
    if sum(exps) != n - 3 or min(exps) < 0:
        return 0
    if n == 3:
        return 1
    rest = exps[:-1]
    return sum(psi_oracle(rest[:i] + [rest[i] - 1] + rest[i + 1:]) for i in range(len(rest)) if rest[i])


def test_criterion_01_identities(report):
    t0 = time.time()
    m = xyzw_qexp(200)
    ident = (m.z * m.z - 4 * m.x * m.y).is_zero()
    f = eisenstein_f(201)
    eis = all(f[n] == -24 * sigma1(n) for n in range(1, 201))
    dt = time.time() - t0
    ok = ident and eis and dt < 5
    report(1, ok, f"z^2 = 4xy mod q^200 {ident}, -24 sigma_1(n) for n <= 200 {eis}, {dt:.2f} s (< 5 s)")
    assert ok


def test_criterion_02_ode(report):
    t0 = time.time()
    m = xyzw_qexp(200)
    res = ode_residuals(200, m)
    r1, r3 = res["r1"].is_zero(), res["r3"].is_zero()
    r2_lead = next(iter(res["r2"].terms()), None)
    fit = fit_ode_rhs(ps_qddq(m.y), 4, 200, subject=m.y, mfs=m)
    fit_ok = fit == {"x^2": 1, "w": 1} and res["r2_fitted"].is_zero()
    dt = time.time() - t0
    ok = r1 and r3 and fit_ok and dt < 10
    report(2, ok, f"r1 = 0 {r1}, r3 = 0 {r3}, printed second equation residual leads with "
                  f"{r2_lead[1]} q^{r2_lead[0]} (reported), fitted y'/y = {fit}, {dt:.2f} s (< 10 s)")
    assert ok


def test_criterion_03_wdvv(report):
    t0 = time.time()
    r = wdvv_sweep(build_f0_p442(24))
    dt = time.time() - t0
    ok = r["checked"] == 495 and not r["failures"] and dt < 900
    report(3, ok, f"{r['checked']} quadruples at q-order 24, {len(r['failures'])} failures, {dt:.1f} s (one process)")
    assert ok


def test_criterion_04_homogeneity(report):
    grades = homogeneity_grades()
    ok = set(grades.values()) == {2}
    report(4, ok, f"{len(grades)} monomials of H, grades {sorted(set(grades.values()))}")
    assert ok


def test_criterion_05_pairing(report):
    ok, res = cov_check()
    worst = sum(1 for row in res for x in row if not x.is_zero())
    report(5, ok, f"M^T eta_P442 M - eta_E7 has {worst} non-zero entries")
    assert ok


SEVEN = [
    (("12", "21", "22"), 2, Fraction(1, 32)),
    (("12", "21", "22"), 4, Fraction(1, 6144)),
    (("12", "21", "22"), 6, Fraction(1, 327680)),
    (("12", "21", "22"), 8, Fraction(289, 2642411520)),
    (("13", "21", "21"), 4, Fraction(1, 3072)),
    (("12", "12", "31"), 4, Fraction(1, 3072)),
    (("13", "21", "21"), 8, Fraction(1, 330301440)),
    (("12", "12", "31"), 8, Fraction(1, 330301440)),
    (("12", "12", "13"), 1, Fraction(-1, 8)),
    (("21", "21", "31"), 1, Fraction(-1, 8)),
    (("12", "12", "13"), 5, Fraction(-1, 61440)),
    (("21", "21", "31"), 5, Fraction(-1, 61440)),
]


def test_criterion_06_exact_pipeline(report):
    t0 = time.time()
    r = cylg_pipeline(n_terms=9, degree=4, precision=256, high_precision=384)
    dt = time.time() - t0
    bad = [(m, p, v, r.coefficient(m, p)) for m, p, v in SEVEN if r.coefficient(m, p) != v]
    ok = not bad and r.cubic_block_ok and r.all_rational and r.mode == "exact" and dt < 600
    report(6, ok, f"{len(SEVEN) - len(bad)}/{len(SEVEN)} placements of the seven coefficients, cubic block "
                  f"{r.cubic_block_ok}, all rational {r.all_rational}, {dt:.1f} s")
    assert ok


def test_criterion_07_theta_values(report):
    tol = mpmath.mpf(10) ** -50
    with mpmath.workprec(256):
        # the closed forms use Gamma(3/4) from the AGM evaluation; cross-check it
        g_ok = abs(gamma34(256) - mpmath.gamma(mpmath.mpf(3) / 4)) < tol
        cf = theta_closed_forms(256)
        errs = {}
        for p in (2, 3, 4):
            errs[f"theta{p}"] = abs(theta_value(p, 1j, 256) - cf[f"theta{p}"])
            errs[f"X{p}"] = abs(theta_logderiv(p, 1j, 256) - cf[f"X{p}"])
        worst = max(errs.values())
    ok = g_ok and worst < tol
    report(7, ok, f"max error {mpmath.nstr(worst, 3)} over theta_2,3,4(i) and X_2,3,4(i) (tol 1e-50)")
    assert ok


def test_criterion_08_desired_expansions(report):
    tol = mpmath.mpf(10) ** -40
    with mpmath.workprec(256):
        d = desired_expansions(cayley_taylor(n_coeffs=4, precision=256))
        want = ((1, 0), (0, mpmath.mpf(-1) / 4), (1 / mpmath.sqrt(2), 0))
        worst = max(abs(g[k] - w[k]) for g, w in zip(d, want) for k in (0, 1))
    ok = worst < tol
    report(8, ok, f"max deviation {mpmath.nstr(worst, 3)} from ((1,0),(0,-1/4),(1/sqrt2,0)) (tol 1e-40)")
    assert ok


def _profiles():
    """All narrow E7 insertion multisets with n <= 5 and psi-exponents summing to n - 3."""
    narrow = [h for h in E7.elements() if h.narrow()]
    adm, inadm = [], []
    for n in (3, 4, 5):
        for hs in itertools.combinations_with_replacement(narrow, n):
            for exps in itertools.product(range(n - 2), repeat=n):
                if sum(exps) != n - 3:
                    continue
                (adm if selection_linebundle(0, hs)[1] else inadm).append((hs, exps))
    rng = random.Random(20240)
    return rng.sample(adm, 20), rng.sample(inadm, 20)


def _criterion_09_profiles():
    adm, inadm = _profiles()
    good = sum(untwisted_correlator(hs, exps) == psi_oracle(list(exps)) != 0 for hs, exps in adm)
    zero = sum(untwisted_correlator(hs, exps) == 0 for hs, exps in inadm)
    multinomial = sum(untwisted_correlator(hs, exps) == psi_integral(exps) for hs, exps in adm)
    return good, zero, multinomial


def test_criterion_09_untwisted_profiles():
    good, zero, multinomial = _criterion_09_profiles()
    assert (good, zero, multinomial) == (20, 20, 20)


@pytest.mark.xfail(strict=True, reason="sum u^3/6 equals 4 F^un for the A3 factor (and 2 F^un for A1), "
                                       "not F^un; see notes/decisions.md")
def test_criterion_09_a3_identity(report):
    good, zero, _ = _criterion_09_profiles()
    ch = untwisted_factor_change()
    ratio = ch["A3"]["ratio"].to_fraction()
    ok = good == 20 and zero == 20 and ch["A3"]["exact"]
    report(9, ok, f"{good}/20 admissible profiles multinomial, {zero}/20 inadmissible zero; "
                  f"A3 identity: sum u^3/6 = {ratio} * F^un (literal identity needs 1)")
    assert ch["A3"]["exact"]


def _criterion_10_checks():
    bad3 = 0
    n3 = 0
    for t in itertools.combinations_with_replacement(list(E7.elements()), 3):
        if not selection_linebundle(0, t)[1]:
            continue
        n3 += 1
        tv = twisted_correlator(t)
        mdegs, _ = selection_linebundle(0, t, use_m_values=True)
        # exp(s0 chi) is the twisted pairing normalization; nothing depends on s_1, s_2, ...
        if tv.poly.terms != {(0,) * len(tv.poly.vars): 1} or tv.s0_exponent != sum(d + 1 for d in mdegs):
            bad3 += 1
    narrow = [h for h in E7.elements() if h.narrow()]
    tested = negative = 0
    for n in (3, 4, 5):
        for hs in itertools.combinations_with_replacement(narrow, n):
            if not selection_linebundle(0, hs)[1]:
                continue
            tested += 1
            try:
                nonequiv_limit(specialize(twisted_correlator(hs)))
            except NegativePowers:
                negative += 1
    return n3, bad3, tested, negative


@pytest.fixture(scope="module")
def criterion_10():
    return _criterion_10_checks()


def test_criterion_10_normalization_and_limits(criterion_10):
    n3, bad3, tested, negative = criterion_10
    assert n3 == 187 and bad3 == 0
    assert tested > 0 and negative == 0


@pytest.mark.xfail(strict=True, reason="the R^tw graph sum gives +1/4 for both 4-point values; the sign "
                                       "(-1)^(n-3) relative to the CY side; see notes/decisions.md")
def test_criterion_10_four_point_values(report, criterion_10):
    n3, bad3, tested, negative = criterion_10
    values = {}
    for labels in (("21", "21", "31", "33"), ("12", "12", "13", "33")):
        values[labels] = nonequiv_limit(specialize(twisted_correlator([e7_elem(l) for l in labels])))
    four_ok = all(v == Fraction(-1, 4) for v in values.values())
    ok = bad3 == 0 and negative == 0 and four_ok
    shown = ", ".join(f"<{','.join(k)}> = {v}" for k, v in values.items())
    report(10, ok, f"{n3 - bad3}/{n3} 3-point values normalized, lambda -> 0 exists for {tested - negative}/"
                   f"{tested} narrow configurations (n <= 5); {shown} (expected -1/4)")
    assert four_ok


def test_criterion_11_composite(report):
    r = composite_cylg_numeric(256)
    cubic = [c for c in r.comparisons if sum(c[0]) == 3]
    ok = r.passed and r.cubic_max_error < mpmath.mpf(10) ** -30
    report(11, ok, f"cubic block max error {mpmath.nstr(r.cubic_max_error, 3)}, all {len(r.comparisons)} "
                   f"compared coefficients {mpmath.nstr(r.max_error, 3)} (tol 1e-30)")
    assert ok and cubic


def test_criterion_12_reconstruction(report, pipeline):
    table = reconstruct_wdvv(e7_seeds(), max_points=5, symmetries=e7_symmetries())
    others = ("11", "12", "13", "21", "22", "23", "31", "32")
    total = agree = 0
    for mono in itertools.combinations_with_replacement(others, 3):
        ins = tuple(sorted(mono + ("33", "33")))
        total += 1
        agree += table.get(ins, Fraction(0)) == pipeline.coefficient(mono, 2) * aut_factor(ins)
    try:
        reconstruct_wdvv(e7_seeds(corrupt=Fraction(-1, 8) - Fraction(1, 56)), max_points=5,
                         symmetries=e7_symmetries())
        caught = False
    except InconsistentSeeds:
        caught = True
    ok = agree == total and caught
    report(12, ok, f"{agree}/{total} tt33^2 coefficients at degree-3 monomials agree; corrupted seed "
                   f"{'raises' if caught else 'does not raise'} InconsistentSeeds")
    assert ok

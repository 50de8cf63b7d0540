import json
import os
from fractions import Fraction

import mpmath
import pytest

from cylg import __version__
from cylg.cayley import cayley_rationalize, cayley_taylor
from cylg.cli import (Cache, CacheError, CacheVersionError, ConfigError, RunConfig, cache_roundtrip, main,
                      make_envelope, open_envelope, run)
from cylg.exactnum import QExt
from cylg.series import LaurentPoly


def test_config_validation():
    RunConfig("wdvv").validate()
    with pytest.raises(ConfigError):
        RunConfig("plot").validate()
    with pytest.raises(ConfigError):
        RunConfig("wdvv", precision_bits=(384, 256)).validate()
    with pytest.raises(ConfigError):
        RunConfig("wdvv", precision_bits=(256, 256)).validate()
    with pytest.raises(ConfigError):
        RunConfig("wdvv", q_order=0).validate()


def test_config_key_is_stable():
    a, b = RunConfig("wdvv", q_order=24), RunConfig("wdvv", q_order=24, jobs=8, output_format="csv")
    assert a.key() == b.key()
    assert a.key() != RunConfig("wdvv", q_order=25).key()


def test_roundtrip_appendix_potential(f0_p442):
    back = cache_roundtrip(f0_p442)
    assert back.poly == f0_p442.poly
    assert back.pairing == f0_p442.pairing
    assert back.grading == f0_p442.grading
    assert back.meta == f0_p442.meta


def test_roundtrip_cayley_expansion():
    lo = cayley_taylor(n_coeffs=5, precision=256)
    ce = cayley_rationalize(lo, cayley_taylor(n_coeffs=5, precision=384))
    back = cache_roundtrip(ce)
    assert back.rationalized == ce.rationalized
    assert all(isinstance(c, QExt) for cs in back.rationalized.values() for c in cs)
    assert back.coeffs == ce.coeffs  # mpc values bit-identical
    assert back.tau0 == ce.tau0 and back.w_shift == ce.w_shift


def test_roundtrip_scalars():
    obj = {"a": (Fraction(-3, 2**90), 7, None), ("k", 1): [LaurentPoly({-1: Fraction(1, 3)})],
           "m": mpmath.mpf(2) ** -300 * 3}
    assert cache_roundtrip(obj) == obj


def test_floats_are_refused():
    with pytest.raises(TypeError):
        make_envelope(0.5)


def test_corrupted_payload():
    env = json.loads(json.dumps(make_envelope([Fraction(1, 3)])))
    env["payload"][0]["frac"][0] = "2"
    with pytest.raises(CacheError):
        open_envelope(env)


def test_version_mismatch():
    env = make_envelope(Fraction(1, 3))
    env["version"] = "0.0.0"
    with pytest.raises(CacheVersionError):
        open_envelope(env)
    assert __version__ != "0.0.0"


def test_cache_recomputes_corrupted_entry(tmp_path):
    cache = Cache(str(tmp_path))
    calls = []

    def compute():
        calls.append(1)
        return Fraction(5, 7)

    assert cache.get("x", "k", compute) == Fraction(5, 7)
    assert cache.get("x", "k", compute) == Fraction(5, 7)
    assert len(calls) == 1
    path = cache.path("x", "k")
    env = json.load(open(path))
    env["checksum"] = "0" * 64
    json.dump(env, open(path, "w"))
    assert cache.get("x", "k", compute) == Fraction(5, 7)
    assert len(calls) == 2
    assert any("rejected" in n for n in cache.notes)


def test_check_identities_exit_code(capsys):
    assert main(["check-identities", "--order", "200", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"]
    statuses = {c["name"]: c["status"] for c in rep["checks"]}
    assert "reported" in statuses.values()
    assert rep["config"]["q_order"] == 200


def test_wdvv_parallel_matches_serial():
    a = run(RunConfig("wdvv", q_order=12))
    b = run(RunConfig("wdvv", q_order=12, jobs=2))
    assert a.ok and b.ok
    assert a.values["quadruples"] == b.values["quadruples"] == 495


def test_cylg_exact_table(tmp_path, capsys):
    code = main(["cylg-exact", "--terms", "9", "--degree", "4", "--format", "csv", "--cache-dir", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "289/2642411520" in out
    assert os.listdir(tmp_path)
    # second run reads the cache
    rep = run(RunConfig("cylg-exact", cache_dir=str(tmp_path)))
    assert rep.ok and "f0_e7: cache hit" in rep.values["cache"]


def test_numeric_comparisons_carry_tolerances():
    rep = run(RunConfig("cylg-numeric"))
    assert rep.ok
    for c in rep.checks:
        assert c.tolerance is not None and c.expected is not None and c.observed is not None


def test_twisted_json(capsys):
    code = main(["twisted", "--insertions", "21,21,31,33", "--psis", "0,0,0,0", "--specialize", "--limit"])
    rep = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rep["values"]["value"] == "1/4"
    assert rep["values"]["lambda_profile"] == {"0": "1/4"}


def test_twisted_rejects_mismatched_psis(capsys):
    assert main(["twisted", "--insertions", "21,21,31", "--psis", "0,0"]) == 2


def test_qexp_table(capsys):
    assert main(["qexp", "--function", "z", "--order", "6", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "1,4" in out and "5,8" in out


def test_failing_checks_give_nonzero_exit():
    rep = run(RunConfig("givental-check"))
    assert not rep.ok
    failed = {c.name for c in rep.checks if c.status == "fail"}
    assert failed == {"A3 factor: sum u^3/6 = F^un", "FJRW <21,21,31,33>", "FJRW <12,12,13,33>"}

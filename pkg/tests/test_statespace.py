from fractions import Fraction

from cylg.statespace import (A1, A3, E7, cov_check, degree_axiom_dim, e7_basis, e7_elem, e7_label, group_ops,
                             pairings, sector_info, sector_table_csv, selection_linebundle)


def test_central_charges():
    assert E7.c_hat == 1
    assert A3.c_hat == Fraction(1, 2)
    assert A1.c_hat == 0
    assert E7.group_order == 32


def test_narrow_sectors_are_the_e7_basis():
    narrow = sorted(e7_label(h) for h in E7.elements() if h.narrow())
    assert narrow == [f"{a}{b}" for a, b in e7_basis()]
    assert E7.j().exps == (1, 1, 1)


def test_degree_shifting_numbers():
    expected = {"11": 0, "12": Fraction(1, 4), "13": Fraction(1, 2), "22": Fraction(1, 2),
                "23": Fraction(3, 4), "33": 1}
    for label, iota in expected.items():
        s = sector_info(e7_elem(label))
        assert s.iota == iota
        assert s.degW == 2 * iota


def test_broad_sectors_have_zero_phases():
    h = [x for x in E7.elements() if x.is_identity()][0]
    s = sector_info(h)
    # three zero phases, iota = -1
    assert not s.narrow and s.iota == -1 and s.degW == 1


def test_group_operations():
    h = e7_elem("21")
    assert group_ops(h, h).exps == (0, 2, 0)
    assert (h * h.inv()).is_identity()


def test_pairing_pairs_inverse_sectors():
    eta = pairings("E7")
    assert eta.check()
    for a, b in e7_basis():
        assert eta(f"{a}{b}", f"{4 - a}{4 - b}") == 1
    assert pairings("P442").check()


def test_twisted_pairing_carries_zero_phases():
    tw = pairings("E7twisted")
    ident = tw.labels[0]
    assert ident.is_identity()
    assert tw.matrix[0][0].terms == {3: 1}


def test_selection_rule():
    four = [e7_elem(l) for l in ("21", "21", "31", "33")]
    degs, ok = selection_linebundle(0, four)
    assert ok and degs == (-2, -1, -1)
    assert not selection_linebundle(0, [e7_elem(l) for l in ("12", "12", "12")])[1]
    assert degree_axiom_dim(0, four) == 0


def test_change_of_variables_matches_pairings():
    ok, residual = cov_check()
    assert ok
    assert all(x.is_zero() for row in residual for x in row)


def test_sector_table():
    lines = sector_table_csv().splitlines()
    assert lines[0] == "h,theta,iota,deg_W,narrow"
    assert len(lines) == 33

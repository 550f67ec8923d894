import pytest
from hypothesis import given, settings, strategies as st

from conftest import leibniz_det
from jetmeasure.errors import ModelDataError, PolyParseError
from jetmeasure.poly import MultiPoly, jacobian_minors, parse_poly, substitute_series
from jetmeasure.rings import ZZ, PrimeField, SeriesRing


def test_parse_basic_terms():
    f = parse_poly("y^2 - x^3", ("x", "y"))
    assert f.terms == {(0, 2): 1, (3, 0): -1}


def test_parse_ring_identity_collapses():
    assert parse_poly("x*x - x^2", ("x",)).is_zero()


def test_parse_print_parse_fixpoint_mod_p():
    g = parse_poly("2*x + 3", ("x",), PrimeField(5))
    again = parse_poly(g.to_text(), ("x",), PrimeField(5))
    assert again.terms == g.terms


def test_parse_errors_carry_position():
    with pytest.raises(PolyParseError) as err:
        parse_poly("x + ^2", ("x",))
    assert err.value.position == 4
    with pytest.raises(PolyParseError) as err:
        parse_poly("x + z", ("x", "y"))
    assert "unknown variable 'z'" in str(err.value)


def test_parse_parentheses_and_unary_minus():
    f = parse_poly("-(x - 2)^2", ("x",))
    g = parse_poly("-x^2 + 4*x - 4", ("x",))
    assert f == g


@st.composite
def integer_polys(draw):
    nvars = draw(st.integers(1, 3))
    vars = tuple("xyz"[:nvars])
    nterms = draw(st.integers(0, 6))
    terms = {}
    for _ in range(nterms):
        e = tuple(draw(st.integers(0, 4)) for _ in range(nvars))
        c = draw(st.integers(-9, 9))
        if c:
            terms[e] = terms.get(e, 0) + c
    return MultiPoly.make(ZZ, vars, terms)


@given(integer_polys())
@settings(max_examples=150)
def test_print_parse_roundtrip_is_identity(f):
    assert parse_poly(f.to_text(), f.vars) == f


@given(integer_polys(), integer_polys())
@settings(max_examples=50)
def test_arithmetic_consistency(f, g):
    if f.vars != g.vars:
        return
    assert (f + g) - g == f
    assert f * g == g * f


def test_substitute_identity():
    f = parse_poly("x", ("x",))
    s = SeriesRing(PrimeField(5), 2)
    assert substitute_series(f, {"x": (0, 1, 1)}, s) == (0, 1, 1)


def test_substitute_cusp_jet():
    f = parse_poly("y^2 - x^3", ("x", "y"))
    s = SeriesRing(PrimeField(5), 3)
    t = (0, 1, 0, 0)
    # t^2 - t^3
    assert substitute_series(f, {"x": t, "y": t}, s) == (0, 0, 1, 4)


def test_substitute_matches_multiply_then_truncate():
    # x*y - 1 on (1 + t, 1 - t + t^2): the product is 1 + t^3, so zero at level 2
    f = parse_poly("x*y - 1", ("x", "y"))
    field = PrimeField(3)
    s = SeriesRing(field, 2)
    a, b = (1, 1, 0), (1, 2, 1)
    assert substitute_series(f, {"x": a, "y": b}, s) == s.sub(s.mul(a, b), s.one())
    assert substitute_series(f, {"x": a, "y": b}, s) == s.zero()


def test_substitute_commutes_with_truncation():
    import random

    rng = random.Random(7)
    field = PrimeField(5)
    f = parse_poly("x^2*y - 3*y^2 + x - 1", ("x", "y"))
    for _ in range(30):
        n = rng.randint(1, 4)
        m = rng.randint(0, n)
        sn, sm = SeriesRing(field, n), SeriesRing(field, m)
        a = tuple(rng.randrange(5) for _ in range(n + 1))
        b = tuple(rng.randrange(5) for _ in range(n + 1))
        full = substitute_series(f, {"x": a, "y": b}, sn)
        cut = substitute_series(f, {"x": a[: m + 1], "y": b[: m + 1]}, sm)
        assert sn.truncate(full, m) == cut


def test_substitute_rejects_level_mismatch():
    f = parse_poly("x", ("x",))
    s = SeriesRing(PrimeField(3), 2)
    with pytest.raises(Exception):
        substitute_series(f, {"x": (1, 2)}, s)


def test_gradient_minors_cusp():
    f = parse_poly("y^2 - x^3", ("x", "y"))
    ms = jacobian_minors([f], ("x", "y"), 1)
    assert [str(m) for m in ms] == ["-3*x^2", "2*y"]


def test_gradient_minors_torus():
    f = parse_poly("x*y - 1", ("x", "y"))
    ms = jacobian_minors([f], ("x", "y"), 1)
    assert [str(m) for m in ms] == ["y", "x"]


def test_two_by_two_minors_against_leibniz():
    vars = ("x", "y", "z")
    f1 = parse_poly("x^2 + y^2 + z^2 - 1", vars)
    f2 = parse_poly("x + y + z", vars)
    got = jacobian_minors([f1, f2], vars, 2)
    assert len(got) == 3
    jac = [[f.derivative(v) for v in vars] for f in (f1, f2)]
    expected = []
    for cols in ((0, 1), (0, 2), (1, 2)):
        expected.append(leibniz_det([[row[c] for c in cols] for row in jac], vars))
    assert got == expected


def test_minor_size_validation():
    f = parse_poly("x*y", ("x", "y"))
    with pytest.raises(ModelDataError):
        jacobian_minors([f], ("x", "y"), 2)


def test_empty_system_minor_is_unit():
    ms = jacobian_minors([], ("x", "y"), 0)
    assert len(ms) == 1 and str(ms[0]) == "1"

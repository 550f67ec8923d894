from fractions import Fraction

import pytest

from jetmeasure.errors import ModelDataError
from jetmeasure.grothendieck import parse_class, specialize_count
from jetmeasure.jets import SeriesMode
from jetmeasure.measure import CylinderSpec, OrdEq, Stability, TRUE, Vanishes, And, NotVanishes
from jetmeasure.padic import compare_motivic, cylinder_volume, padic_integral
from jetmeasure.poly import parse_poly
from jetmeasure.rings import PrimeField


def test_total_mass_of_the_ball(ball, F3):
    spec = CylinderSpec(ball, 1, TRUE, Stability("smooth-model"))
    vol = cylinder_volume(spec, SeriesMode(F3))
    assert vol.value == 1


def test_total_mass_level_independent(ball, torus):
    for model in (ball, torus):
        for q in (3, 5):
            base = SeriesMode(PrimeField(q))
            values = {
                cylinder_volume(
                    CylinderSpec(model, n, TRUE, Stability("smooth-model")), base
                ).value
                for n in range(3)
            }
            assert len(values) == 1


def test_ord_stratum_volume(ball, F3):
    x = parse_poly("x", ball.variables)
    spec = CylinderSpec(ball, 2, OrdEq(x, 2), Stability("smooth-model"))
    assert cylinder_volume(spec, SeriesMode(F3)).value == Fraction(2, 27)


def test_empty_cylinder_volume(ball, F3):
    x = parse_poly("x", ball.variables)
    empty = CylinderSpec(ball, 1, And((Vanishes(x), NotVanishes(x))), Stability("smooth-model"))
    assert cylinder_volume(empty, SeriesMode(F3)).value == 0


def test_volume_additivity_and_monotonicity(ball, F3):
    x = parse_poly("x", ball.variables)
    base = SeriesMode(F3)
    v1 = cylinder_volume(CylinderSpec(ball, 2, OrdEq(x, 1), Stability("smooth-model")), base)
    v2 = cylinder_volume(CylinderSpec(ball, 2, OrdEq(x, 2), Stability("smooth-model")), base)
    from jetmeasure.measure import Or

    both = cylinder_volume(
        CylinderSpec(ball, 2, Or((OrdEq(x, 1), OrdEq(x, 2))), Stability("smooth-model")), base
    )
    assert both.value == v1.value + v2.value
    assert v2.value <= both.value


def test_volume_requires_smooth_model(cusp, F3):
    with pytest.raises(ModelDataError):
        cylinder_volume(CylinderSpec(cusp, 1, TRUE, Stability("declared")), SeriesMode(F3))


def test_ball_integral_partial_and_closed_form(ball):
    x = parse_poly("x", ball.variables)
    for q in (3, 5):
        rep = padic_integral(ball, x, SeriesMode(PrimeField(q)), 3)
        oracle = sum(Fraction(q - 1, q ** (2 * n + 1)) for n in range(4))
        assert rep.partial == oracle
        assert rep.tail_bound == Fraction(1, q ** 8)
        closed = Fraction(q, q + 1)
        assert abs(closed - rep.partial) <= rep.tail_bound


def test_torus_integral_single_stratum(torus):
    x = parse_poly("x", torus.variables)
    for q in (3, 5):
        rep = padic_integral(torus, x, SeriesMode(PrimeField(q)), 2)
        assert rep.partial == Fraction(q - 1, q)
        assert rep.tail_bound == 0


def test_integral_of_one(ball, F3):
    one = parse_poly("1", ball.variables)
    rep = padic_integral(ball, one, SeriesMode(F3), 1)
    assert rep.partial == 1 and rep.tail_bound == 0


def test_compare_ball_with_supplied_classes(ball):
    x = parse_poly("x", ball.variables)
    strata = {n: parse_class("L - 1") for n in range(4)}
    for q in (3, 5):
        rep = compare_motivic(ball, x, SeriesMode(PrimeField(q)), 3, strata_classes=strata)
        assert rep.ok and rep.tails_match
        assert rep.motivic == rep.padic
        for got, want in rep.strata.values():
            assert got == want
        assert specialize_count(rep.motivic_class, q) == rep.padic


def test_compare_torus_both_pipelines(torus):
    x = parse_poly("x", torus.variables)
    for q in (3, 5):
        rep = compare_motivic(torus, x, SeriesMode(PrimeField(q)), 2)
        assert rep.ok
        assert rep.motivic == rep.padic == Fraction(q - 1, q)


def test_compare_f_equals_one(torus, F3):
    one = parse_poly("1", torus.variables)
    rep = compare_motivic(torus, one, SeriesMode(F3), 1)
    assert rep.ok
    # only the zero-order stratum: the special fibre count over q^d
    assert rep.padic == Fraction(torus.count_points(F3), 3)


def test_compare_detects_wrong_classes(ball, F3):
    x = parse_poly("x", ball.variables)
    wrong = {0: parse_class("L")}
    rep = compare_motivic(ball, x, SeriesMode(F3), 0, strata_classes=wrong)
    assert not rep.ok

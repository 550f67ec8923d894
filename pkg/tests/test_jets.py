import itertools

import pytest

from conftest import brute_force_mixed_jets, brute_force_series_jets
from jetmeasure.errors import BudgetExceededError, ModelDataError
from jetmeasure.jets import (
    Budget,
    JetPoint,
    MixedMode,
    SeriesMode,
    apply_morphism,
    count_jets,
    enumerate_jets,
    fibration_check,
    image_count,
    lift_jet,
    make_jet,
    ord_function,
    ord_jacobian,
    truncate_jet,
)
from jetmeasure.models import AffineModel, ModelMorphism
from jetmeasure.poly import parse_poly
from jetmeasure.rings import PrimeField


def series_coords(jets):
    return sorted(j.coords for j in jets)


def test_enumeration_matches_brute_force(torus, cusp, elliptic, F3, F5):
    for model, level in ((torus, 1), (torus, 2), (cusp, 1), (cusp, 2), (elliptic, 1)):
        got = series_coords(enumerate_jets(model, level, SeriesMode(F3)))
        assert got == brute_force_series_jets(model, level, F3)
        assert count_jets(model, level, SeriesMode(F3)) == len(got)
    # the 5^4-tuple scan: 4 smooth base points x 5 plus 25 free at the cusp
    oracle = brute_force_series_jets(cusp, 1, F5)
    assert len(oracle) == 45
    assert series_coords(enumerate_jets(cusp, 1, SeriesMode(F5))) == oracle


def test_enumeration_matches_brute_force_mixed():
    f = parse_poly("x^2 + 1", ("x",))
    model = AffineModel("x2p1", ("x",), (f,), 0)
    got = sorted(j.coords for j in enumerate_jets(model, 1, MixedMode(5)))
    assert got == brute_force_mixed_jets(model, 1, 5)
    assert len(got) == 2  # Hensel lifts of x = 2, 3 mod 5


def test_spec_counts(plane, torus, cusp, F2, F3, F5):
    assert count_jets(plane, 1, SeriesMode(F2)) == 16
    assert count_jets(torus, 2, SeriesMode(F3)) == 18
    assert count_jets(cusp, 1, SeriesMode(F5)) == 45


def test_every_enumerated_jet_is_valid_and_distinct(cusp, F3):
    jets = list(enumerate_jets(cusp, 2, SeriesMode(F3)))
    assert all(j.is_valid() for j in jets)
    assert len({j.coords for j in jets}) == len(jets)


def test_constructor_rejects_invalid_jets(cusp, F5):
    t = (0, 1, 0, 0)
    with pytest.raises(ModelDataError):
        make_jet(cusp, SeriesMode(F5), 3, (t, t))  # t^2 - t^3 != 0 mod t^4


def test_truncation_identity_and_compatibility(torus, F3):
    base = SeriesMode(F3)
    upper = list(enumerate_jets(torus, 2, base))
    lower = {j.coords for j in enumerate_jets(torus, 1, base)}
    for j in upper:
        assert truncate_jet(j, 2).coords == j.coords
        shadow = truncate_jet(j, 1)
        assert shadow.coords in lower
        assert shadow.is_valid()


def test_truncation_fibres_for_smooth_model(torus, F3):
    # level n+1 -> level n is onto with fibres of size exactly q^d
    base = SeriesMode(F3)
    fibres = {}
    for j in enumerate_jets(torus, 2, base):
        fibres.setdefault(truncate_jet(j, 1).coords, 0)
        fibres[truncate_jet(j, 1).coords] += 1
    lower = {j.coords for j in enumerate_jets(torus, 1, base)}
    assert set(fibres) == lower
    assert set(fibres.values()) == {3}


def test_truncate_level_error(torus, F3):
    j = next(iter(enumerate_jets(torus, 1, SeriesMode(F3))))
    with pytest.raises(Exception):
        truncate_jet(j, 2)


def test_fibration_check_examples(ball, torus, elliptic, F3, F5):
    rep = fibration_check(ball, 0, 2, SeriesMode(F3))
    assert rep.ok and rep.level_counts == ((0, 3), (2, 27))
    rep = fibration_check(torus, 0, 1, SeriesMode(F3))
    assert rep.ok and rep.level_counts == ((0, 2), (1, 6))
    rep = fibration_check(elliptic, 1, 1, SeriesMode(F5))
    assert rep.ok


def test_fibration_requires_smooth(cusp, F3):
    with pytest.raises(ModelDataError):
        fibration_check(cusp, 0, 1, SeriesMode(F3))


def test_fibration_law_all_suite_models(ball, plane, torus, elliptic):
    for model in (ball, plane, torus, elliptic):
        for q in (2, 3, 5):
            if model.name == "elliptic" and q == 2:
                continue  # degenerates mod 2
            base = SeriesMode(PrimeField(q))
            c0 = count_jets(model, 0, base)
            for n in range(1, 4):
                assert count_jets(model, n, base) == c0 * q ** (n * model.rel_dim)


def test_mixed_equal_agree_at_level_zero(torus, cusp, elliptic):
    for model in (torus, cusp, elliptic):
        for p in (3, 5):
            series = count_jets(model, 0, SeriesMode(PrimeField(p)))
            mixed = count_jets(model, 0, MixedMode(p))
            assert series == mixed


def test_mixed_fibration_smooth(torus):
    for p in (3, 5):
        rep = fibration_check(torus, 0, 2, MixedMode(p))
        assert rep.ok


def test_lift_smooth_point_immediate_yes(torus, F3):
    for j in enumerate_jets(torus, 2, SeriesMode(F3)):
        verdict = lift_jet(torus, j, 1)
        assert verdict.is_yes
        assert verdict.certificate.get("minor_order") == 0 or "constant" in verdict.certificate


def test_lift_cusp_dead_branch(cusp, F5):
    j = make_jet(cusp, SeriesMode(F5), 1, ((0, 1), (0, 0)))
    verdict = lift_jet(cusp, j, 2)
    assert verdict.is_no and verdict.level == 3


def test_lift_cusp_constant_arc(cusp, F5):
    j = make_jet(cusp, SeriesMode(F5), 1, ((0, 0), (0, 0)))
    verdict = lift_jet(cusp, j, 1)
    assert verdict.is_yes and "constant" in verdict.certificate


def test_lift_unknown_when_depth_too_small(cusp, F5):
    # (t^2, 0) needs several levels to die or certify; depth 0 cannot tell
    j = make_jet(cusp, SeriesMode(F5), 2, ((0, 0, 1), (0, 0, 0)))
    verdict = lift_jet(cusp, j, 0)
    assert verdict.is_unknown


def test_image_counts(plane, torus, cusp, F2, F3, F5):
    assert image_count(plane, 1, SeriesMode(F2), 1).exact == 16
    assert image_count(torus, 2, SeriesMode(F3), 1).exact == 18
    rep = image_count(cusp, 1, SeriesMode(F5), 2)
    assert (rep.lower, rep.upper) == (21, 21)


def test_cusp_image_against_parametrization_oracle(cusp, F5):
    # every arc on the cusp is u -> (u^2, u^3); truncate the parametrization
    from jetmeasure.rings import SeriesRing

    ring = SeriesRing(F5, 1)
    images = set()
    for u in itertools.product(range(5), repeat=2):
        images.add((ring.mul(u, u), ring.mul(ring.mul(u, u), u)))
    assert len(images) == 21
    rep = image_count(cusp, 1, SeriesMode(F5), 2)
    assert rep.exact == len(images)
    # deeper search does not change the answer
    deep = image_count(cusp, 1, SeriesMode(F5), 4)
    assert deep.exact == len(images)


def test_image_upper_bounded_by_dimension_law(cusp, F5):
    c0 = cusp.count_points(F5)
    rep = image_count(cusp, 1, SeriesMode(F5), 2)
    assert rep.upper <= c0 * 5 ** (2 * cusp.rel_dim)


def test_deep_vanishing_jets_obey_codim_bound(cusp, F3):
    # jets vanishing to level i=1 on the cusp, pushed to level n=2: the
    # certified upper bound stays within q^{n - ell} for ell = 1
    base = SeriesMode(F3)
    yes = unknown = 0
    for j in enumerate_jets(cusp, 2, base):
        if any(c[0] != 0 or c[1] != 0 for c in j.coords):
            continue
        verdict = lift_jet(cusp, j, 4)
        if verdict.is_yes:
            yes += 1
        elif verdict.is_unknown:
            unknown += 1
    assert yes + unknown <= 3  # q^{(n+1)d - ell - 1} = 3^1
    assert yes == 2  # the zero jet and the shadow of (t^2, t^3)


def test_ord_function_examples(ball, plane, F5):
    x = parse_poly("x", ("x",))
    j = make_jet(ball, SeriesMode(F5), 2, ((0, 1, 1),))
    assert ord_function(x, j) == 1
    f = parse_poly("y^2 - x^3", ("x", "y"))
    t = (0, 1, 0, 0)
    ambient = make_jet(plane, SeriesMode(F5), 3, (t, t))
    assert ord_function(f, ambient) == 2
    zero = make_jet(ball, SeriesMode(F5), 4, ((0, 0, 0, 0, 0),))
    assert ord_function(x, zero) is None  # means >= 5


def test_ord_function_mixed():
    model = AffineModel("line", ("x",), (), 1, smooth=True)
    x = parse_poly("x", ("x",))
    j = make_jet(model, MixedMode(5), 2, (50,))
    assert ord_function(x, j) == 2
    j = make_jet(model, MixedMode(5), 2, (0,))
    assert ord_function(x, j) is None


def blowdown(plane_uv, plane_xy):
    return ModelMorphism(
        "blowdown",
        plane_uv,
        plane_xy,
        {
            "x": parse_poly("u", ("u", "v")),
            "y": parse_poly("u*v", ("u", "v")),
        },
    )


def test_ord_jacobian_examples(F3):
    uv = AffineModel("uv", ("u", "v"), (), 2, smooth=True)
    xy = AffineModel("xy", ("x", "y"), (), 2, smooth=True)
    h = blowdown(uv, xy)
    one = (1, 0)
    j = make_jet(uv, SeriesMode(F3), 1, ((0, 1), one))
    assert ord_jacobian(h, j) == 1
    ident = ModelMorphism(
        "id",
        xy,
        xy,
        {"x": parse_poly("x", ("x", "y")), "y": parse_poly("y", ("x", "y"))},
    )
    j = make_jet(xy, SeriesMode(F3), 1, ((1, 2), (0, 1)))
    assert ord_jacobian(ident, j) == 0
    j = make_jet(uv, SeriesMode(F3), 3, ((0, 0, 1, 0), (0, 1, 0, 0)))
    assert ord_jacobian(h, j) == 2


def test_ord_jacobian_deepening(F3):
    uv = AffineModel("uv", ("u", "v"), (), 2, smooth=True)
    xy = AffineModel("xy", ("x", "y"), (), 2, smooth=True)
    h = blowdown(uv, xy)
    # u vanishes to the truncation level: undetermined without deepening,
    # and genuinely undetermined with it (different lifts disagree)
    j = make_jet(uv, SeriesMode(F3), 1, ((0, 0), (1, 0)))
    assert ord_jacobian(h, j, depth=0) is None
    assert ord_jacobian(h, j, depth=2) is None


def test_apply_morphism(F3):
    uv = AffineModel("uv", ("u", "v"), (), 2, smooth=True)
    xy = AffineModel("xy", ("x", "y"), (), 2, smooth=True)
    h = blowdown(uv, xy)
    j = make_jet(uv, SeriesMode(F3), 2, ((0, 1, 0), (1, 1, 0)))
    image = apply_morphism(h, j)
    assert image.coords == ((0, 1, 0), (0, 1, 1))


def test_budget_exhaustion(torus, F3):
    with pytest.raises(BudgetExceededError):
        count_jets(torus, 2, SeriesMode(F3), Budget(5))


def test_cover_inclusion_exclusion_counts(torus, ball):
    # per-piece jet counts recombine to the total count
    from jetmeasure.models import load_model_file
    from conftest import model_path

    cover = load_model_file(model_path("torus")).covers["two_charts"]
    for q in (3, 5):
        field = PrimeField(q)
        base = SeriesMode(field)

        def piece(pt_gates):
            def flt(pt):
                return all(g.evaluate(field, pt) != 0 for g in pt_gates)

            return flt

        g1, g2 = [gate for _, gate in cover.pieces]
        total = count_jets(torus, 2, base)
        c1 = count_jets(torus, 2, base, base_filter=piece([g1]))
        c2 = count_jets(torus, 2, base, base_filter=piece([g2]))
        c12 = count_jets(torus, 2, base, base_filter=piece([g1, g2]))
        assert c1 + c2 - c12 == total


def test_extension_field_jets():
    from jetmeasure.rings import ExtensionField

    f4 = ExtensionField(2, (1, 1, 1))
    torus = AffineModel(
        "torus", ("x", "y"), (parse_poly("x*y - 1", ("x", "y")),), 1, smooth=True
    )
    base = SeriesMode(f4)
    assert count_jets(torus, 0, base) == 3  # units of F_4
    assert count_jets(torus, 1, base) == 3 * 4
    rep = fibration_check(torus, 0, 1, base)
    assert rep.ok

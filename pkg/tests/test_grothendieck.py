import itertools
import random
from fractions import Fraction

import pytest

from jetmeasure.errors import (
    ContractViolationError,
    ModelDataError,
    PolyParseError,
    UnspecializableClassError,
)
from jetmeasure.grothendieck import (
    CompletedClass,
    L,
    Laurent,
    VarietyAtom,
    VirtualClass,
    atom_class,
    in_filtration,
    int_class,
    mod_L_minus_1,
    norm,
    one_class,
    parse_class,
    residue_mod_q_minus_1,
    specialize_count,
    sum_to_tolerance,
    virtual_dim,
    zero_class,
)


def test_additive_inverse():
    assert (L(1) - L(1)).is_zero()


def test_monomial_arithmetic():
    assert L(2) * L(-5) == L(-3)


def test_atom_product_dims():
    s = VarietyAtom("S", 1)
    sp = VarietyAtom("Sp", 2)
    prod = (atom_class(s) * L(1)) * atom_class(sp)
    assert virtual_dim(prod) == 4  # dims 1 + 2 plus one power of L
    ((atoms, w),) = prod.terms.items()
    assert atoms == (s, sp)
    assert w == Laurent.monomial(1, 1)


def test_virtual_dim_examples():
    assert virtual_dim(L(-3)) == -3
    assert virtual_dim(L(2) - L(1)) == 2
    s = VarietyAtom("S", 1)
    assert virtual_dim(atom_class(s) * L(-4)) == -3
    assert virtual_dim(zero_class()) is None


def test_norm_examples():
    assert norm(zero_class()) == 0
    assert norm(L(-3)) == Fraction(1, 8)
    assert norm(L(1) - one_class()) == 2


def test_specialize_examples():
    assert specialize_count(L(2) + one_class(), 3) == 10
    assert specialize_count(L(-1), 2) == Fraction(1, 2)


def test_specialize_counter_from_enumeration():
    def torus_points(q):
        count = 0
        for x in range(q):
            for y in range(q):
                if (x * y - 1) % q == 0:
                    count += 1
        return count

    gm = VarietyAtom("Gm", 1, counter=torus_points)
    assert specialize_count(atom_class(gm), 5) == 4


def test_specialize_requires_counters():
    bare = VarietyAtom("S", 1)
    with pytest.raises(UnspecializableClassError) as err:
        specialize_count(atom_class(bare), 3)
    assert "S" in str(err.value)


def test_mod_L_minus_1_examples():
    assert mod_L_minus_1(L(5)) == one_class()
    s = VarietyAtom("S", 1)
    assert mod_L_minus_1((L(1) - one_class()) * atom_class(s)).is_zero()
    for d in range(0, 6):
        assert mod_L_minus_1(L(d)) == one_class()


def _random_laurent_class(rng, with_atoms=()):
    terms = {}
    atoms_pool = tuple(with_atoms)
    for _ in range(rng.randint(0, 4)):
        mono = tuple(sorted(rng.sample(atoms_pool, rng.randint(0, min(2, len(atoms_pool))))
                            )) if atoms_pool else ()
        w = Laurent({rng.randint(-6, 6): rng.randint(-5, 5) for _ in range(rng.randint(1, 3))})
        if w.is_zero():
            continue
        cur = terms.get(mono)
        terms[mono] = w if cur is None else cur + w
    return VirtualClass(terms)


def test_ultrametric_on_thousand_random_pairs():
    rng = random.Random(20240817)
    for _ in range(1000):
        a = _random_laurent_class(rng)
        b = _random_laurent_class(rng)
        assert norm(a + b) <= max(norm(a), norm(b))


def test_norm_multiplicative_on_pure_laurent():
    rng = random.Random(11)
    for _ in range(300):
        a = _random_laurent_class(rng)
        b = _random_laurent_class(rng)
        if a.is_zero() or b.is_zero():
            continue
        assert norm(a * b) == norm(a) * norm(b)


def test_filtration_membership_matches_norm():
    rng = random.Random(5)
    for _ in range(200):
        a = _random_laurent_class(rng)
        for m in range(-8, 9):
            expected = norm(a) <= Fraction(2) ** (-m) if m <= 0 else norm(a) <= Fraction(1, 2 ** m)
            assert in_filtration(a, m) == expected


def test_specialize_is_ring_morphism():
    def counter(q):
        return q + 1

    s = VarietyAtom("S", 1, counter=counter)
    rng = random.Random(99)
    for q in (2, 3, 5):
        for _ in range(60):
            a = _random_laurent_class(rng, with_atoms=(s,))
            b = _random_laurent_class(rng, with_atoms=(s,))
            assert specialize_count(a + b, q) == specialize_count(a, q) + specialize_count(b, q)
            assert specialize_count(a * b, q) == specialize_count(a, q) * specialize_count(b, q)


def test_mod_L_minus_1_is_ring_morphism_and_kills_ideal():
    rng = random.Random(42)
    s = VarietyAtom("S", 1)
    for _ in range(100):
        a = _random_laurent_class(rng, with_atoms=(s,))
        b = _random_laurent_class(rng, with_atoms=(s,))
        assert mod_L_minus_1(a + b) == mod_L_minus_1(a) + mod_L_minus_1(b)
        assert mod_L_minus_1(a * b) == mod_L_minus_1(a) * mod_L_minus_1(b)
        assert mod_L_minus_1((L(1) - one_class()) * a).is_zero()


def test_residue_compatibility_of_quotient_and_counting():
    def counter(q):
        return q ** 2 + 1

    s = VarietyAtom("S", 2, counter=counter)
    rng = random.Random(7)
    for q in (3, 5):
        for _ in range(60):
            a = _random_laurent_class(rng, with_atoms=(s,))
            lhs = residue_mod_q_minus_1(specialize_count(mod_L_minus_1(a), q), q)
            rhs = residue_mod_q_minus_1(specialize_count(a, q), q)
            assert lhs == rhs


def test_residue_rejects_foreign_denominators():
    with pytest.raises(ModelDataError):
        residue_mod_q_minus_1(Fraction(1, 6), 5)
    assert residue_mod_q_minus_1(Fraction(7, 25), 5) == 3
    assert residue_mod_q_minus_1(Fraction(4), 2) == 0


def test_sum_to_tolerance_geometric_prefix():
    # the terms of the order-function integral on the one-dimensional ball
    def term(n):
        return (L(1) - one_class()) * L(-2 * n - 1)

    consumed = [term(n) for n in range(4)]
    tail = [term(n) for n in range(4, 10)]
    cc = sum_to_tolerance(consumed, 8, tail=tail)
    assert cc.tail_level == 8
    expected = (L(1) - one_class()) * (L(-1) + L(-3) + L(-5) + L(-7))
    assert cc.partial == expected
    # geometric oracle at q=3: sum of (q-1) q^{-2n-1}
    got = specialize_count(cc.partial, 3)
    oracle = sum(Fraction(3 - 1, 3 ** (2 * n + 1)) for n in range(4))
    assert got == oracle


def test_sum_to_tolerance_detects_undersized_tail_level():
    # the first unconsumed term has virtual dimension -8, so level 9 is a lie
    def term(n):
        return (L(1) - one_class()) * L(-2 * n - 1)

    with pytest.raises(ContractViolationError):
        sum_to_tolerance([term(n) for n in range(4)], 9, tail=[term(4)])


def test_sum_to_tolerance_empty_stream():
    cc = sum_to_tolerance([], 0)
    assert cc.partial.is_zero() and cc.tail_level == 0


def test_sum_to_tolerance_rejects_unbounded_tail_term():
    with pytest.raises(ContractViolationError):
        sum_to_tolerance([], 5, tail=[one_class()])


def test_canonical_text_round_trip():
    s = VarietyAtom("E", 1)
    atoms = {"E": s}
    cls = (L(2) - one_class()) * atom_class(s) + int_class(3) * L(-1)
    text = cls.to_text()
    assert parse_class(text, atoms) == cls
    rng = random.Random(13)
    for _ in range(150):
        a = _random_laurent_class(rng, with_atoms=(s,))
        assert parse_class(a.to_text(), atoms) == a


def test_parse_class_rejects_unknown_atoms():
    with pytest.raises(PolyParseError):
        parse_class("[E] + 1", {})


def test_atom_dim_validation():
    with pytest.raises(ModelDataError):
        VarietyAtom("bad", -1)


def test_counter_bound_against_declared_dimension():
    # counter(q) <= C q^dim must hold for every q the suite evaluates
    def counter(q):
        return q + 1

    s = VarietyAtom("S", 1, counter=counter)
    C = 2
    for q in (2, 3, 5):
        assert s.counter(q) <= C * q ** s.dim

"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the production code paths: jets are
found by scanning every coefficient tuple, determinants by the permutation
sum, integrals by geometric series.  Production must match them exactly.
"""

import itertools
import os

import pytest

from jetmeasure.models import AffineModel
from jetmeasure.poly import MultiPoly, parse_poly
from jetmeasure.rings import PrimeField, ResidueRing, SeriesRing

MODELS_DIR = os.path.join(os.path.dirname(__file__), "..", "models")


def model_path(name: str) -> str:
    return os.path.join(MODELS_DIR, name)


@pytest.fixture(scope="session")
def F2():
    return PrimeField(2)


@pytest.fixture(scope="session")
def F3():
    return PrimeField(3)


@pytest.fixture(scope="session")
def F5():
    return PrimeField(5)


@pytest.fixture(scope="session")
def ball():
    return AffineModel("ball", ("x",), (), 1, smooth=True)


@pytest.fixture(scope="session")
def plane():
    return AffineModel("plane", ("x", "y"), (), 2, smooth=True)


@pytest.fixture(scope="session")
def torus():
    eq = parse_poly("x*y - 1", ("x", "y"))
    return AffineModel("torus", ("x", "y"), (eq,), 1, smooth=True)


@pytest.fixture(scope="session")
def cusp():
    eq = parse_poly("y^2 - x^3", ("x", "y"))
    return AffineModel("cusp", ("x", "y"), (eq,), 1)


@pytest.fixture(scope="session")
def elliptic():
    eq = parse_poly("y^2 - x^3 + x", ("x", "y"))
    return AffineModel("elliptic", ("x", "y"), (eq,), 1, smooth=True)


# --- oracles ---------------------------------------------------------------


def brute_force_series_jets(model, level, field):
    """Scan all q^{(n+1)N} coefficient tuples; keep the equation solutions."""
    ring = SeriesRing(field, level)
    singles = list(itertools.product(list(field.elements()), repeat=level + 1))
    out = []
    for coords in itertools.product(singles, repeat=model.ambient_dim):
        if all(ring.is_zero(f.evaluate(ring, coords)) for f in model.equations):
            out.append(coords)
    return sorted(out)


def brute_force_mixed_jets(model, level, p):
    ring = ResidueRing(p, level + 1)
    out = []
    for coords in itertools.product(range(p ** (level + 1)), repeat=model.ambient_dim):
        if all(f.evaluate(ring, coords) == 0 for f in model.equations):
            out.append(coords)
    return sorted(out)


def leibniz_det(matrix, vars):
    """Permutation-sum determinant of a matrix of polynomials."""
    n = len(matrix)
    ring = matrix[0][0].ring
    acc = MultiPoly.zero(ring, vars)
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = MultiPoly.const(ring, vars, ring.from_int(sign))
        for i in range(n):
            term = term * matrix[i][perm[i]]
        acc = acc + term
    return acc

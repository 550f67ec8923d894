"""Truncated jet spaces of affine models, in both base-ring modes.

Equal characteristic realizes level-n points as truncated series over a
finite field; mixed characteristic realizes them as residues mod p^{n+1}.
Enumeration is breadth-first over levels with pruning: a valid level-n jet
must truncate to a valid level-(n-1) jet, and the extension condition at each
level is affine-linear in the new coefficients (the Jacobian at the base
point acts on them), so children are produced by exact linear solving rather
than scanning.

Lifting questions are answered with three-valued verdicts.  ``yes`` carries a
certificate (a constant section, or a Newton certificate: a lift whose best
Jacobian minor order e satisfies both "e extra levels seen" and "level at
least 2e", which makes the iteration converge to an arc agreeing with the
original jet).  ``no`` is certified by exhausted extension search at a stated
level.  ``unknown`` is surfaced, never silently resolved.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Optional

from .errors import BudgetExceededError, LevelMismatchError, ModelDataError
from .models import AffineModel, ModelMorphism
from .poly import MultiPoly, jacobian_minors
from .rings import CoeffRing, PrimeField, ResidueRing, SeriesRing

__all__ = [
    "Budget",
    "SeriesMode",
    "MixedMode",
    "JetPoint",
    "make_jet",
    "enumerate_jets",
    "count_jets",
    "truncate_jet",
    "FibrationReport",
    "fibration_check",
    "LiftVerdict",
    "lift_jet",
    "ImageReport",
    "image_count",
    "ord_function",
    "eval_on_jet",
    "ord_jacobian",
    "apply_morphism",
    "default_budget",
]

DEFAULT_BUDGET = 10 ** 8


def default_budget() -> "Budget":
    return Budget(int(os.environ.get("GREENBERG_BUDGET", DEFAULT_BUDGET)))


class Budget:
    """Work meter for enumeration: counts candidate tuples actually examined.

    The naive search space q^{(n+1)N} bounds the work, but pruned runs charge
    only what they touch, so deep lifts on small fibres stay affordable.
    """

    def __init__(self, limit: int):
        if limit <= 0:
            raise ModelDataError("budget must be positive")
        self.limit = limit
        self.used = 0

    def charge(self, n: int = 1, hint: str = ""):
        self.used += n
        if self.used > self.limit:
            raise BudgetExceededError(self.limit, hint)


@dataclass(frozen=True)
class SeriesMode:
    """Jets over field[t]/t^{n+1} (equal characteristic)."""

    field: CoeffRing

    def __post_init__(self):
        if not self.field.is_field or self.field.size is None:
            raise ModelDataError("series mode needs a finite residue field")

    @property
    def q(self) -> int:
        return self.field.size

    def ring(self, level: int) -> SeriesRing:
        return SeriesRing(self.field, level)

    def describe(self) -> str:
        return f"F_{self.q}[t]/t^(n+1)"


@dataclass(frozen=True)
class MixedMode:
    """Jets over Z/p^{n+1} (mixed characteristic, residue field F_p).

    Extension residue fields would require unramified coefficient lifts and
    are handled only by the Witt tables, not here.
    """

    p: int

    def __post_init__(self):
        PrimeField(self.p)  # validates primality

    @property
    def q(self) -> int:
        return self.p

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    def ring(self, level: int) -> ResidueRing:
        return ResidueRing(self.p, level + 1)

    def describe(self) -> str:
        return f"Z/{self.p}^(n+1)"


Base = SeriesMode | MixedMode


@dataclass(frozen=True)
class JetPoint:
    """A level-n point of a model: one truncated coordinate per variable."""

    model: AffineModel
    base: Base
    level: int
    coords: tuple

    @property
    def ring(self):
        return self.base.ring(self.level)

    def base_point(self) -> tuple:
        if isinstance(self.base, SeriesMode):
            return tuple(c[0] for c in self.coords)
        return tuple(c % self.base.p for c in self.coords)

    def is_valid(self) -> bool:
        ring = self.ring
        return all(
            ring.is_zero(f.evaluate(ring, self.coords)) for f in self.model.equations
        )

    def pretty(self) -> str:
        ring = self.ring
        return "(" + ", ".join(ring.repr_elem(c) for c in self.coords) + ")"


def make_jet(model: AffineModel, base: Base, level: int, coords: tuple) -> JetPoint:
    """Validating constructor: the coordinates must solve the equations."""
    j = JetPoint(model, base, level, tuple(coords))
    if len(coords) != model.ambient_dim:
        raise ModelDataError("wrong number of jet coordinates")
    if isinstance(base, SeriesMode):
        for c in coords:
            if len(c) != level + 1:
                raise LevelMismatchError(f"coordinate {c} is not a level-{level} series")
    if not j.is_valid():
        raise ModelDataError(f"coordinates {coords} do not satisfy {model.name} at level {level}")
    return j


def truncate_jet(j: JetPoint, m: int) -> JetPoint:
    """The canonical projection to a lower level."""
    if m > j.level:
        raise LevelMismatchError(f"cannot truncate level {j.level} jet to level {m}")
    if isinstance(j.base, SeriesMode):
        coords = tuple(c[: m + 1] for c in j.coords)
    else:
        mod = j.base.p ** (m + 1)
        coords = tuple(c % mod for c in j.coords)
    return JetPoint(j.model, j.base, m, coords)


# --- extension machinery --------------------------------------------------


class _AffineSolver:
    """Solve M a = rhs over a finite field for a fixed matrix M.

    Elimination is done once; each solve consumes a fresh right-hand side.
    Solutions are returned as a particular solution plus a nullspace basis.
    """

    def __init__(self, field: CoeffRing, rows: list):
        self.field = field
        self.ncols = len(rows[0]) if rows else 0
        # carry the transform of the rhs alongside the row reduction
        aug = [(list(r), [field.one() if i == k else field.zero() for k in range(len(rows))])
               for i, r in enumerate(rows)]
        pivots = []
        rank = 0
        for col in range(self.ncols):
            piv = None
            for r in range(rank, len(aug)):
                if not field.is_zero(aug[r][0][col]):
                    piv = r
                    break
            if piv is None:
                continue
            aug[rank], aug[piv] = aug[piv], aug[rank]
            inv = field.inv(aug[rank][0][col])
            aug[rank] = (
                [field.mul(inv, x) for x in aug[rank][0]],
                [field.mul(inv, x) for x in aug[rank][1]],
            )
            for r in range(len(aug)):
                if r != rank and not field.is_zero(aug[r][0][col]):
                    factor = aug[r][0][col]
                    aug[r] = (
                        [field.sub(x, field.mul(factor, y))
                         for x, y in zip(aug[r][0], aug[rank][0])],
                        [field.sub(x, field.mul(factor, y))
                         for x, y in zip(aug[r][1], aug[rank][1])],
                    )
            pivots.append(col)
            rank += 1
        self.rows = [r for r, _ in aug]
        self.transform = [t for _, t in aug]
        self.pivots = pivots
        self.rank = rank
        self.free_cols = [c for c in range(self.ncols) if c not in pivots]
        # nullspace basis: one vector per free column
        self.null_basis = []
        for fc in self.free_cols:
            vec = [field.zero()] * self.ncols
            vec[fc] = field.one()
            for r, pc in enumerate(self.pivots):
                vec[pc] = field.neg(self.rows[r][fc])
            self.null_basis.append(tuple(vec))

    def solve(self, rhs: list) -> Optional[tuple]:
        field = self.field
        t_rhs = []
        for r in range(len(self.transform)):
            acc = field.zero()
            for k, c in enumerate(self.transform[r]):
                if not field.is_zero(c) and not field.is_zero(rhs[k]):
                    acc = field.add(acc, field.mul(c, rhs[k]))
            t_rhs.append(acc)
        for r in range(self.rank, len(self.transform)):
            if not field.is_zero(t_rhs[r]):
                return None
        particular = [field.zero()] * self.ncols
        for r, pc in enumerate(self.pivots):
            particular[pc] = t_rhs[r]
        return tuple(particular)

    def solution_count(self) -> int:
        return self.field.size ** len(self.free_cols)

    def solutions(self, rhs: list):
        """All solutions, sorted, or an empty iterator when inconsistent."""
        part = self.solve(rhs)
        if part is None:
            return []
        field = self.field
        out = []
        for combo in itertools.product(list(field.elements()), repeat=len(self.null_basis)):
            vec = list(part)
            for c, basis in zip(combo, self.null_basis):
                if not field.is_zero(c):
                    vec = [field.add(x, field.mul(c, b)) for x, b in zip(vec, basis)]
            out.append(tuple(vec))
        out.sort()
        return out


class _JetEngine:
    """Shared state for one (model, base) pair: solver cache and budget."""

    def __init__(self, model: AffineModel, base: Base, budget: Budget | None):
        self.model = model
        self.base = base
        self.budget = budget or default_budget()
        self.field = base.field
        self._solvers: dict = {}
        self._jac_polys = [
            [f.derivative(v) for v in model.variables] for f in model.equations
        ]

    def solver_at(self, pt: tuple) -> _AffineSolver:
        solver = self._solvers.get(pt)
        if solver is None:
            rows = [
                [df.evaluate(self.field, pt) for df in row] for row in self._jac_polys
            ]
            solver = _AffineSolver(self.field, rows)
            self._solvers[pt] = solver
        return solver

    # -- level 0 --

    def level0(self, base_filter=None):
        field = self.field
        n = self.model.ambient_dim
        out = []
        for pt in itertools.product(list(field.elements()), repeat=n):
            self.budget.charge(1, f"scanning level-0 candidates of {self.model.name}")
            if base_filter is not None and not base_filter(pt):
                continue
            if self.model.point_on_model(field, pt):
                out.append(self._coords_from_point(pt))
        return out

    def _coords_from_point(self, pt: tuple) -> tuple:
        if isinstance(self.base, SeriesMode):
            return tuple((c,) for c in pt)
        return pt

    # -- one extension step --

    def residual(self, coords: tuple, m: int) -> Optional[list]:
        """Per-equation obstruction to extending a level-(m-1) jet by zeros.

        Returns the coefficient of t^m (or of p^m) of every equation on the
        zero-padded lift; the extension condition is J(base) . a = -residual.
        """
        model = self.model
        if isinstance(self.base, SeriesMode):
            ring = SeriesRing(self.field, m)
            padded = tuple(c + (self.field.zero(),) for c in coords)
            return [f.evaluate(ring, padded)[m] for f in model.equations]
        p = self.base.p
        ring = ResidueRing(p, m + 1)
        vals = [f.evaluate(ring, coords) for f in model.equations]
        out = []
        for v in vals:
            if v % (p ** m) != 0:
                raise ModelDataError("parent jet is not valid at its level")
            out.append((v // (p ** m)) % p)
        return out

    def children(self, coords: tuple, m: int) -> list:
        """All valid level-m extensions of valid level-(m-1) coordinates."""
        field = self.field
        base_pt = self._base_point(coords)
        solver = self.solver_at(base_pt)
        self.budget.charge(1, f"extending jets of {self.model.name} to level {m}")
        if not self.model.equations:
            sols = sorted(
                itertools.product(list(field.elements()), repeat=self.model.ambient_dim)
            )
        else:
            rhs = [field.neg(c) for c in self.residual(coords, m)]
            sols = solver.solutions(rhs)
        self.budget.charge(len(sols))
        return [self._extend(coords, a, m) for a in sols]

    def child_count(self, coords: tuple, m: int) -> int:
        field = self.field
        if not self.model.equations:
            self.budget.charge(1)
            return field.size ** self.model.ambient_dim
        solver = self.solver_at(self._base_point(coords))
        self.budget.charge(1)
        rhs = [field.neg(c) for c in self.residual(coords, m)]
        return 0 if solver.solve(rhs) is None else solver.solution_count()

    def _base_point(self, coords: tuple) -> tuple:
        if isinstance(self.base, SeriesMode):
            return tuple(c[0] for c in coords)
        return tuple(c % self.base.p for c in coords)

    def _extend(self, coords: tuple, a: tuple, m: int) -> tuple:
        if isinstance(self.base, SeriesMode):
            return tuple(c + (ai,) for c, ai in zip(coords, a))
        pm = self.base.p ** m
        return tuple(c + ai * pm for c, ai in zip(coords, a))

    # -- full enumeration --

    def stream(self, level: int, base_filter=None):
        def rec(coords, m):
            if m == level:
                yield coords
                return
            for child in self.children(coords, m + 1):
                yield from rec(child, m + 1)

        for start in self.level0(base_filter):
            yield from rec(start, 0)

    def count(self, level: int, base_filter=None) -> int:
        if not self.model.equations and base_filter is None:
            self.budget.charge(1)
            return self.field.size ** (self.model.ambient_dim * (level + 1))
        frontier = self.level0(base_filter)
        if not self.model.equations:
            return len(frontier) * self.field.size ** (self.model.ambient_dim * level)
        for m in range(1, level):
            nxt = []
            for coords in frontier:
                nxt.extend(self.children(coords, m))
            frontier = nxt
        if level == 0:
            return len(frontier)
        return sum(self.child_count(coords, level) for coords in frontier)


def enumerate_jets(
    model: AffineModel,
    level: int,
    base: Base,
    budget: Budget | None = None,
    base_filter=None,
):
    """Yield every level-n jet exactly once, in a fixed deterministic order."""
    engine = _JetEngine(model, base, budget)
    for coords in engine.stream(level, base_filter):
        yield JetPoint(model, base, level, coords)


def count_jets(
    model: AffineModel,
    level: int,
    base: Base,
    budget: Budget | None = None,
    base_filter=None,
) -> int:
    """Exact number of level-n jets (same set the stream yields)."""
    return _JetEngine(model, base, budget).count(level, base_filter)


@dataclass(frozen=True)
class FibrationReport:
    ok: bool
    level_counts: tuple  # ((n, count), (n+m, count))
    expected_ratio: int


def fibration_check(
    model: AffineModel, n: int, m: int, base: Base, budget: Budget | None = None
) -> FibrationReport:
    """Smooth models fibre level n+m over level n with fibre size q^{dm}."""
    if not model.smooth:
        raise ModelDataError(f"fibration law requires a smooth model, not {model.name}")
    budget = budget or default_budget()
    c_n = count_jets(model, n, base, budget)
    c_nm = count_jets(model, n + m, base, budget)
    ratio = base.q ** (model.rel_dim * m)
    return FibrationReport(c_nm == c_n * ratio, ((n, c_n), (n + m, c_nm)), ratio)


# --- order functions ------------------------------------------------------


def eval_on_jet(f: MultiPoly, j: JetPoint):
    """Value of an integer polynomial on a jet, in the jet's residue ring."""
    return f.evaluate(j.ring, j.coords)


def ord_function(f: MultiPoly, j: JetPoint) -> Optional[int]:
    """Valuation of f along the jet; None means at least level+1.

    Truncation cannot distinguish orders beyond the level, so None is a
    certified lower bound, not a value.
    """
    v = eval_on_jet(f, j)
    if isinstance(j.base, SeriesMode):
        return j.ring.order(v)
    if v == 0:
        return None
    p = j.base.p
    k = 0
    while v % p == 0:
        v //= p
        k += 1
    return k


# --- lifting --------------------------------------------------------------


@dataclass(frozen=True)
class LiftVerdict:
    """Three-valued answer to "does this jet extend to an arc?".

    ``yes``     -- an arc exists (certificate attached),
    ``no``      -- no lift exists to the stated level, so none to an arc,
    ``unknown`` -- neither certified within the searched depth.
    """

    kind: str
    level: Optional[int] = None
    certificate: Optional[dict] = None

    @property
    def is_yes(self):
        return self.kind == "yes"

    @property
    def is_no(self):
        return self.kind == "no"

    @property
    def is_unknown(self):
        return self.kind == "unknown"


def _constant_jet(j: JetPoint) -> bool:
    if not isinstance(j.base, SeriesMode):
        return False
    field = j.base.field
    return all(all(field.is_zero(c) for c in coord[1:]) for coord in j.coords)


def lift_jet(
    model: AffineModel, j: JetPoint, depth: int, budget: Budget | None = None
) -> LiftVerdict:
    """Bounded-depth lifting with sound three-valued verdicts.

    A constant jet is lifted by the constant section through its base point.
    Otherwise lifts up to ``depth`` levels beyond the jet are searched; a lift
    exhibiting a Jacobian minor of exact order e after b extra levels with
    b >= e and level >= 2e is a Newton certificate (the iteration converges
    to an arc agreeing with the original jet).  If at some level no lift
    exists at all, the jet is certifiably outside the image of the arc space.
    """
    if _constant_jet(j):
        return LiftVerdict("yes", level=j.level, certificate={"constant": j.base_point()})
    engine = _JetEngine(model, j.base, budget)
    minors = model.singular_minors()
    frontier = [j.coords]
    for b in range(depth + 1):
        level = j.level + b
        for coords in frontier:
            lift = JetPoint(model, j.base, level, coords)
            orders = [ord_function(mp, lift) for mp in minors]
            exact = [o for o in orders if o is not None]
            if exact:
                e = min(exact)
                if b >= e and level >= 2 * e:
                    return LiftVerdict(
                        "yes",
                        level=level,
                        certificate={"lift": coords, "minor_order": e, "extra_levels": b},
                    )
        if b == depth:
            break
        nxt = []
        for coords in frontier:
            nxt.extend(engine.children(coords, level + 1))
        if not nxt:
            return LiftVerdict("no", level=level + 1)
        frontier = nxt
    return LiftVerdict("unknown", level=depth)


@dataclass(frozen=True)
class ImageReport:
    """Bounds on the number of level-n jets that come from arcs."""

    lower: int
    upper: int
    total_jets: int
    unknown: int

    @property
    def exact(self) -> Optional[int]:
        return self.lower if self.lower == self.upper else None

    def interval_text(self) -> str:
        return f"[{self.lower}, {self.upper}]"


def image_count(
    model: AffineModel,
    n: int,
    base: Base,
    depth: int,
    budget: Budget | None = None,
) -> ImageReport:
    """Count jets certified to lift (lower) and not certified to fail (upper)."""
    budget = budget or default_budget()
    yes = unknown = total = 0
    for j in enumerate_jets(model, n, base, budget):
        total += 1
        verdict = lift_jet(model, j, depth, budget)
        if verdict.is_yes:
            yes += 1
        elif verdict.is_unknown:
            unknown += 1
    return ImageReport(yes, yes + unknown, total, unknown)


# --- morphisms on jets ----------------------------------------------------


def apply_morphism(h: ModelMorphism, j: JetPoint) -> JetPoint:
    """Push a source jet through a morphism (coordinates substituted exactly)."""
    ring = j.ring
    coords = tuple(
        h.components[v].evaluate(ring, j.coords) for v in h.target.variables
    )
    return make_jet(h.target, j.base, j.level, coords)


def _morphism_minors(h: ModelMorphism) -> list:
    d = h.target.rel_dim
    if h.source.rel_dim != d:
        raise ModelDataError(
            f"morphism {h.name}: source and target relative dimensions differ"
        )
    return jacobian_minors(h.component_list(), h.source.variables, d)


def ord_jacobian(
    h: ModelMorphism,
    j: JetPoint,
    depth: int = 0,
    budget: Budget | None = None,
) -> Optional[int]:
    """Order of the Jacobian ideal of h along a source jet.

    Computed as the minimum order over the d x d minors of the Jacobian in
    the source chart coordinates; the source must be smooth at the jet's base
    point so that the top forms are free of rank one there.  When every minor
    vanishes to the truncation level the jet is deepened by up to ``depth``
    levels; None is returned when the order stays undetermined (or when
    different deepenings disagree, which means the jet does not pin it down).
    """
    field = j.base.field
    if not h.source.is_smooth_point(field, j.base_point()):
        raise ModelDataError(
            f"source of {h.name} is singular at {j.base_point()}; order undefined"
        )
    minors = _morphism_minors(h)
    return _ord_jacobian_rec(h, minors, j, depth, budget)


def _ord_jacobian_rec(h, minors, j, depth, budget) -> Optional[int]:
    orders = [ord_function(mp, j) for mp in minors]
    exact = [o for o in orders if o is not None]
    if exact:
        return min(exact)
    if depth <= 0:
        return None
    engine = _JetEngine(h.source, j.base, budget)
    values = set()
    for coords in engine.children(j.coords, j.level + 1):
        child = JetPoint(h.source, j.base, j.level + 1, coords)
        v = _ord_jacobian_rec(h, minors, child, depth - 1, budget)
        if v is None:
            return None
        values.add(v)
    if len(values) == 1:
        return values.pop()
    return None

"""Affine models over Z, morphisms between them, covers, and the file format.

A model is one affine chart: variables, integer-coefficient equations, a
relative dimension, and optional gauge-form data.  One file serves every
finite field the suite evaluates, because equations are reduced mod p on
demand.

File format (line oriented, ``#`` starts a comment)::

    model torus
      variables x y
      equation x*y - 1
      dim 1
      smooth true
      form coeff y coords x twist 0
    end

    morphism blowdown
      source chart
      target plane
      x = u
      y = u*v
    end

    cover torus_cover
      total torus
      piece left where x - 1
      piece right where x - 2
    end

A cover piece is the open locus where its gate polynomial does not vanish on
the special fibre; jets belong to a piece when their base point does.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import ModelDataError
from .poly import MultiPoly, jacobian_minors, parse_poly
from .rings import ZZ, CoeffRing

__all__ = [
    "FormData",
    "AffineModel",
    "ModelMorphism",
    "CoverPresentation",
    "ModelFile",
    "parse_model_text",
    "load_model_file",
    "split_blocks",
]


@dataclass(frozen=True)
class FormData:
    """Gauge-form data: omega = coeff * dx_{j1} ^ ... ^ dx_{jd}, twisted by
    the uniformizer exponent ``twist`` (omega itself is pi^{-twist} times the
    integral form)."""

    coeff: MultiPoly
    coords: tuple
    twist: int = 0


@dataclass(frozen=True)
class AffineModel:
    name: str
    variables: tuple
    equations: tuple
    rel_dim: int
    smooth: bool = False
    form: Optional[FormData] = None
    minor_size: Optional[int] = None

    def __post_init__(self):
        n = len(self.variables)
        if not (0 <= self.rel_dim <= n):
            raise ModelDataError(
                f"model {self.name}: relative dimension {self.rel_dim} "
                f"outside [0, {n}]"
            )
        if self.form is not None:
            if len(self.form.coords) != self.rel_dim:
                raise ModelDataError(
                    f"model {self.name}: form uses {len(self.form.coords)} "
                    f"coordinates, expected {self.rel_dim}"
                )
            for v in self.form.coords:
                if v not in self.variables:
                    raise ModelDataError(f"model {self.name}: form coordinate {v} unknown")

    @property
    def ambient_dim(self) -> int:
        return len(self.variables)

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.rel_dim

    def is_complete_intersection(self) -> bool:
        return len(self.equations) == self.codim

    def singular_minors(self) -> list:
        """Generators of the Fitting minor system (without the equations)."""
        size = self.minor_size if self.minor_size is not None else self.codim
        if not self.is_complete_intersection() and self.minor_size is None:
            raise ModelDataError(
                f"model {self.name} is not a complete intersection; "
                "declare the minor size"
            )
        return jacobian_minors(self.equations, self.variables, size)

    def singular_locus_equations(self) -> list:
        """Model equations together with the Jacobian minors.

        The common zero set is the singular locus, set-theoretically, over any
        field.  (The radical is never taken: only the zero set is used.)
        """
        return list(self.equations) + self.singular_minors()

    def point_on_model(self, ring: CoeffRing, pt: tuple) -> bool:
        return all(ring.is_zero(f.evaluate(ring, pt)) for f in self.equations)

    def is_smooth_point(self, ring: CoeffRing, pt: tuple) -> bool:
        """True when some Fitting minor is nonzero at a point of the model."""
        if not self.point_on_model(ring, pt):
            raise ModelDataError(f"point {pt} does not lie on model {self.name}")
        return any(not ring.is_zero(m.evaluate(ring, pt)) for m in self.singular_minors())

    def points(self, ring: CoeffRing):
        """All solutions of the equations over a finite coefficient ring."""
        for pt in itertools.product(list(ring.elements()), repeat=self.ambient_dim):
            if self.point_on_model(ring, pt):
                yield pt

    def count_points(self, ring: CoeffRing) -> int:
        return sum(1 for _ in self.points(ring))

    def singular_points(self, ring: CoeffRing):
        system = self.singular_locus_equations()
        for pt in itertools.product(list(ring.elements()), repeat=self.ambient_dim):
            if all(ring.is_zero(f.evaluate(ring, pt)) for f in system):
                yield pt

    def verify_smooth_flag(self, rings) -> bool:
        """The declared smooth flag is checked, never trusted: the minor
        system must have no solutions over each supplied field."""
        if not self.smooth:
            return True
        return all(next(self.singular_points(r), None) is None for r in rings)


@dataclass(frozen=True)
class ModelMorphism:
    """A morphism given by one integer polynomial per target variable."""

    name: str
    source: AffineModel
    target: AffineModel
    components: dict

    def __post_init__(self):
        for v in self.target.variables:
            if v not in self.components:
                raise ModelDataError(f"morphism {self.name}: missing component for {v}")

    def component_list(self) -> list:
        return [self.components[v] for v in self.target.variables]

    def validate_on_points(self, rings) -> bool:
        """Target equations pull back to relations: checked on every
        enumerated source point over the supplied fields."""
        for ring in rings:
            for pt in self.source.points(ring):
                image = tuple(
                    self.components[v].evaluate(ring, pt) for v in self.target.variables
                )
                if not self.target.point_on_model(ring, image):
                    return False
        return True

    def jacobian_matrix(self) -> list:
        """Rows indexed by target variables, columns by source variables."""
        return [
            [self.components[tv].derivative(sv) for sv in self.source.variables]
            for tv in self.target.variables
        ]


@dataclass(frozen=True)
class CoverPresentation:
    """A finite open cover of a model by non-vanishing loci of gate
    polynomials on the special fibre."""

    name: str
    total: AffineModel
    pieces: tuple  # of (piece name, gate MultiPoly)

    def gates_for(self, subset) -> list:
        return [gate for name, gate in self.pieces if name in subset]

    def piece_names(self) -> list:
        return [name for name, _ in self.pieces]

    def verify_covering(self, rings) -> bool:
        """Every special-fibre point must lie in some piece."""
        for ring in rings:
            for pt in self.total.points(ring):
                if all(ring.is_zero(g.evaluate(ring, pt)) for _, g in self.pieces):
                    return False
        return True


@dataclass
class ModelFile:
    models: dict
    morphisms: dict
    covers: dict

    def only_model(self) -> AffineModel:
        if len(self.models) != 1:
            raise ModelDataError(
                f"file defines {len(self.models)} models; name one explicitly"
            )
        return next(iter(self.models.values()))


def split_blocks(text: str) -> list:
    """Split a file into (kind, name, body-lines) blocks."""
    blocks = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if current is None:
            parts = line.split()
            if len(parts) != 2:
                raise ModelDataError(f"line {lineno}: expected 'kind name', got '{line}'")
            current = (parts[0], parts[1], [])
        elif line == "end":
            blocks.append(current)
            current = None
        else:
            current[2].append((lineno, line))
    if current is not None:
        raise ModelDataError(f"block '{current[1]}' is never closed with 'end'")
    return blocks


def _parse_model_block(name: str, body) -> AffineModel:
    variables: tuple = ()
    equations: list = []
    dim: Optional[int] = None
    smooth = False
    form = None
    for lineno, line in body:
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "variables":
            variables = tuple(rest.replace(",", " ").split())
        elif key == "equation":
            equations.append(rest)
        elif key == "dim":
            dim = int(rest)
        elif key == "smooth":
            smooth = rest.lower() in ("true", "yes", "1")
        elif key == "form":
            form = rest
        else:
            raise ModelDataError(f"line {lineno}: unknown model field '{key}'")
    if not variables:
        raise ModelDataError(f"model {name}: no variables declared")
    eqs = tuple(parse_poly(e, variables) for e in equations)
    if dim is None:
        dim = len(variables) - len(eqs)
    form_data = _parse_form(form, variables) if form else None
    return AffineModel(name, variables, eqs, dim, smooth, form_data)


def _parse_form(text: str, variables) -> FormData:
    # "coeff <expr> coords <v1,v2> twist <n>"; coeff expression may contain
    # spaces, so scan for the keywords.
    fields = {}
    tokens = text.split()
    key = None
    buf: list = []
    for tok in tokens:
        if tok in ("coeff", "coords", "twist"):
            if key:
                fields[key] = " ".join(buf)
            key, buf = tok, []
        else:
            buf.append(tok)
    if key:
        fields[key] = " ".join(buf)
    if "coeff" not in fields or "coords" not in fields:
        raise ModelDataError("form needs at least 'coeff' and 'coords'")
    coeff = parse_poly(fields["coeff"], variables)
    coords = tuple(fields["coords"].replace(",", " ").split())
    twist = int(fields.get("twist", "0"))
    return FormData(coeff, coords, twist)


def _parse_morphism_block(name: str, body, models: dict) -> ModelMorphism:
    source = target = None
    comps: dict = {}
    for lineno, line in body:
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "source":
            source = models.get(rest)
            if source is None:
                raise ModelDataError(f"line {lineno}: unknown source model '{rest}'")
        elif key == "target":
            target = models.get(rest)
            if target is None:
                raise ModelDataError(f"line {lineno}: unknown target model '{rest}'")
        elif "=" in line:
            var, _, expr = line.partition("=")
            var = var.strip()
            if source is None or target is None:
                raise ModelDataError(f"line {lineno}: declare source/target first")
            if var not in target.variables:
                raise ModelDataError(f"line {lineno}: '{var}' is not a target variable")
            comps[var] = parse_poly(expr.strip(), source.variables)
        else:
            raise ModelDataError(f"line {lineno}: unknown morphism field '{key}'")
    if source is None or target is None:
        raise ModelDataError(f"morphism {name}: source/target missing")
    return ModelMorphism(name, source, target, comps)


def _parse_cover_block(name: str, body, models: dict) -> CoverPresentation:
    total = None
    pieces: list = []
    for lineno, line in body:
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "total":
            total = models.get(rest)
            if total is None:
                raise ModelDataError(f"line {lineno}: unknown total model '{rest}'")
        elif key == "piece":
            piece_name, _, gate = rest.partition(" where ")
            if total is None:
                raise ModelDataError(f"line {lineno}: declare total first")
            if not gate:
                raise ModelDataError(f"line {lineno}: piece needs 'where <gate>'")
            pieces.append((piece_name.strip(), parse_poly(gate.strip(), total.variables)))
        else:
            raise ModelDataError(f"line {lineno}: unknown cover field '{key}'")
    if total is None or not pieces:
        raise ModelDataError(f"cover {name}: needs a total model and pieces")
    return CoverPresentation(name, total, tuple(pieces))


def parse_model_text(text: str) -> ModelFile:
    models: dict = {}
    morphisms: dict = {}
    covers: dict = {}
    for kind, name, body in split_blocks(text):
        if kind == "model":
            models[name] = _parse_model_block(name, body)
        elif kind == "morphism":
            morphisms[name] = _parse_morphism_block(name, body, models)
        elif kind == "cover":
            covers[name] = _parse_cover_block(name, body, models)
        elif kind == "neron":
            continue  # weak Neron presentations are parsed by the measure module
        else:
            raise ModelDataError(f"unknown block kind '{kind}'")
    return ModelFile(models, morphisms, covers)


def load_model_file(path: str) -> ModelFile:
    for candidate in (path, path + ".model"):
        try:
            with open(candidate, "r", encoding="utf-8") as fh:
                return parse_model_text(fh.read())
        except FileNotFoundError:
            continue
    raise ModelDataError(f"no model file at '{path}' or '{path}.model'")


def product_model(x: AffineModel, y: AffineModel, name: str | None = None) -> AffineModel:
    """Disjoint-variable product; variable names must not collide."""
    overlap = set(x.variables) & set(y.variables)
    if overlap:
        raise ModelDataError(f"product variables collide: {sorted(overlap)}")
    variables = x.variables + y.variables
    pad_x = tuple(
        MultiPoly(
            ZZ,
            variables,
            {e + (0,) * len(y.variables): c for e, c in f.terms.items()},
        )
        for f in x.equations
    )
    pad_y = tuple(
        MultiPoly(
            ZZ,
            variables,
            {(0,) * len(x.variables) + e: c for e, c in f.terms.items()},
        )
        for f in y.equations
    )
    return AffineModel(
        name or f"{x.name}*{y.name}",
        variables,
        pad_x + pad_y,
        x.rel_dim + y.rel_dim,
        smooth=x.smooth and y.smooth,
    )


def lift_poly(f: MultiPoly, variables: tuple) -> MultiPoly:
    """Re-express f in a larger variable tuple containing f.vars."""
    idx = [variables.index(v) for v in f.vars]
    out: dict = {}
    for e, c in f.terms.items():
        ne = [0] * len(variables)
        for pos, k in zip(idx, e):
            ne[pos] = k
        out[tuple(ne)] = c
    return MultiPoly(f.ring, variables, out)

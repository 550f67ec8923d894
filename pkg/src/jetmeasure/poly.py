"""Multivariate polynomials with exact coefficients, plus the expression parser.

A polynomial is a map from exponent vectors to nonzero coefficients of its
ring.  Printing uses graded lexicographic term order so that printed forms are
canonical and re-parse to the identical term map.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ModelDataError, PolyParseError
from .rings import ZZ, CoeffRing, IntegerRing, SeriesRing

__all__ = [
    "MultiPoly",
    "parse_poly",
    "substitute_series",
    "jacobian_minors",
]


def _grlex_key(exps: tuple) -> tuple:
    return (sum(exps), exps)


@dataclass(frozen=True)
class MultiPoly:
    """Polynomial over ``ring`` in the ordered variables ``vars``.

    ``terms`` maps exponent tuples to coefficients; zero coefficients are
    never stored, so equality of term maps is equality of polynomials.
    """

    ring: CoeffRing
    vars: tuple
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        for exps in self.terms:
            if len(exps) != len(self.vars):
                raise ModelDataError(
                    f"exponent vector {exps} does not match variables {self.vars}"
                )

    @staticmethod
    def make(ring: CoeffRing, vars: tuple, raw_terms: dict) -> "MultiPoly":
        terms = {e: c for e, c in raw_terms.items() if not ring.is_zero(c)}
        return MultiPoly(ring, tuple(vars), terms)

    @staticmethod
    def zero(ring: CoeffRing, vars) -> "MultiPoly":
        return MultiPoly(ring, tuple(vars), {})

    @staticmethod
    def const(ring: CoeffRing, vars, c) -> "MultiPoly":
        return MultiPoly.make(ring, tuple(vars), {(0,) * len(vars): c})

    @staticmethod
    def var(ring: CoeffRing, vars, name: str) -> "MultiPoly":
        vars = tuple(vars)
        i = vars.index(name)
        e = tuple(1 if j == i else 0 for j in range(len(vars)))
        return MultiPoly(ring, vars, {e: ring.one()})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._compat(other)
        ring = self.ring
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = ring.add(out.get(e, ring.zero()), c)
            if ring.is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
        return MultiPoly(ring, self.vars, out)

    def __neg__(self) -> "MultiPoly":
        ring = self.ring
        return MultiPoly(ring, self.vars, {e: ring.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._compat(other)
        ring = self.ring
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = ring.add(out.get(e, ring.zero()), ring.mul(c1, c2))
                if ring.is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return MultiPoly(ring, self.vars, out)

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ModelDataError("negative polynomial powers are not defined")
        result = MultiPoly.const(self.ring, self.vars, self.ring.one())
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c) -> "MultiPoly":
        ring = self.ring
        return MultiPoly.make(ring, self.vars, {e: ring.mul(c, v) for e, v in self.terms.items()})

    def _compat(self, other: "MultiPoly"):
        if self.vars != other.vars or self.ring != other.ring:
            raise ModelDataError("polynomials live in different rings")

    def derivative(self, var: str) -> "MultiPoly":
        ring = self.ring
        i = self.vars.index(var)
        out: dict = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            ne = tuple(x - 1 if j == i else x for j, x in enumerate(e))
            coeff = ring.mul(ring.from_int(e[i]), c)
            s = ring.add(out.get(ne, ring.zero()), coeff)
            if ring.is_zero(s):
                out.pop(ne, None)
            else:
                out[ne] = s
        return MultiPoly(ring, self.vars, out)

    def map_to(self, target: CoeffRing) -> "MultiPoly":
        """Push integer coefficients into ``target`` through Z -> target."""
        if not isinstance(self.ring, IntegerRing):
            raise ModelDataError("coefficient transport is only defined from ZZ")
        out: dict = {}
        for e, c in self.terms.items():
            v = target.from_int(c)
            if not target.is_zero(v):
                out[e] = v
        return MultiPoly(target, self.vars, out)

    def evaluate(self, target: CoeffRing, values: tuple):
        """Value of the polynomial at a point with coordinates in ``target``.

        Coefficients are transported through from_int when the polynomial is
        over ZZ; otherwise the rings must agree.
        """
        if len(values) != len(self.vars):
            raise ModelDataError("wrong number of coordinates")
        over_z = isinstance(self.ring, IntegerRing)
        if not over_z and self.ring != target:
            raise ModelDataError(f"cannot evaluate {self.ring!r}-polynomial in {target!r}")
        acc = target.zero()
        pow_cache: dict = {}
        for e, c in self.terms.items():
            term = target.from_int(c) if over_z else c
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    p = pow_cache.get(key)
                    if p is None:
                        p = target.pow(values[i], k)
                        pow_cache[key] = p
                    term = target.mul(term, p)
            acc = target.add(acc, term)
        return acc

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: _grlex_key(item[0]), reverse=True)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        chunks = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (v if k == 1 else f"{v}^{k}") for v, k in zip(self.vars, e) if k
            )
            cs = self.ring.repr_elem(c)
            neg = cs.startswith("-")
            mag = cs[1:] if neg else cs
            if mono:
                body = mono if mag == "1" else f"{mag}*{mono}"
            else:
                body = mag
            if not chunks:
                chunks.append(f"-{body}" if neg else body)
            else:
                chunks.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(chunks)

    def __str__(self):
        return self.to_text()


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_int(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise PolyParseError("expected an integer", start)
        return int(self.text[start:self.pos])

    def take_name(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        if self.pos == start:
            raise PolyParseError("expected a name", start)
        return self.text[start:self.pos]

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise PolyParseError(f"expected '{ch}'", self.pos)
        self.pos += 1


def parse_poly(text: str, vars, ring: CoeffRing = ZZ) -> MultiPoly:
    """Parse an expression over +, -, *, ^, integer literals and variables.

    The printed form of any polynomial parses back to the identical term map.
    """
    vars = tuple(vars)
    toks = _Tokens(text)
    result = _parse_sum(toks, vars, ring)
    toks.skip_ws()
    if toks.pos != len(text):
        raise PolyParseError("trailing input", toks.pos)
    return result


def _parse_sum(toks: _Tokens, vars, ring) -> MultiPoly:
    acc = _parse_product(toks, vars, ring)
    while True:
        ch = toks.peek()
        if ch == "+":
            toks.pos += 1
            acc = acc + _parse_product(toks, vars, ring)
        elif ch == "-":
            toks.pos += 1
            acc = acc - _parse_product(toks, vars, ring)
        else:
            return acc


def _parse_product(toks: _Tokens, vars, ring) -> MultiPoly:
    acc = _parse_power(toks, vars, ring)
    while toks.peek() == "*":
        toks.pos += 1
        acc = acc * _parse_power(toks, vars, ring)
    return acc


def _parse_power(toks: _Tokens, vars, ring) -> MultiPoly:
    base = _parse_atom(toks, vars, ring)
    if toks.peek() == "^":
        toks.pos += 1
        exp = toks.take_int()
        return base ** exp
    return base


def _parse_atom(toks: _Tokens, vars, ring) -> MultiPoly:
    ch = toks.peek()
    if ch == "(":
        toks.pos += 1
        inner = _parse_sum(toks, vars, ring)
        toks.expect(")")
        return inner
    if ch == "-":
        toks.pos += 1
        return -_parse_power(toks, vars, ring)
    if ch.isdigit():
        return MultiPoly.const(ring, vars, ring.from_int(toks.take_int()))
    if ch.isalpha() or ch == "_":
        pos = toks.pos
        name = toks.take_name()
        if name not in vars:
            raise PolyParseError(f"unknown variable '{name}'", pos)
        return MultiPoly.var(ring, vars, name)
    raise PolyParseError("expected a term", toks.pos)


def substitute_series(f: MultiPoly, assignment: dict, series_ring: SeriesRing) -> tuple:
    """Evaluate an integer polynomial on truncated series, reduced mod t^{n+1}.

    ``assignment`` maps every variable of f to an element of ``series_ring``;
    all series must share the ring's level.
    """
    values = []
    for v in f.vars:
        s = assignment[v]
        series_ring.check(s)
        values.append(s)
    return f.evaluate(series_ring, tuple(values))


def jacobian_minors(fs, vars, size: int) -> list:
    """All size x size minors of the Jacobian matrix d f_i / d x_j.

    Rows are indexed by the polynomials, columns by the variables; minors are
    listed by lexicographic row subset, then lexicographic column subset.  The
    empty minor (size 0) is the constant 1, so a system with no equations has
    an everywhere-nonvanishing minor.
    """
    fs = list(fs)
    vars = tuple(vars)
    if size > min(len(fs), len(vars)) and size > 0:
        raise ModelDataError(
            f"minor size {size} exceeds Jacobian dimensions {len(fs)}x{len(vars)}"
        )
    if not fs and size == 0:
        return [MultiPoly.const(ZZ, vars, 1)]
    jac = [[f.derivative(v) for v in vars] for f in fs]
    out = []
    for rows in itertools.combinations(range(len(fs)), size):
        for cols in itertools.combinations(range(len(vars)), size):
            out.append(_determinant([[jac[r][c] for c in cols] for r in rows], vars))
    return out


def _determinant(matrix, vars) -> MultiPoly:
    n = len(matrix)
    if n == 0:
        return MultiPoly.const(ZZ, vars, 1)
    if n == 1:
        return matrix[0][0]
    # cofactor expansion along the first row
    acc = MultiPoly.zero(matrix[0][0].ring, vars)
    for j in range(n):
        entry = matrix[0][j]
        if entry.is_zero():
            continue
        sub = [[row[c] for c in range(n) if c != j] for row in matrix[1:]]
        cof = entry * _determinant(sub, vars)
        acc = acc + (cof if j % 2 == 0 else -cof)
    return acc

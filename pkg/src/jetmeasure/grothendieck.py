"""The computable subring of the localized Grothendieck ring of varieties.

Values are Z-linear combinations of atom monomials (formal products of named
variety classes) weighted by Laurent polynomials in the affine-line class L.
The ring carries the virtual-dimension filtration, the associated
non-archimedean norm ||a|| = 2^{virtual_dim a}, point-count specialization at
prime powers, and reduction modulo (L - 1).

Atom relations are not discovered: a class expressible in L must not be
declared as an atom.  That is a modeling rule, not an enforced invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import (
    ContractViolationError,
    ModelDataError,
    PolyParseError,
    UnspecializableClassError,
)
from .rings import rational_pow

__all__ = [
    "Laurent",
    "VarietyAtom",
    "VirtualClass",
    "CompletedClass",
    "L",
    "one_class",
    "zero_class",
    "atom_class",
    "virtual_dim",
    "norm",
    "in_filtration",
    "specialize_count",
    "mod_L_minus_1",
    "sum_to_tolerance",
    "residue_mod_q_minus_1",
    "parse_class",
]


class Laurent:
    """Laurent polynomial in L with integer coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        self.coeffs = {d: c for d, c in (coeffs or {}).items() if c != 0}

    @staticmethod
    def monomial(c: int, degree: int = 0) -> "Laurent":
        return Laurent({degree: c})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Laurent") -> "Laurent":
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            out[d] = out.get(d, 0) + c
        return Laurent(out)

    def __neg__(self) -> "Laurent":
        return Laurent({d: -c for d, c in self.coeffs.items()})

    def __sub__(self, other: "Laurent") -> "Laurent":
        return self + (-other)

    def __mul__(self, other: "Laurent") -> "Laurent":
        out: dict = {}
        for d1, c1 in self.coeffs.items():
            for d2, c2 in other.coeffs.items():
                out[d1 + d2] = out.get(d1 + d2, 0) + c1 * c2
        return Laurent(out)

    def __eq__(self, other):
        return isinstance(other, Laurent) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def top_degree(self) -> Optional[int]:
        return max(self.coeffs) if self.coeffs else None

    def at_one(self) -> int:
        return sum(self.coeffs.values())

    def at_rational(self, q: int) -> Fraction:
        return sum((c * rational_pow(q, d) for d, c in self.coeffs.items()), Fraction(0))

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        chunks = []
        for d in sorted(self.coeffs, reverse=True):
            c = self.coeffs[d]
            if d == 0:
                body = str(abs(c))
            else:
                lpart = "L" if d == 1 else f"L^{d}"
                body = lpart if abs(c) == 1 else f"{abs(c)}*{lpart}"
            if not chunks:
                chunks.append(f"-{body}" if c < 0 else body)
            else:
                chunks.append(f"- {body}" if c < 0 else f"+ {body}")
        return " ".join(chunks)

    def __repr__(self):
        return f"Laurent({self.to_text()})"


@dataclass(frozen=True)
class VarietyAtom:
    """A named variety class with declared dimension.

    ``counter`` (optional) returns the exact number of F_q-points for a prime
    power q; ``euler`` (optional) is the compactly-supported Euler number.
    Identity is (name, dim): the counting rule annotates, it does not
    distinguish.
    """

    name: str
    dim: int
    counter: Optional[Callable[[int], int]] = None
    euler: Optional[int] = None

    def __post_init__(self):
        if self.dim < 0:
            raise ModelDataError(f"atom [{self.name}] has negative dimension")

    def __eq__(self, other):
        return (
            isinstance(other, VarietyAtom)
            and self.name == other.name
            and self.dim == other.dim
        )

    def __hash__(self):
        return hash((self.name, self.dim))

    def __lt__(self, other):
        return (self.name, self.dim) < (other.name, other.dim)


class VirtualClass:
    """Map from sorted atom monomials to Laurent weights, kept normalized."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {}
        for atoms, w in (terms or {}).items():
            if not w.is_zero():
                self.terms[tuple(sorted(atoms))] = w

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "VirtualClass") -> "VirtualClass":
        out = dict(self.terms)
        for atoms, w in other.terms.items():
            s = out.get(atoms, Laurent()) + w
            if s.is_zero():
                out.pop(atoms, None)
            else:
                out[atoms] = s
        return VirtualClass(out)

    def __neg__(self) -> "VirtualClass":
        return VirtualClass({a: -w for a, w in self.terms.items()})

    def __sub__(self, other: "VirtualClass") -> "VirtualClass":
        return self + (-other)

    def __mul__(self, other: "VirtualClass") -> "VirtualClass":
        # the product of atom monomials is the class of the product variety
        out: dict = {}
        for a1, w1 in self.terms.items():
            for a2, w2 in other.terms.items():
                atoms = tuple(sorted(a1 + a2))
                s = out.get(atoms, Laurent()) + w1 * w2
                if s.is_zero():
                    out.pop(atoms, None)
                else:
                    out[atoms] = s
        return VirtualClass(out)

    def times_L(self, degree: int) -> "VirtualClass":
        shift = Laurent.monomial(1, degree)
        return VirtualClass({a: w * shift for a, w in self.terms.items()})

    def scaled(self, k: int) -> "VirtualClass":
        sc = Laurent.monomial(k, 0)
        return VirtualClass({a: w * sc for a, w in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, VirtualClass) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda kv: kv[0])))

    def sorted_terms(self):
        def key(item):
            atoms, w = item
            dim = sum(a.dim for a in atoms) + (w.top_degree() or 0)
            return (-dim, tuple(a.name for a in atoms))

        return sorted(self.terms.items(), key=key)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        chunks = []
        for atoms, w in self.sorted_terms():
            atom_txt = "*".join(f"[{a.name}]" for a in atoms)
            wtxt = w.to_text()
            neg = False
            if len(w.coeffs) == 1:
                ((d, c),) = w.coeffs.items()
                neg = c < 0
                mag = Laurent.monomial(abs(c), d).to_text()
                if atom_txt:
                    body = atom_txt if mag == "1" else f"{mag}*{atom_txt}"
                else:
                    body = mag
            elif atom_txt:
                body = f"({wtxt})*{atom_txt}"
            elif not chunks:
                body = wtxt
            else:
                body = f"({wtxt})"
            if not chunks:
                chunks.append(f"-{body}" if neg else body)
            else:
                chunks.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(chunks)

    def __repr__(self):
        return f"VirtualClass({self.to_text()})"


def zero_class() -> VirtualClass:
    return VirtualClass()


def one_class() -> VirtualClass:
    return VirtualClass({(): Laurent.monomial(1, 0)})


def L(degree: int = 1) -> VirtualClass:
    """The class of affine space of the given dimension, L^degree."""
    return VirtualClass({(): Laurent.monomial(1, degree)})


def int_class(k: int) -> VirtualClass:
    return VirtualClass({(): Laurent.monomial(k, 0)})


def atom_class(atom: VarietyAtom) -> VirtualClass:
    return VirtualClass({(atom,): Laurent.monomial(1, 0)})


def virtual_dim(a: VirtualClass):
    """Max over terms of (sum of atom dims + top L-degree); None for zero."""
    if a.is_zero():
        return None
    return max(sum(at.dim for at in atoms) + w.top_degree() for atoms, w in a.terms.items())


def norm(a: VirtualClass) -> Fraction:
    """||a|| = 2^{virtual_dim a}, with ||0|| = 0."""
    d = virtual_dim(a)
    if d is None:
        return Fraction(0)
    return rational_pow(2, d)


def in_filtration(a: VirtualClass, m: int) -> bool:
    d = virtual_dim(a)
    return d is None or d <= -m


def specialize_count(a: VirtualClass, q: int) -> Fraction:
    """Point counting: L goes to q, each atom to its counter value at q."""
    total = Fraction(0)
    for atoms, w in a.terms.items():
        factor = Fraction(1)
        for at in atoms:
            if at.counter is None:
                raise UnspecializableClassError(at.name)
            factor *= at.counter(q)
        total += factor * w.at_rational(q)
    return total


def mod_L_minus_1(a: VirtualClass) -> VirtualClass:
    """Normal form in the quotient by (L - 1): evaluate every weight at L = 1.

    Distinct atoms stay distinct in the quotient representation; equality
    there is syntactic on this normal form, with point-count residues as the
    semantic fallback.
    """
    out: dict = {}
    for atoms, w in a.terms.items():
        c = w.at_one()
        if c:
            out[atoms] = Laurent.monomial(c, 0)
    return VirtualClass(out)


@dataclass(frozen=True)
class CompletedClass:
    """A partial sum together with the filtration level bounding its tail.

    The represented completed value differs from ``partial`` by an element of
    F^{tail_level}.
    """

    partial: VirtualClass
    tail_level: int


def sum_to_tolerance(terms, m: int, tail=()) -> CompletedClass:
    """Sum the consumed prefix of a convergent series and certify the cutoff.

    ``terms`` are consumed into the partial sum.  ``tail`` holds whatever
    further terms the caller can exhibit beyond the declared cutoff; each must
    lie in F^m, otherwise the declared tail level is a lie and a
    ContractViolationError is raised.  The caller remains responsible for the
    terms it cannot exhibit (dimension bounds supply that guarantee upstream).
    """
    partial = zero_class()
    for t in terms:
        partial = partial + t
    for t in tail:
        d = virtual_dim(t)
        if d is not None and d > -m:
            raise ContractViolationError(
                f"tail term of virtual dimension {d} exceeds -{m}; "
                f"it cannot be tail-bounded at level {m}"
            )
    return CompletedClass(partial, m)


def residue_mod_q_minus_1(value: Fraction, q: int) -> int:
    """Reduce an element of Z[1/q] modulo (q - 1), sending q^{-1} to 1."""
    den = value.denominator
    while den % q == 0:
        den //= q
    if den != 1:
        raise ModelDataError(f"{value} is not in Z[1/{q}]")
    if q == 2:
        return 0
    return value.numerator % (q - 1)


# --- canonical text form -------------------------------------------------
#
# Grammar:  sum of products of factors; factors are integer literals,
# L (optionally with ^exponent, exponent possibly negative), bracketed atom
# names, or parenthesized sums.  Example: "(L^2 - 1)*[E] + 3*L^-1".


class _ClassTokens:
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
        sign = 1
        if self.peek() == "-":
            sign = -1
            self.pos += 1
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise PolyParseError("expected an integer", start)
        return sign * int(self.text[start:self.pos])


def parse_class(text: str, atoms: dict | None = None) -> VirtualClass:
    """Parse the canonical text form; ``atoms`` maps names to declared atoms."""
    toks = _ClassTokens(text)
    out = _class_sum(toks, atoms or {})
    toks.skip_ws()
    if toks.pos != len(text):
        raise PolyParseError("trailing input", toks.pos)
    return out


def _class_sum(toks: _ClassTokens, atoms: dict) -> VirtualClass:
    acc = _class_product(toks, atoms)
    while True:
        ch = toks.peek()
        if ch == "+":
            toks.pos += 1
            acc = acc + _class_product(toks, atoms)
        elif ch == "-":
            toks.pos += 1
            acc = acc - _class_product(toks, atoms)
        else:
            return acc


def _class_product(toks: _ClassTokens, atoms: dict) -> VirtualClass:
    acc = _class_factor(toks, atoms)
    while toks.peek() == "*":
        toks.pos += 1
        acc = acc * _class_factor(toks, atoms)
    return acc


def _class_factor(toks: _ClassTokens, atoms: dict) -> VirtualClass:
    ch = toks.peek()
    if ch == "(":
        toks.pos += 1
        inner = _class_sum(toks, atoms)
        toks.skip_ws()
        if toks.peek() != ")":
            raise PolyParseError("expected ')'", toks.pos)
        toks.pos += 1
        return inner
    if ch == "-":
        toks.pos += 1
        return -_class_factor(toks, atoms)
    if ch == "[":
        start = toks.pos
        toks.pos += 1
        end = toks.text.find("]", toks.pos)
        if end < 0:
            raise PolyParseError("unterminated atom bracket", start)
        name = toks.text[toks.pos:end].strip()
        toks.pos = end + 1
        if name not in atoms:
            raise PolyParseError(f"unknown atom '{name}'", start)
        return atom_class(atoms[name])
    if ch == "L":
        toks.pos += 1
        deg = 1
        if toks.peek() == "^":
            toks.pos += 1
            deg = toks.take_int()
        return L(deg)
    if ch.isdigit():
        return int_class(toks.take_int())
    raise PolyParseError("expected a class factor", toks.pos)

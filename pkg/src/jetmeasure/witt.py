"""p-typical Witt vectors of finite length.

The addition and multiplication laws are not hard-coded: for each (p, length)
the structure polynomials are derived once by solving the ghost-component
equations over the rationals, asserting integrality of every coefficient, and
cached.  The ghost map

    w_j(a) = sum_{i <= j} p^i a_i^{p^{j-i}}

linearizes the arithmetic over Z, which gives an independent oracle for the
laws; the identification W_m(F_p) = Z/p^m through Teichmueller digits grounds
the mixed-characteristic jet rings.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import ModelDataError
from .poly import MultiPoly
from .rings import ZZ, CoeffRing, IntegerRing, PrimeField, is_prime

__all__ = [
    "WittVector",
    "ghost",
    "ghost_polys",
    "structure_polys",
    "witt_add",
    "witt_mul",
    "witt_zero",
    "witt_one",
    "witt_to_residue",
    "residue_to_witt",
    "teichmuller",
]


def _vars_ab(length: int) -> tuple:
    return tuple(f"a{i}" for i in range(length)) + tuple(f"b{i}" for i in range(length))


def ghost_polys(p: int, length: int, names) -> list:
    """Ghost components as integer polynomials in the given component names."""
    all_vars = tuple(names)
    out = []
    for j in range(length):
        acc = MultiPoly.zero(ZZ, all_vars)
        for i in range(j + 1):
            xi = MultiPoly.var(ZZ, all_vars, names[i])
            acc = acc + (xi ** (p ** (j - i))).scale(p ** i)
        out.append(acc)
    return out


def _exact_divide(f: MultiPoly, k: int) -> MultiPoly:
    out = {}
    for e, c in f.terms.items():
        if c % k != 0:
            raise ModelDataError(
                f"structure polynomial failed integrality: coefficient {c} not divisible by {k}"
            )
        out[e] = c // k
    return MultiPoly(ZZ, f.vars, out)


@lru_cache(maxsize=None)
def structure_polys(p: int, length: int) -> tuple:
    """(sum laws, product laws) for W_length, derived from ghost equations.

    The j-th law S_j satisfies w_j(S_0..S_j) = w_j(a) + w_j(b) (resp. the
    product of ghosts); solving level by level gives

        p^j S_j = w_j(a) # w_j(b) - sum_{i<j} p^i S_i^{p^{j-i}},

    and the division must be exact, which is asserted.
    """
    if not is_prime(p):
        raise ModelDataError(f"{p} is not prime")
    if length < 1:
        raise ModelDataError("length must be >= 1")
    names = _vars_ab(length)
    b_names = names[length:]
    ghosts_a = ghost_polys(p, length, names)  # uses a0..: the a-part ghosts
    ghosts_b = []
    for j in range(length):
        acc = MultiPoly.zero(ZZ, names)
        for i in range(j + 1):
            xi = MultiPoly.var(ZZ, names, b_names[i])
            acc = acc + (xi ** (p ** (j - i))).scale(p ** i)
        ghosts_b.append(acc)
    sums: list = []
    prods: list = []
    for j in range(length):
        target_sum = ghosts_a[j] + ghosts_b[j]
        target_prod = ghosts_a[j] * ghosts_b[j]
        acc_sum = MultiPoly.zero(ZZ, names)
        acc_prod = MultiPoly.zero(ZZ, names)
        for i in range(j):
            acc_sum = acc_sum + (sums[i] ** (p ** (j - i))).scale(p ** i)
            acc_prod = acc_prod + (prods[i] ** (p ** (j - i))).scale(p ** i)
        sums.append(_exact_divide(target_sum - acc_sum, p ** j))
        prods.append(_exact_divide(target_prod - acc_prod, p ** j))
    return tuple(sums), tuple(prods)


@dataclass(frozen=True)
class WittVector:
    """Finite-length Witt vector with components in a common ring.

    Components live in a finite field of characteristic p for the ring-scheme
    reading, or in Z when exercising the ghost oracle.
    """

    p: int
    comps: tuple
    ring: CoeffRing = ZZ

    def __post_init__(self):
        if len(self.comps) < 1:
            raise ModelDataError("Witt vectors need length >= 1")
        if not is_prime(self.p):
            raise ModelDataError(f"{self.p} is not prime")
        if self.ring.char not in (0, self.p):
            raise ModelDataError(
                f"component ring characteristic {self.ring.char} incompatible with p={self.p}"
            )

    @property
    def length(self) -> int:
        return len(self.comps)

    def _compat(self, other: "WittVector"):
        if (self.p, self.length, self.ring) != (other.p, other.length, other.ring):
            raise ModelDataError("mismatched Witt vector parameters")


def ghost(w: WittVector) -> tuple:
    """Ghost components; defined for integral components only."""
    if not isinstance(w.ring, IntegerRing):
        raise ModelDataError("ghost components require integral components")
    out = []
    for j in range(w.length):
        wj = sum(w.p ** i * w.comps[i] ** (w.p ** (j - i)) for i in range(j + 1))
        out.append(wj)
    return tuple(out)


def _eval_laws(laws, w1: WittVector, w2: WittVector) -> WittVector:
    ring = w1.ring
    values = w1.comps + w2.comps
    comps = tuple(f.evaluate(ring, values) for f in laws)
    return WittVector(w1.p, comps, ring)


def witt_add(a: WittVector, b: WittVector) -> WittVector:
    a._compat(b)
    sums, _ = structure_polys(a.p, a.length)
    return _eval_laws(sums, a, b)


def witt_mul(a: WittVector, b: WittVector) -> WittVector:
    a._compat(b)
    _, prods = structure_polys(a.p, a.length)
    return _eval_laws(prods, a, b)


def witt_zero(p: int, length: int, ring: CoeffRing = ZZ) -> WittVector:
    return WittVector(p, (ring.zero(),) * length, ring)


def witt_one(p: int, length: int, ring: CoeffRing = ZZ) -> WittVector:
    return WittVector(p, (ring.one(),) + (ring.zero(),) * (length - 1), ring)


def teichmuller(a: int, p: int, precision: int) -> int:
    """The multiplicative lift of a mod p into Z/p^precision.

    Iterating x -> x^p gains one p-adic digit of stability per step, so
    ``precision`` steps reach the fixed point.
    """
    mod = p ** precision
    x = a % mod
    for _ in range(precision):
        x = pow(x, p, mod)
    return x


def witt_to_residue(w: WittVector) -> int:
    """The ring identification W_m(F_p) = Z/p^m by Teichmueller digits.

    Components must lie in the prime field (Frobenius is the identity there,
    so the digit twists collapse); the value is sum_i p^i [a_i] mod p^m,
    which matches the ghost components of any integral lift.
    """
    if not isinstance(w.ring, PrimeField) or w.ring.p != w.p:
        raise ModelDataError("residue identification requires components in F_p")
    p = w.p
    m = w.length
    mod = p ** m
    total = 0
    for i, a in enumerate(w.comps):
        total = (total + p ** i * teichmuller(a, p, m)) % mod
    return total


def residue_to_witt(r: int, p: int, length: int) -> WittVector:
    """Inverse of the residue identification."""
    field = PrimeField(p)
    t = r % (p ** length)
    comps = []
    for i in range(length):
        a = t % p
        comps.append(a)
        t = (t - teichmuller(a, p, length - i)) // p
    return WittVector(p, tuple(comps), field)

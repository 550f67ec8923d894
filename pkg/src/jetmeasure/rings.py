"""Exact coefficient rings.

Every ring here is a small immutable descriptor object; elements are plain
Python values (ints, or tuples of ints) so they hash and sort cheaply inside
the jet enumerators.  Supported kinds:

* ``IntegerRing``                 -- arbitrary-precision integers,
* ``PrimeField(p)``               -- integers mod a prime,
* ``ExtensionField(p, modulus)``  -- F_{p^m} given an irreducible modulus,
* ``ResidueRing(p, e)``           -- integers mod p^e,
* ``SeriesRing(base, n)``         -- truncated series base[t]/t^{n+1} over a
                                     finite field.

All operations are pure; descriptors can be shared freely across threads.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import LevelMismatchError, ModelDataError

__all__ = [
    "CoeffRing",
    "IntegerRing",
    "PrimeField",
    "ExtensionField",
    "ResidueRing",
    "SeriesRing",
    "ZZ",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class CoeffRing:
    """Common interface for coefficient rings; subclasses fill in the ops."""

    is_field = False
    char = 0
    size: int | None = None  # None means infinite

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def from_int(self, k: int):
        """Image of the integer k under the canonical map Z -> ring."""
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def is_zero(self, a) -> bool:
        return a == self.zero()

    def inv(self, a):
        raise NotImplementedError(f"no inverses in {self}")

    def pow(self, a, k: int):
        if k < 0:
            return self.pow(self.inv(a), -k)
        result = self.one()
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def elements(self):
        """All elements in a fixed sorted order (finite rings only)."""
        raise NotImplementedError(f"{self} is not finite")

    def repr_elem(self, a) -> str:
        return str(a)

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.__dict__.items()))))


class IntegerRing(CoeffRing):
    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, k):
        return k

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def __repr__(self):
        return "ZZ"


ZZ = IntegerRing()


class PrimeField(CoeffRing):
    is_field = True

    def __init__(self, p: int):
        if not is_prime(p):
            raise ModelDataError(f"PrimeField characteristic {p} is not prime")
        self.p = p
        self.char = p
        self.size = p

    def zero(self):
        return 0

    def one(self):
        return 1 % self.p

    def from_int(self, k):
        return k % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return pow(a, self.p - 2, self.p)

    def elements(self):
        return range(self.p)

    def __repr__(self):
        return f"GF({self.p})"


def _fp_polydivmod(num: tuple, den: tuple, p: int) -> tuple[tuple, tuple]:
    """Divide dense F_p[x] coefficient tuples (low degree first)."""
    num = list(num)
    dend = len(den) - 1
    while den[dend] == 0:
        dend -= 1
    lead_inv = pow(den[dend], p - 2, p)
    quot = [0] * max(len(num) - dend, 1)
    for i in range(len(num) - 1 - dend, -1, -1):
        c = (num[i + dend] * lead_inv) % p
        if c:
            quot[i] = c
            for j in range(dend + 1):
                num[i + j] = (num[i + j] - c * den[j]) % p
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return tuple(quot), tuple(num)


def _fp_irreducible(modulus: tuple, p: int) -> bool:
    """Trial factorization: no monic divisor of degree 1..deg/2."""
    deg = len(modulus) - 1
    for d in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            div = tail + (1,)
            _, rem = _fp_polydivmod(modulus, div, p)
            if all(c == 0 for c in rem):
                return False
    return True


class ExtensionField(CoeffRing):
    """F_{p^m} presented by a supplied irreducible modulus over F_p.

    Elements are length-m coefficient tuples (low degree first) of the
    residue class representative; the generator is ``g``.
    """

    is_field = True

    def __init__(self, p: int, modulus: tuple):
        if not is_prime(p):
            raise ModelDataError(f"ExtensionField characteristic {p} is not prime")
        modulus = tuple(c % p for c in modulus)
        if len(modulus) < 3 or modulus[-1] != 1:
            raise ModelDataError("modulus must be monic of degree >= 2")
        if not _fp_irreducible(modulus, p):
            raise ModelDataError(f"modulus {modulus} is reducible over F_{p}")
        self.p = p
        self.modulus = modulus
        self.deg = len(modulus) - 1
        self.char = p
        self.size = p ** self.deg

    def zero(self):
        return (0,) * self.deg

    def one(self):
        return (1,) + (0,) * (self.deg - 1)

    def from_int(self, k):
        return (k % self.p,) + (0,) * (self.deg - 1)

    def add(self, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.p
        return tuple((-x) % p for x in a)

    def mul(self, a, b):
        p = self.p
        m = self.deg
        prod = [0] * (2 * m - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] = (prod[i + j] + x * y) % p
        # reduce by the monic modulus
        for i in range(len(prod) - 1, m - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j in range(m):
                    prod[i - m + j] = (prod[i - m + j] - c * self.modulus[j]) % p
        return tuple(prod[:m])

    def inv(self, a):
        if all(c == 0 for c in a):
            raise ZeroDivisionError("0 has no inverse")
        # extended Euclid in F_p[x] against the modulus
        p = self.p
        r0, r1 = self.modulus, tuple(a) + (0,)
        s0, s1 = (0,), (1,)
        while any(c != 0 for c in r1):
            q, r = _fp_polydivmod(r0, r1, p)
            s = _poly_sub_mul(s0, q, s1, p)
            r0, s0 = r1, s1
            r1, s1 = r, s
        # r0 is the gcd, a nonzero constant
        c_inv = pow(r0[0], p - 2, p)
        out = [0] * self.deg
        for i, c in enumerate(s0):
            if i < self.deg:
                out[i] = (c * c_inv) % p
        return tuple(out)

    def elements(self):
        for tail in itertools.product(range(self.p), repeat=self.deg):
            yield tail

    def repr_elem(self, a):
        parts = []
        for i, c in enumerate(a):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*g" if c != 1 else "g")
            else:
                parts.append(f"{c}*g^{i}" if c != 1 else f"g^{i}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"GF({self.p}^{self.deg})"


def _poly_sub_mul(s0: tuple, q: tuple, s1: tuple, p: int) -> tuple:
    """s0 - q*s1 over F_p[x], dense tuples."""
    out = [0] * max(len(s0), len(q) + len(s1) - 1, 1)
    for i, c in enumerate(s0):
        out[i] = c % p
    for i, a in enumerate(q):
        if a:
            for j, b in enumerate(s1):
                if b:
                    out[i + j] = (out[i + j] - a * b) % p
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


class ResidueRing(CoeffRing):
    """Z/p^e for a prime p and exponent e >= 1."""

    def __init__(self, p: int, exponent: int):
        if not is_prime(p):
            raise ModelDataError(f"ResidueRing characteristic base {p} is not prime")
        if exponent < 1:
            raise ModelDataError("ResidueRing exponent must be >= 1")
        self.p = p
        self.exponent = exponent
        self.modulus = p ** exponent
        self.char = self.modulus
        self.size = self.modulus

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, k):
        return k % self.modulus

    def add(self, a, b):
        return (a + b) % self.modulus

    def neg(self, a):
        return (-a) % self.modulus

    def mul(self, a, b):
        return (a * b) % self.modulus

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError(f"{a} is not a unit mod {self.p}^{self.exponent}")
        return pow(a, -1, self.modulus)

    def elements(self):
        return range(self.modulus)

    def __repr__(self):
        return f"Z/{self.p}^{self.exponent}"


class SeriesRing(CoeffRing):
    """Truncated series base[t]/t^{n+1}; elements are length-(n+1) tuples."""

    def __init__(self, base: CoeffRing, level: int):
        if not base.is_field:
            raise ModelDataError("truncated series require a field of coefficients")
        if level < 0:
            raise ModelDataError("series level must be >= 0")
        self.base = base
        self.level = level
        self.char = base.char
        self.size = None if base.size is None else base.size ** (level + 1)

    def zero(self):
        return (self.base.zero(),) * (self.level + 1)

    def one(self):
        return (self.base.one(),) + (self.base.zero(),) * self.level

    def from_int(self, k):
        return (self.base.from_int(k),) + (self.base.zero(),) * self.level

    def check(self, a):
        if len(a) != self.level + 1:
            raise LevelMismatchError(
                f"series of length {len(a)} in ring of level {self.level}"
            )

    def add(self, a, b):
        base = self.base
        return tuple(base.add(x, y) for x, y in zip(a, b))

    def neg(self, a):
        base = self.base
        return tuple(base.neg(x) for x in a)

    def mul(self, a, b):
        base = self.base
        n = self.level
        out = [base.zero()] * (n + 1)
        for i, x in enumerate(a):
            if base.is_zero(x):
                continue
            for j in range(n + 1 - i):
                y = b[j]
                if not base.is_zero(y):
                    out[i + j] = base.add(out[i + j], base.mul(x, y))
        return tuple(out)

    def inv(self, a):
        base = self.base
        if base.is_zero(a[0]):
            raise ZeroDivisionError("series with vanishing constant term has no inverse")
        c0 = base.inv(a[0])
        out = [c0] + [base.zero()] * self.level
        for k in range(1, self.level + 1):
            acc = base.zero()
            for i in range(1, k + 1):
                acc = base.add(acc, base.mul(a[i], out[k - i]))
            out[k] = base.neg(base.mul(c0, acc))
        return tuple(out)

    def order(self, a) -> int | None:
        """t-adic order, or None when a vanishes to the truncation level."""
        for i, c in enumerate(a):
            if not self.base.is_zero(c):
                return i
        return None

    def truncate(self, a, m: int):
        return a[: m + 1]

    def elements(self):
        for combo in itertools.product(list(self.base.elements()), repeat=self.level + 1):
            yield combo

    def repr_elem(self, a):
        base = self.base
        parts = []
        for i, c in enumerate(a):
            if base.is_zero(c):
                continue
            cs = base.repr_elem(c)
            if i == 0:
                parts.append(cs)
            else:
                t = "t" if i == 1 else f"t^{i}"
                parts.append(t if cs == "1" else f"{cs}*{t}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"{self.base!r}[t]/t^{self.level + 1}"


def rational_pow(q: int, k: int) -> Fraction:
    """q^k as an exact rational, k of either sign."""
    if k >= 0:
        return Fraction(q ** k)
    return Fraction(1, q ** (-k))

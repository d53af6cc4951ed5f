"""Exact arithmetic on the field tower F_p < F_q < F_q' .

Elements are plain ints.  An element of an extension of degree ``d`` over a
subfield of order ``s`` with coefficient vector ``(c_0, ..., c_{d-1})`` in the
polynomial basis ``1, x, ..., x^{d-1}`` is encoded as ``sum(c_j * s**j)``.
The encoding nests, so an element of F_q is also a valid element of F_q'
(the constant polynomial), and ``lift`` is just base-q digit packing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import (
    DivisionByZero,
    FieldTooLarge,
    LengthNotDivisible,
    LevelMismatch,
    ParseError,
)

TABLE_CAP = 1 << 16
ENUM_CAP = 1 << 16

LEVELS = ("prime", "base", "extension")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(order: int) -> tuple[int, int]:
    """Return ``(p, k)`` with ``order == p**k``; raise ValueError otherwise."""
    if order < 2:
        raise ValueError(f"{order} is not a prime power")
    p = prime_factors(order)[0]
    k = 0
    n = order
    while n % p == 0:
        n //= p
        k += 1
    if n != 1:
        raise ValueError(f"{order} is not a prime power")
    return p, k


# -- polynomials over a GF, coefficient lists low-first ---------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(F: GF, a: list[int], f: Sequence[int]) -> list[int]:
    a = list(a)
    d = len(f) - 1
    lead_inv = F.inv(f[-1])
    for k in range(len(a) - 1, d - 1, -1):
        c = a[k]
        if c:
            c = F.mul(c, lead_inv)
            for i in range(d + 1):
                if f[i]:
                    a[k - d + i] = F.sub(a[k - d + i], F.mul(c, f[i]))
    return _trim(a[:d])


def _pmul(F: GF, a: Sequence[int], b: Sequence[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = F.add(out[i + j], F.mul(x, y))
    return _trim(out)


def _psub(F: GF, a: Sequence[int], b: Sequence[int]) -> list[int]:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([F.sub(x, y) for x, y in zip(a, b)])


def _pgcd(F: GF, a: list[int], b: list[int]) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pmod(F, a, b)
    return a


def _ppowmod(F: GF, a: list[int], e: int, f: Sequence[int]) -> list[int]:
    result = [1]
    base = _pmod(F, a, f)
    while e:
        if e & 1:
            result = _pmod(F, _pmul(F, result, base), f)
        e >>= 1
        if e:
            base = _pmod(F, _pmul(F, base, base), f)
    return result


def is_irreducible(F: GF, poly: Sequence[int]) -> bool:
    """Ben-Or test: ``poly`` (low-first, monic) has no factor of degree <= d/2."""
    return _is_irreducible(F, tuple(poly))


@lru_cache(maxsize=256)
def _is_irreducible(F: GF, poly: tuple[int, ...]) -> bool:
    poly = _trim(list(poly))
    d = len(poly) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    if poly[0] == 0:
        return False
    if F.p == 2 and F.subfield is None:
        return _bin_irreducible(sum(c << k for k, c in enumerate(poly)))
    h = [0, 1]
    for _ in range(d // 2):
        h = _ppowmod(F, h, F.order, poly)
        g = _pgcd(F, list(poly), _psub(F, h, [0, 1]))
        if len(g) > 1:
            return False
    return True


def _bin_mod(a: int, f: int) -> int:
    fl = f.bit_length()
    while a.bit_length() >= fl:
        a ^= f << (a.bit_length() - fl)
    return a


def _bin_mulmod(a: int, b: int, f: int) -> int:
    r = 0
    top = 1 << (f.bit_length() - 1)
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= f
    return r


# Carry-less product through one integer multiplication: each bit becomes a
# byte, so column sums (at most the operand degree) never carry when < 256.
_SPREAD = bytes.maketrans(b"01", b"\x00\x01")
_PARITY = bytes(ord("0") + (i & 1) for i in range(256))


def _clmul_spread(a: int, b: int) -> int:
    sa = int.from_bytes(format(a, "b").encode().translate(_SPREAD), "big")
    sb = int.from_bytes(format(b, "b").encode().translate(_SPREAD), "big")
    prod = sa * sb
    return int(prod.to_bytes((prod.bit_length() + 7) >> 3, "big").translate(_PARITY), 2)


@lru_cache(maxsize=32)
def _reduction_table(f: int, bits: int = 16) -> list[int]:
    """``t(x) * f(x)`` for every ``bits``-bit t, used to clear that many top bits at a time."""
    table = [0] * (1 << bits)
    for t in range(1, 1 << bits):
        low = t & -t
        table[t] = table[t ^ low] ^ (f << (low.bit_length() - 1))
    return table


def _bin_irreducible(f: int) -> bool:
    d = f.bit_length() - 1
    h = 2
    for _ in range(d // 2):
        h = _bin_mulmod(h, h, f)
        a, b = f, h ^ 2
        while b:
            a, b = b, _bin_mod(a, b)
        if a != 1:
            return False
    return True


@lru_cache(maxsize=None)
def find_irreducible(F: GF, degree: int) -> tuple[int, ...]:
    """Smallest monic irreducible of ``degree`` over ``F``.

    Candidates are ordered by the integer encoding of their low-first
    coefficient vector (leading 1 excluded).
    """
    s = F.order
    if degree == 1:
        return (0, 1)
    for code in range(1, s ** degree):
        if code % s == 0:
            continue
        coeffs = []
        c = code
        for _ in range(degree):
            c, r = divmod(c, s)
            coeffs.append(r)
        poly = tuple(coeffs) + (1,)
        if is_irreducible(F, poly):
            return poly
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class GF:
    """A finite field: F_p, or an extension of ``sub`` by an irreducible ``poly``.

    Methods take and return int-encoded elements.  Multiplication uses
    log/antilog tables when the order is at most ``TABLE_CAP``, a bit-level
    carry-less product for large binary extensions of F_2, and schoolbook
    polynomial arithmetic otherwise.
    """

    def __init__(self, p: int, sub: GF | None = None, poly: Sequence[int] | None = None):
        self.p = p
        self.subfield = sub
        if sub is None:
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")
            self.degree = 1
            self.poly: tuple[int, ...] = (0, 1)
            self.order = p
            self.add = self._add_prime
            self.mul = self._mul_prime
            self.inv = self._inv_prime
            self.neg = self._neg_prime
            return
        poly = tuple(int(c) for c in poly)
        if len(poly) < 2 or poly[-1] != 1:
            raise ValueError("extension polynomial must be monic of degree >= 1")
        if any(not 0 <= c < sub.order for c in poly):
            raise ValueError("polynomial coefficients outside the subfield")
        if not is_irreducible(sub, poly):
            raise ValueError(f"polynomial {poly} is reducible over F_{sub.order}")
        self.poly = poly
        self.degree = len(poly) - 1
        self.order = sub.order ** self.degree
        self._s = sub.order
        self._binary = p == 2 and sub.subfield is None
        if self._binary:
            self._mask = sum(c << k for k, c in enumerate(poly))
        self.add = self._add_xor if p == 2 else self._add_digits
        self.neg = (lambda a: a) if p == 2 else self._neg_digits
        if self._binary:
            self.inv = self._inv_binary
            if self.order > TABLE_CAP and self.degree < 256:
                self.mul = self._mul_spread
                self._red = _reduction_table(self._mask)
            else:
                self.mul = self._mul_binary
        else:
            self.mul = self._mul_poly
            self.inv = self._inv_pow
        if self.order <= TABLE_CAP:
            self._build_tables()

    # -- identity ----------------------------------------------------------
    @property
    def key(self) -> tuple:
        return (self.p, self.subfield.key if self.subfield else None, self.poly)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        if self.subfield is None:
            return f"GF({self.p})"
        return f"GF({self.order}; poly={self.poly} over F_{self.subfield.order})"

    def __getstate__(self) -> dict:
        return {"p": self.p, "sub": self.subfield, "poly": None if self.subfield is None else self.poly}

    def __setstate__(self, state: dict) -> None:
        self.__init__(state["p"], state["sub"], state["poly"])

    # -- arithmetic --------------------------------------------------------
    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a = self.inv(a)
            e = -e
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            e >>= 1
            if e:
                a = self.mul(a, a)
        return result

    def _add_prime(self, a, b):
        return (a + b) % self.p

    def _neg_prime(self, a):
        return -a % self.p

    def _mul_prime(self, a, b):
        return a * b % self.p

    def _inv_prime(self, a):
        if a % self.p == 0:
            raise DivisionByZero("inverse of zero")
        return pow(a, -1, self.p)

    @staticmethod
    def _add_xor(a, b):
        return a ^ b

    def _add_digits(self, a, b):
        s, F = self._s, self.subfield
        out, scale = 0, 1
        while a or b:
            a, x = divmod(a, s)
            b, y = divmod(b, s)
            out += F.add(x, y) * scale
            scale *= s
        return out

    def _neg_digits(self, a):
        s, F = self._s, self.subfield
        out, scale = 0, 1
        while a:
            a, x = divmod(a, s)
            out += F.neg(x) * scale
            scale *= s
        return out

    def _mul_binary(self, a, b):
        return _bin_mulmod(a, b, self._mask)

    def _mul_spread(self, a, b):
        if a <= 1 or b <= 1:
            return a * b
        r = _clmul_spread(a, b)
        d = self.degree
        n = r.bit_length()
        if n <= d:
            return r
        red = self._red
        while n > d:
            sh = n - 16 if n > d + 16 else d
            r ^= red[r >> sh] << (sh - d)
            n = r.bit_length()
        return r

    def _inv_binary(self, a):
        if a == 0:
            raise DivisionByZero("inverse of zero")
        u, v, g1, g2 = a, self._mask, 1, 0
        while u != 1:
            j = u.bit_length() - v.bit_length()
            if j < 0:
                u, v, g1, g2 = v, u, g2, g1
                j = -j
            u ^= v << j
            g1 ^= g2 << j
        return g1

    def _mul_poly(self, a, b):
        F = self.subfield
        prod = _pmul(F, self.coeffs(a), self.coeffs(b))
        return self.from_coeffs(_pmod(F, prod, self.poly))

    def _inv_pow(self, a):
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return self.pow(a, self.order - 2)

    def _build_tables(self) -> None:
        n1 = self.order - 1
        slow_mul = self.mul
        factors = prime_factors(n1) if n1 > 1 else []
        gen = 1
        for cand in range(2, self.order):
            if all(self.pow(cand, n1 // r) != 1 for r in factors):
                gen = cand
                break
        exp = [0] * (2 * n1)
        log = [0] * self.order
        x = 1
        for i in range(n1):
            exp[i] = exp[i + n1] = x
            log[x] = i
            x = slow_mul(x, gen)
        self.generator = gen
        self._exp, self._log, self._n1 = exp, log, n1
        self.mul = self._mul_table
        self.inv = self._inv_table
        if self.p != 2:
            slow_add = self._add_digits
            zech = [-1] * n1
            for e in range(n1):
                y = slow_add(1, exp[e])
                zech[e] = log[y] if y else -1
            self._zech = zech
            half = n1 // 2
            self._neg_tab = [0] + [exp[log[a] + half] for a in range(1, self.order)]
            self.add = self._add_zech
            self.neg = self._neg_tab.__getitem__

    def _mul_table(self, a, b):
        if a and b:
            log = self._log
            return self._exp[log[a] + log[b]]
        return 0

    def _inv_table(self, a):
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return self._exp[self._n1 - self._log[a]]

    def _add_zech(self, a, b):
        if a == 0:
            return b
        if b == 0:
            return a
        log = self._log
        la = log[a]
        z = self._zech[(log[b] - la) % self._n1]
        if z < 0:
            return 0
        return self._exp[la + z]

    # -- representation ----------------------------------------------------
    def coeffs(self, a: int) -> list[int]:
        """Coefficient vector of ``a`` over the subfield, length = degree."""
        if self.subfield is None:
            return [a]
        s = self._s
        out = []
        for _ in range(self.degree):
            a, r = divmod(a, s)
            out.append(r)
        return out

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if self.subfield is None:
            (c,) = coeffs
            return c % self.p
        out = 0
        for c in reversed(list(coeffs)):
            out = out * self._s + c
        return out

    def prime_coeffs(self, a: int) -> list[int]:
        """Flattened F_p coefficient vector (length log_p order)."""
        k = round(math.log(self.order, self.p))
        out = []
        for _ in range(k):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def from_prime_coeffs(self, coeffs: Sequence[int]) -> int:
        out = 0
        for c in reversed(list(coeffs)):
            out = out * self.p + (c % self.p)
        return out

    def elements(self, cap: int = ENUM_CAP) -> range:
        if self.order > cap:
            raise FieldTooLarge(f"field of order {self.order} exceeds enumeration cap {cap}")
        return range(self.order)

    def random(self, rng) -> int:
        return rng.randrange(self.order)

    def random_nonzero(self, rng) -> int:
        return rng.randrange(1, self.order)

    def frobenius_trace(self, a: int, steps: int) -> int:
        """``a + a^p + ... + a^(p^(steps-1))``."""
        out, x = 0, a
        for _ in range(steps):
            out = self.add(out, x)
            x = self.pow(x, self.p)
        return out


@lru_cache(maxsize=64)
def _cached_field(p: int, sub: GF | None = None, poly: tuple[int, ...] | None = None) -> GF:
    # fields are immutable once built, so table construction can be shared
    return GF(p, sub, poly)


def gf(order: int) -> GF:
    """Field of the given prime-power order built directly over its prime field."""
    p, k = prime_power(order)
    F = _cached_field(p)
    if k == 1:
        return F
    return _cached_field(p, F, find_irreducible(F, k))


class FieldElem:
    """An element tagged with its field and tower level; supports + - * / **."""

    __slots__ = ("field", "value", "level")

    def __init__(self, field: GF, value: int, level: str = "base"):
        if not 0 <= value < field.order:
            raise ValueError(f"{value} is not an element of {field}")
        self.field = field
        self.value = value
        self.level = level

    @property
    def coeffs(self) -> list[int]:
        return self.field.coeffs(self.value)

    def _check(self, other: FieldElem) -> None:
        if not isinstance(other, FieldElem):
            raise TypeError(f"expected FieldElem, got {type(other).__name__}")
        if other.level != self.level or other.field != self.field:
            raise LevelMismatch(f"{self.level} vs {other.level}")

    def _new(self, value: int) -> FieldElem:
        return FieldElem(self.field, value, self.level)

    def __add__(self, other):
        self._check(other)
        return self._new(self.field.add(self.value, other.value))

    def __sub__(self, other):
        self._check(other)
        return self._new(self.field.sub(self.value, other.value))

    def __mul__(self, other):
        self._check(other)
        return self._new(self.field.mul(self.value, other.value))

    def __truediv__(self, other):
        self._check(other)
        return self._new(self.field.div(self.value, other.value))

    def __neg__(self):
        return self._new(self.field.neg(self.value))

    def __pow__(self, e: int):
        return self._new(self.field.pow(self.value, e))

    def inv(self) -> FieldElem:
        return self._new(self.field.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return (self.field, self.level, self.value) == (other.field, other.level, other.value)
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.level, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"FieldElem({self.level}, {self.coeffs})"


@dataclass(frozen=True)
class FieldCtx:
    """The tower F_p < F_q = F_{p^t} < F_q' = F_{q^alpha}.

    ``base_poly`` is monic irreducible of degree t over F_p and ``ext_poly``
    monic irreducible of degree alpha over F_q, both low-first.  When not
    given they default to the smallest irreducible in the search order of
    :func:`find_irreducible`.
    """

    p: int
    t: int = 1
    alpha: int = 1
    base_poly: tuple[int, ...] | None = None
    ext_poly: tuple[int, ...] | None = None
    prime: GF = dc_field(init=False, repr=False, compare=False)
    base: GF = dc_field(init=False, repr=False, compare=False)
    ext: GF = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.t < 1 or self.alpha < 1:
            raise ValueError("t and alpha must be >= 1")
        prime = _cached_field(self.p)
        bp = tuple(self.base_poly) if self.base_poly is not None else find_irreducible(prime, self.t)
        if len(bp) != self.t + 1:
            raise ValueError("base_poly degree does not match t")
        base = prime if self.t == 1 else _cached_field(self.p, prime, bp)
        ep = tuple(self.ext_poly) if self.ext_poly is not None else find_irreducible(base, self.alpha)
        if len(ep) != self.alpha + 1:
            raise ValueError("ext_poly degree does not match alpha")
        if self.t == 1 and not is_irreducible(prime, bp):
            raise ValueError(f"base_poly {bp} is reducible")
        if self.alpha == 1 and not is_irreducible(base, ep):
            raise ValueError(f"ext_poly {ep} is reducible")
        ext = base if self.alpha == 1 else _cached_field(self.p, base, ep)
        object.__setattr__(self, "base_poly", bp)
        object.__setattr__(self, "ext_poly", ep)
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "ext", ext)

    @property
    def q(self) -> int:
        return self.base.order

    @property
    def q_prime(self) -> int:
        return self.ext.order

    def field(self, level: str) -> GF:
        try:
            return {"prime": self.prime, "base": self.base, "extension": self.ext}[level]
        except KeyError:
            raise ValueError(f"unknown level {level!r}") from None

    def elem(self, level: str, value: int | Sequence[int]) -> FieldElem:
        F = self.field(level)
        if not isinstance(value, int):
            value = F.from_coeffs(value)
        return FieldElem(F, value, level)

    def with_alpha(self, alpha: int, ext_poly: Sequence[int] | None = None) -> FieldCtx:
        return FieldCtx(self.p, self.t, alpha, self.base_poly, tuple(ext_poly) if ext_poly else None)

    def trace(self, x: int | FieldElem) -> int:
        """Absolute trace F_q -> F_p of a base-level element."""
        if isinstance(x, FieldElem):
            if x.level != "base":
                raise LevelMismatch("trace takes a base-level element")
            x = x.value
        tr = self.base.frobenius_trace(x, self.t)
        assert tr < self.p
        return tr

    def lift(self, v: Sequence[int]) -> list[int]:
        """Pack consecutive alpha-tuples of F_q entries into F_q' entries."""
        a, q = self.alpha, self.q
        if len(v) % a:
            raise LengthNotDivisible(f"length {len(v)} not divisible by alpha = {a}")
        out = []
        for k in range(0, len(v), a):
            x = 0
            for c in reversed(v[k:k + a]):
                x = x * q + c
            out.append(x)
        return out

    def flatten(self, v: Sequence[int]) -> list[int]:
        out = []
        for x in v:
            out.extend(self.ext.coeffs(x) if self.alpha > 1 else [x])
        return out

    def enumerate(self, level: str, cap: int = ENUM_CAP) -> range:
        return self.field(level).elements(cap)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "t": self.t,
            "alpha": self.alpha,
            "base_poly": list(self.base_poly),
            "ext_poly": list(self.ext_poly),
        }

    @classmethod
    def from_json(cls, obj: dict) -> FieldCtx:
        try:
            return cls(
                int(obj["p"]),
                int(obj.get("t", 1)),
                int(obj.get("alpha", 1)),
                tuple(obj["base_poly"]) if obj.get("base_poly") is not None else None,
                tuple(obj["ext_poly"]) if obj.get("ext_poly") is not None else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad field description: {exc}") from exc


def all_tuples(F: GF, length: int, cap: int = ENUM_CAP) -> Iterator[tuple[int, ...]]:
    """Every vector in F^length in lexicographic order."""
    if F.order ** length > cap:
        raise FieldTooLarge(f"{F.order}^{length} vectors exceed cap {cap}")
    return itertools.product(range(F.order), repeat=length)

"""Arithmetic in the base field F_q.

Each field offers two views with the same method names: ``F.s`` works on
single elements (Python ints or tuples), ``F.v`` on numpy arrays holding a
batch of elements. Internal representations differ per field type; use
``from_int``/``to_int`` to move between them and the canonical encoding
(the integer whose base-p digits are the polynomial coefficients, low
degree first).
"""

from __future__ import annotations

import numpy as np

from . import polys

# composite fields up to this order get log/Zech tables
TABLE_LIMIT = 2**22
# largest p for which a*b fits in int64
_DIRECT_LIMIT = 3037000499


def _digits(n: int, p: int, e: int) -> list[int]:
    out = []
    for _ in range(e):
        n, d = divmod(n, p)
        out.append(d)
    return out


class _PrimeScalar:
    def __init__(self, p):
        self.p = p
        self.zero, self.one = 0, 1

    def add(self, a, b):
        s = a + b
        return s - self.p if s >= self.p else s

    def sub(self, a, b):
        s = a - b
        return s + self.p if s < 0 else s

    def neg(self, a):
        return self.p - a if a else 0

    def mul(self, a, b):
        return a * b % self.p

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_p")
        return pow(a, -1, self.p)

    def pow(self, a, n):
        if a == 0:
            return 0 if n else 1
        return pow(a, n % (self.p - 1), self.p)

    def is_zero(self, a):
        return a == 0

    def eq(self, a, b):
        return a == b


class _PrimeVector:
    """Batched F_p arithmetic on int64 arrays."""

    def __init__(self, p):
        self.p = p
        self._direct = p <= _DIRECT_LIMIT
        self._inv_p = 1.0 / p

    def const(self, c):
        return np.int64(c)

    def full(self, shape, c):
        return np.full(shape, c, dtype=np.int64)

    def add(self, a, b):
        s = a + b
        return np.where(s >= self.p, s - self.p, s)

    def sub(self, a, b):
        s = a - b
        return np.where(s < 0, s + self.p, s)

    def neg(self, a):
        return np.where(a == 0, 0, self.p - a)

    def mul(self, a, b):
        if self._direct:
            return a * b % self.p
        # quotient estimate from floating point, remainder by wrapping int64
        # arithmetic; the estimate is within a few units so the exact
        # remainder lies in int64 range before the final reduction
        with np.errstate(over="ignore"):
            qe = np.floor(np.asarray(a, dtype=np.float64) * np.asarray(b, dtype=np.float64)
                          * self._inv_p).astype(np.int64)
            r = a * b - qe * self.p
        return r % self.p

    def sqr(self, a):
        return self.mul(a, a)

    def pow(self, a, n):
        """a**n elementwise; n is a nonnegative int or an int array."""
        n = np.asarray(n, dtype=np.int64)
        result = np.ones(np.broadcast(a, n).shape, dtype=np.int64)
        base = np.broadcast_to(a, result.shape).copy()
        n = np.broadcast_to(n, result.shape).copy()
        while n.any():
            odd = (n & 1) == 1
            if odd.any():
                result = np.where(odd, self.mul(result, base), result)
            n >>= 1
            if n.any():
                base = self.mul(base, base)
        return result

    def inv(self, a):
        # zero maps to zero
        return self.pow(a, self.p - 2)

    def is_zero(self, a):
        return a == 0

    def eq(self, a, b):
        return a == b

    def where(self, mask, a, b):
        return np.where(mask, a, b)


class PrimeField:
    def __init__(self, p: int):
        self.p, self.e, self.q = p, 1, p
        self.modulus = None
        self.s = _PrimeScalar(p)
        self.v = _PrimeVector(p)

    def from_int(self, n: int):
        return n % self.p

    def to_int(self, a) -> int:
        return int(a)

    def vfrom_int(self, arr):
        return np.asarray(arr, dtype=np.int64) % self.p

    def vto_int(self, arr):
        return np.asarray(arr, dtype=np.int64)

    def __repr__(self):
        return f"PrimeField({self.p})"


class _PolyScalar:
    """F_p[t]/(f) on tuples of e coefficients."""

    def __init__(self, p, modulus):
        self.p = p
        self.e = len(modulus) - 1
        self.f = modulus
        self.Fp = _PrimeScalar(p)
        self.zero = (0,) * self.e
        self.one = (1,) + (0,) * (self.e - 1)

    def add(self, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a, b):
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.p
        return tuple(-x % p for x in a)

    def mul(self, a, b):
        p, e, f = self.p, self.e, self.f
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        for k in range(2 * e - 2, e - 1, -1):
            c = prod[k] % p
            if c:
                for j in range(e):
                    prod[k - e + j] -= c * f[j]
        return tuple(c % p for c in prod[:e])

    def pow(self, a, n):
        result = self.one
        for bit in bin(n)[2:]:
            result = self.mul(result, result)
            if bit == "1":
                result = self.mul(result, a)
        return result

    def inv(self, a):
        if not any(a):
            raise ZeroDivisionError("inverse of zero in F_q")
        return self.pow(a, self.p**self.e - 2)

    def is_zero(self, a):
        return not any(a)

    def eq(self, a, b):
        return a == b


class _PolyVector:
    """F_p[t]/(f) on int64 arrays whose last axis holds the e coefficients."""

    def __init__(self, p, modulus):
        self.p = p
        self.e = len(modulus) - 1
        self.f = np.array(modulus[:-1], dtype=np.int64)

    def const(self, c):
        return np.array(c, dtype=np.int64)

    def full(self, shape, c):
        return np.broadcast_to(np.array(c, dtype=np.int64), tuple(shape) + (self.e,)).copy()

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        p, e = self.p, self.e
        shape = np.broadcast_shapes(a.shape, b.shape)[:-1]
        prod = np.zeros(shape + (2 * e - 1,), dtype=np.int64)
        # reduce lazily while the accumulated sums stay below 2^62
        lazy = 2 * e * p * p < 2**62
        for i in range(e):
            prod[..., i:i + e] += a[..., i:i + 1] * b
            if not lazy:
                prod %= p
        for k in range(2 * e - 2, e - 1, -1):
            c = prod[..., k:k + 1] % p
            prod[..., k - e:k] -= c * self.f
            if not lazy:
                prod[..., k - e:k] %= p
        return prod[..., :e] % p

    def sqr(self, a):
        return self.mul(a, a)

    def pow(self, a, n):
        n = int(n)
        result = self.full(a.shape[:-1], [1] + [0] * (self.e - 1))
        for bit in bin(n)[2:]:
            result = self.mul(result, result)
            if bit == "1":
                result = self.mul(result, a)
        return result

    def inv(self, a):
        return self.pow(a, self.p**self.e - 2)

    def is_zero(self, a):
        return ~a.any(axis=-1)

    def eq(self, a, b):
        return (a == b).all(axis=-1)

    def where(self, mask, a, b):
        return np.where(mask[..., None], a, b)


class PolyField:
    """F_q = F_p[t]/(f) with dense coefficient vectors."""

    def __init__(self, p: int, modulus: tuple[int, ...]):
        self.p = p
        self.e = len(modulus) - 1
        self.q = p**self.e
        self.modulus = tuple(modulus)
        self.s = _PolyScalar(p, self.modulus)
        self.v = _PolyVector(p, self.modulus)
        self._pows = np.array([p**i for i in range(self.e)], dtype=np.int64)

    def from_int(self, n: int):
        return tuple(_digits(n % self.q, self.p, self.e))

    def to_int(self, a) -> int:
        return sum(int(c) * self.p**i for i, c in enumerate(a))

    def vfrom_int(self, arr):
        arr = np.asarray(arr, dtype=np.int64)
        return (arr[..., None] // self._pows) % self.p

    def vto_int(self, arr):
        return (arr * self._pows).sum(axis=-1)

    def __repr__(self):
        return f"PolyField({self.p}^{self.e})"


class _TableScalar:
    def __init__(self, T):
        self.T = T
        self.Z = T.q - 1
        self.zero, self.one = self.Z, 0

    def mul(self, a, b):
        Z = self.Z
        if a == Z or b == Z:
            return Z
        s = a + b
        return s - Z if s >= Z else s

    def add(self, a, b):
        Z = self.Z
        if a == Z:
            return b
        if b == Z:
            return a
        z = int(self.T.zech[(b - a) % Z])
        if z == Z:
            return Z
        s = a + z
        return s - Z if s >= Z else s

    def neg(self, a):
        if a == self.Z or self.T.half == 0:
            return a
        s = a + self.T.half
        return s - self.Z if s >= self.Z else s

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def inv(self, a):
        if a == self.Z:
            raise ZeroDivisionError("inverse of zero in F_q")
        return (-a) % self.Z

    def pow(self, a, n):
        if a == self.Z:
            return self.Z if n else 0
        return a * n % self.Z

    def is_zero(self, a):
        return a == self.Z

    def eq(self, a, b):
        return a == b


class _TableVector:
    def __init__(self, T):
        self.T = T
        self.Z = T.q - 1

    def const(self, c):
        return np.int64(c)

    def full(self, shape, c):
        return np.full(shape, c, dtype=np.int64)

    def mul(self, a, b):
        Z = self.Z
        s = a + b
        s = np.where(s >= Z, s - Z, s)
        return np.where((a == Z) | (b == Z), Z, s)

    def sqr(self, a):
        Z = self.Z
        s = 2 * a
        s = np.where(s >= Z, s - Z, s)
        return np.where(a == Z, Z, s)

    def add(self, a, b):
        Z = self.Z
        d = b - a
        d = np.where(d < 0, d + Z, d)
        # d == Z only when b is zero and a is not; index Z of the padded
        # table returns 0 so that branch is fixed below anyway
        z = self.T.zech_pad[d]
        s = a + z
        s = np.where(s >= Z, s - Z, s)
        s = np.where(z == Z, Z, s)
        s = np.where(a == Z, b, s)
        return np.where(b == Z, a, s)

    def neg(self, a):
        h = self.T.half
        if h == 0:
            return a
        s = a + h
        s = np.where(s >= self.Z, s - self.Z, s)
        return np.where(a == self.Z, self.Z, s)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def pow(self, a, n):
        n = np.asarray(n, dtype=np.int64)
        r = (a * (n % self.Z)) % self.Z
        zero_base = a == self.Z
        return np.where(zero_base, np.where(n == 0, 0, self.Z), r)

    def inv(self, a):
        return np.where(a == self.Z, self.Z, (-a) % self.Z)

    def is_zero(self, a):
        return a == self.Z

    def eq(self, a, b):
        return a == b

    def where(self, mask, a, b):
        return np.where(mask, a, b)


class TableField:
    """Small composite F_q with elements stored as discrete logs.

    Element ``i`` in ``[0, q-2]`` stands for ``gen**i``; ``q-1`` stands for zero.
    Multiplication adds logs, addition goes through the Zech table
    ``zech[n] = log(1 + gen**n)``.
    """

    def __init__(self, p: int, modulus: tuple[int, ...]):
        self.p = p
        self.e = len(modulus) - 1
        self.q = q = p**self.e
        self.modulus = tuple(modulus)
        self.poly = PolyField(p, modulus)
        self.gen = _find_generator(self.poly)
        # canonical ints of gen**i
        self.exp = self._power_table()
        log = np.empty(q, dtype=np.int64)
        log[0] = q - 1
        log[self.exp] = np.arange(q - 1, dtype=np.int64)
        self.log = log
        d0 = self.exp % p
        one_plus = self.exp - d0 + (d0 + 1) % p
        self.zech = log[one_plus]
        self.zech_pad = np.append(self.zech, 0)
        self.half = 0 if p == 2 else (q - 1) // 2
        self.s = _TableScalar(self)
        self.v = _TableVector(self)

    def _power_table(self) -> np.ndarray:
        P = self.poly
        pv = P.v
        g = np.array(P.from_int(self.gen), dtype=np.int64)
        block = P.vfrom_int(np.array([1]))
        step = g[None, :]
        n = self.q - 1
        while block.shape[0] < n:
            block = np.concatenate([block, pv.mul(block, step)])
            step = pv.mul(step, step)
        return P.vto_int(block[:n])

    def from_int(self, n: int):
        return int(self.log[n % self.q])

    def to_int(self, a) -> int:
        return 0 if a == self.q - 1 else int(self.exp[a])

    def vfrom_int(self, arr):
        return self.log[np.asarray(arr, dtype=np.int64) % self.q]

    def vto_int(self, arr):
        arr = np.asarray(arr, dtype=np.int64)
        return np.where(arr == self.q - 1, 0, self.exp[np.minimum(arr, self.q - 2)])

    def __repr__(self):
        return f"TableField({self.p}^{self.e})"


def _find_generator(P: PolyField) -> int:
    from ..numth import factorize

    q = P.q
    primes = factorize(q - 1).primes
    S = P.s
    for c in range(2, q):
        a = P.from_int(c)
        if all(S.pow(a, (q - 1) // ell) != S.one for ell in primes):
            return c
    return 1  # q == 2


def make_base_field(p: int, e: int, modulus: tuple[int, ...] | None = None,
                    table_limit: int = TABLE_LIMIT):
    if e == 1:
        return PrimeField(p)
    if modulus is None:
        raise ValueError("extension field needs a modulus")
    if p**e <= table_limit:
        return TableField(p, modulus)
    return PolyField(p, modulus)


def random_base_modulus(p: int, e: int, rng) -> tuple[int, ...]:
    """Random monic irreducible polynomial of degree e over F_p (low degree first)."""
    Fp = _PrimeScalar(p)
    while True:
        f = [int(c) for c in rng.integers(0, p, size=e)] + [1]
        if polys.is_irreducible(Fp, f, p):
            return tuple(f)

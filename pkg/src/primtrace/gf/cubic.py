"""The cubic extension F_q[x]/(f) for a monic cubic f over F_q.

Elements are triples ``(a0, a1, a2)`` meaning ``a0 + a1 x + a2 x^2`` with
coordinates in the base field's internal representation. The scalar
methods take tuples of scalars; the ``v``-prefixed methods take tuples of
numpy arrays and work on a whole batch at once. Both run the same
formulas, parametrised by the base field's scalar or vector ops.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ..numth import Factorization
from . import polys
from .chains import batch_pow_chain


def _reduce(F, m, d0, d1, d2, d3, d4):
    # x^3 = m2 x^2 + m1 x + m0
    m0, m1, m2 = m
    if d4 is not None:
        d3 = F.add(d3, F.mul(m2, d4))
        d2 = F.add(d2, F.mul(m1, d4))
        d1 = F.add(d1, F.mul(m0, d4))
    d2 = F.add(d2, F.mul(m2, d3))
    d1 = F.add(d1, F.mul(m1, d3))
    d0 = F.add(d0, F.mul(m0, d3))
    return d0, d1, d2


def _mul(F, m, a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    mul, add = F.mul, F.add
    d0 = mul(a0, b0)
    d1 = add(mul(a0, b1), mul(a1, b0))
    d2 = add(add(mul(a0, b2), mul(a1, b1)), mul(a2, b0))
    d3 = add(mul(a1, b2), mul(a2, b1))
    d4 = mul(a2, b2)
    return _reduce(F, m, d0, d1, d2, d3, d4)


def _sqr(F, m, a):
    a0, a1, a2 = a
    mul, add = F.mul, F.add
    t01 = mul(a0, a1)
    t02 = mul(a0, a2)
    t12 = mul(a1, a2)
    d0 = mul(a0, a0)
    d1 = add(t01, t01)
    d2 = add(add(t02, t02), mul(a1, a1))
    d3 = add(t12, t12)
    d4 = mul(a2, a2)
    return _reduce(F, m, d0, d1, d2, d3, d4)


def _times_x(F, m, a):
    a0, a1, a2 = a
    m0, m1, m2 = m
    return F.mul(m0, a2), F.add(a0, F.mul(m1, a2)), F.add(a1, F.mul(m2, a2))


def _inv(F, m, a):
    """Inverse via the adjugate of the multiplication-by-a matrix.

    Returns ``(b, det)`` with b = adj column so that ``a * b = det``.
    """
    c0 = a
    c1 = _times_x(F, m, c0)
    c2 = _times_x(F, m, c1)
    # M[r][c] = coordinate r of a * x^c
    M10, M20 = c0[1], c0[2]
    M11, M21 = c1[1], c1[2]
    M12, M22 = c2[1], c2[2]
    mul, sub, add = F.mul, F.sub, F.add
    b0 = sub(mul(M11, M22), mul(M12, M21))
    b1 = sub(mul(M12, M20), mul(M10, M22))
    b2 = sub(mul(M10, M21), mul(M11, M20))
    det = add(add(mul(c0[0], b0), mul(c1[0], b1)), mul(c2[0], b2))
    return (b0, b1, b2), det


class CubicField:
    def __init__(self, base, coeffs):
        """``coeffs = (c0, c1, c2)`` of the monic cubic x^3 + c2 x^2 + c1 x + c0."""
        self.base = base
        self.q = base.q
        self.order = self.q**3 - 1
        S, V = base.s, base.v
        self.coeffs = tuple(coeffs)
        self._ms = tuple(S.neg(c) for c in self.coeffs)
        self._mv = tuple(V.const(c) for c in self._ms)
        self.zero = (S.zero, S.zero, S.zero)
        self.one = (S.one, S.zero, S.zero)
        self.gen = (S.zero, S.one, S.zero)

    @classmethod
    def from_modulus_ints(cls, base, ints):
        return cls(base, tuple(base.from_int(int(c)) for c in ints))

    @property
    def modulus_ints(self) -> tuple[int, int, int]:
        return tuple(self.base.to_int(c) for c in self.coeffs)

    # ------------------------------------------------ scalar arithmetic

    def add(self, a, b):
        S = self.base.s
        return tuple(S.add(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        S = self.base.s
        return tuple(S.sub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        S = self.base.s
        return tuple(S.neg(x) for x in a)

    def mul(self, a, b):
        return _mul(self.base.s, self._ms, a, b)

    def sqr(self, a):
        return _sqr(self.base.s, self._ms, a)

    def scale(self, c, a):
        S = self.base.s
        return tuple(S.mul(c, x) for x in a)

    def embed(self, c):
        S = self.base.s
        return (c, S.zero, S.zero)

    def inv(self, a):
        S = self.base.s
        b, det = _inv(S, self._ms, a)
        if S.is_zero(det):
            raise ZeroDivisionError("element is not invertible")
        return self.scale(S.inv(det), b)

    def pow(self, a, n: int):
        """Left-to-right square-and-multiply."""
        if n < 0:
            a, n = self.inv(a), -n
        result = self.one
        for bit in bin(n)[2:]:
            result = self.sqr(result)
            if bit == "1":
                result = self.mul(result, a)
        return result

    def is_zero(self, a):
        return a == self.zero

    def in_base(self, a) -> bool:
        S = self.base.s
        return S.is_zero(a[1]) and S.is_zero(a[2])

    def batch_pow(self, a, exps):
        return batch_pow_chain(a, exps, self.mul, self.sqr)

    def primitivity_exponents(self, order_fact: Factorization | None = None):
        f = order_fact if order_fact is not None else self.order_fact
        if f.n != self.order:
            raise ValueError("factorization is not of q^3 - 1")
        return tuple(self.order // p for p in f.primes)

    @cached_property
    def order_fact(self) -> Factorization:
        from ..numth import factor_q3_minus_1

        return factor_q3_minus_1(self.q)

    def is_primitive(self, a, order_fact: Factorization | None = None) -> bool:
        if self.is_zero(a):
            raise ValueError("zero is not in the multiplicative group")
        exps = self.primitivity_exponents(order_fact)
        return all(r != self.one for r in self.batch_pow(a, exps))

    def trace(self, a):
        """a + a^q + a^(q^2), as a base field element."""
        q = self.q
        t = self.add(self.add(a, self.pow(a, q)), self.pow(a, q * q))
        if not self.in_base(t):
            raise ArithmeticError("trace left the base field; modulus is reducible")
        return t[0]

    def norm(self, a):
        """a^(q^2 + q + 1), as a base field element."""
        q = self.q
        n = self.pow(a, q * q + q + 1)
        if not self.in_base(n):
            raise ArithmeticError("norm left the base field; modulus is reducible")
        return n[0]

    @cached_property
    def trace_form(self):
        """Traces of the power basis 1, x, x^2 (the trace as a linear form)."""
        return tuple(self.trace(self.pow(self.gen, j)) for j in range(3))

    def trace_linear(self, a):
        S = self.base.s
        t = self.trace_form
        return S.add(S.add(S.mul(a[0], t[0]), S.mul(a[1], t[1])), S.mul(a[2], t[2]))

    def is_irreducible(self) -> bool:
        """A cubic is irreducible iff it has no root, i.e. gcd(x^q - x, f) = 1."""
        S = self.base.s
        y = self.pow(self.gen, self.q)
        h = polys.trim(S, [y[0], S.sub(y[1], S.one), y[2]])
        f = list(self.coeffs) + [S.one]
        return len(polys.gcd(S, h, f)) == 1

    # ------------------------------------------------ serialization

    def to_ints(self, a) -> list[int]:
        return [self.base.to_int(c) for c in a]

    def from_ints(self, ints):
        return tuple(self.base.from_int(int(c)) for c in ints)

    def to_digits(self, a) -> list[list[int]]:
        """Little-endian base-p digits of each coordinate."""
        p, e = self.base.p, self.base.e
        out = []
        for n in self.to_ints(a):
            ds = []
            for _ in range(e):
                n, d = divmod(n, p)
                ds.append(d)
            out.append(ds)
        return out

    def from_digits(self, digits):
        p, e = self.base.p, self.base.e
        if len(digits) != 3 or any(len(d) != e for d in digits):
            raise ValueError("malformed element digits")
        ints = []
        for ds in digits:
            if any(not (0 <= int(d) < p) for d in ds):
                raise ValueError("digit out of range")
            ints.append(sum(int(d) * p**i for i, d in enumerate(ds)))
        return self.from_ints(ints)

    # ------------------------------------------------ batched arithmetic

    def vconst(self, a, shape):
        V = self.base.v
        return tuple(V.full(shape, c) for c in a)

    def vfrom_ints(self, c0, c1, c2):
        b = self.base
        return (b.vfrom_int(c0), b.vfrom_int(c1), b.vfrom_int(c2))

    def vto_ints(self, A):
        b = self.base
        return tuple(b.vto_int(c) for c in A)

    def vtake(self, A, idx):
        return tuple(c[idx] for c in A)

    def vadd(self, A, B):
        V = self.base.v
        return tuple(V.add(x, y) for x, y in zip(A, B))

    def vsub(self, A, B):
        V = self.base.v
        return tuple(V.sub(x, y) for x, y in zip(A, B))

    def vneg(self, A):
        V = self.base.v
        return tuple(V.neg(x) for x in A)

    def vmul(self, A, B):
        return _mul(self.base.v, self._mv, A, B)

    def vsqr(self, A):
        return _sqr(self.base.v, self._mv, A)

    def vscale(self, c, A):
        V = self.base.v
        return tuple(V.mul(c, x) for x in A)

    def vinv(self, A):
        """Batched inverse; zero maps to zero."""
        V = self.base.v
        b, det = _inv(V, self._mv, A)
        return self.vscale(V.inv(det), b)

    def vpow(self, A, n: int):
        """Batched square-and-multiply with a common exponent."""
        shape = np.shape(self.base.v.is_zero(A[0]))
        result = self.vconst(self.one, shape)
        for bit in bin(n)[2:]:
            result = self.vsqr(result)
            if bit == "1":
                result = self.vmul(result, A)
        return result

    def vis_zero(self, A):
        V = self.base.v
        return V.is_zero(A[0]) & V.is_zero(A[1]) & V.is_zero(A[2])

    def vis_one(self, A):
        V = self.base.v
        S = self.base.s
        one = V.const(S.one)
        zero = V.const(S.zero)
        return V.eq(A[0], one) & V.eq(A[1], zero) & V.eq(A[2], zero)

    def vis_primitive(self, A, order_fact: Factorization | None = None):
        """Boolean mask of primitive elements; zero counts as not primitive."""
        exps = self.primitivity_exponents(order_fact)
        ok = ~self.vis_zero(A)
        for r in batch_pow_chain(A, exps, self.vmul, self.vsqr):
            ok &= ~self.vis_one(r)
        return ok

    def vtrace(self, A):
        V = self.base.v
        t = [V.const(c) for c in self.trace_form]
        return V.add(V.add(V.mul(A[0], t[0]), V.mul(A[1], t[1])), V.mul(A[2], t[2]))

    @cached_property
    def solve_index(self) -> int:
        """A coordinate whose trace coefficient is nonzero (0 unless 3 | q)."""
        S = self.base.s
        for j, t in enumerate(self.trace_form):
            if not S.is_zero(t):
                return j
        raise ArithmeticError("trace form vanishes")

    def with_trace(self, a, free1, free2):
        """Batch of elements with trace ``a``, given canonical ints of the two
        free coordinates; the remaining coordinate is solved from the trace form."""
        b = self.base
        V, S = b.v, b.s
        j = self.solve_index
        others = [i for i in range(3) if i != j]
        t = self.trace_form
        coords = [None, None, None]
        coords[others[0]] = b.vfrom_int(free1)
        coords[others[1]] = b.vfrom_int(free2)
        acc = V.add(V.mul(coords[others[0]], V.const(t[others[0]])),
                    V.mul(coords[others[1]], V.const(t[others[1]])))
        rhs = V.sub(V.const(a), acc)
        coords[j] = V.mul(rhs, V.const(S.inv(t[j])))
        return tuple(coords)

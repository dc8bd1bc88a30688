"""Univariate polynomials over a field given by its scalar ops.

Polynomials are lists of coefficients, lowest degree first, with no
trailing zeros (the zero polynomial is ``[]``).
"""

from __future__ import annotations

from ..numth import factorize


def trim(F, a):
    a = list(a)
    while a and F.is_zero(a[-1]):
        a.pop()
    return a


def sub(F, a, b):
    n = max(len(a), len(b))
    a = list(a) + [F.zero] * (n - len(a))
    b = list(b) + [F.zero] * (n - len(b))
    return trim(F, [F.sub(x, y) for x, y in zip(a, b)])


def mul(F, a, b):
    if not a or not b:
        return []
    out = [F.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if F.is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = F.add(out[i + j], F.mul(x, y))
    return trim(F, out)


def divmod_(F, a, b):
    a = trim(F, a)
    b = trim(F, b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    lead_inv = F.inv(b[-1])
    quot = [F.zero] * max(len(a) - len(b) + 1, 0)
    rem = list(a)
    while len(rem) >= len(b):
        c = F.mul(rem[-1], lead_inv)
        shift = len(rem) - len(b)
        quot[shift] = c
        for j, y in enumerate(b):
            rem[shift + j] = F.sub(rem[shift + j], F.mul(c, y))
        rem = trim(F, rem)
    return trim(F, quot), rem


def mod(F, a, f):
    return divmod_(F, a, f)[1]


def gcd(F, a, b):
    """Monic gcd."""
    a, b = trim(F, a), trim(F, b)
    while b:
        a, b = b, mod(F, a, b)
    if not a:
        return a
    inv = F.inv(a[-1])
    return [F.mul(c, inv) for c in a]


def powmod(F, a, n, f):
    result = [F.one]
    a = mod(F, a, f)
    for bit in bin(n)[2:]:
        result = mod(F, mul(F, result, result), f)
        if bit == "1":
            result = mod(F, mul(F, result, a), f)
    return result


def is_irreducible(F, f, order: int) -> bool:
    """Rabin's test for ``f`` over the field with ``order`` elements."""
    f = trim(F, f)
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [F.zero, F.one]
    # frob[j] = x^(order^j) mod f
    frob = [mod(F, x, f)]
    for _ in range(n):
        frob.append(powmod(F, frob[-1], order, f))
    if sub(F, frob[n], x):
        return False
    for r in factorize(n).primes:
        g = gcd(F, sub(F, frob[n // r], x), f)
        if len(g) != 1:
            return False
    return True

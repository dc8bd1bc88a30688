"""Exact integer arithmetic: primality, factorization and windowed sieves.

Everything here works on Python ints; numpy is only used for sieving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

DEFAULT_SMOOTH_BOUND = 2**20
DEFAULT_WINDOW = 2**20
TRIAL_LIMIT = 10**6
DEFAULT_RHO_BUDGET = 10**7


class FactorizationBudgetExceeded(RuntimeError):
    """The rho stage ran out of iterations before splitting a cofactor."""

    def __init__(self, n: int, budget: int):
        super().__init__(f"rho budget of {budget} iterations exhausted on {n}")
        self.n = n
        self.budget = budget


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factor list {self.factors}")
            last = p
            prod *= p**e
        if prod != self.n:
            raise ValueError(f"factors of {self.n} multiply to {prod}")

    @classmethod
    def from_dict(cls, d: dict[int, int]) -> "Factorization":
        items = tuple(sorted((p, e) for p, e in d.items() if e > 0))
        n = 1
        for p, e in items:
            n *= p**e
        return cls(n, items)

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def __mul__(self, other: "Factorization") -> "Factorization":
        d = self.as_dict()
        for p, e in other.factors:
            d[p] = d.get(p, 0) + e
        return Factorization.from_dict(d)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


@dataclass(frozen=True)
class PartialFactorization:
    """Factorization of ``m`` into its ``X``-smooth part and a cofactor ``u``.

    ``u`` has no prime factor below ``X``; when ``u < X**2`` it is therefore
    1 or prime.
    """

    m: int
    smooth_part: Factorization
    u: int
    X: int = DEFAULT_SMOOTH_BOUND

    def __post_init__(self):
        if self.smooth_part.n * self.u != self.m:
            raise ValueError("smooth part times cofactor does not give m")
        if any(p >= self.X for p in self.smooth_part.primes):
            raise ValueError("smooth part holds a prime >= X")

    @property
    def resolved(self) -> bool:
        return self.u < self.X * self.X

    def full(self, rho_budget: int = DEFAULT_RHO_BUDGET) -> Factorization:
        """Complete factorization of ``m``; factors ``u`` by rho if needed."""
        if self.u == 1:
            return self.smooth_part
        if self.resolved:
            return self.smooth_part * Factorization(self.u, ((self.u, 1),))
        return self.smooth_part * _factor_rough(self.u, rho_budget)


# ---------------------------------------------------------------- sieving


@lru_cache(maxsize=8)
def primes_below(limit: int) -> np.ndarray:
    """All primes ``p < limit`` as an int64 array."""
    if limit <= 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit - 1) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def prime_mask(lo: int, hi: int) -> np.ndarray:
    """Boolean mask over ``[lo, hi)`` marking primes (segmented sieve)."""
    size = hi - lo
    mask = np.ones(max(size, 0), dtype=bool)
    if size <= 0:
        return mask
    for v in range(lo, min(hi, 2)):
        mask[v - lo] = False
    for p in primes_below(math.isqrt(hi - 1) + 1).tolist():
        start = max(p * p, -(-lo // p) * p)
        if start >= hi:
            continue
        mask[start - lo :: p] = False
    return mask


# ---------------------------------------------------------------- primality

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
# first 13 prime bases are deterministic below this bound
_MR_DETERMINISTIC = 3317044064679887385961981


def _strong_probable_prime(n: int, a: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def _jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _strong_lucas_probable_prime(n: int) -> bool:
    # Selfridge parameters: first D in 5, -7, 9, -11, ... with (D/n) = -1
    D = 5
    while True:
        j = _jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
        if D == 13 and math.isqrt(n) ** 2 == n:
            return False
    P, Q = 1, (1 - D) // 4
    d, s = n + 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    inv2 = (n + 1) // 2
    U, V, Qk = 1, P, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = (P * U + V) * inv2 % n, (D * U + P * V) * inv2 % n
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        if V == 0:
            return True
        Qk = Qk * Qk % n
    return False


def is_prime(n: int) -> bool:
    """Primality test, deterministic below 3.3e24 and BPSW above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n < 43 * 43:
        return True
    if n < _MR_DETERMINISTIC:
        return all(_strong_probable_prime(n, a) for a in _MR_BASES)
    return _strong_probable_prime(n, 2) and _strong_lucas_probable_prime(n)


def iroot(n: int, k: int) -> int:
    """Largest r with r**k <= n."""
    if n < 2:
        return n
    r = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        s = ((k - 1) * r + n // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def is_prime_power(n: int) -> tuple[int, int] | None:
    """Return ``(p, e)`` with ``p**e == n`` and p prime, else None."""
    if n < 2:
        return None
    for e in range(n.bit_length(), 0, -1):
        r = iroot(n, e)
        if r >= 2 and r**e == n and is_prime(r):
            return r, e
    return None


# ---------------------------------------------------------------- factoring


@lru_cache(maxsize=1)
def _trial_blocks(limit: int = TRIAL_LIMIT, block: int = 512):
    primes = primes_below(limit).tolist()
    blocks = []
    for i in range(0, len(primes), block):
        chunk = primes[i : i + block]
        blocks.append((math.prod(chunk), chunk))
    return blocks


def _trial_divide(n: int) -> tuple[dict[int, int], int]:
    found: dict[int, int] = {}
    for prod, chunk in _trial_blocks():
        if chunk[0] * chunk[0] > n:
            break
        if math.gcd(prod, n) == 1:
            continue
        for p in chunk:
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                found[p] = e
    return found, n


def brent_rho(n: int, budget: int = DEFAULT_RHO_BUDGET, c: int = 1) -> int:
    """Find a nontrivial factor of composite ``n`` with Brent's variant of rho.

    Tries successive polynomial constants ``c`` on a failed cycle. Raises
    FactorizationBudgetExceeded after ``budget`` total iterations.
    """
    if n % 2 == 0:
        return 2
    used = 0
    m = 128
    while True:
        y, r, acc = 2, 1, 1
        g = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    acc = acc * abs(x - y) % n
                g = math.gcd(acc, n)
                k += m
            used += r
            if used > budget:
                raise FactorizationBudgetExceeded(n, budget)
            r *= 2
        if g == n:
            # backtrack one step at a time from the saved point
            while True:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
                if g > 1:
                    break
        if g != n:
            return g
        c += 1


def _factor_rough(n: int, budget: int = DEFAULT_RHO_BUDGET) -> Factorization:
    """Factor ``n`` whose small prime factors are already removed."""
    found: dict[int, int] = {}
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        pp = is_prime_power(m)
        if pp is not None:
            found[pp[0]] = found.get(pp[0], 0) + pp[1]
            continue
        d = brent_rho(m, budget)
        stack.extend((d, m // d))
    return Factorization.from_dict(found)


def factorize(n: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> Factorization:
    """Exact factorization: trial division below 10**6, then Brent rho."""
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    small, rest = _trial_divide(n)
    f = Factorization.from_dict(small)
    if rest > 1:
        f = f * _factor_rough(rest, rho_budget)
    return f


def factor_q3_minus_1(q: int) -> Factorization:
    """Factorization of q**3 - 1 via its factors q - 1 and q**2 + q + 1."""
    return factorize(q - 1) * factorize(q * q + q + 1)


# ---------------------------------------------------------------- multiplicative functions


def omega(f: Factorization) -> int:
    return len(f.factors)


def euler_phi(f: Factorization) -> int:
    phi = 1
    for p, e in f.factors:
        phi *= (p - 1) * p ** (e - 1)
    return phi


def radical(f: Factorization) -> int:
    return math.prod(f.primes)


# ---------------------------------------------------------------- windowed sieve


@dataclass
class _RootTable:
    """Primes below X that divide some value of x**2 + x + 1, with its roots."""

    primes: np.ndarray
    roots: np.ndarray  # shape (len(primes), 2); ell = 3 repeats its root


@lru_cache(maxsize=4)
def _cyclotomic_roots(X: int) -> _RootTable:
    primes = primes_below(X).tolist()
    ps, rs = [], []
    for ell in primes:
        if ell == 3:
            ps.append(3)
            rs.append((1, 1))
        elif ell % 3 == 1:
            # roots of x^2+x+1 are the primitive cube roots of unity
            for c in range(2, ell):
                w = pow(c, (ell - 1) // 3, ell)
                if w != 1:
                    break
            ps.append(ell)
            rs.append((w, w * w % ell))
    return _RootTable(np.array(ps, dtype=np.int64),
                      np.array(rs, dtype=np.int64).reshape(-1, 2))


def _collect_hits(lo: int, width: int, mask: np.ndarray, moduli: np.ndarray,
                  residues: np.ndarray, out_pos: list, out_mod: list):
    """Record positions i in [0, width) with (lo + i) % m == r and mask[i]."""
    if len(moduli) == 0:
        return
    starts = (residues - lo) % moduli
    small = moduli < width
    for m, s in zip(moduli[small].tolist(), starts[small].tolist()):
        idx = np.arange(s, width, m)
        idx = idx[mask[idx]]
        if len(idx):
            out_pos.append(idx)
            out_mod.append(np.full(len(idx), m, dtype=np.int64))
    big_m = moduli[~small]
    big_s = starts[~small]
    keep = big_s < width
    big_m, big_s = big_m[keep], big_s[keep]
    keep = mask[big_s]
    if keep.any():
        out_pos.append(big_s[keep])
        out_mod.append(big_m[keep])


def _grouped(width: int, pos: list, mod: list) -> dict[int, list[int]]:
    if not pos:
        return {}
    p = np.concatenate(pos)
    m = np.concatenate(mod)
    order = np.lexsort((m, p))
    p, m = p[order].tolist(), m[order].tolist()
    out: dict[int, list[int]] = {}
    for i, ell in zip(p, m):
        lst = out.setdefault(i, [])
        if not lst or lst[-1] != ell:
            lst.append(ell)
    return out


def _strip(n: int, candidates: list[int]) -> tuple[dict[int, int], int]:
    found = {}
    for ell in candidates:
        e = 0
        while n % ell == 0:
            n //= ell
            e += 1
        if e:
            found[ell] = e
    return found, n


def partial_factor_window(lo: int, hi: int, X: int = DEFAULT_SMOOTH_BOUND):
    """Partial factorization data for each prime q in ``[lo, hi)``.

    Returns a list of ``(q, Factorization(q - 1), PartialFactorization)``.
    """
    width = hi - lo
    if width <= 0:
        return []
    mask = prime_mask(lo, hi)
    if not mask.any():
        return []
    # q - 1: sieve by primes up to sqrt(hi); the leftover cofactor is prime
    sq = primes_below(math.isqrt(max(hi - 2, 1)) + 1)
    pos, mod = [], []
    _collect_hits(lo, width, mask, sq, np.ones_like(sq), pos, mod)
    qm1_hits = _grouped(width, pos, mod)

    table = _cyclotomic_roots(X)
    pos, mod = [], []
    _collect_hits(lo, width, mask, table.primes, table.roots[:, 0], pos, mod)
    two = table.primes != 3
    _collect_hits(lo, width, mask, table.primes[two], table.roots[two, 1], pos, mod)
    cyc_hits = _grouped(width, pos, mod)

    out = []
    for i in np.flatnonzero(mask).tolist():
        q = lo + i
        found, rest = _strip(q - 1, qm1_hits.get(i, []))
        if rest > 1:
            found[rest] = found.get(rest, 0) + 1
        fq = Factorization.from_dict(found)
        m = q * q + q + 1
        found, u = _strip(m, cyc_hits.get(i, []))
        pf = PartialFactorization(m, Factorization.from_dict(found), u, X)
        out.append((q, fq, pf))
    return out


def windowed_partial_factor(lo: int, hi: int, X: int = DEFAULT_SMOOTH_BOUND,
                            window: int = DEFAULT_WINDOW
                            ) -> Iterator[tuple[int, Factorization, PartialFactorization]]:
    """Stream partial factorization data for primes q in the closed range [lo, hi].

    For each prime q yields the complete factorization of q - 1 and the
    X-smooth part of q**2 + q + 1 together with the unfactored cofactor.
    The range is processed in windows of ``window`` consecutive integers.
    """
    if lo > hi:
        raise ValueError("empty range")
    if X < 2:
        raise ValueError("smoothness bound must be >= 2")
    start = lo
    while start <= hi:
        stop = min(start + window, hi + 1)
        yield from partial_factor_window(start, stop, X)
        start = stop


def prime_powers_in(lo: int, hi: int) -> list[tuple[int, int, int]]:
    """Proper prime powers ``p**e`` (e >= 2) in [lo, hi] as (q, p, e), sorted."""
    out = []
    e = 2
    while 2**e <= hi:
        for p in primes_below(iroot(hi, e) + 1).tolist():
            v = p**e
            if v >= lo:
                out.append((v, p, e))
        e += 1
    out.sort()
    return out

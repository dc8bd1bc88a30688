"""Prime sieve criteria for ruling out q, with exact rational evaluation.

For a split ``rad(q^3 - 1) = k * P * L`` the modified criterion needs

    theta^2 delta > 2 eps   and
    sqrt(q) > C (theta^2 4^w(k) (2 w(P) - 1 + 2 delta) + w(L) - eps)
              / (theta^2 delta - 2 eps)

with delta = 1 - 2 sum_{p|P} 1/p, eps = sum_{p|L} 1/p, theta = phi(k)/k and
C = 2 for even q, 3 otherwise. With L = 1 it collapses to the plain criterion
``delta > 0 and sqrt(q) > C 4^w(k) ((2 w(P) - 1)/delta + 2)``.

The square-root comparison is done on squares of exact rationals.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .numth import (
    DEFAULT_SMOOTH_BOUND,
    DEFAULT_WINDOW,
    Factorization,
    PartialFactorization,
    _trial_blocks,
    factor_q3_minus_1,
    partial_factor_window,
    prime_powers_in,
)

PSC = "PSC"
MPSC = "MPSC"
PSC_PARTIAL = "PSC-partial"

CRITERIA = ("psc", "mpsc", "psc-partial")
DEFAULT_CROSSOVER = 10**10
MAX_Q = 8 * 10**12


def c_q(q: int) -> int:
    return 2 if q % 2 == 0 else 3


@dataclass(frozen=True)
class SieveSplit:
    k_primes: tuple[int, ...]
    P_primes: tuple[int, ...]
    L_primes: tuple[int, ...]
    delta: Fraction
    epsilon: Fraction
    theta: Fraction
    c_q: int

    @classmethod
    def make(cls, q: int, k: Iterable[int], P: Iterable[int], L: Iterable[int] = ()):
        k, P, L = tuple(sorted(k)), tuple(sorted(P)), tuple(sorted(L))
        delta = 1 - 2 * sum((Fraction(1, p) for p in P), Fraction(0))
        eps = sum((Fraction(1, p) for p in L), Fraction(0))
        theta = Fraction(1)
        for p in k:
            theta *= Fraction(p - 1, p)
        return cls(k, P, L, delta, eps, theta, c_q(q))

    def check_partition(self, fact: Factorization) -> None:
        got = sorted(self.k_primes + self.P_primes + self.L_primes)
        if got != fact.primes:
            raise ValueError("split does not partition the primes of q^3 - 1")


@dataclass
class SieveVerdict:
    q: int
    ruled_out: bool
    criterion: str | None = None
    winning_split: SieveSplit | None = None
    margin: Fraction | None = None
    p: int = 0
    e: int = 0
    factors: Factorization | None = None
    partial: PartialFactorization | None = None
    factors_qm1: Factorization | None = None


def sqrt_exceeds(q: int, rhs: Fraction) -> bool:
    """Exact test of ``sqrt(q) > rhs``."""
    if rhs < 0:
        return True
    return q * rhs.denominator**2 > rhs.numerator**2


def _margin(q: int, rhs: Fraction) -> Fraction:
    # q - rhs*|rhs|: positive exactly when sqrt(q) > rhs
    return q - rhs * abs(rhs)


def mpsc_rhs(q: int, omega_k: int, omega_P: int, omega_L: int, delta: Fraction,
             eps: Fraction, theta: Fraction) -> Fraction | None:
    """Right-hand side of the modified criterion, or None if theta^2 delta <= 2 eps."""
    t2 = theta * theta
    denom = t2 * delta - 2 * eps
    if denom <= 0:
        return None
    num = c_q(q) * (t2 * 4**omega_k * (2 * omega_P - 1 + 2 * delta) + omega_L - eps)
    return num / denom


def psc_rhs(q: int, omega_k: int, omega_P: int, delta: Fraction) -> Fraction | None:
    if delta <= 0:
        return None
    return c_q(q) * 4**omega_k * (Fraction(2 * omega_P - 1) / delta + 2)


def eval_mpsc(q: int, fact: Factorization, split: SieveSplit) -> bool:
    split.check_partition(fact)
    rhs = mpsc_rhs(q, len(split.k_primes), len(split.P_primes), len(split.L_primes),
                   split.delta, split.epsilon, split.theta)
    return rhs is not None and sqrt_exceeds(q, rhs)


def eval_psc(q: int, fact: Factorization, k_primes: Sequence[int],
             P_primes: Sequence[int]) -> bool:
    if sorted(list(k_primes) + list(P_primes)) != fact.primes:
        raise ValueError("k and P do not partition the primes of q^3 - 1")
    delta = 1 - 2 * sum((Fraction(1, p) for p in P_primes), Fraction(0))
    rhs = psc_rhs(q, len(k_primes), len(P_primes), delta)
    return rhs is not None and sqrt_exceeds(q, rhs)


def _recip_suffix(primes: Sequence[int]) -> list[Fraction]:
    # suffix[i] = sum of 1/p over primes[i:]
    out = [Fraction(0)] * (len(primes) + 1)
    for i in range(len(primes) - 1, -1, -1):
        out[i] = out[i + 1] + Fraction(1, primes[i])
    return out


def best_split_search(q: int, fact: Factorization, criterion: str = "mpsc") -> SieveVerdict:
    """Try every contiguous split of the ascending primes of q^3 - 1.

    k takes the smallest i primes and L the largest j. All PSC splits (j = 0)
    are tried before any MPSC split; the first passing split wins. When
    nothing passes, ``margin`` is the best margin seen (None if no split had
    a positive denominator).
    """
    primes = fact.primes
    m = len(primes)
    suffix = _recip_suffix(primes)
    theta = [Fraction(1)]
    for p in primes:
        theta.append(theta[-1] * Fraction(p - 1, p))
    best = None

    for i in range(m + 1):
        delta = 1 - 2 * suffix[i]
        rhs = psc_rhs(q, i, m - i, delta)
        if rhs is None:
            continue
        mg = _margin(q, rhs)
        if mg > 0:
            split = SieveSplit(tuple(primes[:i]), tuple(primes[i:]), (), delta,
                               Fraction(0), theta[i], c_q(q))
            return SieveVerdict(q, True, PSC, split, mg, factors=fact)
        best = mg if best is None else max(best, mg)

    if criterion == "mpsc":
        for i in range(m + 1):
            t = theta[i]
            for j in range(1, m - i + 1):
                eps = suffix[m - j]
                delta = 1 - 2 * (suffix[i] - eps)
                rhs = mpsc_rhs(q, i, m - i - j, j, delta, eps, t)
                if rhs is None:
                    continue
                mg = _margin(q, rhs)
                if mg > 0:
                    split = SieveSplit(tuple(primes[:i]), tuple(primes[i:m - j]),
                                       tuple(primes[m - j:]), delta, eps, t, c_q(q))
                    return SieveVerdict(q, True, MPSC, split, mg, factors=fact)
                best = max(best, mg) if best is not None else mg
    return SieveVerdict(q, False, None, None, best, factors=fact)


def floor_log(u: int, X: int) -> int:
    """Largest s with X**s <= u (u >= 1)."""
    s, v = 0, X
    while v <= u:
        s += 1
        v *= X
    return s


def _check_rough(u: int, X: int) -> None:
    for prod, chunk in _trial_blocks():
        if chunk[0] >= X:
            break
        g = math.gcd(prod, u)
        if g > 1 and min(p for p in chunk if g % p == 0) < X:
            raise ValueError(f"cofactor {u} has a prime factor below {X}")


def eval_psc_partial(q: int, fact_qm1: Factorization, pf: PartialFactorization
                     ) -> SieveVerdict:
    """Plain criterion for prime q when part of q^2 + q + 1 is unfactored.

    The s <= floor(log_X u) unknown primes all go into P and are charged the
    worst-case contribution 2s/X to delta. For a fixed number of primes in k
    the criterion ignores theta, so the best assignment puts the smallest
    known primes in k; that makes the contiguous splits exhaustive.
    """
    X = pf.X
    _check_rough(pf.u, X)
    if pf.resolved:
        full = fact_qm1 * pf.full()
        v = best_split_search(q, full, "psc")
        if v.criterion == PSC:
            v.criterion = PSC_PARTIAL
        v.partial, v.factors_qm1 = pf, fact_qm1
        return v
    s = floor_log(pf.u, X)
    known = (fact_qm1 * pf.smooth_part).primes
    m = len(known)
    suffix = _recip_suffix(known)
    unknown = Fraction(2 * s, X)
    best = None
    for i in range(m + 1):
        delta = 1 - 2 * suffix[i] - unknown
        rhs = psc_rhs(q, i, m - i + s, delta)
        if rhs is None:
            continue
        mg = _margin(q, rhs)
        if mg > 0:
            split = SieveSplit(tuple(known[:i]), tuple(known[i:]), (), delta,
                               Fraction(0), Fraction(1), c_q(q))
            return SieveVerdict(q, True, PSC_PARTIAL, split, mg, partial=pf,
                                factors_qm1=fact_qm1)
        best = mg if best is None else max(best, mg)
    return SieveVerdict(q, False, None, None, best, partial=pf, factors_qm1=fact_qm1)


# ---------------------------------------------------------------- range scanning


def _scan_window(lo: int, hi: int, criterion: str, X: int, crossover: int
                 ) -> list[SieveVerdict]:
    """Verdicts for all prime powers in the half-open window [lo, hi)."""
    out = []
    for q, fq, pf in partial_factor_window(lo, hi, X):
        if criterion == "psc-partial" or q >= crossover:
            v = eval_psc_partial(q, fq, pf)
        else:
            v = best_split_search(q, fq * pf.full(), criterion)
            v.partial, v.factors_qm1 = pf, fq
        v.p, v.e = q, 1
        out.append(v)
    for q, p, e in prime_powers_in(lo, hi - 1):
        v = best_split_search(q, factor_q3_minus_1(q),
                              "psc" if criterion == "psc-partial" else criterion)
        v.p, v.e = p, e
        out.append(v)
    out.sort(key=lambda v: v.q)
    return out


def scan_range(lo: int, hi: int, criterion: str = "mpsc", X: int = DEFAULT_SMOOTH_BOUND,
               crossover: int = DEFAULT_CROSSOVER, workers: int = 1,
               window: int = DEFAULT_WINDOW) -> Iterator[SieveVerdict]:
    """One verdict per prime power q in the closed range [lo, hi], ascending."""
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    lo = max(lo, 2)
    if hi > MAX_Q:
        raise ValueError(f"range exceeds {MAX_Q}")
    bounds = [(a, min(a + window, hi + 1)) for a in range(lo, hi + 1, window)]
    args = [(a, b, criterion, X, crossover) for a, b in bounds]
    if workers <= 1 or len(bounds) == 1:
        for a in args:
            yield from _scan_window(*a)
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for chunk in ex.map(_scan_window, *zip(*args)):
            yield from chunk

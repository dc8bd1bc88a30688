import itertools
import math
import random
from fractions import Fraction

import pytest

from primtrace.numth import factor_q3_minus_1, factorize, is_prime, windowed_partial_factor
from primtrace.sieve import (
    MPSC,
    PSC,
    PSC_PARTIAL,
    SieveSplit,
    best_split_search,
    eval_mpsc,
    eval_psc,
    eval_psc_partial,
    scan_range,
    sqrt_exceeds,
)


def float_psc(q, k, P):
    """Floating point restatement of the plain criterion, as a rough oracle."""
    delta = 1 - 2 * sum(1 / p for p in P)
    if delta <= 0:
        return False
    C = 2 if q % 2 == 0 else 3
    return math.sqrt(q) > C * 4 ** len(k) * ((2 * len(P) - 1) / delta + 2)


def test_sqrt_exceeds_exact():
    for q in range(1, 400):
        for num in range(-5, 60):
            for den in (1, 2, 3, 7):
                r = Fraction(num, den)
                assert sqrt_exceeds(q, r) == (r < 0 or q * den * den > num * num)
    # a perfect square sits on the boundary and must not pass
    assert not sqrt_exceeds(49, Fraction(7))
    assert sqrt_exceeds(50, Fraction(7))


def test_q2_not_ruled_out():
    for crit in ("psc", "mpsc"):
        assert not best_split_search(2, factor_q3_minus_1(2), crit).ruled_out


def test_mpsc_with_empty_L_equals_psc():
    rng = random.Random(11)
    for _ in range(300):
        q = rng.choice([rng.randrange(3, 10**7), rng.randrange(10**8, 10**11)])
        if not is_prime(q):
            continue
        f = factor_q3_minus_1(q)
        primes = f.primes
        k = [p for p in primes if rng.random() < 0.3]
        P = [p for p in primes if p not in k]
        split = SieveSplit.make(q, k, P, ())
        assert eval_mpsc(q, f, split) == eval_psc(q, f, k, P)


def test_psc_matches_float_oracle_away_from_boundary():
    rng = random.Random(3)
    checked = 0
    while checked < 200:
        q = rng.randrange(10**5, 10**12)
        if not is_prime(q):
            continue
        f = factor_q3_minus_1(q)
        for i in range(len(f.primes) + 1):
            k, P = f.primes[:i], f.primes[i:]
            assert eval_psc(q, f, k, P) == float_psc(q, k, P)
        checked += 1


def all_psc_splits(q, f):
    primes = f.primes
    for r in range(len(primes) + 1):
        for k in itertools.combinations(primes, r):
            yield k, [p for p in primes if p not in k]


def test_contiguous_psc_search_is_exhaustive():
    # any k/P split that passes implies the contiguous search passes
    rng = random.Random(8)
    qs = [q for q in range(3, 3000) if is_prime(q) or q in (4, 8, 9, 16, 25, 27)]
    qs += [q for q in (rng.randrange(10**6, 10**9) for _ in range(300)) if is_prime(q)]
    for q in qs:
        f = factor_q3_minus_1(q)
        if len(f.primes) > 12:
            continue
        any_pass = any(eval_psc(q, f, k, P) for k, P in all_psc_splits(q, f))
        assert best_split_search(q, f, "psc").ruled_out == any_pass, q


def test_winning_split_is_sound_and_margin_sign():
    rng = random.Random(5)
    for _ in range(400):
        q = rng.randrange(2, 10**9)
        if not is_prime(q):
            continue
        f = factor_q3_minus_1(q)
        v = best_split_search(q, f, "mpsc")
        if v.ruled_out:
            s = v.winning_split
            assert v.margin > 0
            assert eval_mpsc(q, f, s)
            if v.criterion == PSC:
                assert s.L_primes == () and eval_psc(q, f, s.k_primes, s.P_primes)
            else:
                assert v.criterion == MPSC
                assert not best_split_search(q, f, "psc").ruled_out
        else:
            assert v.margin is None or v.margin <= 0


def test_named_survivors_stay():
    for q in (4708304701, 1440278401):
        assert not best_split_search(q, factor_q3_minus_1(q), "mpsc").ruled_out


def test_partial_path_sound_and_exact_when_resolved():
    X = 1000
    for q, fq, pf in windowed_partial_factor(10**9, 10**9 + 20000, X):
        v = eval_psc_partial(q, fq, pf)
        full = best_split_search(q, fq * pf.full(), "psc")
        if v.ruled_out:
            assert full.ruled_out
            assert v.criterion == PSC_PARTIAL
        if pf.resolved:
            assert v.ruled_out == full.ruled_out


def test_partial_path_rejects_bad_cofactor():
    from primtrace.numth import Factorization, PartialFactorization

    q = next(q for q in range(10**9, 10**9 + 1000) if is_prime(q) and q % 3 == 1)
    m = q * q + q + 1
    assert m % 3 == 0
    bad = PartialFactorization(m, Factorization(1, ()), m, 10)
    with pytest.raises(ValueError):
        eval_psc_partial(q, factorize(q - 1), bad)


def test_scan_nesting_and_worker_invariance():
    mp = list(scan_range(2, 20000, "mpsc"))
    ps = list(scan_range(2, 20000, "psc"))
    assert [v.q for v in mp] == [v.q for v in ps]
    for a, b in zip(mp, ps):
        assert (a.p, a.e) == (b.p, b.e)
        if b.ruled_out:
            assert a.ruled_out
        assert a.ruled_out == (b.ruled_out or a.criterion == MPSC)
    par = list(scan_range(2, 20000, "mpsc", workers=2, window=3000))
    assert [(v.q, v.ruled_out, v.criterion, v.margin) for v in par] == \
        [(v.q, v.ruled_out, v.criterion, v.margin) for v in mp]


def test_scan_composite_survivor_window():
    vs = [v for v in scan_range(1440278000, 1440279000, "mpsc") if v.e > 1]
    assert [(v.q, v.p, v.e, v.ruled_out) for v in vs] == [(1440278401, 37951, 2, False)]


def test_scan_errors():
    with pytest.raises(ValueError):
        list(scan_range(2, 10, "bogus"))
    with pytest.raises(ValueError):
        list(scan_range(2, 9 * 10**12))


def test_noncontiguous_mpsc_splits_rescue_no_survivor():
    # every 3-colouring of the primes into k, P, L, on survivors with few primes
    from primtrace.numth import is_prime_power

    rng = random.Random(12)
    surv = []
    for q in range(2, 30000):
        if is_prime_power(q) is None:
            continue
        f = factor_q3_minus_1(q)
        if len(f.primes) <= 7 and not best_split_search(q, f, "mpsc").ruled_out:
            surv.append((q, f))
    for q, f in rng.sample(surv, 60):
        ps = f.primes
        for lab in itertools.product(range(3), repeat=len(ps)):
            parts = [[p for p, l in zip(ps, lab) if l == c] for c in range(3)]
            assert not eval_mpsc(q, f, SieveSplit.make(q, *parts)), (q, parts)

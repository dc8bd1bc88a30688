import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from primtrace.gf import CubicField, build_tower, find_primitive_root_base
from primtrace.gf import polys
from primtrace.gf.basefield import PolyField, PrimeField, TableField, _PrimeScalar, _PrimeVector
from primtrace.gf.chains import batch_pow_chain, naive_cost, plan_chain
from primtrace.numth import factorize, is_prime

SMALL_Q = [2, 3, 4, 5, 7, 8, 9, 11, 27]


def mult_order(F, x):
    y, n = x, 1
    while y != F.one:
        y = F.mul(y, x)
        n += 1
    return n


def elements(F):
    q = F.q
    for c0 in range(q):
        for c1 in range(q):
            for c2 in range(q):
                yield F.from_ints((c0, c1, c2))


def rand_elt(F, rng):
    return F.from_ints(tuple(rng.randrange(F.q) for _ in range(3)))


@pytest.fixture(scope="module", params=SMALL_Q + [531441, 4708304701, 2**23])
def tower(request):
    return build_tower(request.param, seed=3)


def test_field_axioms(tower):
    F = tower.field
    rng = random.Random(tower.q)
    for _ in range(40):
        a, b, c = (rand_elt(F, rng) for _ in range(3))
        assert F.mul(a, F.mul(b, c)) == F.mul(F.mul(a, b), c)
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(a, b) == F.mul(b, a)
        assert F.sqr(a) == F.mul(a, a)
        assert F.add(F.sub(a, b), b) == a
        assert F.add(a, F.neg(a)) == F.zero
        if not F.is_zero(a):
            assert F.mul(a, F.inv(a)) == F.one
        # Frobenius is additive and fixes exactly the base field
        q = tower.q
        assert F.pow(F.add(a, b), q) == F.add(F.pow(a, q), F.pow(b, q))
        t = F.trace(a)
        assert F.embed(t) == F.add(F.add(a, F.pow(a, q)), F.pow(a, q * q))
        assert F.embed(F.norm(a)) == F.pow(a, q * q + q + 1)
    assert F.is_irreducible()
    with pytest.raises(ZeroDivisionError):
        F.inv(F.zero)


def test_vector_ops_match_scalar(tower):
    F = tower.field
    rng = random.Random(7)
    xs = [rand_elt(F, rng) for _ in range(64)] + [F.zero, F.one]
    ys = [rand_elt(F, rng) for _ in range(66)]
    cols = lambda es: F.vfrom_ints(*(np.array([F.to_ints(e)[i] for e in es], dtype=np.int64)
                                     for i in range(3)))
    back = lambda A: [tuple(int(c[j]) for c in F.vto_ints(A)) for j in range(len(xs))]
    X, Y = cols(xs), cols(ys)
    assert back(F.vmul(X, Y)) == [tuple(F.to_ints(F.mul(a, b))) for a, b in zip(xs, ys)]
    assert back(F.vadd(X, Y)) == [tuple(F.to_ints(F.add(a, b))) for a, b in zip(xs, ys)]
    assert back(F.vsub(X, Y)) == [tuple(F.to_ints(F.sub(a, b))) for a, b in zip(xs, ys)]
    assert back(F.vsqr(X)) == [tuple(F.to_ints(F.sqr(a))) for a in xs]
    inv = [F.zero if F.is_zero(a) else F.inv(a) for a in xs]
    assert back(F.vinv(X)) == [tuple(F.to_ints(a)) for a in inv]
    assert back(F.vpow(X, 12345)) == [tuple(F.to_ints(F.pow(a, 12345))) for a in xs]
    tr = F.base.vto_int(F.vtrace(X)).tolist()
    assert tr == [F.base.to_int(F.trace(a)) for a in xs]
    prim = F.vis_primitive(X).tolist()
    assert prim == [not F.is_zero(a) and F.is_primitive(a) for a in xs]


def test_with_trace_hits_the_requested_trace(tower):
    F = tower.field
    rng = np.random.default_rng(1)
    q = tower.q
    for a_int in {0, 1, q - 1, q // 2}:
        a = F.base.from_int(a_int)
        X = F.with_trace(a, rng.integers(0, q, 50), rng.integers(0, q, 50))
        assert (F.base.vto_int(F.vtrace(X)) == a_int).all()


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_is_primitive_matches_order_oracle(q):
    F = build_tower(q).field
    count = 0
    for x in elements(F):
        if F.is_zero(x):
            continue
        prim = mult_order(F, x) == q**3 - 1
        assert F.is_primitive(x) == prim
        count += prim
    phi = sum(1 for k in range(1, q**3) if math.gcd(k, q**3 - 1) == 1)
    assert count == phi


def test_trace_matches_char_poly_prime_field():
    # over F_7 the trace of x is minus the x^2 coefficient of its minimal polynomial
    q = 7
    base = PrimeField(q)
    f = (2, 3, 0)  # x^3 + 3x + 2; no roots mod 7
    assert all((x**3 + 3 * x + 2) % 7 for x in range(7))
    F = CubicField(base, f)
    assert F.trace(F.gen) == 0
    assert F.norm(F.gen) == (-2) % 7
    # trace of x^2 = (sum of roots)^2 - 2 e2 = 0 - 2*3
    assert F.trace(F.sqr(F.gen)) == (-6) % 7
    assert F.trace(F.one) == 3


def independent_mul(p, f, a, b):
    """Schoolbook product mod a monic cubic over F_p using plain integers."""
    prod = [0] * 5
    for i in range(3):
        for j in range(3):
            prod[i + j] += a[i] * b[j]
    for k in (4, 3):
        c = prod[k]
        prod[k] = 0
        for i in range(3):
            prod[k - 3 + i] -= c * f[i]
    return tuple(x % p for x in prod[:3])


@pytest.mark.parametrize("p", [3, 101, 4708304701, 7999999999993])
def test_cubic_mul_against_plain_integers(p):
    assert is_prime(p)
    rng = random.Random(p)
    f = (rng.randrange(p), rng.randrange(p), rng.randrange(p))
    F = CubicField(PrimeField(p), f)
    for _ in range(200):
        a = tuple(rng.randrange(p) for _ in range(3))
        b = tuple(rng.randrange(p) for _ in range(3))
        assert tuple(F.mul(a, b)) == independent_mul(p, f, a, b)


@given(st.sampled_from([2**31 - 1, 3037000493, 4708304701, 7999999999993, 1000003]),
       st.lists(st.integers(min_value=0), min_size=1, max_size=40),
       st.lists(st.integers(min_value=0), min_size=1, max_size=40))
@settings(max_examples=200, deadline=None)
def test_vector_mulmod_large_primes(p, xs, ys):
    n = min(len(xs), len(ys))
    a = np.array([x % p for x in xs[:n]], dtype=np.int64)
    b = np.array([y % p for y in ys[:n]], dtype=np.int64)
    a[0], b[0] = p - 1, p - 1
    got = _PrimeVector(p).mul(a, b).tolist()
    assert got == [int(x) * int(y) % p for x, y in zip(a.tolist(), b.tolist())]


@pytest.mark.parametrize("p,e", [(2, 2), (2, 5), (3, 3), (5, 2), (3, 6)])
def test_table_field_matches_poly_field(p, e):
    rng = np.random.default_rng(p * 100 + e)
    from primtrace.gf.basefield import random_base_modulus

    mod = random_base_modulus(p, e, rng)
    T, P = TableField(p, mod), PolyField(p, mod)
    q = p**e
    for x in range(q):
        for y in range(0, q, max(1, q // 17)):
            tx, ty, px, py = T.from_int(x), T.from_int(y), P.from_int(x), P.from_int(y)
            assert T.to_int(T.s.mul(tx, ty)) == P.to_int(P.s.mul(px, py))
            assert T.to_int(T.s.add(tx, ty)) == P.to_int(P.s.add(px, py))
            assert T.to_int(T.s.sub(tx, ty)) == P.to_int(P.s.sub(px, py))
        assert T.to_int(T.s.neg(T.from_int(x))) == P.to_int(P.s.neg(P.from_int(x)))
    xs = np.arange(q, dtype=np.int64)
    ys = (xs * 7 + 3) % q
    assert (T.vto_int(T.v.mul(T.vfrom_int(xs), T.vfrom_int(ys)))
            == P.vto_int(P.v.mul(P.vfrom_int(xs), P.vfrom_int(ys)))).all()
    assert (T.vto_int(T.v.add(T.vfrom_int(xs), T.vfrom_int(ys)))
            == P.vto_int(P.v.add(P.vfrom_int(xs), P.vfrom_int(ys)))).all()


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_irreducible_cubic_count(p):
    Fp = _PrimeScalar(p)
    n = sum(polys.is_irreducible(Fp, [a, b, c, 1], p)
            for a in range(p) for b in range(p) for c in range(p))
    assert n == (p**3 - p) // 3


def test_irreducibility_agrees_with_root_test_for_cubics():
    p = 13
    Fp = _PrimeScalar(p)
    for a in range(p):
        for b in range(0, p, 3):
            f = [a, b, 1, 1]
            no_root = all((x**3 + x * x + b * x + a) % p for x in range(p))
            assert polys.is_irreducible(Fp, f, p) == no_root


@pytest.mark.parametrize("q", [3, 5, 7, 11, 13, 4, 8, 9, 49, 4708304701])
def test_smallest_primitive_root(q):
    t = build_tower(q)
    g = find_primitive_root_base(t)
    gi = t.base.to_int(g)
    primes = factorize(q - 1).primes
    S = t.base.s

    def prim(c):
        x = t.base.from_int(c)
        return c != 0 and all(S.pow(x, (q - 1) // ell) != S.one for ell in primes)

    assert prim(gi)
    if q < 10**6:
        assert not any(prim(c) for c in range(1, gi))


def test_tower_rejects_bad_input():
    with pytest.raises(ValueError):
        build_tower(6)
    with pytest.raises(ValueError):
        build_tower(7, cubic_modulus=(0, 0, 0))  # x^3 has a root
    with pytest.raises(ValueError):
        find_primitive_root_base(build_tower(2))


def test_tower_is_deterministic_in_seed():
    a, b = build_tower(3**7, seed=5), build_tower(3**7, seed=5)
    assert (a.base_modulus, a.cubic_modulus) == (b.base_modulus, b.cubic_modulus)


# ---------------------------------------------------------------- chains


def test_chain_small_cases():
    plan = plan_chain((5, 3))
    assert plan.cost <= 4
    assert plan_chain((1,)).cost == 0
    assert batch_pow_chain(3, [5, 3, 1], lambda a, b: a * b) == [243, 27, 3]
    with pytest.raises(ValueError):
        plan_chain((0, 3))


def test_chain_matches_pow_and_beats_naive():
    rng = random.Random(5)
    for _ in range(300):
        exps = [rng.randrange(1, 2 ** rng.randrange(1, 80)) for _ in range(rng.randrange(1, 8))]
        x = rng.randrange(2, 10**6)
        M = 2**127 - 1
        got = batch_pow_chain(x, exps, lambda a, b: a * b % M)
        assert got == [pow(x, e, M) for e in exps]
        assert plan_chain(tuple(exps)).cost <= sum(naive_cost(e) for e in exps)


def test_primitivity_exponents_use_shared_chain():
    t = build_tower(4708304701)
    F = t.field
    exps = F.primitivity_exponents()
    n = F.order
    assert sorted(exps) == sorted(n // ell for ell in t.order_fact.primes)
    assert plan_chain(tuple(exps)).cost < sum(naive_cost(e) for e in exps)

import math
import random

import numpy as np
import pytest

from primtrace.gf import build_tower, find_primitive_root_base, primitive_roots_base
from primtrace.numth import is_prime_power
from primtrace.search import (
    LEMMA,
    CertificateHeader,
    SearchBudgetExceeded,
    VerifyContext,
    Witness,
    brute_force,
    certify_q,
    check_family,
    k_bound,
    precompute_families,
    search_fallback_trace,
    search_nonzero,
    search_rng,
    sum_formula,
    verify_batch,
    verify_witness,
)


def family_setup(q, count=8, seed=0):
    """First primitive root (in increasing order) that admits families."""
    t = build_tower(q, seed)
    for g in primitive_roots_base(t):
        fams = precompute_families(t, g, count, search_rng(q, seed))
        if fams:
            return t, g, fams
    raise AssertionError(f"no families at q={q}")


def family_oracle(q, g, d):
    """Valid d by brute force: P_d has no root and xi0 is no l-th power, l | q^2+q+1."""
    from primtrace.gf import CubicField
    from primtrace.search import lemma_modulus

    t = build_tower(q)
    c0, c1, c2 = lemma_modulus(t.base, g, d)
    if any((x**3 + c2 * x * x + c1 * x + c0) % q == 0 for x in range(q)):
        return False
    F = CubicField(t.base, (c0, c1, c2))
    n = q**3 - 1
    order = order_by_multiplication(F, F.gen)
    return all((n // ell) % order != 0 for ell in (3, 19))


def test_q7_families_depend_on_the_primitive_root():
    t = build_tower(7)
    S = t.base.s
    assert [g for g in range(1, 7) if all(S.pow(g, 6 // l) != 1 for l in (2, 3))] == [3, 5]
    for g in (3, 5):
        got = [d for d in range(6) if check_family(t, g, d) is not None]
        assert got == [d for d in range(6) if family_oracle(7, g, d)]
        if g == 3:
            # every irreducible P_d has 3 | d here, which makes xi0 a cube
            assert got == []
        else:
            assert got


@pytest.mark.parametrize("q", [11, 13, 16, 25, 27, 31, 1009])
def test_lemma_identities(q):
    t, g, fams = family_setup(q)
    assert fams
    S = t.base.s
    rng = random.Random(q)
    for fam in fams:
        F = fam.field
        xi0 = F.gen
        assert F.trace(xi0) == S.one
        assert F.norm(xi0) == S.pow(g, fam.d % (q - 1))
        for _ in range(10):
            k = rng.randrange(q - 1)
            gk = S.pow(g, k)
            xi = F.scale(gk, xi0)
            assert F.trace(xi) == gk
            assert F.trace(F.inv(xi)) == S.pow(g, (-k - 1) % (q - 1))
            assert F.norm(xi) == S.pow(g, (3 * k + fam.d) % (q - 1))
            coprime = math.gcd(3 * k + fam.d, q - 1) == 1
            if coprime:
                assert F.is_primitive(xi)
                direct = F.add(xi, F.inv(xi))
                assert sum_formula(t, g, fam, k) == direct
            else:
                with pytest.raises(ValueError):
                    sum_formula(t, g, fam, k)


@pytest.mark.parametrize("q", [13, 25, 1009, 1031])
def test_symmetric_variants_cover_all_nonzero_traces(q):
    t, g, fams = family_setup(q, 16)
    S, base = t.base.s, t.base
    ws, fallback, _ = search_nonzero(t, g, fams)
    assert k_bound(q) == (q // 4 if q % 4 == 1 else q // 2)
    left = set()
    for k in fallback:
        cands = [S.pow(g, k), S.pow(g, (-k - 1) % (q - 1))]
        if q % 4 == 1:
            cands += [S.neg(c) for c in cands]
        left |= {base.to_int(c) for c in cands}
    assert set(ws) | left == set(range(1, q))
    ctx = VerifyContext.from_header(CertificateHeader(
        q, t.p, t.e, t.base_modulus, tuple(t.cubic_modulus), base.to_int(g), 0))
    for w in ws.values():
        assert w.construction == LEMMA
        assert w.variant in (("xi", "inv", "neg", "neg-inv") if q % 4 == 1 else ("xi", "inv"))
        assert verify_witness(w, ctx.header, ctx)


def test_symmetries_on_brute_force_witnesses():
    t = build_tower(5)
    ws, _ = brute_force(t)
    F = t.field
    for w in ws.values():
        xi = F.from_ints(w.xi)
        assert t.base.to_int(F.trace(F.neg(xi))) == (-w.a) % 5
        assert F.is_primitive(F.inv(xi)) and F.is_primitive(F.neg(xi))


@pytest.mark.parametrize("q", [7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27])
def test_lemma_path_agrees_with_brute_force(q):
    lem = certify_q(q, brute_force_max=0)
    bf = certify_q(q)
    assert bf.status() == "certified"
    assert lem.status() == "certified"
    assert set(lem.witnesses) == set(bf.witnesses) == set(range(q))
    ctx = VerifyContext.from_header(lem.header)
    assert all(verify_witness(w, lem.header, ctx) for w in lem.witnesses.values())
    assert verify_batch(lem.header, lem.witnesses.values(), ctx).all()


def order_by_multiplication(F, x):
    y, n = x, 1
    while y != F.one:
        y = F.mul(y, x)
        n += 1
    return n


@pytest.mark.parametrize("q", [3, 4, 5])
def test_small_exceptions_are_trace_zero(q):
    c = certify_q(q)
    assert c.status() == "exceptions"
    assert [(x.failing_a, x.exhaustive, x.tested) for x in c.exceptions] == [(0, True, q * q)]
    # independent check: no trace-0 xi with xi and xi + 1/xi both of full order
    F = c_field = build_tower(q).field
    n = q**3 - 1
    for c0 in range(q):
        for c1 in range(q):
            for c2 in range(q):
                x = F.from_ints((c0, c1, c2))
                if F.is_zero(x) or not F.is_zero(F.embed(F.trace(x))):
                    continue
                s = F.add(x, F.inv(x))
                assert F.is_zero(s) or order_by_multiplication(F, x) < n or \
                    order_by_multiplication(F, s) < n
    del c_field


def test_brute_force_witnesses_pass_order_oracle():
    for q in (2, 7, 8, 9):
        c = certify_q(q)
        F = build_tower(q).field
        n = q**3 - 1
        assert c.status() == "certified"
        for w in c.witnesses.values():
            x = F.from_ints(w.xi)
            assert order_by_multiplication(F, x) == n
            assert order_by_multiplication(F, F.add(x, F.inv(x))) == n


def test_tampered_witnesses_fail():
    c = certify_q(31, brute_force_max=0)
    h = c.header
    ctx = VerifyContext.from_header(h)
    w = c.witnesses[5]
    assert verify_witness(w, h, ctx)
    bad = [
        Witness(w.q, (w.a + 1) % 31, w.xi, w.construction, w.k, w.d, w.variant),
        Witness(w.q, w.a, ((w.xi[0] + 1) % 31, w.xi[1], w.xi[2]), w.construction, w.k, w.d),
        Witness(w.q, w.a, (0, 0, 0), w.construction, w.k, w.d),
        Witness(w.q, w.a, w.xi, w.construction, w.k, (w.d or 0) + 1),
        Witness(37, w.a, w.xi, w.construction, w.k, w.d),
    ]
    for b in bad:
        assert not verify_witness(b, h, ctx)
    assert not verify_batch(h, bad, ctx).any()


def test_fallback_trace_search():
    t = build_tower(1009)
    rng = search_rng(1009, 0)
    w = search_fallback_trace(t, 17, rng)
    assert verify_witness(w, CertificateHeader(
        1009, 1009, 1, None, tuple(t.cubic_modulus), None, 0))
    t5 = build_tower(5)
    with pytest.raises(SearchBudgetExceeded):
        search_fallback_trace(t5, 0, search_rng(5, 0), budget=200)


def test_brute_force_cap():
    with pytest.raises(ValueError):
        brute_force(build_tower(1009), cap=10**6)


def test_certify_is_deterministic_and_worker_independent():
    a = certify_q(1009, seed=4, brute_force_max=0)
    b = certify_q(1009, seed=4, brute_force_max=0)
    assert {k: v.xi for k, v in a.witnesses.items()} == {k: v.xi for k, v in b.witnesses.items()}
    t, g, fams = family_setup(1009, 16, 4)
    ks = np.arange(k_bound(1009))
    one = search_nonzero(t, g, fams, ks, batch=32, workers=1)
    two = search_nonzero(t, g, fams, ks, batch=32, workers=2)
    assert {a: w.xi for a, w in one[0].items()} == {a: w.xi for a, w in two[0].items()}
    assert one[1:] == two[1:]


def test_sample_mode_targets():
    c = certify_q(65537, sample=50)
    assert 0 in c.targets and len(c.targets) == 51
    assert c.status() == "certified"
    assert verify_batch(c.header, c.witnesses.values()).all()


def test_certify_rejects_non_prime_power():
    assert is_prime_power(12) is None
    with pytest.raises(ValueError):
        certify_q(12)

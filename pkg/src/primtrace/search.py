"""Witness search: for each a in F_q find a primitive xi of trace a with
xi + 1/xi also primitive.

The main route uses families built from the cubic
``P_d = x^3 - x^2 + g^(d-1) x - g^d``. When P_d is irreducible and its root
xi0 is not an l-th power for any prime l | q^2+q+1, every ``xi_k = g^k xi0``
with ``gcd(3k + d, q - 1) = 1`` is primitive with trace g^k, and 1/xi_k has
trace g^(-k-1). So only ``xi_k + 1/xi_k`` needs an exponent test, and it
has the closed form ``g^-k g^-d (xi0^2 - xi0) + g^k xi0 + g^-k g^-1``.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .gf import (CubicField, FieldTower, build_tower, find_primitive_root_base, make_base_field,
                 primitive_roots_base)
from .numth import Factorization, factor_q3_minus_1, factorize, is_prime_power

log = logging.getLogger(__name__)

DEFAULT_FAMILIES = 2**10
FAMILY_ATTEMPT_CAP = 64
FALLBACK_BUDGET = 10**6
BRUTE_FORCE_CAP = 10**8
BRUTE_FORCE_MAX_Q = 211
BATCH = 2**15
ROOT_ATTEMPTS = 8

LEMMA, RANDOM_TRACE, BRUTE_FORCE = "lemma", "random-trace", "brute-force"


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass
class CandidateFamily:
    d: int
    field: CubicField
    dbar: int
    r: int
    g_inv_d: object
    g_inv: object
    w: tuple  # xi0^2 - xi0

    @property
    def xi0(self):
        return self.field.gen


@dataclass(frozen=True)
class CertificateHeader:
    q: int
    p: int
    e: int
    base_modulus: tuple[int, ...] | None
    cubic_modulus: tuple[int, int, int]
    g: int | None
    seed: int
    version: str = __version__


@dataclass(slots=True)
class Witness:
    q: int
    a: int  # canonical int of the trace
    xi: tuple[int, int, int]  # canonical ints of the coordinates
    construction: str
    k: int | None = None
    d: int | None = None
    variant: str | None = None
    checks: tuple = ()


@dataclass(frozen=True)
class ExceptionReport:
    q: int
    failing_a: int
    exhaustive: bool
    tested: int = 0


@dataclass
class Certificate:
    header: CertificateHeader
    witnesses: dict[int, Witness] = field(default_factory=dict)
    exceptions: list[ExceptionReport] = field(default_factory=list)
    budget_exceeded: list[int] = field(default_factory=list)
    stats: Counter = field(default_factory=Counter)
    targets: list[int] | None = None  # None means all of F_q

    @property
    def q(self) -> int:
        return self.header.q

    @property
    def complete(self) -> bool:
        wanted = range(self.q) if self.targets is None else self.targets
        return not self.exceptions and not self.budget_exceeded and \
            all(a in self.witnesses for a in wanted)

    def status(self) -> str:
        if self.exceptions:
            return "exceptions"
        if self.budget_exceeded or not self.complete:
            return "budget-exceeded"
        return "certified"


def header_for(tower: FieldTower, g, seed: int) -> CertificateHeader:
    return CertificateHeader(
        tower.q, tower.p, tower.e, tower.base_modulus, tuple(tower.cubic_modulus),
        None if g is None else tower.base.to_int(g), seed)


def search_rng(q: int, seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(q), 1])))


def lemma_modulus(base, g, d: int) -> tuple:
    """Coefficients (c0, c1, c2) of P_d = x^3 - x^2 + g^(d-1) x - g^d (internal)."""
    S = base.s
    q = base.q
    gd = S.pow(g, d % (q - 1))
    gd1 = S.pow(g, (d - 1) % (q - 1))
    return (S.neg(gd), gd1, S.neg(S.one))


def coprime_part(n: int) -> int:
    """Product of the primes dividing n, with 3 left out."""
    return math.prod(p for p in factorize(n).primes if p != 3)


def check_family(tower: FieldTower, g, d: int) -> CandidateFamily | None:
    """Build the family for ``d`` if P_d meets the hypotheses, else None."""
    q = tower.q
    F = CubicField(tower.base, lemma_modulus(tower.base, g, d))
    F.__dict__["order_fact"] = tower.order_fact
    if not F.is_irreducible():
        return None
    n = q**3 - 1
    m = q * q + q + 1
    exps = tuple(n // ell for ell in tower.order_fact.primes if m % ell == 0)
    if any(v == F.one for v in F.batch_pow(F.gen, exps)):
        return None
    if q % 3 == 1:
        assert d % 3 != 0, "hypotheses force 3 to not divide d when q = 1 mod 3"
    S = tower.base.s
    r = coprime_part(q - 1)
    dbar = d * pow(3, -1, r) % r if r > 1 else 0
    xi0 = F.gen
    w = F.sub(F.sqr(xi0), xi0)
    return CandidateFamily(d, F, dbar, r, S.pow(g, (-d) % (q - 1)),
                           S.inv(g), w)


def build_family(tower: FieldTower, g, rng, memo: dict | None = None
                 ) -> CandidateFamily | None:
    """One random draw of d mod q-1; returns the family or None."""
    if tower.q < 7:
        return None
    d = int(rng.integers(0, tower.q - 1))
    if memo is None:
        return check_family(tower, g, d)
    if d not in memo:
        memo[d] = check_family(tower, g, d)
    return memo[d]


def precompute_families(tower: FieldTower, g, target_count: int = DEFAULT_FAMILIES,
                        rng=None, max_draws: int | None = None) -> list[CandidateFamily]:
    """Collect up to ``target_count`` families, repeats of d allowed.

    An empty list means no suitable d turned up within the draw budget (or
    none exists at all) and the caller should fall back.
    """
    if rng is None:
        rng = search_rng(tower.q, 0)
    if max_draws is None:
        max_draws = 20 * target_count + 1000
    out = []
    memo: dict = {}
    for _ in range(max_draws):
        if len(out) >= target_count:
            break
        fam = build_family(tower, g, rng, memo)
        if fam is not None:
            out.append(fam)
        elif not out and len(memo) == tower.q - 1:
            break  # every d tried, none works
    return out


def sum_formula(tower: FieldTower, g, fam: CandidateFamily, k: int):
    """xi_k + 1/xi_k from the closed form, in the family's field."""
    q = tower.q
    if math.gcd(3 * k + fam.d, q - 1) != 1:
        raise ValueError(f"gcd(3k+d, q-1) != 1 for k={k}, d={fam.d}")
    S = tower.base.s
    F = fam.field
    a = S.pow(g, k % (q - 1))
    ainv = S.inv(a)
    c = S.mul(ainv, fam.g_inv_d)
    out = F.add(F.scale(c, fam.w), F.scale(a, fam.xi0))
    return F.add(out, F.embed(S.mul(ainv, fam.g_inv)))


def _vsum_formula(tower, g, fam, ks):
    """Batched xi_k and xi_k + 1/xi_k for an int array of k values."""
    q = tower.q
    V = tower.base.v
    F = fam.field
    a = V.pow(V.const(g), ks % (q - 1))
    ainv = V.pow(V.const(g), (-ks) % (q - 1))
    c = V.mul(ainv, V.const(fam.g_inv_d))
    w0, w1, w2 = (V.const(x) for x in fam.w)
    s0 = V.add(V.mul(c, w0), V.mul(ainv, V.const(fam.g_inv)))
    s1 = V.add(V.mul(c, w1), a)
    s2 = V.mul(c, w2)
    zero = V.full(np.shape(ks), tower.base.s.zero)
    return (zero, a, zero), (s0, s1, s2)


def k_bound(q: int) -> int:
    return q // 4 if q % 4 == 1 else q // 2


def _search_ks(tower, g, families, ks, cap, batch):
    """Per k: index of the first family (in list order, among those passing
    the coprimality check) whose sum is primitive, within ``cap`` tries.

    Returns an int array aligned with ``ks``; -1 marks the fallback list.
    """
    ks = np.asarray(ks, dtype=np.int64)
    found = np.full(len(ks), -1, dtype=np.int64)
    tries = np.zeros(len(ks), dtype=np.int64)
    tested = 0
    for fi, fam in enumerate(families):
        open_ = (found < 0) & (tries < cap)
        if not open_.any():
            break
        cand = np.flatnonzero(open_ & (np.gcd(ks + fam.dbar, fam.r) == 1))
        for start in range(0, len(cand), batch):
            idx = cand[start:start + batch]
            _, s = _vsum_formula(tower, g, fam, ks[idx])
            ok = fam.field.vis_primitive(s)
            tested += len(idx)
            found[idx[ok]] = fi
            tries[idx[~ok]] += 1
    return found, tested


def _lemma_witnesses(tower, g, fam, ks, variants):
    """Witness objects for solved ks of one family, in k order."""
    q = tower.q
    base, V, F = tower.base, tower.base.v, fam.field
    xi, s = _vsum_formula(tower, g, fam, ks)
    xinv = F.vinv(xi)
    out = []
    a_k = base.vto_int(xi[1]).tolist()
    a_inv = base.vto_int(V.pow(V.const(g), (-ks - 1) % (q - 1))).tolist()
    elements = {"xi": (xi, a_k), "inv": (xinv, a_inv)}
    if "neg" in variants:
        elements["neg"] = (F.vneg(xi), base.vto_int(V.neg(base.vfrom_int(np.array(a_k)))).tolist())
        elements["neg-inv"] = (F.vneg(xinv),
                               base.vto_int(V.neg(base.vfrom_int(np.array(a_inv)))).tolist())
    ints = {name: [c.tolist() for c in F.vto_ints(el)] for name, (el, _) in elements.items()}
    kl = ks.tolist()
    for i, k in enumerate(kl):
        for name in variants:
            c = ints[name]
            a = elements[name][1][i]
            out.append((k, name, a, Witness(
                q, a, (c[0][i], c[1][i], c[2][i]), LEMMA, k, fam.d, name,
                ("xi primitive: gcd(3k+d, q-1) = 1", "sum primitive: all exponent tests != 1"))))
    return out


def search_nonzero(tower: FieldTower, g, families, ks=None, cap: int = FAMILY_ATTEMPT_CAP,
                   batch: int = BATCH, workers: int = 1, symmetric: bool = True):
    """Lemma-based witnesses for nonzero traces.

    By default runs k over 0..K-1, which together with xi -> 1/xi (trace
    g^(-k-1)) and, for q = 1 mod 4, xi -> -xi covers all of F_q^x. Returns
    ``(witnesses, fallback_ks, tested)``; witnesses maps canonical a to its
    Witness, first writer wins in (k, variant) order.
    """
    if not families:
        raise ValueError("need at least one family")
    q = tower.q
    if ks is None:
        ks = np.arange(k_bound(q), dtype=np.int64)
    ks = np.asarray(ks, dtype=np.int64)
    if workers > 1 and len(ks) > batch:
        parts = np.array_split(ks, workers)
        with ProcessPoolExecutor(max_workers=workers) as ex:
            res = list(ex.map(_search_ks, [tower] * workers, [g] * workers,
                              [families] * workers, parts, [cap] * workers,
                              [batch] * workers))
        found = np.concatenate([r[0] for r in res])
        tested = sum(r[1] for r in res)
    else:
        found, tested = _search_ks(tower, g, families, ks, cap, batch)
    if symmetric:
        variants = ("xi", "inv", "neg", "neg-inv") if q % 4 == 1 else ("xi", "inv")
    else:
        variants = ("xi",)
    rows = []
    for fi in np.unique(found[found >= 0]).tolist():
        sel = ks[found == fi]
        rows.extend(_lemma_witnesses(tower, g, families[fi], sel, variants))
    order = {v: i for i, v in enumerate(variants)}
    rows.sort(key=lambda t: (t[0], order[t[1]]))
    witnesses: dict[int, Witness] = {}
    for _, _, a, w in rows:
        witnesses.setdefault(a, w)
    fallback = ks[found < 0].tolist()
    return witnesses, fallback, tested


def search_fallback_trace(tower: FieldTower, a: int, rng, budget: int = FALLBACK_BUDGET,
                          batch: int = 1024) -> Witness:
    """Random xi of trace ``a`` (canonical int) until xi and xi + 1/xi are primitive."""
    F, base = tower.field, tower.base
    a_int = a
    a = base.from_int(a)
    q = tower.q
    used = 0
    while used < budget:
        m = min(batch, budget - used)
        u1 = rng.integers(0, q, size=m)
        u2 = rng.integers(0, q, size=m)
        X = F.with_trace(a, u1, u2)
        ok = F.vis_primitive(X)
        if ok.any():
            idx = np.flatnonzero(ok)
            Xs = F.vtake(X, idx)
            ok2 = F.vis_primitive(F.vadd(Xs, F.vinv(Xs)))
            if ok2.any():
                j = int(idx[np.argmax(ok2)])
                xi = tuple(int(c[j]) for c in F.vto_ints(X))
                return Witness(q, a_int, xi, RANDOM_TRACE, checks=(
                    f"random sample {used + j + 1}", "xi and sum: all exponent tests != 1"))
        used += m
    raise SearchBudgetExceeded(f"no witness for trace {a_int} in {budget} samples")


def brute_force(tower: FieldTower, a_values=None, cap: int = BRUTE_FORCE_CAP,
                chunk: int = 2**14):
    """Exhaustive search over each trace class.

    The q^2 elements of trace a are enumerated in a fixed order and the
    first valid xi is kept; an a with no valid xi among all q^2 elements
    gets an ExceptionReport. Returns ``(witnesses, exceptions)``.
    """
    q = tower.q
    if q**3 > cap:
        raise ValueError(f"q^3 = {q**3} exceeds the brute-force cap {cap}")
    F, base = tower.field, tower.base
    todo = list(range(q)) if a_values is None else sorted(set(a_values))
    witnesses: dict[int, Witness] = {}
    total = q * q
    pos = 0
    while todo and pos < total:
        step = max(1, min(total - pos, chunk // len(todo)))
        t = np.arange(pos, pos + step, dtype=np.int64)
        u1, u2 = t // q, t % q
        A = np.repeat(np.array(todo, dtype=np.int64), step)
        U1, U2 = np.tile(u1, len(todo)), np.tile(u2, len(todo))
        avals = base.vfrom_int(A)
        X = _with_trace_many(F, avals, U1, U2)
        ok = F.vis_primitive(X)
        idx = np.flatnonzero(ok)
        if len(idx):
            Xs = F.vtake(X, idx)
            ok2 = F.vis_primitive(F.vadd(Xs, F.vinv(Xs)))
            good = idx[ok2]
            ints = F.vto_ints(X)
            for j in good.tolist():
                a = todo[j // step]
                if a not in witnesses:
                    xi = tuple(int(c[j]) for c in ints)
                    witnesses[a] = Witness(q, a, xi, BRUTE_FORCE, checks=(
                        f"index {pos + j % step} of trace class",
                        "xi and sum: all exponent tests != 1"))
        todo = [a for a in todo if a not in witnesses]
        pos += step
    exceptions = [ExceptionReport(q, a, True, total) for a in todo]
    return witnesses, exceptions


def _with_trace_many(F, avals, free1, free2):
    """Like CubicField.with_trace but with a per-element trace array."""
    b = F.base
    V, S = b.v, b.s
    j = F.solve_index
    others = [i for i in range(3) if i != j]
    t = F.trace_form
    coords = [None, None, None]
    coords[others[0]] = b.vfrom_int(free1)
    coords[others[1]] = b.vfrom_int(free2)
    acc = V.add(V.mul(coords[others[0]], V.const(t[others[0]])),
                V.mul(coords[others[1]], V.const(t[others[1]])))
    coords[j] = V.mul(V.sub(avals, acc), V.const(S.inv(t[j])))
    return tuple(coords)


def certify_q(q: int, seed: int = 0, families: int = DEFAULT_FAMILIES,
              sample: int | None = None, brute_force_max: int = BRUTE_FORCE_MAX_Q,
              cap: int = FAMILY_ATTEMPT_CAP, fallback_budget: int = FALLBACK_BUDGET,
              bf_cap: int = BRUTE_FORCE_CAP, workers: int = 1) -> Certificate:
    """Witnesses for every a in F_q, or the exceptional a's.

    ``sample`` restricts the run to that many random nonzero traces g^k (k
    drawn uniformly) plus a = 0, for fields too large to cover in full.
    The result depends only on (q, seed) and the budget parameters.
    """
    tower = build_tower(q, seed)
    rng = search_rng(q, seed)
    stats = Counter()
    if q <= brute_force_max or q < 7:
        g = find_primitive_root_base(tower) if q >= 3 else None
        cert = Certificate(header_for(tower, g, seed), stats=stats)
        stats["brute_force_runs"] += 1
        w, exc = brute_force(tower, cap=max(bf_cap, q**3))
        cert.witnesses, cert.exceptions = w, exc
        return cert

    # the smallest primitive root can admit no usable d (q = 7, 11 do this)
    fams, g = [], None
    for i, cand in enumerate(primitive_roots_base(tower)):
        if i >= ROOT_ATTEMPTS:
            break
        g = g if g is not None else cand
        fams = precompute_families(tower, cand, families, rng)
        if fams:
            g = cand
            break
        log.info("q=%d: no suitable d for g=%d", q, tower.base.to_int(cand))
    cert = Certificate(header_for(tower, g, seed), stats=stats)
    stats["families"] = len(fams)
    if sample is not None:
        ks = np.sort(rng.choice(q - 1, size=min(sample, q - 1), replace=False)).astype(np.int64)
        S = tower.base.s
        cert.targets = sorted({0} | {tower.base.to_int(S.pow(g, int(k))) for k in ks})
    else:
        ks = None

    if not fams:
        log.info("q=%d: no suitable d, falling back to brute force", q)
        targets = cert.targets
        if q**3 <= bf_cap:
            stats["brute_force_runs"] += 1
            cert.witnesses, cert.exceptions = brute_force(tower, targets, cap=bf_cap)
            return cert
        for a in (range(q) if targets is None else targets):
            _fallback(tower, cert, a, rng, fallback_budget, bf_cap)
        return cert

    witnesses, fallback_ks, tested = search_nonzero(
        tower, g, fams, ks, cap=cap, workers=workers, symmetric=sample is None)
    stats["lemma_sum_tests"] = tested
    stats["fallback_ks"] = len(fallback_ks)
    cert.witnesses = witnesses
    S, base = tower.base.s, tower.base
    need = {0}
    for k in fallback_ks:
        log.info("q=%d: k=%d exhausted %d families, using random trace search", q, k, cap)
        gk = S.pow(g, k % (q - 1))
        gk1 = S.pow(g, (-k - 1) % (q - 1))
        cands = [gk] if sample is not None else [gk, gk1]
        if sample is None and q % 4 == 1:
            cands += [S.neg(gk), S.neg(gk1)]
        need |= {base.to_int(c) for c in cands}
    if sample is None:
        need |= set(range(1, q)) - set(witnesses)
    for a in sorted(need):
        if a not in cert.witnesses:
            _fallback(tower, cert, a, rng, fallback_budget, bf_cap)
    return cert


def _fallback(tower, cert, a, rng, budget, bf_cap):
    cert.stats["fallback_trace_runs"] += 1
    log.info("q=%d: random trace search for a=%d", tower.q, a)
    try:
        cert.witnesses[a] = search_fallback_trace(tower, a, rng, budget)
        cert.stats["fallback_trace_successes"] += 1
        return
    except SearchBudgetExceeded:
        log.warning("q=%d: random trace search for a=%d exhausted its budget", tower.q, a)
    if tower.q**3 <= bf_cap:
        cert.stats["brute_force_runs"] += 1
        w, exc = brute_force(tower, [a], cap=bf_cap)
        cert.witnesses.update(w)
        cert.exceptions.extend(exc)
    else:
        cert.budget_exceeded.append(a)


# ---------------------------------------------------------------- verification


@dataclass
class VerifyContext:
    """Field data rebuilt from a certificate header, shared by many checks."""

    header: CertificateHeader
    base: object
    order: Factorization
    fields: dict

    @classmethod
    def from_header(cls, h: CertificateHeader) -> "VerifyContext":
        pe = is_prime_power(h.q)
        if pe != (h.p, h.e):
            raise ValueError("header q does not match p^e")
        from .gf import polys
        from .gf.basefield import _PrimeScalar

        if h.e > 1 and not polys.is_irreducible(_PrimeScalar(h.p), list(h.base_modulus), h.p):
            raise ValueError("header base modulus is reducible")
        base = make_base_field(h.p, h.e, None if h.e == 1 else tuple(h.base_modulus))
        order = factorize(h.q - 1) * factorize(h.q * h.q + h.q + 1)
        return cls(h, base, order, {})

    def field_for(self, d: int | None) -> CubicField:
        if d in self.fields:
            return self.fields[d]
        base = self.base
        if d is None:
            F = CubicField.from_modulus_ints(base, self.header.cubic_modulus)
        else:
            if self.header.g is None:
                raise ValueError("lemma witness but no primitive root in header")
            F = CubicField(base, lemma_modulus(base, base.from_int(self.header.g), d))
        F.__dict__["order_fact"] = self.order
        F.irreducible = F.is_irreducible()
        self.fields[d] = F
        return F


def _naive_primitive(F, x, primes) -> bool:
    n = F.order
    return all(F.pow(x, n // ell) != F.one for ell in primes)


def verify_witness(w: Witness, header: CertificateHeader, ctx: VerifyContext | None = None) -> bool:
    """Recheck a witness from its serialized data with plain square-and-multiply."""
    if ctx is None:
        ctx = VerifyContext.from_header(header)
    if w.q != header.q:
        return False
    F = ctx.field_for(w.d)
    if not F.irreducible:
        return False
    xi = F.from_ints(w.xi)
    if F.is_zero(xi) or not 0 <= w.a < header.q:
        return False
    if F.base.to_int(F.trace(xi)) != w.a:
        return False
    primes = ctx.order.primes
    if not _naive_primitive(F, xi, primes):
        return False
    s = F.add(xi, F.inv(xi))
    return not F.is_zero(s) and _naive_primitive(F, s, primes)


def verify_batch(header: CertificateHeader, witnesses, ctx: VerifyContext | None = None,
                 batch: int = BATCH) -> np.ndarray:
    """Vectorised verify_witness over many witnesses; returns a bool array."""
    if ctx is None:
        ctx = VerifyContext.from_header(header)
    witnesses = list(witnesses)
    ok = np.zeros(len(witnesses), dtype=bool)
    groups: dict = {}
    for i, w in enumerate(witnesses):
        groups.setdefault(w.d, []).append(i)
    q = header.q
    n = q**3 - 1
    primes = ctx.order.primes
    for d, idxs in groups.items():
        F = ctx.field_for(d)
        if not F.irreducible:
            continue
        for start in range(0, len(idxs), batch):
            sel = idxs[start:start + batch]
            ws = [witnesses[i] for i in sel]
            good = np.array([w.q == q and 0 <= w.a < q for w in ws], dtype=bool)
            X = F.vfrom_ints(*(np.array([w.xi[j] for w in ws], dtype=np.int64) for j in range(3)))
            good &= ~F.vis_zero(X)
            tr = F.vadd(F.vadd(X, F.vpow(X, q)), F.vpow(X, q * q))
            V = F.base.v
            zero = V.const(F.base.s.zero)
            good &= V.eq(tr[1], zero) & V.eq(tr[2], zero)
            good &= F.base.vto_int(tr[0]) == np.array([w.a for w in ws], dtype=np.int64)
            Y = F.vadd(X, F.vinv(X))
            for ell in primes:
                good &= ~F.vis_one(F.vpow(X, n // ell))
                good &= ~F.vis_one(F.vpow(Y, n // ell))
            good &= ~F.vis_zero(Y)
            ok[np.array(sel)] = good
    return ok

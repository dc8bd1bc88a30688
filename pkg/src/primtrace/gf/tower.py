"""The tower F_p <= F_q <= F_{q^3} and primitive roots of F_q."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numth import Factorization, factorize, is_prime_power
from .basefield import make_base_field, random_base_modulus
from .cubic import CubicField


def make_rng(q: int, seed: int) -> np.random.Generator:
    """PCG64 stream keyed on (seed, q) so runs are reproducible per field."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(q)])))


@dataclass(frozen=True, eq=False)
class FieldTower:
    p: int
    e: int
    q: int
    base: object
    base_modulus: tuple[int, ...] | None
    cubic_modulus: tuple[int, int, int]
    order_fact: Factorization
    subgroup_fact: Factorization
    field: CubicField

    def with_modulus(self, coeffs) -> CubicField:
        """Arithmetic modulo another monic cubic, given as canonical ints (c0, c1, c2)."""
        F = CubicField.from_modulus_ints(self.base, coeffs)
        F.__dict__["order_fact"] = self.order_fact
        return F


def build_tower(q: int, seed: int = 0, base_modulus=None, cubic_modulus=None) -> FieldTower:
    """Construct F_q and a cubic extension, drawing moduli at random from the seed.

    Explicit moduli (as stored in a certificate header) bypass the random draw
    but are still checked for irreducibility.
    """
    pe = is_prime_power(q) if q >= 2 else None
    if pe is None:
        raise ValueError(f"{q} is not a prime power")
    p, e = pe
    rng = make_rng(q, seed)
    if e > 1:
        if base_modulus is None:
            base_modulus = random_base_modulus(p, e, rng)
        else:
            from . import polys
            from .basefield import _PrimeScalar

            base_modulus = tuple(int(c) for c in base_modulus)
            if len(base_modulus) != e + 1 or base_modulus[-1] != 1 or \
                    not polys.is_irreducible(_PrimeScalar(p), list(base_modulus), p):
                raise ValueError("base modulus is not a monic irreducible of degree e")
    else:
        base_modulus = None
    base = make_base_field(p, e, base_modulus)
    subgroup = factorize(q - 1)
    order = subgroup * factorize(q * q + q + 1)
    if cubic_modulus is None:
        while True:
            c = tuple(int(v) for v in rng.integers(0, q, size=3))
            F = CubicField.from_modulus_ints(base, c)
            if F.is_irreducible():
                break
    else:
        c = tuple(int(v) for v in cubic_modulus)
        F = CubicField.from_modulus_ints(base, c)
        if not F.is_irreducible():
            raise ValueError("cubic modulus is reducible")
    F.__dict__["order_fact"] = order
    return FieldTower(p, e, q, base, base_modulus, c, order, subgroup, F)


def is_primitive_root_base(tower: FieldTower, g) -> bool:
    S = tower.base.s
    if S.is_zero(g):
        return False
    q = tower.q
    return S.pow(g, q - 1) == S.one and all(
        S.pow(g, (q - 1) // ell) != S.one for ell in tower.subgroup_fact.primes)


def primitive_roots_base(tower: FieldTower):
    """Generators of F_q^x in increasing canonical order, as internal elements."""
    if tower.q < 3:
        raise ValueError("F_2^x is trivial; no useful primitive root")
    base = tower.base
    for c in range(2, tower.q):
        g = base.from_int(c)
        if is_primitive_root_base(tower, g):
            yield g


def find_primitive_root_base(tower: FieldTower):
    """Smallest canonical integer that generates F_q^x, as an internal element."""
    for g in primitive_roots_base(tower):
        return g
    raise ArithmeticError("no primitive root found")

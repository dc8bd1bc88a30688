"""Computing several powers of one element with a shared addition sequence.

The Bos-Coster heuristic keeps a pool of exponents still to be built and
repeatedly rewrites the largest one ``f`` in terms of the next largest
``f1``: ``f = f1 + (f - f1)``. When ``f`` is more than twice ``f1`` (or
alone) it is halved instead, ``f = 2*(f//2) [+ 1]``, which is what keeps
the chain short when the exponents are far apart.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class ChainPlan:
    targets: tuple[int, ...]
    # (value, op, a, b) in evaluation order; op is "sqr" (value = 2a) or
    # "mul" (value = a + b); value 1 is the input itself
    steps: tuple[tuple[int, str, int, int], ...]
    # steps after which a value is no longer needed
    release: tuple[tuple[int, ...], ...]

    @property
    def cost(self) -> int:
        return len(self.steps)


def naive_cost(e: int) -> int:
    """Multiplications used by left-to-right square-and-multiply for x**e."""
    return e.bit_length() - 1 + bin(e).count("1") - 1


def _build(exps, bos_coster: bool) -> dict[int, tuple]:
    recipe: dict[int, tuple] = {}
    heap = [-e for e in set(exps) if e > 1]
    heapq.heapify(heap)
    queued = {-e for e in heap}

    def push(v):
        if v > 1 and v not in recipe and v not in queued:
            queued.add(v)
            heapq.heappush(heap, -v)

    while heap:
        f = -heapq.heappop(heap)
        queued.discard(f)
        if f in recipe:
            continue
        f1 = -heap[0] if heap else None
        if not bos_coster or f1 is None or f > 2 * f1:
            h = f // 2
            if f % 2 == 0:
                recipe[f] = ("sqr", h, h)
            else:
                if 2 * h not in recipe:
                    recipe[2 * h] = ("sqr", h, h) if h > 0 else None
                recipe[f] = ("mul", 2 * h, 1)
            push(h)
        else:
            r = f - f1
            if r == f1:
                recipe[f] = ("sqr", f1, f1)
            else:
                recipe[f] = ("mul", f1, r)
                push(r)
    return {k: v for k, v in recipe.items() if v is not None}


def _finish(targets, recipe) -> ChainPlan:
    order = sorted(recipe)
    steps = tuple((v, recipe[v][0], recipe[v][1], recipe[v][2]) for v in order)
    keep = set(targets) | {1}
    last_use: dict[int, int] = {}
    for i, (_, _, a, b) in enumerate(steps):
        last_use[a] = i
        last_use[b] = i
    release: list[list[int]] = [[] for _ in steps]
    for v, i in last_use.items():
        if v not in keep:
            release[i].append(v)
    return ChainPlan(tuple(targets), steps, tuple(tuple(r) for r in release))


@lru_cache(maxsize=256)
def plan_chain(exps: tuple[int, ...]) -> ChainPlan:
    """Addition sequence for the exponents, never costlier than naive powering."""
    if not exps or min(exps) < 1:
        raise ValueError("exponents must be positive")
    bc = _finish(exps, _build(exps, True))
    halving = _finish(exps, _build(exps, False))
    return bc if bc.cost <= halving.cost else halving


def run_chain(plan: ChainPlan, x, mul, sqr=None):
    """Evaluate ``plan`` on ``x`` with the given multiplication."""
    if sqr is None:
        sqr = lambda a: mul(a, a)
    vals = {1: x}
    for (v, op, a, b), rel in zip(plan.steps, plan.release):
        vals[v] = sqr(vals[a]) if op == "sqr" else mul(vals[a], vals[b])
        for r in rel:
            del vals[r]
    return [vals[e] for e in plan.targets]


def batch_pow_chain(x, exps, mul, sqr=None):
    """Return ``[x**e for e in exps]`` using one shared addition sequence."""
    return run_chain(plan_chain(tuple(int(e) for e in exps)), x, mul, sqr)

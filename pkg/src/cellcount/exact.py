"""Exact reference counters used as test oracles and by the small-instance scripts.

Two independent routes:
  * vectorized brute force over all 2^n assignments (numpy), n <= 24;
  * a component-caching #SAT counter for plain CNF, which scales to the
    chain-formula reductions (tens of fresh variables, tree-like structure).
"""
from __future__ import annotations

import sys
from collections import Counter
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .formula import CnfFormula, DnfFormula, WeightMap, XorClause

MAX_BRUTE_VARS = 24


def _columns(n: int):
    idx = np.arange(1 << n, dtype=np.int64)
    return idx, [None] + [((idx >> (v - 1)) & 1).astype(bool) for v in range(1, n + 1)]


def satisfying_mask(formula, extra_xors: Sequence[XorClause] = ()) -> tuple[np.ndarray, np.ndarray]:
    """(assignment indices, boolean mask of models).  Index bit v-1 holds variable v."""
    n = formula.num_vars
    if n > MAX_BRUTE_VARS:
        raise ValueError(f"brute force limited to {MAX_BRUTE_VARS} variables, got {n}")
    idx, col = _columns(n)

    def lit(l):
        return col[l] if l > 0 else ~col[-l]

    if isinstance(formula, DnfFormula):
        sat = np.zeros(idx.shape, dtype=bool)
        for cube in formula.cubes:
            c = np.ones(idx.shape, dtype=bool)
            for l in cube:
                c &= lit(l)
            sat |= c
        xors = list(extra_xors)
    else:
        sat = np.ones(idx.shape, dtype=bool)
        for clause in formula.clauses:
            c = np.zeros(idx.shape, dtype=bool)
            for l in clause:
                c |= lit(l)
            sat &= c
        xors = list(formula.xors) + list(extra_xors)
    for x in xors:
        p = np.zeros(idx.shape, dtype=bool)
        for v in x.variables:
            p ^= col[v]
        sat &= p == bool(x.parity)
    return idx, sat


def brute_force_models(formula, extra_xors: Sequence[XorClause] = ()) -> list[int]:
    """All models as bit-masks (bit v = variable v)."""
    idx, sat = satisfying_mask(formula, extra_xors)
    return [int(i) << 1 for i in idx[sat]]


def _project_codes(idx: np.ndarray, sampling_set: Sequence[int]) -> np.ndarray:
    code = np.zeros(idx.shape, dtype=np.int64)
    for k, v in enumerate(sampling_set):
        code |= ((idx >> (v - 1)) & 1) << k
    return code


def brute_force_projections(formula, sampling_set: Sequence[int], extra_xors: Sequence[XorClause] = ()) -> set[int]:
    """Distinct projections as ints with bit k = value of sampling_set[k]."""
    idx, sat = satisfying_mask(formula, extra_xors)
    return set(np.unique(_project_codes(idx[sat], sampling_set)).tolist())


def brute_force_count(formula, sampling_set: Optional[Sequence[int]] = None,
                      extra_xors: Sequence[XorClause] = ()) -> int:
    if sampling_set is None or len(sampling_set) == formula.num_vars:
        _, sat = satisfying_mask(formula, extra_xors)
        return int(sat.sum())
    return len(brute_force_projections(formula, sampling_set, extra_xors))


def brute_force_weight(formula, weights: WeightMap, extra_xors: Sequence[XorClause] = ()) -> Fraction:
    """Exact weighted model count over all variables."""
    idx, sat = satisfying_mask(formula, extra_xors)
    models = idx[sat]
    wv = weights.normal_vars
    code = np.zeros(models.shape, dtype=np.int64)
    for k, v in enumerate(wv):
        code |= ((models >> (v - 1)) & 1) << k
    counts = np.bincount(code, minlength=1 << len(wv)) if len(models) else np.zeros(1, dtype=np.int64)
    total = Fraction(0)
    for pattern, cnt in enumerate(counts.tolist()):
        if not cnt:
            continue
        w = Fraction(1)
        for k, v in enumerate(wv):
            w *= weights.literal_weight(v, bool((pattern >> k) & 1))
        total += cnt * w
    return total


# ------------------------------------------------------------ #SAT by components


def count_cnf(formula: CnfFormula) -> int:
    """Exact model count over all ``num_vars`` variables (no XOR rows)."""
    if formula.xors:
        raise ValueError("count_cnf does not handle xor constraints")
    clauses = set()
    for c in formula.clauses:
        s = frozenset(c)
        if any(-l in s for l in s):
            continue
        clauses.add(s)
    cls = frozenset(clauses)
    used = {abs(l) for c in cls for l in c}
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000))
    try:
        inner = _count(cls, {})
    finally:
        sys.setrecursionlimit(limit)
    return inner << (formula.num_vars - len(used))


def _vars_of(cls) -> set[int]:
    return {abs(l) for c in cls for l in c}


def _components(cls) -> list[frozenset]:
    parent: dict[int, int] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in cls:
        it = iter(c)
        a = find(abs(next(it)))
        for l in it:
            b = find(abs(l))
            if a != b:
                parent[b] = a
    groups: dict[int, list] = {}
    for c in cls:
        groups.setdefault(find(abs(next(iter(c)))), []).append(c)
    return [frozenset(g) for g in groups.values()]


def _condition(cls, lit: int):
    out = []
    for c in cls:
        if lit in c:
            continue
        if -lit in c:
            c = c - {-lit}
        out.append(c)
    return frozenset(out)


def _count(cls: frozenset, cache: dict) -> int:
    """Models of ``cls`` over exactly the variables occurring in it."""
    if not cls:
        return 1
    if frozenset() in cls:
        return 0
    hit = cache.get(cls)
    if hit is not None:
        return hit
    comps = _components(cls)
    if len(comps) > 1:
        res = 1
        for comp in comps:
            res *= _count(comp, cache)
            if res == 0:
                break
        cache[cls] = res
        return res
    nvars = len(_vars_of(cls))
    unit = next((c for c in cls if len(c) == 1), None)
    if unit is not None:
        lit = next(iter(unit))
        sub = _condition(cls, lit)
        res = 0 if frozenset() in sub else _count(sub, cache) << (nvars - 1 - len(_vars_of(sub)))
    else:
        occ = Counter(abs(l) for c in cls for l in c)
        v = max(occ, key=lambda x: (occ[x], -x))
        res = 0
        for lit in (v, -v):
            sub = _condition(cls, lit)
            if frozenset() in sub:
                continue
            res += _count(sub, cache) << (nvars - 1 - len(_vars_of(sub)))
    cache[cls] = res
    return res

"""Minimal independent supports.

A set S is an independent support of F when no two distinct models of F
agree on S.  That is a single unsatisfiability question on a doubled
formula Q(F, S): two copies of F, equal on S, different somewhere.
Minimization runs a deletion loop over the equalities "x_i = y_i", which
are treated as groups of a group-oriented MUS problem.

Variable layout of every doubled formula over n original variables:
x-copy 1..n, y-copy n+1..2n, difference indicators b at 2n+1..3n.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .formula import CnfFormula, XorClause
from .oracle.dpll import BudgetExceeded, solve


class NotASupport(ValueError):
    """Raised when a claimed support is not one; carries two models that agree on it."""

    def __init__(self, support, model_a: int, model_b: int):
        self.support = tuple(support)
        self.model_a, self.model_b = model_a, model_b
        super().__init__(f"{sorted(self.support)} is not an independent support: "
                         f"models {model_a:#x} and {model_b:#x} agree on it")


def _shift_lit(l: int, off: int) -> int:
    return l + off if l > 0 else l - off


def _copy(formula: CnfFormula, off: int) -> tuple[list[tuple[int, ...]], list[XorClause]]:
    cls = [tuple(_shift_lit(l, off) for l in c) for c in formula.clauses]
    xs = [XorClause(tuple(v + off for v in x.variables), x.parity) for x in formula.xors]
    return cls, xs


def _equal(i: int, n: int) -> list[tuple[int, ...]]:
    return [(-i, i + n), (i, -(i + n))]


def _doubled(formula: CnfFormula, equal_on: Sequence[int]) -> CnfFormula:
    """F(x), F(y), x_i = y_i for i in ``equal_on``, and x != y on some variable."""
    n = formula.num_vars
    cx, xx = _copy(formula, 0)
    cy, xy = _copy(formula, n)
    clauses = cx + cy
    for i in equal_on:
        clauses += _equal(i, n)
    for i in range(1, n + 1):
        b = 2 * n + i
        # b_i is forced true whenever x_i = y_i; some b_i must be false
        clauses.append((-i, -(i + n), b))
        clauses.append((i, i + n, b))
    clauses.append(tuple(-(2 * n + i) for i in range(1, n + 1)))
    return CnfFormula(3 * n, clauses, xx + xy)


def build_q_formula(formula: CnfFormula, support: Sequence[int]) -> CnfFormula:
    """Satisfiable exactly when ``support`` is not an independent support."""
    if not isinstance(formula, CnfFormula):
        raise TypeError("independent supports are computed for CNF formulas")
    s = sorted(set(support))
    if s and (s[0] < 1 or s[-1] > formula.num_vars):
        raise ValueError("support variables out of range")
    return _doubled(formula, s)


def _split(model: int, n: int) -> tuple[int, int]:
    full = (1 << (n + 1)) - 2
    return model & full, (model >> n) & full


def support_witness(formula: CnfFormula, support: Sequence[int]) -> Optional[tuple[int, int]]:
    """Two distinct models agreeing on ``support``, or None if it is a support."""
    m = solve(build_q_formula(formula, support))
    return None if m is None else _split(m, formula.num_vars)


def is_independent_support(formula: CnfFormula, support: Sequence[int]) -> bool:
    return support_witness(formula, support) is None


# --------------------------------------------------------- local dependencies


def _compact(clauses, xors) -> tuple[CnfFormula, dict[int, int]]:
    used = sorted({abs(l) for c in clauses for l in c} | {v for x in xors for v in x.variables})
    idx = {v: k + 1 for k, v in enumerate(used)}
    cls = [tuple(idx[l] if l > 0 else -idx[-l] for l in c) for c in clauses]
    xs = [XorClause(tuple(idx[v] for v in x.variables), x.parity) for x in xors]
    return CnfFormula(len(used), cls, xs), idx


def find_local_dependencies(formula: CnfFormula, candidates: Sequence[int]) -> set[int]:
    """Variables defined by the other variables of the constraints mentioning them.

    For each x in ascending order, G is the set of residual constraints that
    contain x.  If G forces x once its other variables are fixed, x is
    dependent; G is dropped from the residual so that no cycle of mutual
    definitions can put every member of the cycle into the result.
    """
    clauses = list(formula.clauses)
    xors = list(formula.xors)
    dep: set[int] = set()
    for x in sorted(set(candidates)):
        g_cls = [c for c in clauses if x in c or -x in c]
        g_xor = [r for r in xors if x in r.variables]
        if not g_cls and not g_xor:
            continue
        local, idx = _compact(g_cls, g_xor)
        others = [k for v, k in idx.items() if v != x]
        if is_independent_support(local, others):
            dep.add(x)
            clauses = [c for c in clauses if not (x in c or -x in c)]
            xors = [r for r in xors if x not in r.variables]
    return dep


# ------------------------------------------------------------------ GMUS


@dataclass
class GmusInstance:
    """Remainder plus one equality group per candidate variable."""

    remainder: CnfFormula
    groups: list[tuple[int, list[tuple[int, ...]]]]  # (original variable, its two clauses)
    num_vars: int

    def formula_with(self, kept: Sequence[int]) -> CnfFormula:
        extra = [c for v, cls in self.groups if v in kept for c in cls]
        return self.remainder.with_clauses(extra)


def translate_to_gmus(formula: CnfFormula, under: Sequence[int], over: Sequence[int]) -> GmusInstance:
    u = sorted(set(under))
    v = sorted(set(over))
    if not set(u) <= set(v):
        raise ValueError("the under-approximation must be contained in the over-approximation")
    w = support_witness(formula, v)
    if w is not None:
        raise NotASupport(v, *w)
    n = formula.num_vars
    groups = [(i, _equal(i, n)) for i in v if i not in set(u)]
    return GmusInstance(_doubled(formula, u), groups, n)


@dataclass
class GmusResult:
    kept: list[int]
    minimal: bool
    sat_calls: int


def gmus_deletion(gi: GmusInstance, order: Optional[Sequence[int]] = None, budget: Optional[int] = None,
                  max_decisions: Optional[int] = None) -> GmusResult:
    """Deletion-based group MUS.

    Each group is dropped in turn and stays dropped if the rest is still
    unsatisfiable.  ``budget`` caps the number of SAT calls; when it runs out
    the current kept set is returned (still unsatisfiable, maybe not minimal).
    """
    kept = [v for v, _ in gi.groups]
    seq = list(order) if order is not None else list(kept)
    calls = 0
    for pos, v in enumerate(seq):
        if budget is not None and calls >= budget:
            return GmusResult(sorted(kept), False, calls)
        trial = [k for k in kept if k != v]
        calls += 1
        try:
            sat = solve(gi.formula_with(set(trial)), max_decisions=max_decisions) is not None
        except BudgetExceeded:
            return GmusResult(sorted(kept), False, calls)
        if not sat:
            kept = trial
    return GmusResult(sorted(kept), True, calls)


# ------------------------------------------------------------------- driver


@dataclass
class SupportSets:
    under: tuple[int, ...]
    over: tuple[int, ...]
    local: tuple[int, ...]
    support: tuple[int, ...]
    minimal: bool
    sat_calls: int = 0
    repaired: bool = False
    notes: list[str] = field(default_factory=list)


def mis(formula: CnfFormula, under: Sequence[int] = (), over: Optional[Sequence[int]] = None, seed: int = 0,
        budget: Optional[int] = None, repair: bool = True, use_local: bool = True) -> SupportSets:
    """Compute a minimal independent support I with under <= I <= over.

    A user-supplied ``over`` that is not a support is repaired: a support
    containing it is found first, then minimized.
    """
    if not isinstance(formula, CnfFormula):
        raise TypeError("independent supports are computed for CNF formulas")
    n = formula.num_vars
    u = tuple(sorted(set(under)))
    v = tuple(range(1, n + 1)) if over is None else tuple(sorted(set(over) | set(u)))
    notes: list[str] = []
    repaired = False
    if over is not None and not is_independent_support(formula, v):
        if not repair:
            raise NotASupport(v, *support_witness(formula, v))
        # grow: keep all of v, minimize over everything else
        first = mis(formula, v, None, seed, budget, repair=False, use_local=use_local)
        notes.append(f"supplied set was not a support; enlarged to {len(first.support)} variables")
        v = first.support
        repaired = True
    z: set[int] = set()
    if use_local:
        z = find_local_dependencies(formula, [x for x in v if x not in set(u)])
        if z and not is_independent_support(formula, [x for x in v if x not in z]):
            notes.append("local dependencies left a non-support; ignored")
            z = set()
    cand = [x for x in v if x not in z]
    gi = translate_to_gmus(formula, u, cand)
    order = [g for g, _ in gi.groups]
    random.Random(seed).shuffle(order)
    res = gmus_deletion(gi, order, budget)
    support = tuple(sorted(set(u) | set(res.kept)))
    return SupportSets(u, v, tuple(sorted(z)), support, res.minimal, res.sat_calls, repaired, notes)


def is_minimal_support(formula: CnfFormula, support: Sequence[int], under: Sequence[int] = ()) -> bool:
    s = set(support)
    if not is_independent_support(formula, s):
        return False
    return all(not is_independent_support(formula, s - {x}) for x in s - set(under))

"""Weighted model counting.

Two independent routes:
  * ``weightmc``: hashing-based estimation against a black-box assignment
    weight, needing only an upper bound ``r`` on the max/min weight ratio
    over models;
  * chain-formula reductions that turn dyadic literal weights into extra
    unweighted structure, so that any exact unweighted counter yields the
    weighted count.

All weight arithmetic is exact (Fractions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import expr as E
from .counting import AllIterationsFailed, Number, _frac, ceil_log2_power, lower_median
from .formula import (CnfFormula, DnfFormula, ProblemInstance, SolutionSet, WeightMap,
                      XorClause, dyadic_form)
from .hashing import draw_hash, prefix
from .oracle import OracleQuery, default_oracle
from .rng import make_rng


class NonDyadicWeight(ValueError):
    pass


# ----------------------------------------------------------------- estimation


@dataclass(frozen=True)
class WeightParams:
    epsilon: Fraction
    delta: Fraction
    pivot: int
    t: int
    r: Fraction


def compute_weight_params(epsilon: Number, delta: Number, r: Number = 1) -> WeightParams:
    eps, dl, r = _frac(epsilon), _frac(delta), _frac(r)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0 < dl < 1:
        raise ValueError("delta must lie in (0, 1)")
    if r < 1:
        raise ValueError("tilt bound r must be at least 1")
    # e^{3/2} * q is irrational for rational q, so float rounding cannot land exactly on an integer
    pivot = 2 * math.ceil(math.exp(1.5) * float((1 + 1 / eps) ** 2))
    t = ceil_log2_power(3 / dl, 35)
    return WeightParams(eps, dl, pivot, t, r)


@dataclass
class WeightedCount:
    estimate: Fraction
    exact: bool = False
    w_max: Fraction = Fraction(1)
    failures: int = 0
    iterations: int = 0
    sat_calls: int = 0
    estimates: list[Fraction] = field(default_factory=list)
    params: Optional[WeightParams] = None
    tilt_violation: bool = False   # some model lighter than final w_max / r
    w_max_above_one: bool = False  # the threaded bound exceeded 1 at some point
    max_models_per_call: int = 0


class _WeightStats:
    def __init__(self):
        self.min_seen: Optional[Fraction] = None
        self.max_models = 0
        self.w_max_above_one = False
        self.small_hits = 0

    def observe(self, y: SolutionSet, w_max: Fraction):
        if y.min_weight is not None and (self.min_seen is None or y.min_weight < self.min_seen):
            self.min_seen = y.min_weight
        self.max_models = max(self.max_models, len(y))
        if w_max > 1:
            self.w_max_above_one = True


def bounded_weight_sat(formula, pivot: Number, r: Number, w_max: Fraction, sampling_set: Sequence[int],
                       weights: WeightMap, extra_xors: Sequence[XorClause] = (), oracle=None
                       ) -> tuple[SolutionSet, Fraction]:
    """Enumerate models until their scaled weight exceeds ``pivot`` (or none remain).

    Returns the models seen and the refreshed bound  w_min * r.
    """
    if oracle is None:
        oracle = default_oracle()
    r = _frac(r)
    pivot = _frac(pivot)
    w_floor = Fraction(w_max) / r

    def stop(sol: SolutionSet) -> bool:
        w_min = min(w_floor, sol.min_weight)
        return sol.total_weight / (w_min * r) > pivot

    y = oracle.bounded_sat(OracleQuery(formula, extra_xors, sampling_set, None, stop, weights))
    w_min = w_floor if y.min_weight is None else min(w_floor, y.min_weight)
    return y, w_min * r


def weightmc_core(instance: ProblemInstance, pivot: int, r: Number, w_max: Fraction, rng, oracle=None,
                  stats: Optional[_WeightStats] = None) -> tuple[Optional[Fraction], Fraction]:
    """One core iteration: (c, w_max') with c * w_max' the weight estimate, or (None, w_max')."""
    if oracle is None:
        oracle = default_oracle()
    stats = stats or _WeightStats()
    f, s, w = instance.formula, instance.sampling_set, instance.weights
    y, w_max = bounded_weight_sat(f, pivot, r, w_max, s, w, (), oracle)
    stats.observe(y, w_max)
    if y.total_weight / w_max <= pivot:
        stats.small_hits += 1
        return y.total_weight / w_max, w_max
    n = len(s)
    i = 0
    while True:
        i += 1
        h = draw_hash(n, i, rng)
        xors = prefix(h, i).to_xor_clauses(s)
        y, w_max = bounded_weight_sat(f, pivot, r, w_max, s, w, xors, oracle)
        stats.observe(y, w_max)
        scaled = y.total_weight / w_max
        if (0 < scaled <= pivot) or i == n:
            break
    if scaled > pivot or y.total_weight == 0:
        return None, w_max
    return y.total_weight * 2 ** i / w_max, w_max


def weightmc(instance: ProblemInstance, epsilon: Number = 0.8, delta: Number = 0.2, r: Number = 1,
             seed: int = 0, oracle=None) -> WeightedCount:
    params = compute_weight_params(epsilon, delta, r)
    if oracle is None:
        oracle = default_oracle()
    calls0 = oracle.stats.calls
    stats = _WeightStats()
    w_max = Fraction(1)
    estimates: list[Fraction] = []
    failures = 0
    for it in range(params.t):
        c, w_max = weightmc_core(instance, params.pivot, params.r, w_max, make_rng(seed, it), oracle, stats)
        if c is None:
            failures += 1
            continue
        estimates.append(c * w_max)
    if not estimates:
        raise AllIterationsFailed(failures)
    est = lower_median(estimates)
    # every core enumerated all models without hashing
    exact = stats.small_hits == params.t
    return WeightedCount(est, exact, w_max, failures, params.t, oracle.stats.calls - calls0, estimates,
                         params, stats.min_seen is not None and stats.min_seen < w_max / params.r,
                         stats.w_max_above_one, stats.max_models)


# ------------------------------------------------------------ chain formulas


@dataclass(frozen=True)
class ChainFormula:
    """l_1 C_1 (l_2 C_2 ( ... l_m)) with C_j in {'or', 'and'}.

    ``chain_formula(k, m, base)`` gives the chain over variables base..base+m-1
    whose connectors are read off the m-bit expansion of k (1 -> or, 0 -> and);
    it has exactly k models.
    """

    literals: tuple[int, ...]
    connectors: tuple[str, ...]
    k: Optional[int] = None
    m: Optional[int] = None

    def __post_init__(self):
        if len(self.connectors) != max(len(self.literals) - 1, 0) or not self.literals:
            raise ValueError("a chain over m literals needs m-1 connectors")

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(abs(l) for l in self.literals)

    def negation(self) -> "ChainFormula":
        swap = {"or": "and", "and": "or"}
        k = None if self.k is None else 2 ** self.m - self.k
        return ChainFormula(tuple(-l for l in self.literals), tuple(swap[c] for c in self.connectors), k, self.m)

    def tree(self) -> E.Expr:
        node: E.Expr = E.Lit(self.literals[-1])
        for lit, conn in zip(reversed(self.literals[:-1]), reversed(self.connectors)):
            node = E.disj(E.Lit(lit), node) if conn == "or" else E.conj(E.Lit(lit), node)
        return node

    def cnf(self) -> list[list[int]]:
        """Distribute from the innermost literal outwards: or-connectors widen every clause."""
        clauses = [[self.literals[-1]]]
        for lit, conn in zip(reversed(self.literals[:-1]), reversed(self.connectors)):
            if conn == "or":
                clauses = [[lit] + c for c in clauses]
            else:
                clauses = [[lit]] + clauses
        return clauses

    def dnf(self) -> list[list[int]]:
        cubes = [[self.literals[-1]]]
        for lit, conn in zip(reversed(self.literals[:-1]), reversed(self.connectors)):
            if conn == "and":
                cubes = [[lit] + c for c in cubes]
            else:
                cubes = [[lit]] + cubes
        return cubes


def chain_bits(k: int, m: int) -> list[int]:
    """c_1..c_m, most significant first."""
    return [(k >> (m - 1 - j)) & 1 for j in range(m)]


def chain_formula(k: int, m: int, base: int) -> ChainFormula:
    if m < 1:
        raise ValueError("m must be at least 1")
    if k % 2 == 0 or not 1 <= k < 2 ** m:
        raise ValueError(f"k must be odd with 1 <= k < 2^m, got k={k}, m={m}")
    bits = chain_bits(k, m)
    conns = tuple("or" if b else "and" for b in bits[:-1])
    return ChainFormula(tuple(range(base, base + m)), conns, k, m)


# ----------------------------------------------------------------- reductions


@dataclass(frozen=True)
class ReductionPlan:
    """Fresh-variable layout: one contiguous block per weighted variable, ascending."""

    source_vars: tuple[int, ...]
    chains: tuple[ChainFormula, ...]
    m_hat: int
    num_vars: int  # original n

    @property
    def normalization(self) -> Fraction:
        return Fraction(1, 2 ** self.m_hat)

    @property
    def total_vars(self) -> int:
        return self.num_vars + self.m_hat


@dataclass(frozen=True)
class Reduction:
    """An unweighted formula with  W(F) = normalization * |models| - correction.

    ``formula`` is set when the result is plain CNF or DNF; ``tree`` always.
    Models are counted over all ``total_vars`` variables.
    """

    tree: E.Expr
    total_vars: int
    normalization: Fraction
    correction: Fraction
    mode: str
    plan: Optional[ReductionPlan] = None
    formula: Union[CnfFormula, DnfFormula, None] = None

    def weight_from_count(self, count: int) -> Fraction:
        return self.normalization * count - self.correction

    def to_cnf_instance(self) -> ProblemInstance:
        """CNF for counting: the normal form when available, else a count-preserving Tseitin encoding."""
        if isinstance(self.formula, CnfFormula):
            return ProblemInstance(self.formula)
        cnf = E.tseitin(self.tree, self.total_vars)
        return ProblemInstance(cnf, tuple(range(1, self.total_vars + 1)))

    def to_instance(self) -> ProblemInstance:
        if self.formula is not None:
            return ProblemInstance(self.formula)
        return self.to_cnf_instance()


def plan_reduction(num_vars: int, weights: WeightMap) -> ReductionPlan:
    nxt = num_vars + 1
    chains = []
    srcs = []
    for v in weights.normal_vars:
        km = dyadic_form(weights.positive[v])
        if km is None:
            raise NonDyadicWeight(f"weight {weights.positive[v]} of variable {v} is not k/2^m with m <= 16")
        k, m = km
        chains.append(chain_formula(k, m, nxt))
        srcs.append(v)
        nxt += m
    return ReductionPlan(tuple(srcs), tuple(chains), nxt - num_vars - 1, num_vars)


def _omega_tree(plan: ReductionPlan) -> E.Expr:
    return E.And(tuple(E.iff(E.Lit(x), ch.tree()) for x, ch in zip(plan.source_vars, plan.chains)))


def omega_cnf(plan: ReductionPlan) -> list[list[int]]:
    """(x <-> phi) as (-x or phi^CNF) and (x or (not phi)^CNF), distributed."""
    out = []
    for x, ch in zip(plan.source_vars, plan.chains):
        out += [[-x] + c for c in ch.cnf()]
        out += [[x] + c for c in ch.negation().cnf()]
    return out


def _formula_tree(f) -> E.Expr:
    if isinstance(f, DnfFormula):
        return E.from_dnf(f)
    return E.from_cnf(f)


def reduce_wmc_conjunctive(instance: ProblemInstance) -> Reduction:
    """F and Omega, with every weighted x_i tied to a chain formula on fresh variables."""
    plan = plan_reduction(instance.num_vars, instance.weights)
    tree = E.conj(_formula_tree(instance.formula), _omega_tree(plan))
    return Reduction(tree, plan.total_vars, plan.normalization, Fraction(0), "conjunctive", plan)


def reduce_wmc_implicative(instance: ProblemInstance) -> Reduction:
    """Omega -> F; the models where Omega fails are subtracted via a correction term."""
    plan = plan_reduction(instance.num_vars, instance.weights)
    tree = E.implies(_omega_tree(plan), _formula_tree(instance.formula))
    nf = len(plan.source_vars)
    corr = 2 ** instance.num_vars * (1 - Fraction(1, 2 ** nf))
    return Reduction(tree, plan.total_vars, plan.normalization, corr, "implicative", plan)


def reduce_wmc_form_preserving(instance: ProblemInstance) -> Reduction:
    """CNF in, CNF out (conjunctive identity); DNF in, DNF out (implicative identity)."""
    f = instance.formula
    plan = plan_reduction(instance.num_vars, instance.weights)
    om = omega_cnf(plan)
    if isinstance(f, CnfFormula):
        if f.xors:
            raise ValueError("form-preserving reduction needs a plain CNF (no xor rows)")
        out = CnfFormula(plan.total_vars, list(f.clauses) + om)
        tree = E.from_cnf(out)
        return Reduction(tree, plan.total_vars, plan.normalization, Fraction(0), "cnf-preserving", plan, out)
    if isinstance(f, DnfFormula):
        cubes = [[-l for l in c] for c in om] + [list(c) for c in f.cubes]
        out = DnfFormula(plan.total_vars, cubes)
        nf = len(plan.source_vars)
        corr = 2 ** instance.num_vars * (1 - Fraction(1, 2 ** nf))
        return Reduction(E.from_dnf(out), plan.total_vars, plan.normalization, corr, "dnf-preserving", plan, out)
    raise ValueError("input must be CNF or DNF")


def reduce_constraint_wmc(formula: CnfFormula, groups: Sequence[Sequence[Sequence[int]]],
                          group_weights: Sequence[Number]) -> Reduction:
    """Constraint-weighted counting: each group G_i (a clause list) carries weight k_i/2^m_i.

    F and (G_i -> chain_i) for every i; a model weighs the product over the
    groups it satisfies (1 if none).
    """
    if len(groups) != len(group_weights):
        raise ValueError("one weight per group")
    nxt = formula.num_vars + 1
    parts = [E.from_cnf(formula)]
    m_total = 0
    chains = []
    for g, w in zip(groups, group_weights):
        km = dyadic_form(_frac(w))
        if km is None:
            raise NonDyadicWeight(f"constraint weight {w} is not k/2^m")
        k, m = km
        ch = chain_formula(k, m, nxt)
        chains.append(ch)
        nxt += m
        m_total += m
        g_tree = E.And(tuple(E.Or(tuple(E.Lit(l) for l in c)) for c in g))
        parts.append(E.implies(g_tree, ch.tree()))
    total = formula.num_vars + m_total
    plan = ReductionPlan((), tuple(chains), m_total, formula.num_vars)
    return Reduction(E.And(tuple(parts)), total, Fraction(1, 2 ** m_total), Fraction(0), "constraint", plan)


def constraint_weight(model: int, groups: Sequence[Sequence[Sequence[int]]], group_weights: Sequence[Number]) -> Fraction:
    w = Fraction(1)
    for g, gw in zip(groups, group_weights):
        sat = all(any((l > 0) == bool((model >> abs(l)) & 1) for l in c) for c in g)
        if sat:
            w *= _frac(gw)
    return w

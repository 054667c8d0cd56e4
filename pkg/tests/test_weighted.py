import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cellcount import expr as E
from cellcount.exact import brute_force_count, brute_force_weight, count_cnf
from cellcount.formula import CnfFormula, DnfFormula, ProblemInstance, WeightMap
from cellcount.oracle import BuiltinOracle
from cellcount.weighted import (NonDyadicWeight, bounded_weight_sat, chain_formula, compute_weight_params,
                                constraint_weight, omega_cnf, plan_reduction, reduce_constraint_wmc,
                                reduce_wmc_conjunctive, reduce_wmc_form_preserving, reduce_wmc_implicative,
                                weightmc)

from helpers import random_dnf, random_dyadic_weights, random_kcnf


def tree_count(tree, n: int) -> int:
    return sum(E.evaluate(tree, m << 1) for m in range(1 << n))


def reduction_count(red) -> int:
    """Models over the reduction's own variables, by the component counter on a gate encoding."""
    if isinstance(red.formula, CnfFormula):
        return count_cnf(red.formula)
    if isinstance(red.formula, DnfFormula):
        return brute_force_count(red.formula)
    return count_cnf(E.tseitin(red.tree, red.total_vars))


@given(st.integers(1, 7), st.data())
def test_chain_forms_have_k_models(m, data):
    k = data.draw(st.integers(0, 2 ** (m - 1) - 1)) * 2 + 1
    ch = chain_formula(k, m, 1)
    assert tree_count(ch.tree(), m) == k
    assert brute_force_count(CnfFormula(m, ch.cnf())) == k
    assert brute_force_count(DnfFormula(m, ch.dnf())) == k
    assert brute_force_count(CnfFormula(m, ch.negation().cnf())) == 2 ** m - k


def test_chain_rejects_even_k():
    with pytest.raises(ValueError):
        chain_formula(2, 3, 1)
    with pytest.raises(ValueError):
        chain_formula(9, 3, 1)


def test_five_sixteenths_example():
    inst = ProblemInstance(CnfFormula(1, [(1,)]), (), WeightMap({1: Fraction(5, 16)}))
    conj = reduce_wmc_conjunctive(inst)
    assert conj.total_vars == 5 and conj.normalization == Fraction(1, 16)
    assert reduction_count(conj) == 5
    imp = reduce_wmc_implicative(inst)
    assert reduction_count(imp) == 21
    assert imp.weight_from_count(21) == Fraction(5, 16)
    fp = reduce_wmc_form_preserving(inst)
    assert isinstance(fp.formula, CnfFormula) and reduction_count(fp) == 5


def test_no_weights_is_identity():
    f = CnfFormula(3, [(1, 2)])
    red = reduce_wmc_conjunctive(ProblemInstance(f))
    assert red.normalization == 1 and red.total_vars == 3
    assert reduction_count(red) == brute_force_count(f)


def test_three_quarters_cnf_preserving():
    inst = ProblemInstance(CnfFormula(1, [(1,)]), (), WeightMap({1: Fraction(3, 4)}))
    red = reduce_wmc_form_preserving(inst)
    assert red.normalization * reduction_count(red) == Fraction(3, 4)


def test_dnf_single_cube_stays_dnf():
    inst = ProblemInstance(DnfFormula(2, [(1, -2)]), (), WeightMap({1: Fraction(3, 8)}))
    red = reduce_wmc_form_preserving(inst)
    assert isinstance(red.formula, DnfFormula)
    assert red.weight_from_count(reduction_count(red)) == brute_force_weight(inst.formula, inst.weights)


def test_omega_cnf_size_bound():
    w = WeightMap({1: Fraction(5, 16), 2: Fraction(3, 8), 3: Fraction(1, 2)})
    plan = plan_reduction(3, w)
    assert len(omega_cnf(plan)) <= sum(2 * ch.m for ch in plan.chains)


def test_non_dyadic_rejected():
    inst = ProblemInstance(CnfFormula(1, []), (), WeightMap({1: Fraction(1, 3)}))
    with pytest.raises(NonDyadicWeight):
        reduce_wmc_conjunctive(inst)


def test_constraint_example():
    f = CnfFormula(1, [])
    red = reduce_constraint_wmc(f, [[(1,)]], [Fraction(1, 2)])
    assert reduction_count(red) == 3
    assert red.normalization * 3 == Fraction(3, 2)
    assert sum(constraint_weight(m << 1, [[(1,)]], [Fraction(1, 2)]) for m in range(2)) == Fraction(3, 2)


def test_reduction_identities_random():
    rng = random.Random(21)
    for _ in range(25):
        n = rng.randint(2, 6)
        w = random_dyadic_weights(rng.sample(range(1, n + 1), rng.randint(0, n)), rng, 3)
        if rng.random() < 0.5:
            f = random_kcnf(n, rng.randint(1, 2 * n), rng, k=min(3, n))
        else:
            f = random_dnf(n, rng.randint(1, 3), rng.randint(1, min(3, n)), rng)
        inst = ProblemInstance(f, (), w)
        want = brute_force_weight(f, w)
        for red in (reduce_wmc_conjunctive(inst), reduce_wmc_implicative(inst), reduce_wmc_form_preserving(inst)):
            assert red.weight_from_count(reduction_count(red)) == want, red.mode


def test_weight_params():
    p = compute_weight_params(0.8, 0.2)
    assert p.pivot == 46 and p.t == 137
    with pytest.raises(ValueError):
        compute_weight_params(1.0, 0.2)
    with pytest.raises(ValueError):
        compute_weight_params(0.5, 0.2, r=0.5)


def test_bounded_weight_sat_stops_early():
    f = CnfFormula(8, [])
    w = WeightMap({1: Fraction(1, 2)})
    y, w_max = bounded_weight_sat(f, 10, 1, Fraction(1), range(1, 9), w)
    # each model weighs 1/2, w_min*r = 1/2: stop as soon as the scaled total passes 10
    assert len(y) == 11 and w_max == Fraction(1, 2)


def test_weightmc_small_is_exact():
    f = CnfFormula(3, [(1, 2)])
    w = WeightMap({1: Fraction(3, 4)})
    res = weightmc(ProblemInstance(f, (), w), r=3, seed=0)
    assert res.exact and res.estimate == brute_force_weight(f, w)


def test_weightmc_random_within_tolerance():
    rng = random.Random(22)
    inst = None
    for _ in range(100):
        f = random_kcnf(12, 25, rng)
        if brute_force_count(f) > 200:
            inst = f
            break
    w = random_dyadic_weights([1, 2, 3], rng, 2)
    want = brute_force_weight(inst, w)
    res = weightmc(ProblemInstance(inst, (), w), r=27, seed=4)
    assert want / Fraction(9, 5) <= res.estimate <= want * Fraction(9, 5)


def test_indifferent_weights_match_unweighted_trace():
    f = random_kcnf(12, 30, random.Random(23))
    log = []

    class Recording(BuiltinOracle):
        def bounded_sat(self, q):
            sol = super().bounded_sat(q)
            log.append((tuple(q.extra_xors), len(sol)))
            return sol

    res = weightmc(ProblemInstance(f), r=1, seed=6, oracle=Recording())
    pivot = res.params.pivot
    assert res.w_max == 1 and res.estimate.denominator == 1
    # with unit weights every weighted enumeration is a plain bounded one with limit pivot + 1
    for xors, got in log:
        assert got == min(brute_force_count(f, None, xors), pivot + 1)
    c = brute_force_count(f)
    assert c / 1.8 <= res.estimate <= 1.8 * c

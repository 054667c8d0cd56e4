"""Property tests for the invariants that hold on every input, not just on fixed examples."""
import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from cellcount.exact import brute_force_projections
from cellcount.formula import Assignment, CnfFormula, ProblemInstance, WeightMap, assignment_weight, block_assignment
from cellcount.hashing import draw_hash, prefix
from cellcount.oracle import BuiltinOracle, OracleQuery
from cellcount.relnet import Edge, ReliabilityGraph, brute_force_unreliability
from cellcount.sampling import Unsatisfiable, UniGen2, compute_kappa_pivot, unigen2_estimate
from cellcount.rng import make_rng

from helpers import random_kcnf, random_xors

seeds = st.integers(0, 2 ** 32 - 1)


@given(seeds, st.integers(2, 7))
def test_blocking_removes_exactly_one_projection(seed, n):
    rng = random.Random(seed)
    f = random_kcnf(n, rng.randint(0, 2 * n), rng, k=min(3, n))
    s = tuple(sorted(rng.sample(range(1, n + 1), rng.randint(1, n))))
    before = brute_force_projections(f, s)
    y = rng.randrange(1 << len(s))
    after = brute_force_projections(block_assignment(f, Assignment(s, y)), s)
    assert after == before - {y}


@given(st.dictionaries(st.integers(1, 6), st.fractions(Fraction(1, 64), Fraction(63, 64)), min_size=1))
def test_assignment_weights_sum_to_one(ws):
    w = WeightMap(ws)
    vs = w.normal_vars
    total = sum(assignment_weight(w, Assignment(vs, y)) for y in range(1 << len(vs)))
    assert total == 1


@given(seeds, st.integers(1, 40))
def test_bounded_sat_complete_below_limit(seed, limit):
    rng = random.Random(seed)
    n = rng.randint(3, 9)
    f = random_kcnf(n, rng.randint(1, 3 * n), rng)
    xs = random_xors(n, rng.randint(0, 2), rng)
    s = tuple(sorted(rng.sample(range(1, n + 1), rng.randint(1, n))))
    sol = BuiltinOracle().bounded_sat(OracleQuery(f, xs, s, limit))
    full = brute_force_projections(f, s, xs)
    got = {a.bits for a in sol.solutions}
    assert got <= full and len(got) == min(limit, len(full))
    assert all(f.satisfied_by(m) and all(x.satisfied_by(m) for x in xs) for m in sol.models)


@given(seeds, st.integers(2, 10))
def test_cells_are_nested(seed, n):
    rng = random.Random(seed)
    h = draw_hash(n, n - 1, rng)
    prev = set(range(1 << n))
    for m in range(n):
        cell = {y for y in range(1 << n) if prefix(h, m).contains(y)}
        assert cell <= prev
        prev = cell


@given(seeds)
def test_parallel_edge_never_raises_unreliability(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    edges = [Edge(*rng.sample(range(1, n + 1), 2), *rng.choice([(1, 1), (1, 2), (3, 2), (5, 3)]))
             for _ in range(rng.randint(1, 6))]
    g = ReliabilityGraph(n, tuple(edges))
    extra = Edge(*rng.sample(range(1, n + 1), 2), 3, 2)
    h = ReliabilityGraph(n, tuple(edges) + (extra,))
    assert brute_force_unreliability(h, 1, n) <= brute_force_unreliability(g, 1, n)


@settings(max_examples=15)
@given(seeds)
def test_unigen2_samples_are_models(seed):
    rng = random.Random(seed)
    f = random_kcnf(12, rng.randint(10, 30), rng)
    inst = ProblemInstance(f)
    try:
        setup = unigen2_estimate(inst, 16, seed)
    except Unsatisfiable:
        return
    if setup is None:
        return
    gen = UniGen2(inst, setup)
    r = make_rng(seed, 0)
    for _ in range(5):
        batch = gen.generate(r) or []
        assert all(f.satisfied_by(y.to_model()) for y in batch)
        assert len({y.bits for y in batch}) == len(batch)


@given(st.floats(6.85, 200))
def test_unigen2_thresholds_ordered(eps):
    p = compute_kappa_pivot(eps, "unigen2")
    assert 1 <= p.lo_thresh < p.pivot < p.hi_thresh

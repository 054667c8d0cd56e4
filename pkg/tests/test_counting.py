import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cellcount.counting import (AllIterationsFailed, approx_dnf_count, approxmc2, approxmc2_core,
                                ceil_log2_power, compute_count_params, log_sat_search, lower_median)
from cellcount.exact import brute_force_count
from cellcount.formula import CnfFormula, ProblemInstance
from cellcount.rng import make_rng

from helpers import ScriptedOracle, random_dnf, random_kcnf


def test_params_default():
    p = compute_count_params(0.8, 0.2)
    assert abs(float(p.thresh) - 72.955) < 1e-6
    assert p.t == 67
    assert p.limit == 73


def test_params_reject_bad_inputs():
    with pytest.raises(ValueError):
        compute_count_params(0, 0.2)
    with pytest.raises(ValueError):
        compute_count_params(0.8, 1.5)


@given(st.integers(2, 50), st.integers(1, 40))
def test_ceil_log2_power_exact(base, coef):
    t = ceil_log2_power(Fraction(base), coef)
    assert 2 ** t >= base ** coef
    assert t == 0 or 2 ** (t - 1) < base ** coef


def test_lower_median():
    assert lower_median([5, 1, 3]) == 3
    assert lower_median([4, 1, 3, 2]) == 2


def linear_scan(sizes, thresh):
    return next(m for m in range(len(sizes)) if sizes[m] < thresh)


@given(st.integers(3, 40), st.data())
def test_galloping_equals_linear_scan(width, data):
    # nested cells: sizes never increase with depth; cell 0 big, cell width-1 small
    cut = data.draw(st.integers(1, width - 1))
    sizes = [100] * cut + [data.draw(st.integers(0, 72))] * (width - cut)
    m_prev = data.draw(st.integers(1, width - 1))
    got = log_sat_search(lambda m: sizes[m], width, Fraction(73), m_prev)
    assert got == linear_scan(sizes, 73)


def test_unsat_instance_counts_zero():
    f = CnfFormula(2, [(1,), (-1,)])
    res = approxmc2(ProblemInstance(f), seed=0)
    assert res.value == 0 and res.exact


def test_small_instance_is_exact():
    f = CnfFormula(3, [(1, 2)])
    res = approxmc2(ProblemInstance(f), seed=1)
    assert res.exact and res.value == 6 and res.iterations == 0


def test_core_fails_when_deepest_cell_is_big():
    inst = ProblemInstance(CnfFormula(10, []))
    oracle = ScriptedOracle.from_sizes({}, default=500)
    assert approxmc2_core(inst, Fraction(73), 2, make_rng(0), oracle) is None
    with pytest.raises(AllIterationsFailed):
        approxmc2(inst, seed=0, oracle=oracle)


def test_core_returns_cells_and_size_from_profile():
    # sizes shrink by half per row; with thresh 73 the first small cell is m=6 (size 64)
    inst = ProblemInstance(CnfFormula(12, []))
    oracle = ScriptedOracle.from_sizes({i: max(4096 >> i, 1) for i in range(12)})
    trace = []
    res = approxmc2_core(inst, Fraction(73), 2, make_rng(0), oracle, trace)
    assert res == (64, 64)
    assert trace[0] == 1


def test_failed_core_keeps_previous_cell_count(monkeypatch):
    import cellcount.counting as cc

    seen = []
    answers = iter([(16, 40), None, (32, 50)] + [(8, 60)] * 100)

    def fake_core(instance, thresh, prev, rng, oracle=None, trace=None):
        seen.append(prev)
        return next(answers)

    monkeypatch.setattr(cc, "approxmc2_core", fake_core)
    inst = ProblemInstance(CnfFormula(12, []))
    res = cc.approxmc2(inst, seed=0)
    # the failed second core leaves nCells at 16 for the third
    assert seen[:4] == [2, 16, 16, 32]
    assert res.failures == 1 and len(res.estimates) == 66


def test_random_instances_within_tolerance():
    rng = random.Random(11)
    ok = total = 0
    for _ in range(6):
        f = random_kcnf(14, 30, rng)
        c = brute_force_count(f)
        if c < 100:
            continue
        est = approxmc2(ProblemInstance(f), seed=rng.getrandbits(32)).value
        total += 1
        ok += c / 1.8 <= est <= 1.8 * c
    assert total >= 3 and ok >= total - 1


def test_projected_count():
    rng = random.Random(12)
    f = random_kcnf(14, 20, rng)
    s = tuple(range(1, 11))
    c = brute_force_count(f, s)
    est = approxmc2(ProblemInstance(f, s), seed=5).value
    assert c / 1.8 <= est <= 1.8 * c


def test_dnf_count_uses_dnf_oracle():
    rng = random.Random(13)
    f = random_dnf(14, 6, 5, rng)
    res = approx_dnf_count(ProblemInstance(f), seed=2)
    assert res.oracle == "dnf"
    c = brute_force_count(f)
    assert c / 1.8 <= res.value <= 1.8 * c
    with pytest.raises(TypeError):
        approx_dnf_count(ProblemInstance(CnfFormula(2, [])))


def test_seed_reproducible():
    f = random_kcnf(14, 25, random.Random(14))
    a = approxmc2(ProblemInstance(f), seed=9)
    b = approxmc2(ProblemInstance(f), seed=9)
    assert a.estimates == b.estimates and a.value == b.value

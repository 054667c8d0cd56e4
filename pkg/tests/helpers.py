"""Instance generators, scripted oracles and small statistics used across the tests."""
from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from cellcount.formula import Assignment, CnfFormula, DnfFormula, SolutionSet, WeightMap, XorClause
from cellcount.oracle import OracleQuery, OracleStats


def random_kcnf(n: int, m: int, rng: random.Random, k: int = 3) -> CnfFormula:
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfFormula(n, clauses)


def random_dnf(n: int, cubes: int, width: int, rng: random.Random) -> DnfFormula:
    out = []
    for _ in range(cubes):
        vs = rng.sample(range(1, n + 1), width)
        out.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return DnfFormula(n, out)


def random_xors(n: int, count: int, rng: random.Random, density: float = 0.5) -> list[XorClause]:
    out = []
    for _ in range(count):
        vs = tuple(v for v in range(1, n + 1) if rng.random() < density)
        out.append(XorClause(vs, rng.getrandbits(1)))
    return out


def gate_formula(n_inputs: int, n_gates: int, rng: random.Random, constraints: int = 1) -> CnfFormula:
    """AND/OR/XOR gates over earlier signals plus a few random 3-clauses on top."""
    clauses = []
    v = n_inputs
    for _ in range(n_gates):
        v += 1
        a, b = rng.sample(range(1, v), 2)
        a = a if rng.random() < 0.5 else -a
        b = b if rng.random() < 0.5 else -b
        kind = rng.randrange(3)
        if kind == 0:
            clauses += [(-v, a), (-v, b), (v, -a, -b)]
        elif kind == 1:
            clauses += [(v, -a), (v, -b), (-v, a, b)]
        else:
            clauses += [(-v, a, b), (-v, -a, -b), (v, -a, b), (v, a, -b)]
    for _ in range(constraints):
        k = min(3, v)
        clauses.append(tuple(x if rng.random() < 0.5 else -x for x in rng.sample(range(1, v + 1), k)))
    return CnfFormula(v, clauses)


def random_dyadic_weights(vars_: Sequence[int], rng: random.Random, max_m: int = 4) -> WeightMap:
    out = {}
    for v in vars_:
        m = rng.randint(1, max_m)
        k = rng.randrange(1, 2 ** m, 2)
        out[v] = Fraction(k, 2 ** m)
    return WeightMap(out)


class ScriptedOracle:
    """Answers bounded_sat from a table keyed by the number of XOR rows in the query.

    ``cells[i]`` is the list of weights of the solutions in the i-row cell
    (use plain sizes through ``from_sizes``).  Solutions are synthetic
    assignments over the sampling set, numbered 0, 1, 2, ...
    """

    name = "scripted"

    def __init__(self, cells: dict[int, list[Fraction]], default: Optional[list[Fraction]] = None):
        self.cells = cells
        self.default = default if default is not None else []
        self.stats = OracleStats()
        self.queries: list[int] = []

    @classmethod
    def from_sizes(cls, sizes: dict[int, int], default: int = 0) -> "ScriptedOracle":
        return cls({i: [Fraction(1)] * s for i, s in sizes.items()}, [Fraction(1)] * default)

    def bounded_sat(self, q: OracleQuery) -> SolutionSet:
        self.stats.calls += 1
        i = len(q.extra_xors)
        self.queries.append(i)
        ws = self.cells.get(i, self.default)
        out = SolutionSet()
        s = tuple(q.sampling_set)
        for j, w in enumerate(ws):
            if q.limit is not None and len(out) >= q.limit:
                break
            # encode the row count and the index so cells can be told apart
            sol = Assignment(s, (i << 16 | j) & ((1 << len(s)) - 1))
            out.add(sol, sol.to_model(), w)
            if q.stop_rule is not None and q.stop_rule(out):
                break
        return out


def js_distance(counts: Sequence[int]) -> float:
    """Jensen-Shannon distance (base 2) between empirical frequencies and uniform."""
    from scipy.spatial.distance import jensenshannon

    p = np.asarray(counts, dtype=float)
    p /= p.sum()
    q = np.full_like(p, 1.0 / len(p))
    return float(jensenshannon(p, q, base=2))


def binomial_sigma(n: int, p: float) -> float:
    return math.sqrt(n * p * (1 - p))


def find_instance(pred: Callable[[CnfFormula], bool], gen: Callable[[random.Random], CnfFormula],
                  seed: int, tries: int = 5000) -> CnfFormula:
    rng = random.Random(seed)
    for _ in range(tries):
        f = gen(rng)
        if pred(f):
            return f
    raise RuntimeError("no instance found")

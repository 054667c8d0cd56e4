"""Approximate projected model counting with nested XOR cells.

One hash with |S|-1 rows is drawn per core iteration; its prefix slices give
nested cells, and a galloping search over the slice length finds the first
cell that is small (fewer than ``thresh`` solutions).  The median over core
iterations of  nSols * 2^m  is the estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

from .formula import DnfFormula, ProblemInstance
from .hashing import XorHash, draw_hash, prefix
from .oracle import DnfOracle, OracleQuery, default_oracle
from .rng import make_rng

Number = Union[int, float, Fraction, str]


class CountingError(RuntimeError):
    pass


class AllIterationsFailed(CountingError):
    def __init__(self, failures: int):
        self.failures = failures
        super().__init__(f"all {failures} core iterations failed")


def _frac(x: Number) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def ceil_log2_power(base: Fraction, coef: int) -> int:
    """Smallest integer t with t >= coef * log2(base), decided exactly at the boundary."""
    guess = math.ceil(coef * math.log2(base))
    # 2^t >= base^coef  <=>  t >= coef*log2(base)
    target = base ** coef
    t = guess
    while t > 0 and Fraction(2) ** (t - 1) >= target:
        t -= 1
    while Fraction(2) ** t < target:
        t += 1
    return t


@dataclass(frozen=True)
class CountParams:
    epsilon: Fraction
    delta: Fraction
    thresh: Fraction
    t: int

    @property
    def limit(self) -> int:
        """Solutions to ask BoundedSAT for: |Y| >= thresh iff |Y| reaches this many."""
        return math.ceil(self.thresh)

    @property
    def thresh_float(self) -> float:
        return float(self.thresh)


def compute_count_params(epsilon: Number, delta: Number) -> CountParams:
    eps, dl = _frac(epsilon), _frac(delta)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < dl <= 1:
        raise ValueError("delta must lie in (0, 1]")
    thresh = 1 + Fraction("9.84") * (1 + eps / (1 + eps)) * (1 + 1 / eps) ** 2
    t = ceil_log2_power(3 / dl, 17)
    return CountParams(eps, dl, thresh, t)


@dataclass
class ApproxCount:
    significand: int
    exponent2: int = 0
    exact: bool = False
    failures: int = 0
    iterations: int = 0
    sat_calls: int = 0
    estimates: list[tuple[int, int]] = field(default_factory=list)
    params: Optional[CountParams] = None
    oracle: str = ""

    @property
    def value(self) -> int:
        return self.significand << self.exponent2

    def __int__(self):
        return self.value


def lower_median(values: list[int]) -> int:
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def log_sat_search(cell_size: Callable[[int], int], width: int, thresh: Fraction, m_prev: int,
                   trace: Optional[list[int]] = None) -> int:
    """Galloping search for the smallest m whose cell is small.

    ``cell_size(m)`` is the size of the m-th nested cell (capped anywhere at or
    above thresh); ``width`` is |S|.  Cell 0 is known big, cell width-1 small.
    Queried slice lengths are appended to ``trace``.
    """
    lo, hi, m = 0, width - 1, m_prev
    big: dict[int, int] = {0: 1, width - 1: 0}
    while True:
        if trace is not None:
            trace.append(m)
        if cell_size(m) >= thresh:
            if big.get(m + 1) == 0:
                return m + 1
            for i in range(1, m + 1):
                big[i] = 1
            lo = m
            if abs(m - m_prev) < 3:
                m = m + 1
            elif 2 * m < width:
                m = 2 * m
            else:
                m = (hi + m) // 2
        else:
            if big.get(m - 1) == 1:
                return m
            for i in range(m, width + 1):
                big[i] = 0
            hi = m
            if abs(m - m_prev) < 3:
                m = m - 1
            else:
                m = (m + lo) // 2


class _CellCache:
    """Sizes of nested cells of one hash; small cells are kept so deeper ones are filtered, not re-solved."""

    def __init__(self, instance: ProblemInstance, h: XorHash, limit: int, oracle):
        self.instance, self.h, self.limit, self.oracle = instance, h, limit, oracle
        self.sizes: dict[int, int] = {}
        self.small: dict[int, list[int]] = {}  # m -> projected y vectors of a fully enumerated cell
        self.queries = 0

    def _project(self, solutions) -> list[int]:
        return [s.bits for s in solutions]

    def size(self, m: int) -> int:
        if m in self.sizes:
            return self.sizes[m]
        self.queries += 1
        src = [k for k in self.small if k <= m]
        if src:
            k = max(src)
            cell = prefix(self.h, m)
            ys = [y for y in self.small[k] if cell.contains(y)]
            self.small[m] = ys
            self.sizes[m] = len(ys)
            return len(ys)
        inst = self.instance
        xors = prefix(self.h, m).to_xor_clauses(inst.sampling_set)
        sol = self.oracle.bounded_sat(OracleQuery(inst.formula, xors, inst.sampling_set, self.limit))
        self.sizes[m] = len(sol)
        if len(sol) < self.limit:
            self.small[m] = self._project(sol)
        return len(sol)


def approxmc2_core(instance: ProblemInstance, thresh: Fraction, prev_ncells: int, rng, oracle=None,
                   trace: Optional[list[int]] = None) -> Optional[tuple[int, int]]:
    """One core iteration: (nCells, nSols), or None when the deepest cell is still big."""
    if oracle is None:
        oracle = default_oracle()
    width = len(instance.sampling_set)
    if width < 2:
        return None
    h = draw_hash(width, width - 1, rng)
    cache = _CellCache(instance, h, math.ceil(thresh), oracle)
    if cache.size(width - 1) >= thresh:
        return None
    m_prev = prev_ncells.bit_length() - 1
    m_prev = min(max(m_prev, 1), width - 1)
    m = log_sat_search(cache.size, width, thresh, m_prev, trace)
    n_sols = cache.size(m)
    return 1 << m, n_sols


def approxmc2(instance: ProblemInstance, epsilon: Number = 0.8, delta: Number = 0.2, seed: int = 0,
              oracle=None) -> ApproxCount:
    params = compute_count_params(epsilon, delta)
    if oracle is None:
        oracle = DnfOracle() if isinstance(instance.formula, DnfFormula) else default_oracle()
    calls0 = oracle.stats.calls
    y = oracle.bounded_sat(OracleQuery(instance.formula, (), instance.sampling_set, params.limit))
    if len(y) < params.thresh:
        return ApproxCount(len(y), 0, exact=True, sat_calls=oracle.stats.calls - calls0,
                           params=params, oracle=oracle.name)
    ncells = 2
    estimates: list[tuple[int, int]] = []
    failures = 0
    for it in range(params.t):
        res = approxmc2_core(instance, params.thresh, ncells, make_rng(seed, it), oracle)
        if res is None:
            failures += 1
            continue
        ncells, nsols = res
        estimates.append((nsols, ncells.bit_length() - 1))
    if not estimates:
        raise AllIterationsFailed(failures)
    med = lower_median([s << e for s, e in estimates])
    # normalize to the (significand, exponent) pair that produced the median
    sig, exp = next((s, e) for s, e in estimates if s << e == med)
    return ApproxCount(sig, exp, exact=False, failures=failures, iterations=params.t,
                       sat_calls=oracle.stats.calls - calls0, estimates=estimates,
                       params=params, oracle=oracle.name)


def approx_dnf_count(instance: ProblemInstance, epsilon: Number = 0.8, delta: Number = 0.2,
                     seed: int = 0) -> ApproxCount:
    """Same procedure with every cell query answered by the search-free DNF enumerator."""
    if not isinstance(instance.formula, DnfFormula):
        raise TypeError("approx_dnf_count needs a DNF instance")
    return approxmc2(instance, epsilon, delta, seed, DnfOracle())

"""Almost-uniform and weighted witness generation by random XOR cells.

Every sampler splits into a one-time setup per formula (tolerance
parameters, an estimate of the number of cells needed) and cheap
independent per-call work: draw a hash and a target, look for a cell of
acceptable size among a few nested slices, pick from it.

A failed call returns None; the caller decides whether to retry.  An
unsatisfiable formula raises ``Unsatisfiable`` instead.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .counting import Number, _frac, approxmc2
from .formula import Assignment, ProblemInstance, SolutionSet
from .hashing import draw_hash, prefix
from .oracle import OracleQuery, default_oracle
from .rng import make_rng
from .weighted import bounded_weight_sat, weightmc

SQRT2 = math.sqrt(2.0)

# (a, b) in  eps = (1 + kappa)(a + b / (1 - kappa)^2) - 1
_KAPPA_CURVES = {
    "unigen": (2.23, 0.48),
    "unigen2": (7.44, 0.392),
    "weightgen": (7.55, 0.29),
}


class Unsatisfiable(RuntimeError):
    pass


class SamplerFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SampleParams:
    variant: str
    epsilon: float
    kappa: float
    pivot: int
    hi_thresh: float
    lo_thresh: float


def _eps_of_kappa(kappa: float, a: float, b: float) -> float:
    return (1 + kappa) * (a + b / (1 - kappa) ** 2) - 1


def epsilon_floor(variant: str) -> float:
    a, b = _KAPPA_CURVES[variant]
    return a + b - 1


def compute_kappa_pivot(epsilon: float, variant: str = "unigen2") -> SampleParams:
    if variant not in _KAPPA_CURVES:
        raise ValueError(f"unknown sampler variant {variant!r}")
    a, b = _KAPPA_CURVES[variant]
    eps = float(epsilon)
    if variant == "unigen" and not eps > 1.71:
        raise ValueError("unigen needs epsilon > 1.71")
    if variant == "unigen2" and not eps >= 6.84:
        raise ValueError("unigen2 needs epsilon >= 6.84")
    if variant == "weightgen" and not eps > 6.84:
        raise ValueError("weightgen needs epsilon > 6.84")
    from scipy.optimize import brentq

    # the right-hand side is increasing in kappa on [0, 1) and diverges at 1
    hi = 1.0 - 1e-12
    kappa = brentq(lambda k: _eps_of_kappa(k, a, b) - eps, 0.0, hi, xtol=1e-12)
    if variant == "unigen":
        pivot = math.ceil(3 * math.exp(0.5) * (1 + 1 / kappa) ** 2)
        hi_t = 1 + (1 + kappa) * pivot
        lo_t = pivot / (1 + kappa)
    elif variant == "unigen2":
        pivot = math.ceil(4.03 * (1 + 1 / kappa) ** 2)
        hi_t = math.ceil(1 + SQRT2 * (1 + kappa) * pivot)
        lo_t = math.floor(pivot / (SQRT2 * (1 + kappa)))
    else:
        pivot = math.ceil(4.03 * (1 + 1 / kappa) ** 2)
        hi_t = 1 + SQRT2 * (1 + kappa) * pivot
        lo_t = pivot / (SQRT2 * (1 + kappa))
    return SampleParams(variant, eps, kappa, pivot, hi_t, lo_t)


def ceil_log2(x: Fraction) -> int:
    """Smallest q with 2^q >= x (x > 0), exact."""
    x = Fraction(x)
    q = math.ceil(math.log2(x.numerator) - math.log2(x.denominator))
    while Fraction(2) ** (q - 1) >= x:
        q -= 1
    while Fraction(2) ** q < x:
        q += 1
    return q


def round_half_up_log2(x: Fraction) -> int:
    """floor(log2(x) + 1/2), decided exactly:  2^(2k-1) <= x^2 < 2^(2k+1)."""
    x = Fraction(x)
    k = math.floor(math.log2(x.numerator) - math.log2(x.denominator) + 0.5)
    sq = x * x
    while sq < Fraction(2) ** (2 * k - 1):
        k -= 1
    while sq >= Fraction(2) ** (2 * k + 1):
        k += 1
    return k


def _uniform_pick(ys: Sequence[Assignment], rng) -> Assignment:
    return ys[rng.randrange(len(ys))]


def weighted_pick(sol: SolutionSet, rng) -> Assignment:
    """Choose with probability proportional to weight, by exact integer inversion."""
    den = 1
    for w in sol.weights:
        den = den * w.denominator // math.gcd(den, w.denominator)
    ints = [int(w * den) for w in sol.weights]
    u = rng.randrange(sum(ints))
    acc = 0
    for s, wi in zip(sol.solutions, ints):
        acc += wi
        if u < acc:
            return s
    raise AssertionError("unreachable")


def _cell(instance: ProblemInstance, h, i: int, limit: Optional[int], oracle) -> SolutionSet:
    xors = prefix(h, i).to_xor_clauses(instance.sampling_set)
    return oracle.bounded_sat(OracleQuery(instance.formula, xors, instance.sampling_set, limit))


# ---------------------------------------------------------------------- UniGen


@dataclass
class UniGen:
    """Near-uniform single-witness sampler; construction runs the once-per-formula part."""

    instance: ProblemInstance
    epsilon: float = 6.0
    seed: int = 0
    oracle: object = None
    params: SampleParams = field(init=False)
    small: Optional[list] = field(init=False, default=None)
    q: Optional[int] = field(init=False, default=None)
    count_estimate: Optional[int] = field(init=False, default=None)

    def __post_init__(self):
        if self.oracle is None:
            self.oracle = default_oracle()
        self.params = compute_kappa_pivot(self.epsilon, "unigen")
        p = self.params
        # asking for floor(hiThresh)+1 solutions tells whether |Y| <= hiThresh
        limit = math.floor(p.hi_thresh) + 1
        inst = self.instance
        y = self.oracle.bounded_sat(OracleQuery(inst.formula, (), inst.sampling_set, limit))
        if len(y) == 0:
            raise Unsatisfiable("formula has no models")
        if len(y) <= p.hi_thresh:
            self.small = list(y.solutions)
            return
        c = approxmc2(inst, 0.8, 0.8, make_rng(self.seed, 0).getrandbits(63), self.oracle)
        self.count_estimate = c.value
        self.q = ceil_log2(Fraction(c.value) * Fraction(9, 5) / p.pivot)

    def sample(self, seed: int) -> Optional[Assignment]:
        rng = make_rng(seed)
        if self.small is not None:
            return _uniform_pick(self.small, rng)
        p, inst = self.params, self.instance
        width = len(inst.sampling_set)
        rows = width - 1
        h = draw_hash(width, rows, rng)
        limit = math.floor(p.hi_thresh) + 1
        y = None
        for i in range(max(self.q - 3, 0), min(self.q, rows) + 1):
            y = _cell(inst, h, i, limit, self.oracle)
            if p.lo_thresh <= len(y) <= p.hi_thresh:
                return _uniform_pick(y.solutions, rng)
        return None


def unigen_sample(instance: ProblemInstance, epsilon: float = 6.0, seed: int = 0, oracle=None) -> Optional[Assignment]:
    return UniGen(instance, epsilon, seed, oracle).sample(seed)


# --------------------------------------------------------------------- UniGen2


@dataclass(frozen=True)
class SamplerSetup:
    hash_bits: Optional[int]  # None: few solutions, sample by enumeration
    lo_thresh: int
    thresh: int
    params: SampleParams
    enumerated: Optional[tuple] = None


ESTIMATE_LIMIT = 61


def unigen2_estimate(instance: ProblemInstance, epsilon: float = 16.0, seed: int = 0, oracle=None
                     ) -> Optional[SamplerSetup]:
    """One-time parameter estimation; None means failure (retry with a new seed)."""
    if oracle is None:
        oracle = default_oracle()
    p = compute_kappa_pivot(epsilon, "unigen2")
    lo, th = int(p.lo_thresh), int(p.hi_thresh)
    inst = instance
    # small solution sets are handled by enumeration
    cap = max(ESTIMATE_LIMIT - 1, th)
    y = oracle.bounded_sat(OracleQuery(inst.formula, (), inst.sampling_set, cap + 1))
    if len(y) == 0:
        raise Unsatisfiable("formula has no models")
    if len(y) <= cap:
        return SamplerSetup(None, lo, th, p, tuple(y.solutions))
    rng = make_rng(seed)
    width = len(inst.sampling_set)
    for i in range(1, width + 1):
        h = draw_hash(width, i, rng)
        y = _cell(inst, h, i, ESTIMATE_LIMIT, oracle)
        if 1 <= len(y) <= ESTIMATE_LIMIT - 1:
            ratio = Fraction(len(y)) * 2 ** i * Fraction(9, 5) / p.pivot
            return SamplerSetup(round_half_up_log2(ratio), lo, th, p)
    return None


def _probe_order(hash_bits: int, last: Optional[int], order: Optional[Sequence[int]] = None) -> list[int]:
    vals = [hash_bits - 2, hash_bits - 1, hash_bits]
    if order is not None:
        seq = [vals[j] for j in order]
    elif last in vals:
        seq = [last] + [v for v in vals if v != last]
    else:
        seq = vals
    return [v for v in seq if v >= 0]


@dataclass
class UniGen2:
    """Batch sampler handle; keeps the last successful slice for the probe order."""

    instance: ProblemInstance
    setup: SamplerSetup
    oracle: object = None
    last_success: Optional[int] = None

    def __post_init__(self):
        if self.oracle is None:
            self.oracle = default_oracle()

    def generate(self, rng, order: Optional[Sequence[int]] = None) -> Optional[list[Assignment]]:
        st = self.setup
        if st.hash_bits is None:
            pool = list(st.enumerated)
            return rng.sample(pool, min(st.lo_thresh, len(pool)))
        inst = self.instance
        width = len(inst.sampling_set)
        hb = min(st.hash_bits, width)
        h = draw_hash(width, hb, rng)
        for i in _probe_order(hb, self.last_success, order):
            y = _cell(inst, h, i, st.thresh, self.oracle)
            if st.lo_thresh <= len(y) < st.thresh:
                self.last_success = i
                return rng.sample(y.solutions, st.lo_thresh)
        return None


def unigen2_generate(instance: ProblemInstance, setup: SamplerSetup, seed: int = 0, oracle=None,
                     order: Optional[Sequence[int]] = None) -> Optional[list[Assignment]]:
    return UniGen2(instance, setup, oracle).generate(make_rng(seed), order)


def _worker_batch(args):
    instance, setup, seed, widx, calls, max_retries = args
    gen = UniGen2(instance, setup)
    rng = make_rng(seed, widx)
    out: list[Assignment] = []
    done = fails = streak = 0
    while done < calls:
        batch = gen.generate(rng)
        if batch is None:
            fails += 1
            streak += 1
            if streak > max_retries:
                raise SamplerFailure(f"worker {widx}: generate call failed {streak} times in a row")
            continue
        streak = 0
        out.extend(batch)
        done += 1
    return out, done, fails


def unigen2_parallel(instance: ProblemInstance, epsilon: float, n_samples: int, workers: int = 1,
                     seed: int = 0, max_retries: int = 10, setup: Optional[SamplerSetup] = None,
                     oracle=None, return_stats: bool = False):
    """Estimate once, then spread ceil(N/loThresh) generate calls across workers.

    Worker w draws from the stream (seed, w); workers=1 is the plain sequential loop.
    A generate call is retried up to ``max_retries`` times on the worker's stream.
    With ``return_stats`` the result is (samples, successful calls, failed calls).
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    if setup is None:
        for attempt in range(max_retries + 1):
            setup = unigen2_estimate(instance, epsilon, make_rng(seed, 1 << 20, attempt).getrandbits(63), oracle)
            if setup is not None:
                break
        else:
            raise SamplerFailure("parameter estimation failed repeatedly")
    per_call = setup.lo_thresh if setup.hash_bits is not None else min(setup.lo_thresh, len(setup.enumerated))
    calls = -(-n_samples // per_call)
    shares = [calls // workers + (1 if w < calls % workers else 0) for w in range(workers)]
    jobs = [(instance, setup, seed, w, shares[w], max_retries) for w in range(workers)]
    if workers == 1:
        results = [_worker_batch(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_worker_batch, jobs))
    merged: list[Assignment] = []
    for out, _, _ in results:
        merged.extend(out)
    if return_stats:
        return merged, sum(r[1] for r in results), sum(r[2] for r in results)
    return merged


# ------------------------------------------------------------------- WeightGen


@dataclass
class WeightGen:
    """Weighted sampler: probability of a witness roughly proportional to its weight."""

    instance: ProblemInstance
    epsilon: float = 16.0
    r: Number = 1
    seed: int = 0
    oracle: object = None
    params: SampleParams = field(init=False)
    small: Optional[SolutionSet] = field(init=False, default=None)
    q: Optional[int] = field(init=False, default=None)
    w_max: Fraction = field(init=False, default=Fraction(1))
    count_estimate: Optional[Fraction] = field(init=False, default=None)

    def __post_init__(self):
        if self.oracle is None:
            self.oracle = default_oracle()
        self.r = _frac(self.r)
        self.params = p = compute_kappa_pivot(self.epsilon, "weightgen")
        inst = self.instance
        hi = Fraction(p.hi_thresh)
        y, w_max = bounded_weight_sat(inst.formula, hi, self.r, Fraction(1), inst.sampling_set,
                                      inst.weights, (), self.oracle)
        if len(y) == 0:
            raise Unsatisfiable("formula has no models")
        if y.total_weight / w_max <= hi:
            self.small = y
            self.w_max = w_max
            return
        res = weightmc(inst, 0.8, 0.2, self.r, make_rng(self.seed, 0).getrandbits(63), self.oracle)
        self.count_estimate = res.estimate
        self.w_max = res.w_max
        self.q = ceil_log2(res.estimate / res.w_max * Fraction(9, 5) / p.pivot)

    def sample(self, seed: int) -> Optional[Assignment]:
        rng = make_rng(seed)
        if self.small is not None:
            return weighted_pick(self.small, rng)
        p, inst = self.params, self.instance
        hi, lo = Fraction(p.hi_thresh), Fraction(p.lo_thresh)
        width = len(inst.sampling_set)
        q = min(max(self.q, 0), width)
        h = draw_hash(width, q, rng)
        w_max = self.w_max
        for i in range(max(q - 3, 0), q + 1):
            xors = prefix(h, i).to_xor_clauses(inst.sampling_set)
            y, w_max = bounded_weight_sat(inst.formula, hi, self.r, w_max, inst.sampling_set,
                                          inst.weights, xors, self.oracle)
            scaled = y.total_weight / w_max
            if lo <= scaled <= hi:
                return weighted_pick(y, rng)
        return None


def weightgen_sample(instance: ProblemInstance, epsilon: float = 16.0, r: Number = 1, seed: int = 0,
                     oracle=None) -> Optional[Assignment]:
    return WeightGen(instance, epsilon, r, seed, oracle).sample(seed)

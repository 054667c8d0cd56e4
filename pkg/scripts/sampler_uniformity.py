"""Witness histogram of UniGen2 against an ideal uniform sampler.

    python scripts/sampler_uniformity.py --samples 50000 --workers 2
"""
import argparse
import random
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import jensenshannon

from cellcount import ProblemInstance
from cellcount.exact import brute_force_projections
from cellcount.formula import CnfFormula
from cellcount.sampling import unigen2_estimate, unigen2_parallel


@dataclass
class Config:
    samples: int = 50000
    workers: int = 1
    epsilon: float = 16.0
    num_vars: int = 12
    seed: int = 3


def pick_instance(cfg: Config):
    rng = random.Random(cfg.seed)
    n = cfg.num_vars
    while True:
        f = CnfFormula(n, [tuple(v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), 3))
                           for _ in range(rng.randint(2 * n, 4 * n))])
        sols = sorted(brute_force_projections(f, range(1, n + 1)))
        if 100 <= len(sols) <= 400:
            return f, sols


def main(cfg: Config):
    f, sols = pick_instance(cfg)
    inst = ProblemInstance(f)
    setup = unigen2_estimate(inst, cfg.epsilon, cfg.seed)
    print(f"|R| = {len(sols)}, hashBits = {setup.hash_bits}, loThresh = {setup.lo_thresh}, thresh = {setup.thresh}")
    out, ok, fail = unigen2_parallel(inst, cfg.epsilon, cfg.samples, cfg.workers, cfg.seed, setup=setup,
                                     return_stats=True)
    counts = Counter(y.bits for y in out[:cfg.samples])
    ours = np.array([counts.get(y, 0) for y in sols], float)
    rng = np.random.default_rng(cfg.seed)
    ideal = np.bincount(rng.integers(0, len(sols), cfg.samples), minlength=len(sols)).astype(float)
    uni = np.full(len(sols), 1 / len(sols))
    print(f"generate calls: {ok} succeeded, {fail} failed ({ok / (ok + fail):.3f} success rate)")
    print(f"JS distance to uniform: sampler {jensenshannon(ours / ours.sum(), uni, base=2):.4f}, "
          f"ideal {jensenshannon(ideal / ideal.sum(), uni, base=2):.4f}")
    # histogram of "how many witnesses were drawn c times", the usual way to compare the two
    for name, arr in (("sampler", ours), ("ideal", ideal)):
        hist, edges = np.histogram(arr, bins=10)
        print(f"{name:>8}: " + " ".join(f"{int(e)}:{h}" for e, h in zip(edges, hist)))


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for k, v in vars(Config()).items():
        p.add_argument("--" + k.replace("_", "-"), type=type(v), default=v)
    main(Config(**vars(p.parse_args())))

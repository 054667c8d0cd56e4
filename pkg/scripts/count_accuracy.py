"""Approximate vs exact projected counts on random 3-CNF instances.

    python scripts/count_accuracy.py --instances 20 --seed 1
"""
import argparse
import math
import random
import time
from dataclasses import dataclass

from cellcount import ProblemInstance, approxmc2
from cellcount.exact import count_cnf
from cellcount.formula import CnfFormula


@dataclass
class Config:
    instances: int = 20
    min_vars: int = 15
    max_vars: int = 22
    epsilon: float = 0.8
    delta: float = 0.2
    seed: int = 1


def random_3cnf(n, m, rng):
    return CnfFormula(n, [tuple(v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), 3))
                          for _ in range(m)])


def main(cfg: Config):
    rng = random.Random(cfg.seed)
    print(f"{'n':>3} {'exact':>8} {'estimate':>9} {'tol':>7} {'calls':>6} {'sec':>6}")
    tols, hits, done = [], 0, 0
    while done < cfg.instances:
        n = rng.randint(cfg.min_vars, cfg.max_vars)
        f = random_3cnf(n, rng.randint(int(2.6 * n), int(3.6 * n)), rng)
        exact = count_cnf(f)
        if exact < 100:
            continue
        done += 1
        t = time.time()
        res = approxmc2(ProblemInstance(f), cfg.epsilon, cfg.delta, seed=rng.getrandbits(32))
        tol = max(res.value / exact, exact / res.value) - 1
        tols.append(tol)
        hits += tol <= cfg.epsilon
        print(f"{n:>3} {exact:>8} {res.value:>9} {tol:>7.3f} {res.sat_calls:>6} {time.time() - t:>6.2f}")
    geo = math.exp(sum(math.log1p(t) for t in tols) / len(tols)) - 1
    print(f"within tolerance: {hits}/{done}   geometric-mean tolerance: {geo:.4f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for k, v in vars(Config()).items():
        p.add_argument("--" + k.replace("_", "-"), type=type(v), default=v)
    main(Config(**vars(p.parse_args())))

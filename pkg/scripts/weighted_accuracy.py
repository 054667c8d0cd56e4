"""WeightMC against exact weighted counts, and the unweighted route through the reductions.

    python scripts/weighted_accuracy.py --instances 10
"""
import argparse
import random
import time
from dataclasses import dataclass
from fractions import Fraction

from cellcount import ProblemInstance, approxmc2
from cellcount.formula import CnfFormula, WeightMap
from cellcount.weighted import reduce_wmc_form_preserving, weightmc


@dataclass
class Config:
    instances: int = 10
    num_vars: int = 14
    weighted_vars: int = 3
    seed: int = 5


def main(cfg: Config):
    rng = random.Random(cfg.seed)
    n = cfg.num_vars
    print(f"{'exact':>12} {'weightmc':>12} {'via reduction':>14} {'tilt':>5} {'sec':>6}")
    done = 0
    while done < cfg.instances:
        f = CnfFormula(n, [tuple(v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), 3))
                           for _ in range(rng.randint(20, 40))])
        w = WeightMap({v: Fraction(rng.randrange(1, 8, 2), 8) for v in rng.sample(range(1, n + 1), cfg.weighted_vars)})
        ws = [w.model_weight(m) for m in range(0, 1 << (n + 1), 2) if f.satisfied_by(m)]
        if len(ws) < 300:
            continue
        done += 1
        exact = sum(ws)
        tilt = max(ws) / min(ws)
        t = time.time()
        res = weightmc(ProblemInstance(f, (), w), r=tilt, seed=rng.getrandbits(32))
        red = reduce_wmc_form_preserving(ProblemInstance(f, (), w))
        via = red.weight_from_count(approxmc2(red.to_instance(), seed=rng.getrandbits(32)).value)
        print(f"{float(exact):>12.3f} {float(res.estimate):>12.3f} {float(via):>14.3f} {str(tilt):>5} "
              f"{time.time() - t:>6.2f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for k, v in vars(Config()).items():
        p.add_argument("--" + k.replace("_", "-"), type=type(v), default=v)
    main(Config(**vars(p.parse_args())))

"""Support sizes found on gate-structured formulas, and the effect on counting cost.

    python scripts/mis_gates.py --formulas 10
"""
import argparse
import random
import time
from dataclasses import dataclass

from cellcount import ProblemInstance, approxmc2
from cellcount.formula import CnfFormula
from cellcount.indsupport import mis


@dataclass
class Config:
    formulas: int = 10
    inputs: int = 12
    gates: int = 20
    seed: int = 9


def gate_formula(n_inputs, n_gates, rng) -> CnfFormula:
    clauses, v = [], n_inputs
    for _ in range(n_gates):
        v += 1
        a, b = (x if rng.random() < 0.5 else -x for x in rng.sample(range(1, v), 2))
        if rng.random() < 0.5:
            clauses += [(-v, a), (-v, b), (v, -a, -b)]
        else:
            clauses += [(-v, a, b), (-v, -a, -b), (v, -a, b), (v, a, -b)]
    clauses.append(tuple(x if rng.random() < 0.5 else -x for x in rng.sample(range(1, v + 1), 3)))
    return CnfFormula(v, clauses)


def main(cfg: Config):
    rng = random.Random(cfg.seed)
    print(f"{'vars':>5} {'|I|':>4} {'local':>5} {'mis s':>6} {'count(X)':>9} {'s':>5} {'count(I)':>9} {'s':>5}")
    for i in range(cfg.formulas):
        f = gate_formula(cfg.inputs, cfg.gates, rng)
        t = time.time()
        res = mis(f, seed=i)
        t_mis = time.time() - t
        t = time.time()
        a = approxmc2(ProblemInstance(f), seed=i).value
        t_a = time.time() - t
        t = time.time()
        b = approxmc2(ProblemInstance(f, res.support), seed=i).value
        t_b = time.time() - t
        print(f"{f.num_vars:>5} {len(res.support):>4} {len(res.local):>5} {t_mis:>6.2f} {a:>9} {t_a:>5.1f} "
              f"{b:>9} {t_b:>5.1f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for k, v in vars(Config()).items():
        p.add_argument("--" + k.replace("_", "-"), type=type(v), default=v)
    main(Config(**vars(p.parse_args())))

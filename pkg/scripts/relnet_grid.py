"""Corner-to-corner unreliability of small grids: counting pipeline vs exact vs Monte Carlo.

    python scripts/relnet_grid.py --rows 3 --cols 3
"""
import argparse
import time
from dataclasses import dataclass

from cellcount.relnet import (MAX_BRUTE_EDGES, Edge, ReliabilityGraph, brute_force_unreliability,
                              estimate_unreliability, monte_carlo_unreliability)


@dataclass
class Config:
    rows: int = 3
    cols: int = 3
    k: int = 3  # every edge is up with probability k / 2^m
    m: int = 2
    mc_samples: int = 100000
    seed: int = 7


def grid(rows, cols, k, m) -> ReliabilityGraph:
    node = lambda r, c: r * cols + c + 1
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append(Edge(node(r, c), node(r, c + 1), k, m))
            if r + 1 < rows:
                edges.append(Edge(node(r, c), node(r + 1, c), k, m))
    return ReliabilityGraph(rows * cols, tuple(edges))


def main(cfg: Config):
    g = grid(cfg.rows, cfg.cols, cfg.k, cfg.m)
    s, t = 1, g.num_nodes
    print(f"{g.num_nodes} nodes, {len(g.edges)} edges, {g.total_bits} fair edges after expansion")
    t0 = time.time()
    est = estimate_unreliability(g, s, t, seed=cfg.seed)
    print(f"counting:    r = {float(est.unreliability):.6f}  ({time.time() - t0:.1f}s, "
          f"{est.raw.sat_calls} oracle calls)")
    t0 = time.time()
    mc = monte_carlo_unreliability(g, s, t, cfg.mc_samples, cfg.seed)
    print(f"monte carlo: r = {mc:.6f}  ({time.time() - t0:.1f}s)")
    if len(g.edges) <= MAX_BRUTE_EDGES:
        print(f"exact:       r = {float(brute_force_unreliability(g, s, t)):.6f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for k, v in vars(Config()).items():
        p.add_argument("--" + k.replace("_", "-"), type=type(v), default=v)
    main(Config(**vars(p.parse_args())))

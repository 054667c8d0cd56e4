"""Two-terminal network unreliability through projected model counting.

Pipeline: every edge with up-probability k/2^m becomes a small series-parallel
gadget of m fair edges with exactly k connecting subsets; the fair-edge graph
is encoded as a CNF whose models, projected on edge variables, are exactly the
edge subsets that leave source and sink disconnected; the projected count
over 2^M is the unreliability.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .counting import ApproxCount, Number, approxmc2
from .formula import CnfFormula, ProblemInstance
from .rng import derive_seed
from .weighted import chain_bits


class GraphError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Edge:
    start: int
    end: int
    k: int = 1
    m: int = 1

    @property
    def probability(self) -> Fraction:
        return Fraction(self.k, 2 ** self.m)


@dataclass(frozen=True)
class ReliabilityGraph:
    num_nodes: int
    edges: tuple[Edge, ...] = ()
    directed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        for e in self.edges:
            for node in (e.start, e.end):
                if not 1 <= node <= self.num_nodes:
                    raise GraphError(f"edge refers to node {node} outside 1..{self.num_nodes}")
            _check_dyadic(e.k, e.m)

    @property
    def total_bits(self) -> int:
        return sum(e.m for e in self.edges)


def _check_dyadic(k: int, m: int, line: int = 0) -> None:
    if m < 1:
        raise GraphError(f"probability exponent must be positive, got m={m}", line)
    if k % 2 == 0 or not 1 <= k < 2 ** m:
        raise GraphError(f"probability {k}/2^{m} must have odd k with 1 <= k < 2^m", line)


def parse_graph(text: str, directed: bool = False) -> ReliabilityGraph:
    """Read "p graph <nodes> <edges>" followed by "e <u> <v> [k m]" lines."""
    num_nodes = None
    declared = None
    edges: list[Edge] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        if tok[0] == "p":
            if num_nodes is not None:
                raise GraphError("duplicate header", ln)
            if len(tok) != 4 or tok[1] != "graph":
                raise GraphError("header must read 'p graph <nodes> <edges>'", ln)
            try:
                num_nodes, declared = int(tok[2]), int(tok[3])
            except ValueError:
                raise GraphError("header counts must be integers", ln) from None
            continue
        if tok[0] != "e":
            raise GraphError(f"unexpected line starting with {tok[0]!r}", ln)
        if num_nodes is None:
            raise GraphError("edge before header", ln)
        if len(tok) not in (3, 5):
            raise GraphError("edge line must read 'e <u> <v> [k m]'", ln)
        try:
            vals = [int(t) for t in tok[1:]]
        except ValueError:
            raise GraphError("edge fields must be integers", ln) from None
        u, v = vals[0], vals[1]
        k, m = (vals[2], vals[3]) if len(vals) == 4 else (1, 1)
        for node in (u, v):
            if not 1 <= node <= num_nodes:
                raise GraphError(f"node {node} is not declared (1..{num_nodes})", ln)
        _check_dyadic(k, m, ln)
        edges.append(Edge(u, v, k, m))
    if num_nodes is None:
        raise GraphError("missing 'p graph' header")
    if declared != len(edges):
        raise GraphError(f"header declares {declared} edges, found {len(edges)}")
    return ReliabilityGraph(num_nodes, tuple(edges), directed)


def gadget_edges(k: int, m: int, source: int, sink: int, next_node: int) -> tuple[list[Edge], int]:
    """Fair-edge series-parallel gadget between source and sink with k connecting subsets.

    Reading the bits of k from the top: a 0 bit puts its edge in series
    (a new node follows), a 1 bit puts it in parallel with the rest of the
    chain (straight to the sink).  The last bit is always 1.
    """
    _check_dyadic(k, m)
    bits = chain_bits(k, m)
    out: list[Edge] = []
    cur = source
    for b in bits[:-1]:
        if b:
            out.append(Edge(cur, sink))
        else:
            out.append(Edge(cur, next_node))
            cur = next_node
            next_node += 1
    out.append(Edge(cur, sink))
    return out, next_node


@dataclass(frozen=True)
class ExpandedGraph:
    graph: ReliabilityGraph
    total_bits: int
    origin: tuple[int, ...]  # original edge index of every fair edge


def expand_weighted_edges(g: ReliabilityGraph) -> ExpandedGraph:
    next_node = g.num_nodes + 1
    edges: list[Edge] = []
    origin: list[int] = []
    for idx, e in enumerate(g.edges):
        if e.k == 1 and e.m == 1:
            new = [e]
        else:
            new, next_node = gadget_edges(e.k, e.m, e.start, e.end, next_node)
        edges += new
        origin += [idx] * len(new)
    return ExpandedGraph(ReliabilityGraph(next_node - 1, tuple(edges), g.directed), g.total_bits, tuple(origin))


def encode_disconnection(g: ReliabilityGraph, source: int, sink: int) -> ProblemInstance:
    """CNF over node reachability flags p and edge flags q; projected on q.

    p_x = node index, q_e = num_nodes + 1 + edge index.  An undirected edge
    gets both implications on the same q.
    """
    if source == sink:
        raise GraphError("source and sink must differ")
    for node in (source, sink):
        if not 1 <= node <= g.num_nodes:
            raise GraphError(f"node {node} is not in the graph")
    if not g.edges:
        raise GraphError("graph has no edges to count over")
    n = g.num_nodes
    clauses: list[tuple[int, ...]] = [(source,), (-sink,)]
    for i, e in enumerate(g.edges):
        q = n + 1 + i
        clauses.append((-e.start, -q, e.end))
        if not g.directed:
            clauses.append((-e.end, -q, e.start))
    f = CnfFormula(n + len(g.edges), clauses)
    return ProblemInstance(f, tuple(range(n + 1, n + 1 + len(g.edges))))


@dataclass
class ReliabilityEstimate:
    source: int
    sink: int
    unreliability: Fraction
    raw: Optional[ApproxCount]
    epsilon: Fraction
    delta: Fraction
    clamped: bool = False
    notes: list[str] = field(default_factory=list)

    def as_row(self) -> dict:
        return {"u": self.source, "v": self.sink, "r": float(self.unreliability),
                "r_exact": str(self.unreliability), "exact": bool(self.raw is None or self.raw.exact),
                "epsilon": float(self.epsilon), "delta": float(self.delta)}


def estimate_unreliability(g: ReliabilityGraph, source: int, sink: int, epsilon: Number = 0.8,
                           delta: Number = 0.2, seed: int = 0, oracle=None) -> ReliabilityEstimate:
    eps, dl = Fraction(str(epsilon)), Fraction(str(delta))
    for node in (source, sink):
        if not 1 <= node <= g.num_nodes:
            raise GraphError(f"node {node} is not in the graph")
    if source == sink:
        raise GraphError("source and sink must differ")
    if not g.edges:
        return ReliabilityEstimate(source, sink, Fraction(1), None, eps, dl)
    ex = expand_weighted_edges(g)
    inst = encode_disconnection(ex.graph, source, sink)
    res = approxmc2(inst, epsilon, delta, seed, oracle)
    r = Fraction(res.value, 2 ** ex.total_bits)
    clamped = r > 1
    return ReliabilityEstimate(source, sink, min(r, Fraction(1)), res, eps, dl, clamped)


def _pair_job(args):
    g, u, v, eps, dl, seed = args
    return estimate_unreliability(g, u, v, eps, dl, derive_seed(seed, u, v)).as_row()


def estimate_all_pairs(g: ReliabilityGraph, epsilon: Number = 0.8, delta: Number = 0.2, seed: int = 0,
                       workers: int = 1) -> list[dict]:
    pairs = [(u, v) for u in range(1, g.num_nodes + 1) for v in range(u + 1, g.num_nodes + 1)]
    if g.directed:
        pairs += [(v, u) for u, v in pairs]
    jobs = [(g, u, v, epsilon, delta, seed) for u, v in pairs]
    if workers <= 1:
        return [_pair_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_pair_job, jobs))


# ------------------------------------------------------------ test oracles


def _connected(g: ReliabilityGraph, up: int, source: int, sink: int) -> bool:
    adj: dict[int, list[int]] = {}
    for i, e in enumerate(g.edges):
        if up >> i & 1:
            adj.setdefault(e.start, []).append(e.end)
            if not g.directed:
                adj.setdefault(e.end, []).append(e.start)
    seen = {source}
    stack = [source]
    while stack:
        x = stack.pop()
        if x == sink:
            return True
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


MAX_BRUTE_EDGES = 24


def disconnecting_subsets(g: ReliabilityGraph, source: int, sink: int) -> int:
    """Number of edge subsets (as up-sets) under which source cannot reach sink."""
    if len(g.edges) > MAX_BRUTE_EDGES:
        raise ValueError(f"enumeration limited to {MAX_BRUTE_EDGES} edges")
    return sum(not _connected(g, up, source, sink) for up in range(1 << len(g.edges)))


def brute_force_unreliability(g: ReliabilityGraph, source: int, sink: int) -> Fraction:
    if len(g.edges) > MAX_BRUTE_EDGES:
        raise ValueError(f"enumeration limited to {MAX_BRUTE_EDGES} edges")
    probs = [e.probability for e in g.edges]
    total = Fraction(0)
    for up in range(1 << len(g.edges)):
        if _connected(g, up, source, sink):
            continue
        p = Fraction(1)
        for i, q in enumerate(probs):
            p *= q if up >> i & 1 else 1 - q
        total += p
    return total


def monte_carlo_unreliability(g: ReliabilityGraph, source: int, sink: int, samples: int, seed: int = 0) -> float:
    rng = random.Random(seed)
    probs = [float(e.probability) for e in g.edges]
    miss = 0
    for _ in range(samples):
        up = sum(1 << i for i, q in enumerate(probs) if rng.random() < q)
        miss += not _connected(g, up, source, sink)
    return miss / samples

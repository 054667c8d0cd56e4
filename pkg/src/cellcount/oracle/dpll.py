"""Builtin DPLL enumerator for CNF + XOR.

Chronological backtracking, two-watched-literal unit propagation over the
disjunctive clauses, and counter-based propagation over XOR rows that were
put in reduced row-echelon form once per query.  Branching is static: the
sampling-set variables in ascending order, then the remaining variables.
Because every XOR row is pivoted on its latest variable in that order, the
pivot is always forced by propagation rather than branched on.

Projected enumeration: after a model, the search resumes from the deepest
unflipped decision on a sampling-set variable.  This visits the same set of
projections as re-solving with a blocking clause restricted to the sampling
set, without materializing the blocking clauses.
"""
from __future__ import annotations

from typing import Callable, Iterator, Optional, Sequence

from ..formula import CnfFormula, XorClause
from .gf2 import eliminate_xors


class OracleError(RuntimeError):
    pass


class BudgetExceeded(OracleError):
    pass


class DpllSolver:
    def __init__(self, formula: CnfFormula, extra_xors: Sequence[XorClause] = (),
                 sampling_set: Sequence[int] = (), max_decisions: Optional[int] = None):
        self.n = n = formula.num_vars
        self.sampling_set = tuple(sampling_set)
        s_set = set(self.sampling_set)
        self.order = list(self.sampling_set) + [v for v in range(1, n + 1) if v not in s_set]
        self.in_s = [False] * (n + 1)
        for v in s_set:
            self.in_s[v] = True
        self.max_decisions = max_decisions
        self.decisions = 0
        self.unsat = False

        # literal index: 2v for v, 2v+1 for -v
        self.lval = [0] * (2 * n + 2)
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * n + 2)]
        self.trail: list[int] = []  # literal indices in assignment order
        self.units: list[int] = []

        for clause in formula.clauses:
            lits = set()
            taut = False
            for l in clause:
                idx = 2 * l if l > 0 else -2 * l + 1
                if idx ^ 1 in lits:
                    taut = True
                    break
                lits.add(idx)
            if taut:
                continue
            if not lits:
                self.unsat = True
                continue
            c = sorted(lits)
            if len(c) == 1:
                self.units.append(c[0])
            else:
                self.watches[c[0]].append(c)
                self.watches[c[1]].append(c)

        xors, ok = eliminate_xors(list(formula.xors) + list(extra_xors), self.order)
        if not ok:
            self.unsat = True
            xors = []
        self.xrows = [list(x.variables) for x in xors if x.variables]
        self.xrhs = [x.parity for x in xors if x.variables]
        self.xcnt = [len(r) for r in self.xrows]
        self.xpar = [0] * len(self.xrows)
        self.xocc: list[list[int]] = [[] for _ in range(n + 1)]
        for i, r in enumerate(self.xrows):
            for v in r:
                self.xocc[v].append(i)

    # -- assignment primitives

    def _enqueue(self, idx: int) -> bool:
        lv = self.lval
        cur = lv[idx]
        if cur:
            return cur == 1
        lv[idx] = 1
        lv[idx ^ 1] = -1
        self.trail.append(idx)
        v = idx >> 1
        if self.xocc[v]:
            b = 1 - (idx & 1)
            xc, xp = self.xcnt, self.xpar
            for r in self.xocc[v]:
                xc[r] -= 1
                xp[r] ^= b
        return True

    def _undo_to(self, size: int) -> None:
        trail, lv = self.trail, self.lval
        xc, xp, xocc = self.xcnt, self.xpar, self.xocc
        while len(trail) > size:
            idx = trail.pop()
            lv[idx] = 0
            lv[idx ^ 1] = 0
            v = idx >> 1
            if xocc[v]:
                b = 1 - (idx & 1)
                for r in xocc[v]:
                    xc[r] += 1
                    xp[r] ^= b

    def _propagate(self, head: int) -> bool:
        trail, lv, watches = self.trail, self.lval, self.watches
        xocc, xc, xp, xrows, xrhs = self.xocc, self.xcnt, self.xpar, self.xrows, self.xrhs
        while head < len(trail):
            idx = trail[head]
            head += 1
            false_lit = idx ^ 1
            ws = watches[false_lit]
            if ws:
                keep = []
                i = 0
                nws = len(ws)
                while i < nws:
                    c = ws[i]
                    i += 1
                    if c[0] == false_lit:
                        c[0], c[1] = c[1], false_lit
                    first = c[0]
                    if lv[first] == 1:
                        keep.append(c)
                        continue
                    for k in range(2, len(c)):
                        if lv[c[k]] != -1:
                            c[1], c[k] = c[k], false_lit
                            watches[c[1]].append(c)
                            break
                    else:
                        keep.append(c)
                        if lv[first] == -1 or not self._enqueue(first):
                            keep.extend(ws[i:])
                            watches[false_lit] = keep
                            return False
                watches[false_lit] = keep
            rows = xocc[idx >> 1]
            for r in rows:
                cnt = xc[r]
                if cnt == 1:
                    want = xrhs[r] ^ xp[r]
                    for u in xrows[r]:
                        if lv[2 * u] == 0:
                            self._enqueue(2 * u if want else 2 * u + 1)
                            break
                elif cnt == 0 and xp[r] != xrhs[r]:
                    return False
        return True

    def _root(self) -> bool:
        if self.unsat:
            return False
        for idx in self.units:
            if not self._enqueue(idx):
                return False
        # rows that are already unit or empty before any assignment
        for r, row in enumerate(self.xrows):
            if len(row) == 1:
                if not self._enqueue(2 * row[0] if self.xrhs[r] else 2 * row[0] + 1):
                    return False
        return self._propagate(0)

    # -- enumeration

    def models(self) -> Iterator[int]:
        """Yield full models (bit-masks) that are pairwise distinct on the sampling set."""
        if not self._root():
            return
        order = self.order
        n_order = len(order)
        lv = self.lval
        in_s = self.in_s
        # decision frames: [position in order, trail size before, literal idx, flipped]
        stack: list[list[int]] = []
        pos = 0
        while True:
            while pos < n_order and lv[2 * order[pos]] != 0:
                pos += 1
            if pos == n_order:
                model = 0
                for idx in self.trail:
                    if not idx & 1:
                        model |= 1 << (idx >> 1)
                yield model
                # resume at the deepest unflipped sampling-set decision
                while stack and (stack[-1][3] or not in_s[order[stack[-1][0]]]):
                    stack.pop()
                if not stack:
                    return
                ok = self._flip(stack[-1])
                pos = stack[-1][0] + 1
            else:
                self.decisions += 1
                if self.max_decisions is not None and self.decisions > self.max_decisions:
                    raise BudgetExceeded(f"decision budget {self.max_decisions} exhausted")
                v = order[pos]
                frame = [pos, len(self.trail), 2 * v + 1, 0]  # try false first
                stack.append(frame)
                self._enqueue(frame[2])
                ok = self._propagate(frame[1])
                pos += 1
            while not ok:
                while stack and stack[-1][3]:
                    stack.pop()
                if not stack:
                    return
                ok = self._flip(stack[-1])
                pos = stack[-1][0] + 1

    def _flip(self, frame: list[int]) -> bool:
        self._undo_to(frame[1])
        frame[2] ^= 1
        frame[3] = 1
        self.decisions += 1
        self._enqueue(frame[2])
        return self._propagate(frame[1])


def dpll_enumerate(formula: CnfFormula, extra_xors: Sequence[XorClause], sampling_set: Sequence[int],
                   limit: Optional[int], on_model: Optional[Callable[[int], bool]] = None,
                   max_decisions: Optional[int] = None) -> tuple[list[int], int]:
    """Collect up to ``limit`` S-distinct models; ``on_model`` returning True stops early.

    Returns (models, decision count).
    """
    solver = DpllSolver(formula, extra_xors, sampling_set, max_decisions)
    out = []
    if limit is not None and limit <= 0:
        return out, 0
    for model in solver.models():
        out.append(model)
        if limit is not None and len(out) >= limit:
            break
        if on_model is not None and on_model(model):
            break
    return out, solver.decisions


def solve(formula: CnfFormula, extra_xors: Sequence[XorClause] = (), max_decisions: Optional[int] = None) -> Optional[int]:
    """One model as a bit-mask, or None when unsatisfiable."""
    models, _ = dpll_enumerate(formula, extra_xors, (), 1, max_decisions=max_decisions)
    return models[0] if models else None

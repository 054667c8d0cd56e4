"""Bounded model enumeration ("BoundedSAT") over pluggable backends.

All backends return solutions that are pairwise distinct on the sampling set.
A DNF formula is always served by the search-free DNF enumerator unless the
caller explicitly asks a CNF backend to handle its Tseitin translation.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..formula import (Assignment, CnfFormula, DnfFormula, Formula, SolutionSet,
                       WeightMap, XorClause)
from .dnf import dnf_enumerate
from .dpll import BudgetExceeded, OracleError, dpll_enumerate, solve
from .external import SolverCommand, SolverFailure, blast_xor_to_cnf, external_models

StopRule = Callable[[SolutionSet], bool]

__all__ = [
    "OracleQuery", "bounded_sat", "BuiltinOracle", "ExternalOracle", "DnfOracle",
    "OracleError", "BudgetExceeded", "SolverFailure", "SolverCommand",
    "blast_xor_to_cnf", "dnf_to_cnf", "default_oracle", "oracle_from_spec", "solve",
]


@dataclass
class OracleQuery:
    formula: Formula
    extra_xors: Sequence[XorClause] = ()
    sampling_set: Optional[Sequence[int]] = None
    limit: Optional[int] = None
    stop_rule: Optional[StopRule] = None
    weights: WeightMap = field(default_factory=WeightMap)

    def __post_init__(self):
        if self.limit is not None and self.limit < 1:
            raise ValueError("limit must be at least 1")
        if self.sampling_set is None:
            self.sampling_set = tuple(range(1, self.formula.num_vars + 1))
        else:
            self.sampling_set = tuple(self.sampling_set)


def dnf_to_cnf(f: DnfFormula) -> CnfFormula:
    """Tseitin translation with one fresh variable per cube, defined by bi-implication.

    Models projected on the original variables are exactly the DNF's models.
    """
    n = f.num_vars
    clauses: list[list[int]] = []
    selectors = []
    for j, cube in enumerate(f.cubes):
        d = n + 1 + j
        selectors.append(d)
        for lit in cube:
            clauses.append([-d, lit])
        clauses.append([d] + [-lit for lit in cube])
    clauses.append(selectors)
    return CnfFormula(n + len(f.cubes), clauses)


@dataclass
class OracleStats:
    calls: int = 0
    decisions: int = 0
    solver_invocations: int = 0


class _Oracle:
    name = "abstract"

    def __init__(self):
        self.stats = OracleStats()

    def _enumerate(self, f, xors, s, limit, on_model):  # pragma: no cover - interface
        raise NotImplementedError

    def bounded_sat(self, q: OracleQuery) -> SolutionSet:
        self.stats.calls += 1
        out = SolutionSet()
        s = q.sampling_set
        weights = q.weights
        orig_mask = (1 << (q.formula.num_vars + 1)) - 1
        stop = q.stop_rule

        def on_model(model: int) -> bool:
            model &= orig_mask
            out.add(Assignment.from_model(model, s), model, weights.model_weight(model))
            return stop is not None and stop(out)

        self._enumerate(q.formula, q.extra_xors, s, q.limit, on_model)
        return out


class DnfOracle(_Oracle):
    name = "dnf"

    def _enumerate(self, f, xors, s, limit, on_model):
        if not isinstance(f, DnfFormula):
            raise TypeError("the DNF enumerator only accepts DNF formulas")
        # limit is enforced through on_model so the stop rule sees every solution
        dnf_enumerate(f, xors, s, None, _counting(on_model, limit))


def _counting(on_model, limit):
    seen = [0]

    def cb(model):
        seen[0] += 1
        stop = on_model(model)
        return stop or (limit is not None and seen[0] >= limit)

    return cb


class BuiltinOracle(_Oracle):
    name = "builtin"

    def __init__(self, max_decisions: Optional[int] = None, dnf_via_cnf: bool = False):
        super().__init__()
        self.max_decisions = max_decisions
        self.dnf_via_cnf = dnf_via_cnf
        self._dnf = DnfOracle()

    def _enumerate(self, f, xors, s, limit, on_model):
        if isinstance(f, DnfFormula):
            if not self.dnf_via_cnf:
                self._dnf._enumerate(f, xors, s, limit, on_model)
                return
            f = dnf_to_cnf(f)
        _, dec = dpll_enumerate(f, xors, s, None, _counting(on_model, limit), self.max_decisions)
        self.stats.decisions += dec


class ExternalOracle(_Oracle):
    name = "external"

    def __init__(self, command: SolverCommand):
        super().__init__()
        self.command = command

    def _enumerate(self, f, xors, s, limit, on_model):
        if isinstance(f, DnfFormula):
            f = dnf_to_cnf(f)
        _, calls = external_models(self.command, f, xors, s, None, _counting(on_model, limit))
        self.stats.solver_invocations += calls


def oracle_from_spec(spec: str) -> _Oracle:
    """``builtin``, ``external:<cmd>`` or ``external-xor:<cmd>`` (solver reads x-lines)."""
    spec = spec.strip()
    if spec in ("", "builtin"):
        return BuiltinOracle()
    if spec == "dnf":
        return DnfOracle()
    kind, _, cmd = spec.partition(":")
    if kind in ("external", "external-xor") and cmd:
        return ExternalOracle(SolverCommand(cmd, native_xor=kind == "external-xor"))
    raise ValueError(f"unknown solver backend {spec!r}")


def default_oracle() -> _Oracle:
    return oracle_from_spec(os.environ.get("CELLCOUNT_SOLVER", "builtin"))


def bounded_sat(q: OracleQuery, oracle: Optional[_Oracle] = None) -> SolutionSet:
    if oracle is None:
        oracle = DnfOracle() if isinstance(q.formula, DnfFormula) else default_oracle()
    return oracle.bounded_sat(q)

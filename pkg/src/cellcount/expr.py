"""Tiny propositional expression trees, for formulas that are neither CNF nor DNF."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .formula import CnfFormula, DnfFormula

Expr = Union["Lit", "And", "Or", "Not", "Const"]


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Lit:
    lit: int


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


def conj(*args) -> Expr:
    return And(tuple(args))


def disj(*args) -> Expr:
    return Or(tuple(args))


def iff(a: Expr, b: Expr) -> Expr:
    return conj(disj(Not(a), b), disj(a, Not(b)))


def implies(a: Expr, b: Expr) -> Expr:
    return disj(Not(a), b)


def from_cnf(f: CnfFormula) -> Expr:
    if f.xors:
        raise ValueError("xor constraints are not supported in expression trees")
    return And(tuple(Or(tuple(Lit(l) for l in c)) for c in f.clauses))


def from_dnf(f: DnfFormula) -> Expr:
    return Or(tuple(And(tuple(Lit(l) for l in c)) for c in f.cubes))


def evaluate(e: Expr, model: int) -> bool:
    if isinstance(e, Lit):
        v = (model >> abs(e.lit)) & 1
        return bool(v) if e.lit > 0 else not v
    if isinstance(e, And):
        return all(evaluate(a, model) for a in e.args)
    if isinstance(e, Or):
        return any(evaluate(a, model) for a in e.args)
    if isinstance(e, Not):
        return not evaluate(e.arg, model)
    return e.value


def max_var(e: Expr) -> int:
    if isinstance(e, Lit):
        return abs(e.lit)
    if isinstance(e, (And, Or)):
        return max((max_var(a) for a in e.args), default=0)
    if isinstance(e, Not):
        return max_var(e.arg)
    return 0


def tseitin(e: Expr, num_vars: int) -> CnfFormula:
    """Equisatisfiable CNF whose gate variables are fully defined (bi-implications).

    Every model over the first ``num_vars`` variables extends uniquely, so
    model counts are preserved with or without projection.
    """
    clauses: list[list[int]] = []
    top = [num_vars]

    def fresh() -> int:
        top[0] += 1
        return top[0]

    def enc(x: Expr) -> int:
        if isinstance(x, Lit):
            return x.lit
        if isinstance(x, Not):
            return -enc(x.arg)
        if isinstance(x, Const):
            g = fresh()
            clauses.append([g] if x.value else [-g])
            return g
        kids = [enc(a) for a in x.args]
        g = fresh()
        if isinstance(x, And):
            for k in kids:
                clauses.append([-g, k])
            clauses.append([g] + [-k for k in kids])
        else:
            for k in kids:
                clauses.append([g, -k])
            clauses.append([-g] + kids)
        return g

    root = enc(e)
    clauses.append([root])
    return CnfFormula(top[0], clauses)

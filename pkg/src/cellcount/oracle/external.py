"""Adapter for command-line SAT solvers speaking DIMACS.

The solver is run once per model: write the formula (plus blocking clauses
accumulated so far) to a file, run the command, parse ``s``/``v`` lines.
"""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from ..formula import CnfFormula, ProblemInstance, XorClause, serialize_dimacs
from .dpll import OracleError

DEFAULT_TIMEOUT = 2500.0


class SolverFailure(OracleError):
    pass


@dataclass(frozen=True)
class SolverCommand:
    """``template`` is a shell-style command; ``{path}`` is replaced by the input file."""

    template: str
    native_xor: bool = False
    model_prefix: str = "v"
    timeout: float = DEFAULT_TIMEOUT

    def argv(self, path: str) -> list[str]:
        args = shlex.split(self.template)
        if any("{path}" in a for a in args):
            return [a.replace("{path}", path) for a in args]
        return args + [path]


def blast_xor_to_cnf(xor: XorClause, alloc: Callable[[], int], chunk: int = 4) -> list[list[int]]:
    """Clauses equivalent to ``xor`` over its own variables, using fresh chaining variables.

    The variable list is cut into pieces of at most ``chunk`` variables; every
    piece but the last is summarized by a fresh variable that joins the next piece.
    """
    if chunk < 2:
        raise ValueError("chunk size must be at least 2")
    vs = list(xor.variables)
    if not vs:
        return [[]] if xor.parity else []
    clauses: list[list[int]] = []
    while len(vs) > chunk:
        head, vs = vs[:chunk - 1], vs[chunk - 1:]
        t = alloc()
        # t = xor(head)  <=>  xor(head + [t]) = 0
        clauses += _direct_xor(head + [t], 0)
        vs = [t] + vs
    clauses += _direct_xor(vs, xor.parity)
    return clauses


def _direct_xor(vs: Sequence[int], parity: int) -> list[list[int]]:
    out = []
    k = len(vs)
    for bits in range(1 << k):
        if bits.bit_count() & 1 != parity:
            # forbid this assignment
            out.append([-v if (bits >> i) & 1 else v for i, v in enumerate(vs)])
    return out


def blast_formula(formula: CnfFormula, extra_xors: Sequence[XorClause] = (), chunk: int = 4) -> CnfFormula:
    n = [formula.num_vars]

    def alloc() -> int:
        n[0] += 1
        return n[0]

    clauses = [list(c) for c in formula.clauses]
    for x in list(formula.xors) + list(extra_xors):
        clauses += blast_xor_to_cnf(x, alloc, chunk)
    return CnfFormula(n[0], clauses)


def parse_solver_output(text: str, returncode: int, num_vars: int, prefix: str = "v") -> Optional[int]:
    """Model bit-mask, or None for UNSAT.  Raises SolverFailure when the status is unclear."""
    status = None
    model = 0
    seen = False
    for line in text.splitlines():
        toks = line.split()
        if not toks:
            continue
        if toks[0] == "s":
            rest = " ".join(toks[1:])
            if rest == "SATISFIABLE":
                status = True
            elif rest == "UNSATISFIABLE":
                status = False
            else:
                raise SolverFailure(f"unrecognized status line {line!r}")
        elif toks[0] == prefix:
            seen = True
            for tok in toks[1:]:
                try:
                    lit = int(tok)
                except ValueError:
                    raise SolverFailure(f"unparsable model token {tok!r}") from None
                if lit > 0 and lit <= num_vars:
                    model |= 1 << lit
    if status is None:
        raise SolverFailure(f"solver exited with code {returncode} without a status line")
    if status and not seen:
        raise SolverFailure("solver reported SAT but printed no model")
    return model if status else None


def external_models(cmd: SolverCommand, formula: CnfFormula, extra_xors: Sequence[XorClause],
                    sampling_set: Sequence[int], limit: Optional[int],
                    on_model: Optional[Callable[[int], bool]] = None) -> tuple[list[int], int]:
    """Enumerate S-distinct models by re-solving with blocking clauses.  Returns (models, invocations)."""
    if cmd.native_xor:
        base = formula.with_xors(extra_xors)
    else:
        base = blast_formula(formula, extra_xors)
    orig_n = formula.num_vars
    blocks: list[list[int]] = []
    out: list[int] = []
    calls = 0
    if limit is not None and limit <= 0:
        return out, calls
    with tempfile.TemporaryDirectory(prefix="cellcount-") as tmp:
        path = os.path.join(tmp, "query.cnf")
        while True:
            f = base.with_clauses(blocks)
            with open(path, "wb") as fh:
                fh.write(serialize_dimacs(ProblemInstance(f)))
            calls += 1
            try:
                proc = subprocess.run(cmd.argv(path), capture_output=True, text=True, timeout=cmd.timeout)
            except subprocess.TimeoutExpired:
                raise SolverFailure(f"solver timed out after {cmd.timeout} s") from None
            except OSError as e:
                raise SolverFailure(f"could not run solver: {e}") from None
            model = parse_solver_output(proc.stdout, proc.returncode, f.num_vars, cmd.model_prefix)
            if model is None:
                break
            model &= (1 << (orig_n + 1)) - 1
            if not _check_orig(formula, extra_xors, model):
                raise SolverFailure("solver returned a non-model")
            out.append(model)
            if limit is not None and len(out) >= limit:
                break
            if on_model is not None and on_model(model):
                break
            if not sampling_set:
                break
            blocks.append([-v if (model >> v) & 1 else v for v in sampling_set])
    return out, calls


def _check_orig(formula: CnfFormula, extra_xors: Sequence[XorClause], model: int) -> bool:
    return formula.satisfied_by(model) and all(x.satisfied_by(model) for x in extra_xors)

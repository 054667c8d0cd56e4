"""Propositional formulas, sampling sets, literal weights and the DIMACS dialect.

Variables are positive integers, literals are signed integers (DIMACS style).
Bit-mask views use bit ``v`` for variable ``v`` so that a full assignment over
``num_vars`` variables is a single Python int.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

MAX_DYADIC_BITS = 16


class DimacsError(ValueError):
    """Malformed DIMACS input; carries the 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class XorClause:
    """XOR of ``variables`` equals ``parity``.  An empty clause with parity 1 is a contradiction."""

    variables: tuple[int, ...]
    parity: int

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError(f"xor parity must be 0 or 1, got {self.parity}")
        if any(v < 1 for v in self.variables):
            raise ValueError("xor variables must be positive")
        if list(self.variables) != sorted(set(self.variables)):
            raise ValueError("xor variables must be sorted and distinct")

    @classmethod
    def from_literals(cls, literals: Iterable[int], value: int = 1) -> "XorClause":
        """Build from signed literals whose XOR must equal ``value``; repeated variables cancel."""
        vars_: set[int] = set()
        parity = value
        for lit in literals:
            if lit == 0:
                raise ValueError("literal 0 is not allowed")
            if lit < 0:
                parity ^= 1
            vars_ ^= {abs(lit)}
        return cls(tuple(sorted(vars_)), parity)

    @property
    def is_contradiction(self) -> bool:
        return not self.variables and self.parity == 1

    def mask(self) -> int:
        m = 0
        for v in self.variables:
            m |= 1 << v
        return m

    def satisfied_by(self, model: int) -> bool:
        return (model & self.mask()).bit_count() & 1 == self.parity


def _check_literals(lits: Sequence[int], num_vars: int, what: str) -> None:
    for lit in lits:
        if lit == 0 or abs(lit) > num_vars:
            raise ValueError(f"{what} literal {lit} out of range 1..{num_vars}")


def _lits_masks(lits: Sequence[int]) -> tuple[int, int]:
    pos = neg = 0
    for lit in lits:
        if lit > 0:
            pos |= 1 << lit
        else:
            neg |= 1 << -lit
    return pos, neg


@dataclass(frozen=True)
class CnfFormula:
    """Conjunction of disjunctive clauses and XOR constraints."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...] = ()
    xors: tuple[XorClause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        object.__setattr__(self, "xors", tuple(self.xors))
        if self.num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        for c in self.clauses:
            _check_literals(c, self.num_vars, "clause")
        for x in self.xors:
            if x.variables and x.variables[-1] > self.num_vars:
                raise ValueError(f"xor variable {x.variables[-1]} out of range")

    @property
    def trivially_unsat(self) -> bool:
        return any(len(c) == 0 for c in self.clauses) or any(x.is_contradiction for x in self.xors)

    def with_clauses(self, extra: Iterable[Sequence[int]]) -> "CnfFormula":
        return CnfFormula(self.num_vars, self.clauses + tuple(tuple(c) for c in extra), self.xors)

    def with_xors(self, extra: Iterable[XorClause]) -> "CnfFormula":
        return CnfFormula(self.num_vars, self.clauses, self.xors + tuple(extra))

    def satisfied_by(self, model: int) -> bool:
        """Evaluate on a bit-mask model (bit v set means variable v is true)."""
        for c in self.clauses:
            pos, neg = _lits_masks(c)
            if not (pos & model or neg & ~model):
                return False
        return all(x.satisfied_by(model) for x in self.xors)


@dataclass(frozen=True)
class DnfFormula:
    """Disjunction of cubes (conjunctions of literals)."""

    num_vars: int
    cubes: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cubes", tuple(tuple(c) for c in self.cubes))
        for cube in self.cubes:
            _check_literals(cube, self.num_vars, "cube")
            if any(-lit in cube for lit in cube):
                raise ValueError(f"inconsistent cube {cube}")

    def satisfied_by(self, model: int) -> bool:
        for cube in self.cubes:
            pos, neg = _lits_masks(cube)
            if pos & model == pos and neg & model == 0:
                return True
        return False


Formula = Union[CnfFormula, DnfFormula]


def dyadic_form(w: Fraction, max_bits: int = MAX_DYADIC_BITS) -> tuple[int, int] | None:
    """Return (k, m) with w = k/2^m, k odd and m <= max_bits, or None."""
    d = w.denominator
    if d & (d - 1) or d == 1:
        return None
    m = d.bit_length() - 1
    if m > max_bits:
        return None
    return w.numerator, m


@dataclass(frozen=True)
class WeightMap:
    """Literal weights.  Variables absent from ``positive`` are indifferent (weight 1 both ways).

    ``positive[v]`` is W(v=true); W(v=false) is its complement.
    """

    positive: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for v, w in self.positive.items():
            w = Fraction(w)
            if v < 1:
                raise ValueError(f"bad weighted variable {v}")
            if not 0 < w < 1:
                raise ValueError(f"weight of variable {v} must lie in (0,1), got {w}")
            clean[int(v)] = w
        object.__setattr__(self, "positive", dict(sorted(clean.items())))

    def __hash__(self):
        return hash(tuple(self.positive.items()))

    @property
    def normal_vars(self) -> tuple[int, ...]:
        return tuple(self.positive)

    @property
    def is_trivial(self) -> bool:
        return not self.positive

    def literal_weight(self, var: int, value: bool) -> Fraction:
        w = self.positive.get(var)
        if w is None:
            return Fraction(1)
        return w if value else 1 - w

    def dyadic(self, var: int) -> tuple[int, int] | None:
        w = self.positive.get(var)
        return None if w is None else dyadic_form(w)

    @property
    def m_hat(self) -> int:
        """Total bit width of the dyadic weights (raises if any weight is not dyadic)."""
        total = 0
        for v in self.positive:
            km = self.dyadic(v)
            if km is None:
                raise ValueError(f"weight of variable {v} is not dyadic with <= {MAX_DYADIC_BITS} bits")
            total += km[1]
        return total

    @property
    def normalization(self) -> Fraction:
        return Fraction(1, 2 ** self.m_hat)

    def model_weight(self, model: int) -> Fraction:
        """Weight of a bit-mask model."""
        w = Fraction(1)
        for v, p in self.positive.items():
            w *= p if (model >> v) & 1 else 1 - p
        return w


@dataclass(frozen=True)
class Assignment:
    """Values for an ordered tuple of variables; bit k of ``bits`` is the value of ``variables[k]``."""

    variables: tuple[int, ...]
    bits: int

    @classmethod
    def from_dict(cls, values: Mapping[int, bool]) -> "Assignment":
        vars_ = tuple(sorted(values))
        bits = 0
        for k, v in enumerate(vars_):
            if values[v]:
                bits |= 1 << k
        return cls(vars_, bits)

    @classmethod
    def from_literals(cls, literals: Iterable[int]) -> "Assignment":
        return cls.from_dict({abs(l): l > 0 for l in literals})

    @classmethod
    def from_model(cls, model: int, variables: Sequence[int]) -> "Assignment":
        """Project a bit-mask model onto ``variables``."""
        bits = 0
        for k, v in enumerate(variables):
            if (model >> v) & 1:
                bits |= 1 << k
        return cls(tuple(variables), bits)

    def __getitem__(self, var: int) -> bool:
        return bool((self.bits >> self.variables.index(var)) & 1)

    def __len__(self):
        return len(self.variables)

    def as_dict(self) -> dict[int, bool]:
        return {v: bool((self.bits >> k) & 1) for k, v in enumerate(self.variables)}

    def literals(self) -> list[int]:
        return [v if (self.bits >> k) & 1 else -v for k, v in enumerate(self.variables)]

    def to_model(self) -> int:
        m = 0
        for k, v in enumerate(self.variables):
            if (self.bits >> k) & 1:
                m |= 1 << v
        return m

    def __str__(self):
        return " ".join(map(str, self.literals())) + " 0"


@dataclass
class SolutionSet:
    """Solutions distinct on the sampling set, with exact weights.

    ``models`` holds the full model each projection was found with; weights
    are computed on those full models.
    """

    solutions: list[Assignment] = field(default_factory=list)
    models: list[int] = field(default_factory=list)
    weights: list[Fraction] = field(default_factory=list)
    total_weight: Fraction = Fraction(0)
    min_weight: Fraction | None = None

    def add(self, solution: Assignment, model: int, weight: Fraction) -> None:
        self.solutions.append(solution)
        self.models.append(model)
        self.weights.append(weight)
        self.total_weight += weight
        if self.min_weight is None or weight < self.min_weight:
            self.min_weight = weight

    def __len__(self):
        return len(self.solutions)

    def __iter__(self) -> Iterator[Assignment]:
        return iter(self.solutions)


@dataclass(frozen=True)
class ProblemInstance:
    formula: Formula
    sampling_set: tuple[int, ...] = ()
    weights: WeightMap = field(default_factory=WeightMap)

    def __post_init__(self):
        n = self.formula.num_vars
        if not self.sampling_set:
            object.__setattr__(self, "sampling_set", tuple(range(1, n + 1)))
        else:
            s = tuple(sorted(set(self.sampling_set)))
            if s[0] < 1 or s[-1] > n:
                raise ValueError(f"sampling set must be a subset of 1..{n}")
            object.__setattr__(self, "sampling_set", s)
        for v in self.weights.positive:
            if v > n:
                raise ValueError(f"weighted variable {v} out of range 1..{n}")

    @property
    def num_vars(self) -> int:
        return self.formula.num_vars

    @property
    def is_dnf(self) -> bool:
        return isinstance(self.formula, DnfFormula)

    def with_sampling_set(self, s: Iterable[int]) -> "ProblemInstance":
        return ProblemInstance(self.formula, tuple(s), self.weights)

    def with_formula(self, f: Formula) -> "ProblemInstance":
        return ProblemInstance(f, self.sampling_set, self.weights)


def block_assignment(f: CnfFormula, sigma: Assignment) -> CnfFormula:
    """Conjoin the clause excluding every extension of ``sigma``."""
    if not sigma.variables:
        raise ValueError("cannot block an assignment over an empty sampling set")
    return f.with_clauses([[-lit for lit in sigma.literals()]])


def assignment_weight(weights: WeightMap, sigma: Assignment) -> Fraction:
    values = sigma.as_dict()
    w = Fraction(1)
    for v in weights.normal_vars:
        if v not in values:
            raise ValueError(f"assignment does not cover weighted variable {v}")
        w *= weights.literal_weight(v, values[v])
    return w


# ---------------------------------------------------------------- DIMACS I/O

_DECIMAL = re.compile(r"^[+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$|^\d+/\d+$")


def _parse_weight(tok: str, line: int, col: int) -> Fraction:
    if not _DECIMAL.match(tok):
        raise DimacsError(f"bad weight {tok!r}", line, col)
    w = Fraction(tok)
    if not 0 < w < 1:
        raise DimacsError(f"weight {tok} outside (0,1)", line, col)
    return w


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_dimacs(text: Union[str, bytes]) -> ProblemInstance:
    """Parse the CNF/DNF dialect with ``x`` xor lines, ``c ind`` and ``c w`` comments."""
    if isinstance(text, bytes):
        text = text.decode()
    kind = None
    num_vars = 0
    rows: list[tuple[int, ...]] = []
    xors: list[XorClause] = []
    ind: set[int] = set()
    weights: dict[int, Fraction] = {}
    pending: list[int] = []
    pending_xor = False
    pending_line = 0
    deferred_checks: list[tuple[int, int, int]] = []  # (var, line, col) seen before header

    def lit(tok: str, ln: int, col: int) -> int:
        try:
            val = int(tok)
        except ValueError:
            raise DimacsError(f"expected integer, got {tok!r}", ln, col) from None
        if kind is None:
            raise DimacsError("clause before 'p' header", ln, col)
        if abs(val) > num_vars:
            raise DimacsError(f"literal {val} out of range 1..{num_vars}", ln, col)
        return val

    for ln, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw)
        if not toks:
            continue
        head = toks[0][0]
        if head == "c":
            if len(toks) >= 2 and toks[1][0] == "ind":
                for tok, col in toks[2:]:
                    try:
                        v = int(tok)
                    except ValueError:
                        raise DimacsError(f"bad sampling variable {tok!r}", ln, col) from None
                    if v == 0:
                        break
                    if v < 0:
                        raise DimacsError(f"negative sampling variable {v}", ln, col)
                    ind.add(v)
                    deferred_checks.append((v, ln, col))
            elif len(toks) >= 2 and toks[1][0] == "w":
                if len(toks) < 4:
                    raise DimacsError("weight line needs 'c w <var> <weight>'", ln, toks[0][1])
                try:
                    v = int(toks[2][0])
                except ValueError:
                    raise DimacsError(f"bad weight variable {toks[2][0]!r}", ln, toks[2][1]) from None
                if v < 1:
                    raise DimacsError(f"bad weight variable {v}", ln, toks[2][1])
                w = _parse_weight(toks[3][0], ln, toks[3][1])
                if v in weights and weights[v] != w:
                    raise DimacsError(f"inconsistent duplicate weight for variable {v}", ln, toks[3][1])
                weights[v] = w
                deferred_checks.append((v, ln, toks[2][1]))
            continue
        if head == "p":
            if kind is not None:
                raise DimacsError("duplicate 'p' header", ln, 1)
            if len(toks) != 4 or toks[1][0] not in ("cnf", "dnf"):
                raise DimacsError("malformed header, expected 'p cnf|dnf <vars> <clauses>'", ln, 1)
            try:
                num_vars = int(toks[2][0])
                int(toks[3][0])
            except ValueError:
                raise DimacsError("malformed header counts", ln, toks[2][1]) from None
            if num_vars < 0:
                raise DimacsError("negative variable count", ln, toks[2][1])
            kind = toks[1][0]
            continue
        if head == "%":  # SATLIB trailer
            break
        start = 0
        if not pending and head == "x" and not pending_xor:
            if kind == "dnf":
                raise DimacsError("xor lines are only allowed in CNF", ln, 1)
            pending_xor = True
            start = 1
        if not pending:
            pending_line = ln
        for tok, col in toks[start:]:
            v = lit(tok, ln, col)
            if v == 0:
                if pending_xor:
                    xors.append(XorClause.from_literals(pending))
                else:
                    if kind == "dnf" and any(-l in pending for l in pending):
                        raise DimacsError("inconsistent cube", ln, col)
                    rows.append(tuple(pending))
                pending = []
                pending_xor = False
            else:
                pending.append(v)
    if pending or pending_xor:
        raise DimacsError("unterminated clause at end of input", pending_line, 1)
    if kind is None:
        raise DimacsError("missing 'p cnf|dnf' header", 1, 1)
    for v, ln, col in deferred_checks:
        if v > num_vars:
            raise DimacsError(f"variable {v} out of range 1..{num_vars}", ln, col)

    formula: Formula = CnfFormula(num_vars, rows, xors) if kind == "cnf" else DnfFormula(num_vars, rows)
    return ProblemInstance(formula, tuple(sorted(ind)), WeightMap(weights))


def format_fraction(w: Fraction) -> str:
    """Exact decimal when the denominator has only factors 2 and 5, else ``p/q``."""
    d = w.denominator
    a = b = 0
    while d % 2 == 0:
        d //= 2
        a += 1
    while d % 5 == 0:
        d //= 5
        b += 1
    if d != 1:
        return f"{w.numerator}/{w.denominator}"
    scale = max(a, b)
    digits = str(w.numerator * 10 ** scale // w.denominator).rjust(scale + 1, "0")
    if scale == 0:
        return digits
    return f"{digits[:-scale]}.{digits[-scale:]}"


def serialize_dimacs(instance: ProblemInstance) -> bytes:
    f = instance.formula
    lines = []
    if isinstance(f, DnfFormula):
        lines.append(f"p dnf {f.num_vars} {len(f.cubes)}")
        body = f.cubes
        xors: tuple[XorClause, ...] = ()
    else:
        lines.append(f"p cnf {f.num_vars} {len(f.clauses)}")
        body = f.clauses
        xors = f.xors
    if instance.sampling_set != tuple(range(1, f.num_vars + 1)):
        lines.append("c ind " + " ".join(map(str, instance.sampling_set)) + " 0")
    for v, w in instance.weights.positive.items():
        lines.append(f"c w {v} {format_fraction(w)}")
    for row in body:
        lines.append(" ".join(map(str, row)) + (" 0" if row else "0"))
    for x in xors:
        lits = list(x.variables)
        if x.parity == 0:
            if not lits:
                continue  # tautology
            lits[0] = -lits[0]
        lines.append("x " + " ".join(map(str, lits)) + " 0" if lits else "x 0")
    return ("\n".join(lines) + "\n").encode()

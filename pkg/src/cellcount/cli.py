"""Command-line front end: count, wcount, sample, wsample, mis, relnet, reduce.

Exit codes: 0 success, 1 usage, 2 input error, 3 solver error,
4 every iteration (or every retry) failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .counting import AllIterationsFailed, approxmc2
from .formula import CnfFormula, DimacsError, DnfFormula, ProblemInstance, format_fraction, parse_dimacs, serialize_dimacs
from .indsupport import build_q_formula, mis
from .oracle import DnfOracle, default_oracle, oracle_from_spec
from .oracle.dpll import BudgetExceeded, OracleError, solve
from .relnet import GraphError, estimate_all_pairs, estimate_unreliability, parse_graph
from .rng import derive_seed, fresh_seed
from .sampling import SamplerFailure, Unsatisfiable, UniGen, WeightGen, compute_kappa_pivot, unigen2_parallel
from .weighted import (NonDyadicWeight, reduce_wmc_conjunctive, reduce_wmc_form_preserving,
                       reduce_wmc_implicative, weightmc)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER, EXIT_FAILED = 0, 1, 2, 3, 4

# Minimal shape descriptions of the JSON records; tests check outputs against them.
SCHEMAS = {
    "count": {"estimate": int, "significand": int, "exponent2": int, "exact": bool, "sat_calls": int,
              "seed": int, "oracle": str, "epsilon": float, "delta": float, "thresh": float, "iterations": int,
              "failures": int, "sampling_set_size": int},
    "wcount": {"estimate": str, "decimal": float, "exact": bool, "w_max": str, "tilt": str, "sat_calls": int,
               "seed": int, "epsilon": float, "delta": float, "pivot": int, "iterations": int, "failures": int,
               "tilt_violation": bool},
    "sample": {"samples": list, "seed": int, "variant": str, "epsilon": float, "kappa": float, "pivot": int,
               "hi_thresh": float, "lo_thresh": float},
    "mis": {"support": list, "size": int, "minimal": bool, "local": list, "sat_calls": int, "seed": int,
            "repaired": bool},
    "relnet": {"u": int, "v": int, "r": float, "r_exact": str, "exact": bool, "epsilon": float, "delta": float,
               "seed": int},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    inputs: list[str]
    epsilon: Optional[float] = None
    delta: float = 0.2
    tilt: Optional[str] = None
    samples: int = 10
    seed: Optional[int] = None
    threads: int = 1
    solver: Optional[str] = None
    output: str = "text"
    max_retries: int = 10
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args, seed: int) -> "RunConfig":
        known = {"subcommand", "input", "epsilon", "delta", "tilt", "samples", "seed", "threads", "solver",
                 "output", "max_retries"}
        ns = vars(args)
        return cls(args.subcommand, [args.input], ns.get("epsilon"), ns.get("delta", 0.2), ns.get("tilt"),
                   ns.get("samples", 10), seed, ns.get("threads", 1), ns.get("solver"), ns.get("output", "text"),
                   ns.get("max_retries", 10), {k: v for k, v in ns.items() if k not in known})


def _parser() -> _Parser:
    p = _Parser(prog="cellcount", description="Hashing-based counting, sampling and related tools.")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)

    def common(sp, eps_default=None):
        sp.add_argument("--seed", type=int, default=None, help="random seed (default: fresh entropy, echoed)")
        sp.add_argument("--solver", default=None,
                        help="builtin | external:<cmd> | external-xor:<cmd> (default: $CELLCOUNT_SOLVER or builtin)")
        sp.add_argument("--output", choices=("text", "json"), default="text")
        sp.add_argument("--epsilon", type=float, default=eps_default)
        sp.add_argument("--verbose", action="store_true", help="report oracle call counts on stderr")

    c = sub.add_parser("count", help="approximate projected model count")
    common(c, 0.8)
    c.add_argument("--delta", type=float, default=0.2)
    c.add_argument("--mis-first", action="store_true", help="replace the sampling set by a minimal support")
    c.add_argument("input")

    w = sub.add_parser("wcount", help="approximate weighted model count")
    common(w, 0.8)
    w.add_argument("--delta", type=float, default=0.2)
    w.add_argument("--tilt", default=None, help="upper bound on max/min model weight (default: product bound)")
    w.add_argument("input")

    s = sub.add_parser("sample", help="near-uniform witnesses")
    common(s, None)
    s.add_argument("--variant", choices=("unigen", "unigen2"), default="unigen2")
    s.add_argument("-N", "--samples", type=int, default=10)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--max-retries", type=int, default=10)
    s.add_argument("--freq", action="store_true", help="print '<witness> <count>' pairs")
    s.add_argument("--mis-first", action="store_true")
    s.add_argument("input")

    ws = sub.add_parser("wsample", help="weighted witnesses")
    common(ws, 16.0)
    ws.add_argument("--tilt", default=None)
    ws.add_argument("-N", "--samples", type=int, default=10)
    ws.add_argument("--max-retries", type=int, default=10)
    ws.add_argument("--freq", action="store_true")
    ws.add_argument("input")

    m = sub.add_parser("mis", help="minimal independent support")
    common(m, None)
    m.add_argument("--budget", type=int, default=None, help="cap on SAT calls in the deletion loop")
    m.add_argument("input")

    r = sub.add_parser("relnet", help="two-terminal unreliability")
    common(r, 0.8)
    r.add_argument("--delta", type=float, default=0.2)
    r.add_argument("--source", type=int)
    r.add_argument("--sink", type=int)
    r.add_argument("--all-pairs", action="store_true")
    r.add_argument("--directed", action="store_true")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("input")

    d = sub.add_parser("reduce", help="weighted to unweighted reduction")
    d.add_argument("--mode", choices=("conjunctive", "implicative", "form-preserving"), default="conjunctive")
    d.add_argument("input")
    return p


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _oracle(args, instance: Optional[ProblemInstance] = None):
    if instance is not None and isinstance(instance.formula, DnfFormula) and args.solver is None:
        return DnfOracle()
    if args.solver is None:
        return default_oracle()
    return oracle_from_spec(args.solver)


def _emit(out, obj) -> None:
    out.write(json.dumps(obj, sort_keys=True) + "\n")


def _decimal(x: Fraction) -> str:
    txt = format_fraction(x)
    return txt if "/" not in txt else repr(float(x))


def _witness(sol) -> str:
    return " ".join(map(str, sol.literals())) + " 0"


def _print_samples(out, samples, freq: bool) -> None:
    if not freq:
        for s in samples:
            out.write(_witness(s) + "\n")
        return
    counts: dict[str, int] = {}
    for s in samples:
        w = _witness(s)
        counts[w] = counts.get(w, 0) + 1
    for w in sorted(counts):
        out.write(f"{w} {counts[w]}\n")


def _default_tilt(instance: ProblemInstance) -> Fraction:
    """max/min model weight is at most the product of per-variable literal ratios."""
    r = Fraction(1)
    for v in instance.weights.normal_vars:
        a = instance.weights.literal_weight(v, True)
        b = 1 - a
        r *= max(a, b) / min(a, b)
    return r


def _apply_mis(instance: ProblemInstance, seed: int, err) -> ProblemInstance:
    if not isinstance(instance.formula, CnfFormula):
        raise UsageError("--mis-first needs a CNF input")
    full = instance.sampling_set == tuple(range(1, instance.num_vars + 1))
    res = mis(instance.formula, over=None if full else instance.sampling_set, seed=seed)
    err.write(f"c mis support size {len(res.support)}\n")
    return instance.with_sampling_set(res.support)


def _warn_support(instance: ProblemInstance, err) -> None:
    if not isinstance(instance.formula, CnfFormula):
        return
    if instance.sampling_set == tuple(range(1, instance.num_vars + 1)):
        return
    try:
        ok = solve(build_q_formula(instance.formula, instance.sampling_set), max_decisions=200000) is None
    except BudgetExceeded:
        return
    if not ok:
        err.write("c warning: sampling set is not an independent support; "
                  "samples are over projections\n")


# ------------------------------------------------------------------- commands


def _cmd_count(args, seed, out, err) -> int:
    inst = parse_dimacs(_read(args.input))
    if args.mis_first:
        inst = _apply_mis(inst, seed, err)
    oracle = _oracle(args, inst)
    res = approxmc2(inst, args.epsilon, args.delta, seed, oracle)
    rec = {"estimate": res.value, "significand": res.significand, "exponent2": res.exponent2,
           "exact": res.exact, "sat_calls": res.sat_calls, "seed": seed, "oracle": res.oracle,
           "epsilon": args.epsilon, "delta": args.delta, "thresh": res.params.thresh_float,
           "iterations": res.iterations, "failures": res.failures,
           "sampling_set_size": len(inst.sampling_set)}
    if args.output == "text":
        out.write(f"s mc {res.value}\n")
    _emit(out, rec)
    if args.verbose:
        err.write(f"c oracle calls {oracle.stats.calls}\n")
    return EXIT_OK


def _cmd_wcount(args, seed, out, err) -> int:
    inst = parse_dimacs(_read(args.input))
    tilt = Fraction(args.tilt) if args.tilt is not None else _default_tilt(inst)
    oracle = _oracle(args, inst)
    res = weightmc(inst, args.epsilon, args.delta, tilt, seed, oracle)
    rec = {"estimate": str(res.estimate), "decimal": float(res.estimate), "exact": res.exact,
           "w_max": str(res.w_max), "tilt": str(tilt), "sat_calls": res.sat_calls, "seed": seed,
           "epsilon": args.epsilon, "delta": args.delta, "pivot": res.params.pivot,
           "iterations": res.iterations, "failures": res.failures, "tilt_violation": res.tilt_violation}
    if args.output == "text":
        out.write(f"s wmc {res.estimate} {_decimal(res.estimate)}\n")
    _emit(out, rec)
    if res.tilt_violation:
        err.write("c warning: a model lighter than w_max/r was seen; the tilt bound may be too small\n")
    if args.verbose:
        err.write(f"c oracle calls {oracle.stats.calls}\n")
    return EXIT_OK


def _sample_header(out, args, seed, params) -> dict:
    rec = {"seed": seed, "variant": params.variant, "epsilon": params.epsilon, "kappa": params.kappa,
           "pivot": params.pivot, "hi_thresh": float(params.hi_thresh), "lo_thresh": float(params.lo_thresh)}
    if args.output == "text":
        out.write(f"c seed {seed}\n")
        out.write(f"c {params.variant} epsilon {params.epsilon} kappa {params.kappa:.9f} pivot {params.pivot} "
                  f"hiThresh {params.hi_thresh} loThresh {params.lo_thresh}\n")
    return rec


def _cmd_sample(args, seed, out, err) -> int:
    inst = parse_dimacs(_read(args.input))
    if args.samples < 0:
        raise UsageError("-N must be nonnegative")
    if args.mis_first:
        inst = _apply_mis(inst, seed, err)
    else:
        _warn_support(inst, err)
    eps = args.epsilon if args.epsilon is not None else (16.0 if args.variant == "unigen2" else 6.0)
    params = compute_kappa_pivot(eps, args.variant)
    oracle = _oracle(args, inst)
    if args.variant == "unigen2":
        samples = unigen2_parallel(inst, eps, args.samples, args.threads, seed, args.max_retries, oracle=oracle)
        samples = samples[:args.samples]
    else:
        gen = UniGen(inst, eps, seed, oracle)
        samples = []
        for j in range(args.samples):
            for attempt in range(args.max_retries + 1):
                y = gen.sample(derive_seed(seed, j, attempt))
                if y is not None:
                    samples.append(y)
                    break
            else:
                raise SamplerFailure(f"sample {j} failed {args.max_retries + 1} times")
    rec = _sample_header(out, args, seed, params)
    if args.output == "json":
        rec["samples"] = [s.literals() for s in samples]
        _emit(out, rec)
    else:
        _print_samples(out, samples, args.freq)
    return EXIT_OK


def _cmd_wsample(args, seed, out, err) -> int:
    inst = parse_dimacs(_read(args.input))
    tilt = Fraction(args.tilt) if args.tilt is not None else _default_tilt(inst)
    params = compute_kappa_pivot(args.epsilon, "weightgen")
    _warn_support(inst, err)
    gen = WeightGen(inst, args.epsilon, tilt, seed, _oracle(args, inst))
    samples = []
    for j in range(args.samples):
        for attempt in range(args.max_retries + 1):
            y = gen.sample(derive_seed(seed, j, attempt))
            if y is not None:
                samples.append(y)
                break
        else:
            raise SamplerFailure(f"sample {j} failed {args.max_retries + 1} times")
    rec = _sample_header(out, args, seed, params)
    if args.output == "json":
        rec["samples"] = [s.literals() for s in samples]
        _emit(out, rec)
    else:
        _print_samples(out, samples, args.freq)
    return EXIT_OK


def _cmd_mis(args, seed, out, err) -> int:
    inst = parse_dimacs(_read(args.input))
    if not isinstance(inst.formula, CnfFormula):
        raise UsageError("mis needs a CNF input")
    full = inst.sampling_set == tuple(range(1, inst.num_vars + 1))
    res = mis(inst.formula, over=None if full else inst.sampling_set, seed=seed, budget=args.budget)
    rec = {"support": list(res.support), "size": len(res.support), "minimal": res.minimal,
           "local": list(res.local), "sat_calls": res.sat_calls, "seed": seed, "repaired": res.repaired}
    if args.output == "json":
        _emit(out, rec)
        return EXIT_OK
    vs = list(res.support)
    for k in range(0, max(len(vs), 1), 10):
        out.write("c ind " + " ".join(map(str, vs[k:k + 10])) + (" 0" if vs[k:k + 10] else "0") + "\n")
    out.write(f"c size {len(vs)} minimal {str(res.minimal).lower()} seed {seed}\n")
    for note in res.notes:
        err.write(f"c {note}\n")
    return EXIT_OK


def _cmd_relnet(args, seed, out, err) -> int:
    g = parse_graph(_read(args.input), directed=args.directed)
    if args.all_pairs:
        rows = estimate_all_pairs(g, args.epsilon, args.delta, seed, args.threads)
    else:
        if args.source is None or args.sink is None:
            raise UsageError("relnet needs --source and --sink, or --all-pairs")
        rows = [estimate_unreliability(g, args.source, args.sink, args.epsilon, args.delta, seed,
                                       _oracle(args)).as_row()]
    for row in rows:
        row["seed"] = seed
        _emit(out, row)
    return EXIT_OK


def reduce_instance(inst: ProblemInstance, mode: str):
    """(reduction, unweighted instance) for the requested mode, keeping a normal form where one exists."""
    f = inst.formula
    plain_cnf = isinstance(f, CnfFormula) and not f.xors
    if mode == "form-preserving" or (mode == "conjunctive" and plain_cnf) or \
            (mode == "implicative" and isinstance(f, DnfFormula)):
        red = reduce_wmc_form_preserving(inst)
    elif mode == "conjunctive":
        red = reduce_wmc_conjunctive(inst)
    else:
        red = reduce_wmc_implicative(inst)
    return red, red.to_instance()


def _cmd_reduce(args, seed, out, err) -> int:
    inst = parse_dimacs(_read(args.input))
    red, out_inst = reduce_instance(inst, args.mode)
    m_hat = red.plan.m_hat if red.plan is not None else 0
    out.write(f"c C_F 2^-{m_hat}\n")
    out.write(f"c mode {red.mode}\n")
    if red.correction:
        out.write(f"c correction {red.correction}\n")
    out.write(serialize_dimacs(out_inst).decode())
    return EXIT_OK


COMMANDS = {"count": _cmd_count, "wcount": _cmd_wcount, "sample": _cmd_sample, "wsample": _cmd_wsample,
            "mis": _cmd_mis, "relnet": _cmd_relnet, "reduce": _cmd_reduce}


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parser().parse_args(argv)
        if args.subcommand is None:
            raise UsageError("a subcommand is required")
        seed = getattr(args, "seed", None)
        if seed is None:
            seed = fresh_seed()
        if getattr(args, "verbose", False):
            err.write("c config " + json.dumps(asdict(RunConfig.from_args(args, seed)), sort_keys=True) + "\n")
        return COMMANDS[args.subcommand](args, seed, out, err)
    except UsageError as e:
        err.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except (DimacsError, GraphError, NonDyadicWeight, OSError) as e:
        err.write(f"input error: {e}\n")
        return EXIT_INPUT
    except Unsatisfiable as e:
        err.write(f"input error: {e}\n")
        return EXIT_INPUT
    except (AllIterationsFailed, SamplerFailure) as e:
        err.write(f"failed: {e}\n")
        return EXIT_FAILED
    except OracleError as e:
        err.write(f"solver error: {e}\n")
        return EXIT_SOLVER
    except ValueError as e:
        err.write(f"usage error: {e}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

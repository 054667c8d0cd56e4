"""Stand-in for a DIMACS command-line SAT solver: reads a file, prints s/v lines.

Usage: fake_solver.py [--garbage|--unsat|--crash] FILE
"""
import sys

from cellcount.formula import parse_dimacs
from cellcount.oracle.dpll import solve


def main(argv):
    mode = None
    if argv and argv[0].startswith("--"):
        mode, argv = argv[0], argv[1:]
    if mode == "--crash":
        sys.exit(1)
    if mode == "--garbage":
        print("s MAYBE")
        return 0
    inst = parse_dimacs(open(argv[0]).read())
    model = None if mode == "--unsat" else solve(inst.formula)
    if model is None:
        print("s UNSATISFIABLE")
        return 20
    print("s SATISFIABLE")
    lits = [v if (model >> v) & 1 else -v for v in range(1, inst.formula.num_vars + 1)]
    for k in range(0, len(lits), 8):
        print("v " + " ".join(map(str, lits[k:k + 8])))
    print("v 0")
    return 10


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

#!/usr/bin/env python3
"""Adapter: solve a DIMACS file with python-sat, print competition output."""
import sys

from pysat.formula import CNF
from pysat.solvers import Solver


def main():
    if len(sys.argv) != 2 or sys.argv[1] == "--help":
        print("usage: pysat_solver.py FILE.cnf")
        return 0
    cnf = CNF(from_file=sys.argv[1])
    with Solver(name="cadical153", bootstrap_with=cnf.clauses) as s:
        if s.solve():
            print("s SATISFIABLE")
            print("v " + " ".join(str(l) for l in s.get_model()) + " 0")
            return 10
        print("s UNSATISFIABLE")
        return 20


if __name__ == "__main__":
    sys.exit(main())

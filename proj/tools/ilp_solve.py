#!/usr/bin/env python3
"""Solve a CPLEX-LP file with HiGHS and print the optimal objective.

Exit codes: 0 solved to optimality, 1 solver failure, 77 HiGHS not installed.
"""
import sys


def main() -> int:
    if len(sys.argv) != 2:
        print("usage: ilp_solve.py MODEL.lp", file=sys.stderr)
        return 2
    try:
        import highspy
    except ImportError:
        print("highspy not available", file=sys.stderr)
        return 77
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(sys.argv[1]) != highspy.HighsStatus.kOk:
        print("cannot read model", file=sys.stderr)
        return 1
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        print("status: " + h.modelStatusToString(h.getModelStatus()), file=sys.stderr)
        return 1
    print(f"{h.getInfo().objective_function_value:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

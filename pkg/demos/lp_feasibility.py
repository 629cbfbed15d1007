"""Decide Ax <= b by homogenizing into a kernel problem.

The system is rewritten as M = [A | -A | I | -b] and the question
becomes whether the last column belongs to the maximum kernel support
of M. If it does, a strictly positive kernel vector of M folds back
into a feasible x; if not, the system is infeasible outright, no
phase-one LP involved.
"""

import numpy as np

from lincone import (
    LPFeasibilityProblem,
    max_support_kernel,
    recover_lp_point,
    reduce_lp_feasibility,
)


def decide(label, a, b):
    prob = LPFeasibilityProblem(np.array(a, dtype=float), np.array(b, dtype=float))
    big, t_index = reduce_lp_feasibility(prob)
    print(f"{label}: homogenized to {big.shape[0]} x {big.shape[1]}, "
          f"deciding column {t_index}")

    cert, support, report = max_support_kernel(big)
    feasible = t_index in set(support.tolist())
    print(f"  max kernel support: {sorted(support.tolist())} ({report.status})")
    print(f"  verdict: {'feasible' if feasible else 'infeasible'}")

    if feasible:
        x = recover_lp_point(prob, cert)
        worst = float((prob.mat @ x - prob.rhs).max())
        print(f"  recovered x = {np.round(x, 6)}, max(Ax - b) = {worst:.3e} (<= 0 is feasible)")
    print()


def main():
    # x1 + 2 x2 <= 4, -x1 <= 1, x2 <= 3 has plenty of room.
    decide("roomy system", [[1, 2], [-1, 0], [0, 1]], [4, 1, 3])

    # x <= -1 together with -x <= -2 forces x <= -1 and x >= 2 at once.
    decide("contradictory pair", [[1], [-1]], [-1, -2])

    # Equality hidden as two inequalities: x1 + x2 <= 1 and -(x1 + x2) <= -1.
    decide("tight equality", [[1, 1], [-1, -1], [1, 0]], [1, -1, 5])


if __name__ == "__main__":
    main()

"""Solve an SDPA sparse file with cvxpy; prints the optimal objective.

Usage: python3 solve_sdpa.py sdpa_3x3.dat-s
"""
import sys

import cvxpy as cp
import numpy as np


def read(path):
    tokens = []
    for line in open(path):
        if line.lstrip().startswith(('"', '*')):
            continue
        tokens.append(line.translate(str.maketrans(",(){}", "     ")).split())
    tokens = [t for t in tokens if t]
    m, nblocks = int(tokens[0][0]), int(tokens[1][0])
    sizes = [abs(int(s)) for s in tokens[2][:nblocks]]
    c = np.array([float(v) for v in tokens[3][:m]])
    F = [[np.zeros((s, s)) for s in sizes] for _ in range(m + 1)]
    for mat, blk, i, j, v in tokens[4:]:
        mat, blk, i, j = int(mat), int(blk) - 1, int(i) - 1, int(j) - 1
        F[mat][blk][i, j] = F[mat][blk][j, i] = float(v)
    return c, F, sizes


def main(path):
    c, F, sizes = read(path)
    y = cp.Variable(len(c))
    cons = []
    for b in range(len(sizes)):
        lhs = sum(F[k + 1][b] * y[k] for k in range(len(c))) - F[0][b]
        cons.append((lhs + lhs.T) / 2 >> 0)
    prob = cp.Problem(cp.Minimize(c @ y), cons)
    prob.solve(solver=cp.CVXOPT)
    print(f"{prob.value:.12f}")


if __name__ == "__main__":
    main(sys.argv[1])

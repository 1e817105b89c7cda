"""Solves the co-scheduling integer program of ilp_small.json with k=3 using
scipy's MILP solver and writes the assignment as `name value` lines."""
import json
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

K = 3

with open("ilp_small.json") as fh:
    doc = json.load(fh)
p = doc["p"]
times = [t["times"] for t in doc["tasks"]]
n = len(times)

xs = [(i, j, b) for i in range(n) for j in range(1, p + 1) for b in range(n)]
nx = len(xs)
col = {key: c for c, key in enumerate(xs)}
nv = nx + n  # y_b follow the x block

c = np.zeros(nv)
c[nx:] = 1.0
rows, lo, hi = [], [], []

def row():
    r = np.zeros(nv)
    rows.append(r)
    return r

for i in range(n):
    r = row()
    for j in range(1, p + 1):
        for b in range(n):
            r[col[(i, j, b)]] = 1
    lo.append(1); hi.append(1)
for b in range(n):
    r = row()
    for i in range(n):
        for j in range(1, p + 1):
            r[col[(i, j, b)]] = 1
    lo.append(-np.inf); hi.append(K)
for b in range(n):
    r = row()
    for i in range(n):
        for j in range(1, p + 1):
            r[col[(i, j, b)]] = j
    lo.append(-np.inf); hi.append(p)
for i in range(n):
    for j in range(1, p + 1):
        for b in range(n):
            r = row()
            r[col[(i, j, b)]] = times[i][j - 1]
            r[nx + b] = -1
            lo.append(-np.inf); hi.append(0)

integrality = np.concatenate([np.ones(nx), np.zeros(n)])
ub = np.concatenate([np.ones(nx), np.full(n, np.inf)])
res = milp(c, constraints=LinearConstraint(np.array(rows), lo, hi),
           integrality=integrality, bounds=Bounds(np.zeros(nv), ub))
assert res.success, res.message

out = sys.stdout
out.write(f"# scipy {__import__('scipy').__version__} milp, objective {res.fun:.6f}\n")
for (i, j, b), v in zip(xs, res.x[:nx]):
    if round(v) == 1:
        out.write(f"x_{i + 1}_{j}_{b + 1} 1\n")
for b in range(n):
    out.write(f"y_{b + 1} {res.x[nx + b]:.6f}\n")

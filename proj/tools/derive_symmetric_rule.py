#!/usr/bin/env python3
"""Refine the 25-point fully symmetric degree-10 triangle rule.

Orbit structure: centroid + 2 x S21 + 3 x S111 (14 unknowns). The rule is
solved in barycentric form against the exact monomial moments of the unit
reference triangle, starting from approximate published values, and printed
as a C++ table of (xi, eta, w) with weights summing to 1/2.
"""
import itertools
from math import factorial

import mpmath as mp

mp.mp.dps = 40

# Approximate starting values (weights normalised to sum 1).
start = [
    0.0908,                      # centroid weight
    0.4856, 0.0367,              # S21: a, w   -> (1-2a, a, a)
    0.1095, 0.0453,              # S21: a, w
    0.1417, 0.3079, 0.0728,      # S111: a, b, w -> (a, b, 1-a-b)
    0.0250, 0.2467, 0.0283,
    0.0095, 0.0668, 0.0094,
]


def points(p):
    out = [(mp.mpf(1) / 3, mp.mpf(1) / 3, p[0])]
    for a, w in ((p[1], p[2]), (p[3], p[4])):
        b = 1 - 2 * a
        for t in set(itertools.permutations((a, a, b))):
            out.append((t[0], t[1], w))
    for a, b, w in ((p[5], p[6], p[7]), (p[8], p[9], p[10]), (p[11], p[12], p[13])):
        c = 1 - a - b
        for t in itertools.permutations((a, b, c)):
            out.append((t[0], t[1], w))
    return out


def exact(i, j):
    return mp.mpf(factorial(i) * factorial(j)) / factorial(i + j + 2)


# 14 independent conditions: use a full monomial basis up to degree 10 and
# solve in the least-squares sense (the symmetric system is consistent).
monos = [(i, j) for d in range(11) for i in range(d + 1) for j in [d - i]]


def residual(p):
    pts = points(p)
    return [sum(w * x**i * y**j for x, y, w in pts) / 2 - exact(i, j) for i, j in monos]


p = [mp.mpf(v) for v in start]
for it in range(60):
    r = mp.matrix(residual(p))
    J = mp.matrix(len(monos), len(p))
    h = mp.mpf("1e-25")
    for k in range(len(p)):
        q = list(p)
        q[k] += h
        rk = residual(q)
        for m in range(len(monos)):
            J[m, k] = (rk[m] - r[m]) / h
    step = mp.lu_solve(J.T * J, J.T * r)
    p = [p[k] - step[k] for k in range(len(p))]
    if mp.norm(r) < mp.mpf("1e-32"):
        break

print("// residual norm", mp.nstr(mp.norm(mp.matrix(residual(p))), 3))
for x, y, w in points(p):
    assert x > 0 and y > 0 and 1 - x - y > 0 and w > 0
    print("    {%s, %s, %s}," % (mp.nstr(x, 17, min_fixed=-30, max_fixed=30),
                                  mp.nstr(y, 17, min_fixed=-30, max_fixed=30),
                                  mp.nstr(w / 2, 17, min_fixed=-30, max_fixed=30)))

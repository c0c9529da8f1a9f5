#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) problem with CVXOPT.

Usage: sdpa_cvxopt.py INPUT.dat-s OUTPUT.txt

Problem: minimize c'x subject to sum_i F_i x_i - F_0 >= 0 (PSD blocks, diagonal
blocks elementwise). Writes

    status optimal|near-optimal|infeasible|unbounded|solver-error
    primal <c'x>
    dual <dual objective>
    x <x_1> ... <x_m>
"""
import re
import sys

import numpy as np
from cvxopt import matrix, solvers, spmatrix


def read_sdpa(path):
    lines = []
    with open(path) as f:
        for raw in f:
            t = raw.strip()
            if not t or t[0] in '*"':
                continue
            toks = [s for s in re.split(r"[\s{}(),]+", t) if s]
            if toks:
                lines.append(toks)
    m = int(lines[0][0])
    nb = int(lines[1][0])
    sizes = [int(s) for s in lines[2][:nb]]
    rest = lines[3:]
    c = np.zeros(m)
    if m > 0:
        c[:] = [float(s) for s in rest[0][:m]]
        rest = rest[1:]
    entries = [(int(v), int(b) - 1, int(i) - 1, int(j) - 1, float(x)) for v, b, i, j, x in (r[:5] for r in rest)]
    return c, sizes, entries


def build(c, sizes, entries):
    m = len(c)
    diag = [k for k, s in enumerate(sizes) if s < 0]
    psd = [k for k, s in enumerate(sizes) if s > 0]
    # Offsets of diagonal blocks inside the stacked linear inequality.
    doff, n_lin = {}, 0
    for k in diag:
        doff[k] = n_lin
        n_lin += -sizes[k]
    gl = {"I": [], "J": [], "V": []}
    hl = np.zeros(n_lin)
    gs = {k: {"I": [], "J": [], "V": []} for k in psd}
    hs = {k: np.zeros((sizes[k], sizes[k])) for k in psd}
    for var, blk, i, j, val in entries:
        if sizes[blk] < 0:
            r = doff[blk] + i
            if var == 0:
                hl[r] -= val
            else:
                gl["I"].append(r)
                gl["J"].append(var - 1)
                gl["V"].append(-val)
            continue
        n = sizes[blk]
        cells = {(i, j), (j, i)}
        for a, b in cells:
            if var == 0:
                hs[blk][a, b] -= val
            else:
                gs[blk]["I"].append(b * n + a)
                gs[blk]["J"].append(var - 1)
                gs[blk]["V"].append(-val)
    args = {"c": matrix(c)}
    if n_lin:
        args["Gl"] = spmatrix(gl["V"], gl["I"], gl["J"], (n_lin, m))
        args["hl"] = matrix(hl)
    if psd:
        args["Gs"] = [spmatrix(gs[k]["V"], gs[k]["I"], gs[k]["J"], (sizes[k] ** 2, m)) for k in psd]
        args["hs"] = [matrix(hs[k]) for k in psd]
    return args


def classify(sol):
    p, d = sol["primal objective"], sol["dual objective"]
    st = sol["status"]
    if st == "optimal":
        return "optimal"
    if st == "primal infeasible":
        return "infeasible"
    if st == "dual infeasible":
        return "unbounded"
    if p is not None and d is not None and abs(p - d) <= 1e-3:
        return "near-optimal"
    return "solver-error"


def main():
    if len(sys.argv) != 3:
        sys.stderr.write(__doc__)
        return 2
    c, sizes, entries = read_sdpa(sys.argv[1])
    args = build(c, sizes, entries)
    # CVXOPT sometimes breaks down on degenerate problems at tight tolerances;
    # retry looser before giving up.
    best, error = None, None
    for tol in (1e-8, 1e-7, 1e-6):
        solvers.options.update({"show_progress": False, "abstol": tol, "reltol": tol, "feastol": tol, "maxiters": 200})
        try:
            sol = solvers.sdp(**args)
        except (ArithmeticError, ValueError) as e:
            error = str(e).replace("\n", " ")
            continue
        status = classify(sol)
        if status == "solver-error":
            continue
        if status != "near-optimal":
            best = (status, sol, tol)
            break
        if best is None:
            best = (status, sol, tol)
    if best is None:
        with open(sys.argv[2], "w") as f:
            f.write("status solver-error\ndetail %s\n" % (error or "cvxopt did not converge"))
        return 0
    status, sol, tol = best
    p, d = sol["primal objective"], sol["dual objective"]
    st = sol["status"]
    with open(sys.argv[2], "w") as f:
        f.write("status %s\n" % status)
        if p is not None and d is not None:
            f.write("primal %.17g\ndual %.17g\n" % (p, d))
        if sol["x"] is not None:
            f.write("x %s\n" % " ".join("%.17g" % v for v in sol["x"]))
        f.write("detail cvxopt %s (tol %g)\n" % (st, tol))
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Write free-format MPS files from the Netlib arrays shipped with SciPy's
benchmark suite (benchmarks/benchmarks/linprog_benchmark_files/*.npz).

Each archive holds c, A_ub, b_ub, A_eq, b_eq and bounds for one Netlib
problem.  Inequality rows were already flipped to <= by the converter that
produced the archives, so every A_ub row becomes an L row and every A_eq
row an E row.  Only problems with default bounds (x >= 0) are accepted.

    python3 tools/netlib_from_npz.py <npz-dir> <out-dir> BLEND SC50A ...

AFIRO and ADLITTLE in data/netlib/ are the original Netlib MPS files and
do not go through this script.
"""

import sys
from pathlib import Path

import numpy as np


def write_mps(name, d, out):
    c = np.asarray(d["c"], dtype=float)
    a_ub = np.asarray(d["A_ub"], dtype=float).reshape(-1, c.size)
    b_ub = np.asarray(d["b_ub"], dtype=float).ravel()
    a_eq = np.asarray(d["A_eq"], dtype=float).reshape(-1, c.size)
    b_eq = np.asarray(d["b_eq"], dtype=float).ravel()
    if np.asarray(d["bounds"]).size != 0:
        raise SystemExit(f"{name}: non-default bounds are not handled")

    rows = [(f"L{i + 1}", "L") for i in range(a_ub.shape[0])]
    rows += [(f"E{i + 1}", "E") for i in range(a_eq.shape[0])]
    a = np.vstack([a_ub, a_eq])
    b = np.concatenate([b_ub, b_eq])

    lines = [f"* {name}: converted from SciPy linprog benchmark arrays",
             f"NAME {name}", "ROWS", " N COST"]
    lines += [f" {kind} {row}" for row, kind in rows]
    lines.append("COLUMNS")
    for j in range(c.size):
        col = f"C{j + 1}"
        if c[j] != 0.0:
            lines.append(f"    {col} COST {float(c[j])!r}")
        for i in np.nonzero(a[:, j])[0]:
            lines.append(f"    {col} {rows[i][0]} {float(a[i, j])!r}")
    lines.append("RHS")
    for i in np.nonzero(b)[0]:
        lines.append(f"    RHS {rows[i][0]} {float(b[i])!r}")
    lines.append("ENDATA")
    out.write_text("\n".join(lines) + "\n")
    print(f"{name}: m={a.shape[0]} n={c.size} nnz={np.count_nonzero(a)}"
          f" optimum={float(d['obj'])!r}")


def main(argv):
    if len(argv) < 4:
        raise SystemExit(__doc__)
    src, dst = Path(argv[1]), Path(argv[2])
    dst.mkdir(parents=True, exist_ok=True)
    for name in argv[3:]:
        with np.load(src / f"{name}.npz", allow_pickle=True) as d:
            write_mps(name, d, dst / f"{name.lower()}.mps")


if __name__ == "__main__":
    main(sys.argv)

"""
Three ways to the same numbers
==============================

The closed counting formula, a brute-force sum over code strings, and
plain step-by-step evolution all produce the same propagators bit for bit.
"""

import time

from weylwalk import Chirality, brute_force_cone_table, cone_displacements, cone_table, evolution_cone_table

for t in range(1, 9):
    timings = {}
    tables = {}
    for name, fn in (("closed", cone_table), ("brute", brute_force_cone_table), ("step", evolution_cone_table)):
        t0 = time.perf_counter()
        tables[name] = fn(t, Chirality.PLUS)
        timings[name] = time.perf_counter() - t0
    same = all(tables["closed"][d] == tables["brute"][d] == tables["step"][d] for d in cone_displacements(t))
    cells = ", ".join(f"{k} {v * 1e3:7.1f} ms" for k, v in timings.items())
    print(f"t={t}: {len(tables['closed']):4d} sites  agree={same}  ({cells})")

"""
Ballistic spreading from a localized spinor
===========================================

Evolve a spin-up walker from the origin and track the width of the
probability distribution.  Probabilities are summed exactly and only
converted to floats for printing.
"""

import numpy as np

from weylwalk import ORIGIN, Amplitude, Chirality, WalkState, evolve, iter_evolve

start = WalkState.delta(ORIGIN, Amplitude(1), Amplitude(0))

print(" t   sites   total prob      <r^2>      sqrt(<r^2>)/t")
for t, dense in enumerate(iter_evolve(start, 40, Chirality.PLUS), start=1):
    if t % 5:
        continue
    state = dense.to_state()
    sites = np.array(state.sites(), dtype=float)
    prob = np.array([float((up.abs2() + down.abs2()).real_float()) for _, (up, down) in state.items()])
    r2 = float((prob * (sites**2).sum(axis=1)).sum())
    print(f"{t:2d} {len(state):7d}   {prob.sum():.15f}  {r2:9.2f}   {np.sqrt(r2) / t:.4f}")

# The norm is conserved exactly, not just to rounding.
final = evolve(start, 40, Chirality.PLUS)
print("\nexact norm after 40 steps:", final.norm2())

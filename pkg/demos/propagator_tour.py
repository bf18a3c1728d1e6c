"""
Exact propagators of the BCC Weyl walk
======================================

Build a few propagators in exact arithmetic and look at their structure.
"""

from weylwalk import ORIGIN, Chirality, Site, propagator_closed_form, to_float, transition_table

# The one-step matrices.  Each is zeta or its conjugate times a 0/1 pattern.
for l, m in transition_table(Chirality.PLUS).items():
    print(f"A_h{l:+d} =", m)

# Two steps straight along the body diagonal: a single path, so the result is
# a pure power of zeta times one projector-like block.
p = propagator_closed_form(ORIGIN, Site(2, 2, 2), 2)
print("\nP(0 -> (2,2,2), t=2) =", p.matrix)
print(to_float(p))

# The same corner at t = 200 is still exact; denominators are powers of two.
far = propagator_closed_form(ORIGIN, Site(200, 200, 200), 200)
print("\ncorner at t=200, top-right entry:", far.matrix[0, 1])

# Interior sites mix many paths and the numerators grow fast.
mid = propagator_closed_form(ORIGIN, Site(0, 0, 0), 200)
bits = max(abs(x.re).bit_length() for x in mid.matrix.entries())
print("return amplitude at t=200 needs", bits, "bit numerators")
print(to_float(mid))

# Swapping chirality conjugates every entry.
minus = propagator_closed_form(ORIGIN, Site(2, 0, -2), 6, Chirality.MINUS)
plus = propagator_closed_form(ORIGIN, Site(2, 0, -2), 6, Chirality.PLUS)
print("\nconjugation holds:", minus.matrix == plus.matrix.conjugate())

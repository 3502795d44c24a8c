"""Tour of the N-function calculus: evaluation, indices, conjugation, truncation.

Run with:  python demos/01_nfunction_calculus.py
"""

import numpy as np

from orliczfem import DeltaPower, PowerLaw, SumPower, Truncated, to_text, young_gap
from orliczfem.inequalities import inequality_margins

# Three growth laws with the same "p = 3" flavour
power = PowerLaw(3.0)
shifted = DeltaPower(3.0, 1.0)
mixed = SumPower(1.5, 3.0)

print("values (phi, phi', phi'') at t = 1:")
for spec in (power, shifted, mixed):
    print(f"  {spec.describe():40s} -> {spec.eval(1.0)}")

print("\nindex pairs (closed form vs log-grid estimate):")
for spec in (power, shifted, mixed):
    closed = spec.indices()
    grid = spec.indices_grid()
    print(
        f"  {spec.describe():40s} closed=({closed.p_minus:.3f}, {closed.p_plus:.3f})"
        f"  grid=({grid.p_minus:.6f}, {grid.p_plus:.6f})"
    )

# Conjugation: phi*(s) = sup_t (st - phi(t)).  For the cubic law the closed
# form is (2/3) s^(3/2); the package computes it by inverting phi'.
s = np.linspace(0.0, 4.0, 5)
print("\nconjugate of the cubic law vs closed form:")
print("  numeric:", np.round(power.conjugate(s), 10))
print("  exact:  ", np.round(2.0 / 3.0 * s**1.5, 10))

# Young's inequality with damping: the gap is nonnegative and vanishes at the
# equality configuration t = phi'(s), lambda = 1.
print("\nYoung gaps (s=1.2):")
for lam in (1.0, 0.5, 0.1):
    t = float(power.d_phi(np.asarray(1.2)))
    print(f"  lambda={lam:4.1f}: gap at t=phi'(s) is {young_gap(power, 1.2, t, lam):.3e}")

# Truncation freezes phi'/t outside [lo, hi]; inside, nothing changes.
trunc = Truncated(power, 0.5, 5.0)
print("\ntruncated cubic law (serializes to a key=value block):")
print("  " + to_text(trunc).replace("\n", ", ").rstrip(", "))
t = np.array([0.1, 1.0, 10.0])
print("  phi'' at", t, "->", trunc.dd_phi(t), "(quadratic branches outside [0.5, 5])")

# The inequality sweep returns worst-case margins; nonnegative means satisfied.
print("\nworst inequality margins over the standard grid:")
for name, margin in inequality_margins(trunc).items():
    print(f"  {name:16s} {margin:+.3e}")

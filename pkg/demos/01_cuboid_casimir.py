"""Homogeneous cuboid: the parallel-plate Casimir energy and pressure.

For plates of side L >> a the per-area energy is a mode sum over nz whose
summand (after the transverse integral) is a regulated function of nz.  The
Euler-Maclaurin engine splits off the divergent Laurent part of that sum and
returns its regular part beta.  Each polarization sector gives -1/180 for the
energy and -1/60 for the normal stress.

Run with ``python demos/01_cuboid_casimir.py``.
"""

import math

from emreg.em_core import EMConfig
from emreg.extractor import extract_beta
from emreg.summands import HomogeneousFamily

cfg = EMConfig(n=0, m=2)

print("Regular parts of the homogeneous mode sums")
total = {}
for quantity in ("energy", "stress"):
    total[quantity] = 0.0
    for sector in ("TE", "TM"):
        f = HomogeneousFamily(quantity, sector)
        exact = extract_beta(f, cfg)
        fitted = extract_beta(f, cfg, analytic=False)
        total[quantity] += exact.beta
        print(f"  {quantity:6s} {sector}: contour {exact.beta:+.15f}   fit {fitted.beta:+.15f}")

# both sectors together, in units of hbar c / (sqrt(kappa0) a^3) per area
energy = math.pi ** 2 / 8 * total["energy"]
pressure = math.pi ** 2 / 8 * total["stress"]
print(f"\nenergy per area    {energy:+.15f}   (-pi^2/720 = {-math.pi ** 2 / 720:+.15f})")
print(f"pressure           {pressure:+.15f}   (-pi^2/240 = {-math.pi ** 2 / 240:+.15f})")

# the pressure is minus the derivative of E(a) = energy / a^3
h = 1e-3
dE = (energy / (1 + h) ** 3 - energy / (1 - h) ** 3) / (2 * h)
print(f"-dE/da at a = 1    {-dE:+.15f}")

# the regular part does not depend on how the regulator enters the summand
print("\nRegulator invariance (TM energy)")
for power in (1, 2):
    for reparam in ("identity", "square", "sinh"):
        f = HomogeneousFamily("energy", "TM", power=power, reparam=reparam)
        beta = extract_beta(f, cfg).beta
        print(f"  power {power}, h = {reparam:8s}: beta + 1/180 = {beta + 1 / 180:+.2e}")

"""
Checking a field bracket
========================

Every catalog bracket is a bivector ``L(x)``; the bracket of two functionals
is ``<dF, L(x) dH>``.  Here we run the structural checks on the fluid
bracket, then break it on purpose and watch the Jacobi check catch it.
"""
import numpy as np

from hamcouple import brackets as br
from hamcouple import verify as vf
from hamcouple.grid import Grid3

# the standard suite: antisymmetry, Leibniz, energy, Jacobi and Casimirs
print(vf.format_table(vf.verify_bracket("hydro", n=6)))

# the charged fluid with its electric field: Jacobi holds only on the
# Gauss-law surface, so the suite also reports the off-surface value
print()
print(vf.format_table(vf.verify_bracket("ehd", n=6)))

# multiply the fluid bivector by a state-dependent scalar.  The result is
# still antisymmetric but no longer Poisson.
hydro = br.hydro()


def rescaled(g, const, x, c, out):
    acc = br._Out()
    hydro.kernel(g, const, x, c, acc)
    factor = 1.0 + g.integrate(x["rho"] ** 2)
    for k, v in acc.items():
        out.add(k, factor * v)


broken = br.Bracket("rescaled_hydro", hydro.schema, rescaled, positive=hydro.positive)
print()
print(vf.format_table(vf.verify_bracket(broken, n=6)))

# Jacobi residual under grid refinement for smooth, non-band-limited data
study = vf.jacobi_refinement(hydro)
for n, r in zip(study[::2], study[1::2]):
    print(f"N = {int(n):3d}  relative Jacobi residual {r:.2e}")

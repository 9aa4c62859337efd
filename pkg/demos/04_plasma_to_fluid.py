"""
From kinetic to fluid
=====================

Taking density, momentum and entropy moments of the Vlasov density is a
Poisson map onto the fluid bracket.  On a grid the identity holds up to
momentum truncation; we watch the residual fall as the momentum grid refines
and note how much mass sits on the momentum boundary.
"""
from hamcouple import brackets as br
from hamcouple import reduction as rd
from hamcouple.grid import Grid3, PhaseGrid
from hamcouple.state import Constants

const = Constants()
pmap = rd.plasma_to_fluid(const)
print("  q   density+momentum   with entropy   boundary mass")
for q in (16, 24, 32, 48):
    pg = PhaseGrid(Grid3((8, 8, 1)), (q, q, 1), (1.0, 1.0, 1.0))
    states = [rd.resolved_maxwellian_state(pg, s, constants=const) for s in range(2)]
    plain = rd.verify_poisson_map(pmap, br.vlasov(), br.hydro(), states, rd.moment_functionals(pg, 0), const)
    ent = rd.verify_poisson_map(pmap, br.vlasov(), br.hydro(), states,
                                rd.moment_functionals(pg, 0, include_entropy=True), const)
    print(f"{q:3d}   {plain.max_rel:16.2e}   {ent.max_rel:12.2e}   {plain.boundary_mass:13.2e}")

# linear maps between fluid descriptions are Poisson to rounding
from hamcouple.functional import test_functional_suite
from hamcouple.state import random_state

g = Grid3((8, 8, 1))
fine, coarse = br.hydro_binary(), br.classical_binary()
rep = rd.verify_poisson_map(rd.binary_sum(), fine, coarse, [random_state(fine.schema, g, 0)],
                            test_functional_suite(coarse.schema, g, 0), Constants.binary())
print()
print(rep)

"""
Matched pairs of Lie algebras
=============================

Two algebras acting on each other combine into one when the actions are
compatible.  The shipped specs rebuild se(3) from rotations and
translations and sl(2) from its Borel pair; a rigid body then runs on the
Lie-Poisson bracket of so(3).
"""
import numpy as np

from hamcouple import compose as cp
from hamcouple import liealg as la
from hamcouple.errors import CompatibilityError

for name in ("se3", "sl2_borel", "direct_so3_heisenberg"):
    res = cp.build_matched_pair(cp.load_spec(name))
    print("\n".join(res.lines))
    print("PASS" if res.passed else "FAIL")
    print()

# random actions are almost never compatible; the error names the identity
rng = np.random.default_rng(0)
try:
    la.MatchedPairSpec(la.so3(), la.so3(), left_action=rng.normal(size=(3, 3, 3)))
except CompatibilityError as exc:
    print(f"rejected: {exc.identity}, residual {exc.residual:.2e} at {exc.index}")

# free rigid body: mudot = omega x mu keeps |mu|^2 fixed
so3 = la.so3()
inertia = np.array([1.0, 2.0, 3.0])
traj = la.rk4_flow(lambda mu: la.lie_poisson_evolution(so3, mu, mu / inertia), [0.3, 1.0, -0.5], 1e-2, 2000)
casimir = np.sum(traj ** 2, axis=1)
energy = 0.5 * np.sum(traj ** 2 / inertia, axis=1)
print(f"rigid body: Casimir drift {np.abs(casimir - casimir[0]).max():.1e}, "
      f"energy drift {np.abs(energy - energy[0]).max():.1e}")

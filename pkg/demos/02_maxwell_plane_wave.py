"""
Maxwell plane wave
==================

The vacuum Maxwell bracket with the field energy as Hamiltonian transports a
plane wave at the speed of light.  We compare against the exact solution and
measure the RK4 convergence order.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hamcouple import brackets as br
from hamcouple import dynamics as dy
from hamcouple.grid import Grid3
from hamcouple.state import Constants

out = os.environ.get("HAMCOUPLE_OUT", "demo_out")
os.makedirs(out, exist_ok=True)

const = Constants(eps0=1.0, mu0=1.0)
bracket, H = br.em(), dy.get_hamiltonian("em", const)
grid = Grid3((64, 1, 1))

# one run with the shipped config
res = dy.run(dy.RunConfig.load(dy.shipped_config("maxwell_planewave")))
print(f"L2 error after {res.config.steps} steps: {res.meta['l2_error']:.2e}")
print(f"relative energy drift: {res.meta['energy_drift']:.2e}")

# dt-halving study at a shorter wavelength
T = 0.5
steps = np.array([50, 100, 200, 400])
errs = []
for n in steps:
    x = dy.planewave(bracket.schema, grid, const, 1.0, 4)
    y = dy.integrate_rk4(bracket, H, x, T / n, int(n), const)
    errs.append(dy.l2_distance(y, dy.planewave(bracket.schema, grid, const, 1.0, 4, t=T)))
errs = np.array(errs)
print("observed orders:", np.round(np.log2(errs[:-1] / errs[1:]), 3))

plt.loglog(T / steps, errs, "o-", label="RK4")
plt.loglog(T / steps, errs[0] * (steps[0] / steps) ** 4, "k--", label="slope 4")
plt.xlabel("dt")
plt.ylabel("L2 error")
plt.legend()
plt.savefig(os.path.join(out, "maxwell_order.png"), dpi=120)
print(f"wrote {out}/maxwell_order.png")

"""Hand-coded evolution equations, written directly from the field equations.

These never touch the bracket kernels; they use only grid derivatives and
the equation of state.
"""
import numpy as np


def cross(a, b):
    return np.cross(a, b, axis=0)


def momentum_flux_div(g, mom, v):
    """``-d_j (mom_i v_j)`` per component ``i``."""
    return np.stack([-sum(g.derivative(mom[i] * v[j], j) for j in range(3)) for i in range(3)])


def euler(g, x, eos, mom="u", rho="rho", s="s"):
    """Compressible ideal fluid in momentum-density form."""
    r, u, ent = x[rho], x[mom], x[s]
    _, e_rho, e_s = eos(r, ent)
    v = u / r
    du = momentum_flux_div(g, u, v) - r * g.grad(e_rho) - ent * g.grad(e_s)
    return {rho: -g.div(u), mom: du, s: -g.div(ent * v)}


def ideal_mhd(g, x, eos, mu0=1.0):
    """Ideal MHD with pressure ``p = -eps + rho eps_rho + s eps_s``."""
    rho, M, s, B = x["rho"], x["M"], x["s"], x["B"]
    v = M / rho
    p = eos.pressure(rho, s)
    J = g.curl(B) / mu0
    dM = momentum_flux_div(g, M, v) - g.grad(p) + cross(J, B)
    return {"rho": -g.div(M), "M": dM, "s": -g.div(s * v), "B": g.curl(cross(v, B))}


def maxwell(g, x, const):
    return {"E": const.c2 * g.curl(x["B"]), "B": -g.curl(x["E"])}


def two_fluid_em(g, x, eos, const, species=(("rho1", "u1", "s1", 0), ("rho2", "u2", "s2", 1))):
    """Charged fluids (momentum densities) coupled to Maxwell through current and Lorentz force."""
    E, B = x["E"], x["B"]
    out = maxwell(g, x, const)
    for rho, u, s, k in species:
        qm = const.charge_per_mass(k)
        fl = euler(g, x, eos, u, rho, s)
        v = x[u] / x[rho]
        fl[u] = fl[u] + qm * x[rho] * (E + cross(v, B))
        out["E"] = out["E"] - qm * x[rho] * v / const.eps0
        out.update(fl)
    return out


def matrix_structure_constants(mats):
    """Structure constants of a matrix Lie algebra by least squares on commutators."""
    basis = np.array([m.ravel() for m in mats]).T
    n = len(mats)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            coef, *_ = np.linalg.lstsq(basis, comm.ravel(), rcond=None)
            c[:, i, j] = coef
    return np.round(c, 12)


def se3_matrices():
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k], eps[i, k, j] = 1.0, -1.0
    P, J = [], []
    for i in range(3):
        m = np.zeros((4, 4))
        m[i, 3] = 1.0
        P.append(m)
        r = np.zeros((4, 4))
        r[:3, :3] = -eps[i]
        J.append(r)
    return P + J

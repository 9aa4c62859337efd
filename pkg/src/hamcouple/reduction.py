"""Projections between levels of description and Poisson-map checks.

A :class:`ProjectionMap` ``pi`` carries three linear-algebra views of the
same map: ``project`` (states), ``pullback_covector`` (the chain rule
``d(F o pi)(x) = pi'(x)^* dF(pi x)``) and ``tangent`` (``pi'(x) v``).  A map is
Poisson when ``{F, H}_coarse o pi = {F o pi, H o pi}_fine``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import brackets as br
from .errors import SchemaError
from .functional import (BOLTZMANN_ENTROPY, Functional, coupling_functional, linear_functional,
                         quadratic_functional, smooth_weight)
from .grid import PhaseGrid
from .state import Constants, State, band_limited, maxwellian


def _cross(a, b):
    return np.stack([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


class ProjectionMap:
    """Map from a fine schema to a coarse schema.

    Parameters
    ----------
    name : str
    fine, coarse : StateSchema
    project : callable(State) -> dict of coarse fields
    pullback : callable(State x, State dF) -> dict of fine covector fields
    tangent : callable(State x, State v) -> dict of coarse tangent fields
    coarse_grid : callable(grid) -> grid, optional
        Grid of the image; identity unless the map integrates out momenta.
    """

    def __init__(self, name, fine, coarse, project, pullback, tangent, coarse_grid=None):
        self.name = name
        self.fine = fine
        self.coarse = coarse
        self._project = project
        self._pullback = pullback
        self._tangent = tangent
        self._coarse_grid = coarse_grid or (lambda g: g)

    def _check(self, x, schema, what):
        if x.schema != schema:
            raise SchemaError(f"{self.name}: {what} schema {x.schema.names} does not match {schema.names}")

    def coarse_grid(self, grid):
        return self._coarse_grid(grid)

    def project(self, x):
        self._check(x, self.fine, "state")
        return State(self.coarse, self.coarse_grid(x.grid), self._project(x))

    def pullback_covector(self, x, dF):
        self._check(x, self.fine, "state")
        self._check(dF, self.coarse, "covector")
        return State(self.fine, x.grid, self._pullback(x, dF))

    def tangent(self, x, v):
        self._check(x, self.fine, "state")
        self._check(v, self.fine, "tangent")
        return State(self.coarse, self.coarse_grid(x.grid), self._tangent(x, v))

    def pullback(self, F):
        """``F o pi`` with the chain-rule derivative."""
        def ev(x):
            return F(self.project(x))

        def der(x):
            return self.pullback_covector(x, F.derivative(self.project(x)))

        return Functional(ev, der, name=f"{F.name}o{self.name}")

    def pushforward_apply(self, fine_bracket, x, dF, constants=None):
        """``pi'(x) L_fine(x) pi'(x)^* dF``: the image of the fine bivector."""
        return self.tangent(x, fine_bracket.apply(x, self.pullback_covector(x, dF), constants))

    def __repr__(self):
        return f"ProjectionMap({self.name}: {self.fine.names} -> {self.coarse.names})"


# --------------------------------------------------------------------------
# catalog


def identity(schema, name="identity"):
    return ProjectionMap(name, schema, schema,
                         lambda x: dict(x.items()),
                         lambda x, dF: dict(dF.items()),
                         lambda x, v: dict(v.items()))


def momentum_shift(constants=None):
    """``(rho, u, s, E, B) -> (rho, M = u + eps0 E x B, s, E, B)``."""
    eps0 = (constants or Constants()).eps0
    fine, coarse = br.emhd().schema, br.emhd_total().schema

    def project(x):
        out = dict(x.items())
        out["M"] = out.pop("u") + eps0 * _cross(x["E"], x["B"])
        return out

    def pullback(x, dF):
        b = dF["M"]
        return {"rho": dF["rho"], "u": b, "s": dF["s"],
                "E": dF["E"] + eps0 * _cross(x["B"], b),
                "B": dF["B"] + eps0 * _cross(b, x["E"])}

    def tangent(x, v):
        out = dict(v.items())
        out["M"] = out.pop("u") + eps0 * (_cross(v["E"], x["B"]) + _cross(x["E"], v["B"]))
        return out

    return ProjectionMap("momentum_shift", fine, coarse, project, pullback, tangent)


def momentum_unshift(y, constants=None):
    """Inverse of :func:`momentum_shift` on a total-momentum state."""
    eps0 = (constants or Constants()).eps0
    if y.schema != br.emhd_total().schema:
        raise SchemaError(f"expected {br.emhd_total().schema.names}, got {y.schema.names}")
    out = dict(y.items())
    out["u"] = out.pop("M") - eps0 * _cross(y["E"], y["B"])
    return State(br.emhd().schema, y.grid, out)


def _sum_map(name, fine, coarse, sums, passthrough):
    """Linear map adding groups of fine variables (``sums``: coarse -> fine list)."""
    def project(x):
        out = {c: sum(x[f] for f in fs) for c, fs in sums.items()}
        out.update({n: x[n] for n in passthrough})
        return out

    def pullback(x, dF):
        out = {f: dF[c] for c, fs in sums.items() for f in fs}
        out.update({n: dF[n] for n in passthrough})
        return out

    return ProjectionMap(name, fine, coarse, project, pullback, lambda x, v: project(v))


def binary_sum():
    """``(u1, u2, rho1, rho2, s1, s2) -> (u1 + u2, rho1, rho2, s1 + s2)``."""
    return _sum_map("binary_sum", br.hydro_binary().schema, br.classical_binary().schema,
                    {"u": ["u1", "u2"], "s": ["s1", "s2"]}, ["rho1", "rho2"])


def binary_sum_em():
    """Binary EMHD to its one-momentum form, fields passed through."""
    return _sum_map("binary_sum_em", br.bemhd().schema, br.cbemhd().schema,
                    {"u": ["u1", "u2"], "s": ["s1", "s2"]}, ["rho1", "rho2", "E", "B"])


def total_density():
    """``(u, rho1, rho2, s) -> (u, rho1 + rho2, s)``."""
    return _sum_map("total_density", br.classical_binary().schema, br.hydro().schema,
                    {"rho": ["rho1", "rho2"]}, ["u", "s"])


def plasma_to_fluid(constants=None, sigma=BOLTZMANN_ENTROPY, entropy=True):
    """Momentum moments ``rho = m int f``, ``u = int p f``, ``s = int sigma(f)``.

    With ``entropy=False`` the ``s`` component is set to zero, which lets the
    map act on signed ``f``; covectors with a nonzero ``s`` part then raise.
    """
    mass = (constants or Constants()).m[0]
    fine, coarse = br.vlasov().schema, br.hydro().schema

    def project(x):
        g, f = x.grid, x["f"]
        p = g.momenta()
        return {"rho": mass * g.p_integrate(f),
                "u": np.stack([g.p_integrate(p[i] * f) for i in range(3)]),
                "s": g.p_integrate(sigma.value(f)) if entropy else np.zeros(g.dims)}

    def pullback(x, dF):
        g, f = x.grid, x["f"]
        p = g.momenta()
        out = mass * dF["rho"][..., None, None, None] + sum(
            p[i] * dF["u"][i][..., None, None, None] for i in range(3))
        if np.any(dF["s"]):
            if not entropy:
                raise SchemaError("entropy moment disabled; covector has an s component")
            out = out + sigma.derivative(f) * dF["s"][..., None, None, None]
        return {"f": out}

    def tangent(x, v):
        g, fd = x.grid, v["f"]
        p = g.momenta()
        s = g.p_integrate(sigma.derivative(x["f"]) * fd) if entropy else np.zeros(g.dims)
        return {"rho": mass * g.p_integrate(fd),
                "u": np.stack([g.p_integrate(p[i] * fd) for i in range(3)]),
                "s": s}

    def coarse_grid(grid):
        if not isinstance(grid, PhaseGrid):
            raise SchemaError("plasma_to_fluid needs a PhaseGrid state")
        return grid.spatial

    return ProjectionMap("plasma_to_fluid", fine, coarse, project, pullback, tangent, coarse_grid)


PROJECTIONS = {
    "identity": None,
    "momentum_shift": momentum_shift,
    "binary_sum": binary_sum,
    "binary_sum_em": binary_sum_em,
    "total_density": total_density,
    "plasma_to_fluid": plasma_to_fluid,
}


def get_projection(name, constants=None, schema=None):
    if name not in PROJECTIONS:
        raise SchemaError(f"unknown projection {name!r}; choose from {', '.join(PROJECTIONS)}")
    if name == "identity":
        if schema is None:
            raise SchemaError("identity projection needs a schema")
        return identity(schema)
    if name in ("momentum_shift", "plasma_to_fluid"):
        return PROJECTIONS[name](constants)
    return PROJECTIONS[name]()


# --------------------------------------------------------------------------
# Poisson-map verification


@dataclass
class PoissonMapReport:
    name: str
    tol: float
    residuals: list = field(default_factory=list)   # (abs, rel) per sample pair
    tangent_residual: float = 0.0
    boundary_mass: float = None

    @property
    def max_abs(self):
        return max((r[0] for r in self.residuals), default=0.0)

    @property
    def max_rel(self):
        return max((r[1] for r in self.residuals), default=0.0)

    @property
    def passed(self):
        return self.max_rel < self.tol

    def lines(self):
        out = [f"map {self.name}: {len(self.residuals)} bracket pairs",
               f"max abs residual   {self.max_abs:.3e}",
               f"max rel residual   {self.max_rel:.3e}  (tol {self.tol:.0e})",
               f"max tangent resid  {self.tangent_residual:.3e}"]
        if self.boundary_mass is not None:
            out.append(f"momentum boundary mass {self.boundary_mass:.3e}")
        out.append("PASS" if self.passed else "FAIL")
        return out

    def __str__(self):
        return "\n".join(self.lines())


def _rel(a, b):
    d = abs(a - b)
    scale = max(abs(a), abs(b))
    return d, (d / scale if scale > 0.0 else 0.0)


def verify_poisson_map(pmap, fine, coarse, states, functionals, constants=None, tol=1e-8):
    """Compare ``{F, H}_coarse(pi x)`` with ``{F o pi, H o pi}_fine(x)``.

    ``functionals`` are coarse functionals; every ordered pair ``F != H`` is
    tested on every state.  The tangent-level residual
    ``|pi' L_fine pi'^* dH - L_coarse dH|`` is reported alongside.
    """
    if fine.schema != pmap.fine or coarse.schema != pmap.coarse:
        raise SchemaError(f"{pmap.name} maps {pmap.fine.names} -> {pmap.coarse.names}, "
                          f"brackets are {fine.schema.names} -> {coarse.schema.names}")
    report = PoissonMapReport(pmap.name, tol)
    bmass = None
    for x in states:
        if isinstance(x.grid, PhaseGrid) and x.schema.has_phase:
            for v in x.schema:
                if v.kind == "phase":
                    bm = x.grid.boundary_mass(x[v.name])
                    bmass = bm if bmass is None else max(bmass, bm)
        y = pmap.project(x)
        derivs = [F.derivative(y) for F in functionals]
        pulled = [pmap.pullback_covector(x, d) for d in derivs]
        images = [pmap.tangent(x, fine.apply(x, p, constants)) for p in pulled]
        direct = [coarse.apply(y, d, constants) for d in derivs]
        for a, b in zip(images, direct):
            report.tangent_residual = max(report.tangent_residual, (a - b).max_abs())
        for i in range(len(functionals)):
            for j in range(len(functionals)):
                if i == j:
                    continue
                c_val = derivs[i].dot(direct[j])
                f_val = pulled[i].dot(fine.apply(x, pulled[j], constants))
                report.residuals.append(_rel(c_val, f_val))
    report.boundary_mass = bmass
    return report


def moment_functionals(grid, seed=0, include_entropy=False):
    """Coarse test functionals on ``(u, rho, s)`` for kinetic projections.

    Linear, quadratic and bilinear in ``rho`` and ``u``; the entropy ``s``
    only enters when ``include_entropy`` is set.
    """
    rng = np.random.default_rng(seed)
    sp = grid.spatial
    names = ["u", "rho"] + (["s"] if include_entropy else [])
    kinds = {"u": "vector", "rho": "scalar", "s": "scalar"}

    def weights(mean=0.0):
        return {n: smooth_weight(sp, rng, kinds[n], 1, mean) for n in names}

    out = [linear_functional(weights(), "moment-linear-a"),
           linear_functional(weights(), "moment-linear-b"),
           quadratic_functional(weights(1.0), "moment-quadratic")]
    pairs = [("u", 0, "rho", 0, smooth_weight(sp, rng, "scalar")),
             ("u", 1, "u", 0, smooth_weight(sp, rng, "scalar"))]
    if include_entropy:
        pairs.append(("s", 0, "rho", 0, smooth_weight(sp, rng, "scalar")))
    out.append(coupling_functional(pairs, "moment-coupling"))
    return out


def resolved_maxwellian_state(pgrid, seed=0, amplitude=0.1, drift_scale=0.3, constants=None):
    """Vlasov state ``f = n(r) Maxwellian(p - d(r))`` with smooth ``n`` and ``d``.

    Temperature is chosen so ``pmax`` is 8 thermal widths; drift is a
    fraction ``drift_scale`` of the thermal momentum.
    """
    mass = (constants or Constants()).m[0]
    rng = np.random.default_rng(seed)
    sp = pgrid.spatial
    theta = min(pgrid.pmax[i] for i in range(3) if pgrid.pdims[i] > 1) / 8.0
    n = band_limited(sp, rng, 1, 1, amplitude, 1.0)[0]
    d = band_limited(sp, rng, 3, 1, drift_scale * theta)
    for i in range(3):
        if pgrid.pdims[i] == 1:
            d[i] = 0.0
    f = maxwellian(pgrid, density=n, drift=d, temperature=theta ** 2 / mass, mass=mass)
    return State(br.vlasov().schema, pgrid, {"f": f})

"""Hamiltonians, RK4 stepping and monitored runs.

Evolution is always ``xdot = L(x) dH(x)`` for a catalog bracket ``L``.  The
Hamiltonian catalog uses the same names as the bracket catalog.
"""
import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import brackets as br
from .config import load_toml
from .errors import BlowUpError, SchemaError, StateValidityError
from .functional import Functional
from .grid import Grid3, PhaseGrid
from .state import Constants, State, maxwellian, random_state, uniform, write_snapshot

# --------------------------------------------------------------------------
# equation of state


@dataclass(frozen=True)
class IdealEOS:
    """``eps(rho, s) = K rho^gamma exp(s / (cv rho))``.

    Pressure ``p = -eps + rho eps_rho + s eps_s`` equals ``(gamma - 1) eps``
    for this form.
    """

    gamma: float = 5.0 / 3.0
    K: float = 1.0
    cv: float = 1.0

    def __call__(self, rho, s):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0.0):
            raise StateValidityError("equation of state needs rho > 0")
        eps = self.K * rho ** self.gamma * np.exp(s / (self.cv * rho))
        eps_rho = eps * (self.gamma / rho - s / (self.cv * rho ** 2))
        eps_s = eps / (self.cv * rho)
        return eps, eps_rho, eps_s

    def pressure(self, rho, s):
        eps, eps_rho, eps_s = self(rho, s)
        return -eps + rho * eps_rho + s * eps_s


def eos_ideal(rho, s, params=None):
    """Energy density and its partials, ``(eps, eps_rho, eps_s)``."""
    return IdealEOS(**(params or {}))(rho, s)


# --------------------------------------------------------------------------
# Hamiltonians


class Hamiltonian(Functional):
    """Functional tied to a schema, with an analytic derivative."""

    def __init__(self, name, schema, density, derivative):
        self.schema = schema
        self._density = density

        def ev(x):
            self._check(x)
            return sum(x.grid.spatial.integrate(d) if d.ndim <= 4 else x.grid.integrate(d)
                       for d in density(x))

        def der(x):
            self._check(x)
            return State(x.schema, x.grid, derivative(x))

        super().__init__(ev, der, name)

    def _check(self, x):
        if x.schema != self.schema:
            raise SchemaError(f"Hamiltonian {self.name} expects {self.schema.names}, got {x.schema.names}")


def _sq(v):
    return np.sum(v * v, axis=0)


def _cross(a, b):
    return br._cross(a, b)


def _em_parts(const, x):
    return [0.5 * const.eps0 * (_sq(x["E"]) + const.c2 * _sq(x["B"]))]


def _em_derivs(const, x):
    return {"E": const.eps0 * x["E"], "B": x["B"] / const.mu0}


def _fluid_parts(eos, x, mom, rho, s):
    return [0.5 * _sq(x[mom]) / x[rho], eos(x[rho], x[s])[0]]


def _fluid_derivs(eos, x, mom, rho, s):
    _, e_rho, e_s = eos(x[rho], x[s])
    v = x[mom] / x[rho]
    return {mom: v, rho: -0.5 * _sq(v) + e_rho, s: e_s}


def _kinetic(const, grid, species):
    p = grid.momenta()
    return 0.5 * _sq(p) / const.m[species]


def h_em(const, **_):
    schema = br.em().schema
    return Hamiltonian("em", schema, lambda x: _em_parts(const, x), lambda x: _em_derivs(const, x))


def h_em_canonical(const, **_):
    """``1/2 int eps0 (|Y|^2 + c^2 |curl A|^2)`` with ``E = -Y``, ``B = curl A``."""
    schema = br.em_canonical().schema

    def parts(x):
        B = x.grid.spatial.curl(x["A"])
        return [0.5 * const.eps0 * (_sq(x["Y"]) + const.c2 * _sq(B))]

    def der(x):
        g = x.grid.spatial
        return {"A": g.curl(g.curl(x["A"])) / const.mu0, "Y": const.eps0 * x["Y"]}

    return Hamiltonian("em_canonical", schema, parts, der)


def h_vlasov(const, potential=None, **_):
    """``int f (p^2 / 2m + z e phi)``; ``potential`` is an optional spatial array."""
    schema = br.vlasov().schema

    def h(grid):
        out = _kinetic(const, grid, 0)
        if potential is not None:
            out = out + const.charge(0) * np.asarray(potential)[..., None, None, None]
        return out

    return Hamiltonian("vlasov", schema, lambda x: [x["f"] * h(x.grid)],
                       lambda x: {"f": np.broadcast_to(h(x.grid), x.grid.shape).copy()})


def _ked(name, bracket, fs, const):
    def parts(x):
        return [x[f] * _kinetic(const, x.grid, k) for k, f in fs] + _em_parts(const, x)

    def der(x):
        out = {f: np.broadcast_to(_kinetic(const, x.grid, k), x.grid.shape).copy() for k, f in fs}
        out.update(_em_derivs(const, x))
        return out

    return Hamiltonian(name, bracket.schema, parts, der)


def h_ked(const, **_):
    return _ked("ked", br.ked(), [(0, "f")], const)


def h_ked_binary(const, **_):
    return _ked("ked_binary", br.ked_binary(), [(0, "f1"), (1, "f2")], const)


def h_hydro(const, eos=None, momentum="u", **_):
    eos = eos or IdealEOS()
    schema = br.hydro(momentum).schema
    return Hamiltonian("hydro", schema, lambda x: _fluid_parts(eos, x, momentum, "rho", "s"),
                       lambda x: _fluid_derivs(eos, x, momentum, "rho", "s"))


def _interaction(alpha, x):
    return [alpha * x["rho1"] * x["rho2"]] if alpha else []


def h_hydro_binary(const, eos=None, alpha=0.0, **_):
    """Two fluids plus interaction energy ``alpha int rho1 rho2``."""
    eos = eos or IdealEOS()
    schema = br.hydro_binary().schema

    def parts(x):
        return (_fluid_parts(eos, x, "u1", "rho1", "s1") + _fluid_parts(eos, x, "u2", "rho2", "s2")
                + _interaction(alpha, x))

    def der(x):
        out = _fluid_derivs(eos, x, "u1", "rho1", "s1")
        out.update(_fluid_derivs(eos, x, "u2", "rho2", "s2"))
        out["rho1"] = out["rho1"] + alpha * x["rho2"]
        out["rho2"] = out["rho2"] + alpha * x["rho1"]
        return out

    return Hamiltonian("hydro_binary", schema, parts, der)


def _one_fluid_binary(eos, x):
    rho = x["rho1"] + x["rho2"]
    _, e_rho, e_s = eos(rho, x["s"])
    v = x["u"] / rho
    k = -0.5 * _sq(v) + e_rho
    return [0.5 * _sq(x["u"]) / rho, eos(rho, x["s"])[0]], {"u": v, "rho1": k, "rho2": k, "s": e_s}


def h_classical_binary(const, eos=None, **_):
    """``int |u|^2 / 2(rho1 + rho2) + eps(rho1 + rho2, s)``."""
    eos = eos or IdealEOS()
    schema = br.classical_binary().schema
    return Hamiltonian("classical_binary", schema, lambda x: _one_fluid_binary(eos, x)[0],
                       lambda x: _one_fluid_binary(eos, x)[1])


def h_emhd(const, eos=None, **_):
    eos = eos or IdealEOS()
    schema = br.emhd().schema

    def der(x):
        out = _fluid_derivs(eos, x, "u", "rho", "s")
        out.update(_em_derivs(const, x))
        return out

    return Hamiltonian("emhd", schema,
                       lambda x: _fluid_parts(eos, x, "u", "rho", "s") + _em_parts(const, x), der)


def h_emhd_total(const, eos=None, **_):
    """EMHD energy in total momentum: fluid momentum is ``M - eps0 E x B``."""
    eos = eos or IdealEOS()
    schema = br.emhd_total().schema

    def fluid_u(x):
        return x["M"] - const.eps0 * _cross(x["E"], x["B"])

    def parts(x):
        u = fluid_u(x)
        return [0.5 * _sq(u) / x["rho"], eos(x["rho"], x["s"])[0]] + _em_parts(const, x)

    def der(x):
        u = fluid_u(x)
        v = u / x["rho"]
        _, e_rho, e_s = eos(x["rho"], x["s"])
        return {"rho": -0.5 * _sq(v) + e_rho, "M": v, "s": e_s,
                "E": const.eps0 * x["E"] - const.eps0 * _cross(x["B"], v),
                "B": x["B"] / const.mu0 - const.eps0 * _cross(v, x["E"])}

    return Hamiltonian("emhd_total", schema, parts, der)


def h_bemhd(const, eos=None, alpha=0.0, **_):
    eos = eos or IdealEOS()
    schema = br.bemhd().schema

    def parts(x):
        return (_fluid_parts(eos, x, "u1", "rho1", "s1") + _fluid_parts(eos, x, "u2", "rho2", "s2")
                + _interaction(alpha, x) + _em_parts(const, x))

    def der(x):
        out = _fluid_derivs(eos, x, "u1", "rho1", "s1")
        out.update(_fluid_derivs(eos, x, "u2", "rho2", "s2"))
        out["rho1"] = out["rho1"] + alpha * x["rho2"]
        out["rho2"] = out["rho2"] + alpha * x["rho1"]
        out.update(_em_derivs(const, x))
        return out

    return Hamiltonian("bemhd", schema, parts, der)


def h_cbemhd(const, eos=None, **_):
    eos = eos or IdealEOS()
    schema = br.cbemhd().schema

    def der(x):
        out = _one_fluid_binary(eos, x)[1]
        out.update(_em_derivs(const, x))
        return out

    return Hamiltonian("cbemhd", schema, lambda x: _one_fluid_binary(eos, x)[0] + _em_parts(const, x), der)


def h_mhd(const, eos=None, **_):
    """``int |M|^2 / 2 rho + eps + |B|^2 / 2 mu0``."""
    eos = eos or IdealEOS()
    schema = br.mhd().schema

    def der(x):
        out = _fluid_derivs(eos, x, "M", "rho", "s")
        out["B"] = x["B"] / const.mu0
        return out

    return Hamiltonian("mhd", schema,
                       lambda x: _fluid_parts(eos, x, "M", "rho", "s") + [0.5 * _sq(x["B"]) / const.mu0], der)


def h_ehd(const, eos=None, **_):
    """``int |M|^2 / 2 rho + eps + eps0 |E|^2 / 2``."""
    eos = eos or IdealEOS()
    schema = br.ehd().schema

    def der(x):
        out = _fluid_derivs(eos, x, "M", "rho", "s")
        out["E"] = const.eps0 * x["E"]
        return out

    return Hamiltonian("ehd", schema,
                       lambda x: _fluid_parts(eos, x, "M", "rho", "s") + [0.5 * const.eps0 * _sq(x["E"])], der)


HAMILTONIANS = {
    "em_canonical": h_em_canonical,
    "em": h_em,
    "vlasov": h_vlasov,
    "hydro": h_hydro,
    "hydro_binary": h_hydro_binary,
    "classical_binary": h_classical_binary,
    "ked": h_ked,
    "ked_binary": h_ked_binary,
    "emhd": h_emhd,
    "emhd_total": h_emhd_total,
    "bemhd": h_bemhd,
    "cbemhd": h_cbemhd,
    "mhd": h_mhd,
    "ehd": h_ehd,
}


def get_hamiltonian(name, constants=None, **params):
    """Catalog Hamiltonian; ``params`` may carry ``eos`` (IdealEOS or dict) and ``alpha``."""
    if name not in HAMILTONIANS:
        raise SchemaError(f"unknown hamiltonian {name!r}; choose from {', '.join(HAMILTONIANS)}")
    eos = params.pop("eos", None)
    if isinstance(eos, dict):
        eos = IdealEOS(**eos)
    return HAMILTONIANS[name](constants or Constants(), eos=eos, **params)


# --------------------------------------------------------------------------
# time stepping


def rhs(bracket, H, x, constants=None):
    """``L(x) dH(x)``."""
    return bracket.apply(x, H.derivative(x), constants)


def step_rk4(bracket, H, x, dt, constants=None, step=None):
    """One classical Runge-Kutta step of ``xdot = L(x) dH(x)``."""
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")

    def f(y):
        return rhs(bracket, H, y, constants)

    try:
        k1 = f(x)
        k2 = f(k1.axpy(0.5 * dt, x))
        k3 = f(k2.axpy(0.5 * dt, x))
        k4 = f(k3.axpy(dt, x))
    except StateValidityError as exc:
        n = step if step is not None else 0
        raise BlowUpError(n, f"step {n}: {exc}") from exc
    out = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
    if not out.is_finite():
        n = step if step is not None else 0
        raise BlowUpError(n, f"non-finite fields at step {n}")
    return out


rk4_step = step_rk4


def integrate_rk4(bracket, H, x, dt, steps, constants=None):
    for n in range(1, steps + 1):
        x = step_rk4(bracket, H, x, dt, constants, step=n)
    return x


def cfl_dt(grid, constants=None, cfl=0.1):
    """``cfl * min spacing / c`` over axes with more than one point."""
    sp = grid.spatial
    h = min((d for d, n in zip(sp.spacing, sp.dims) if n > 1), default=min(sp.spacing))
    return cfl * h / (constants or Constants()).c


# --------------------------------------------------------------------------
# initial conditions


def _wave(grid, mode, axis=0):
    x = grid.spatial.coords()[axis]
    return 2.0 * np.pi * mode * x / grid.spatial.lengths[axis]


def planewave(schema, grid, constants, amplitude=1.0, mode=1, t=0.0, **_):
    """``E = (0, a cos k(x - ct), 0)``, ``B = (0, 0, (a/c) cos k(x - ct))``."""
    if set(schema.names) != {"E", "B"}:
        raise SchemaError("planewave initial data needs an (E, B) schema")
    sp = grid.spatial
    k = 2.0 * np.pi * mode / sp.lengths[0]
    phase = _wave(grid, mode) - k * constants.c * t
    E = np.zeros((3,) + sp.dims)
    B = np.zeros((3,) + sp.dims)
    E[1] = amplitude * np.cos(phase)
    B[2] = amplitude / constants.c * np.cos(phase)
    return State(schema, grid, {"E": E, "B": B})


def mhd_smooth(schema, grid, constants, amplitude=0.1, mode=1, **_):
    """Smooth 1D-symmetric MHD data varying along the first axis."""
    if set(schema.names) != {"rho", "M", "s", "B"}:
        raise SchemaError("mhd_smooth needs an (rho, M, s, B) schema")
    sp = grid.spatial
    ph = _wave(grid, mode)
    a = amplitude
    M = np.zeros((3,) + sp.dims)
    B = np.zeros((3,) + sp.dims)
    M[0] = a * np.sin(ph)
    M[1] = 0.5 * a * np.cos(ph)
    B[0] = 0.5
    B[1] = 0.3 + a * np.sin(ph + 0.4)
    B[2] = 0.5 * a * np.cos(2 * ph)
    return State(schema, grid, {"rho": 1.0 + a * np.sin(ph + 1.0), "M": M,
                                "s": 1.0 + 0.5 * a * np.cos(ph), "B": B})


def _ic_random(schema, grid, constants, seed=0, amplitude=0.3, modes=1, **_):
    return random_state(schema, grid, seed, amplitude, modes)


def _ic_zero(schema, grid, constants, **_):
    return State(schema, grid, {})


def _ic_uniform(schema, grid, constants, values=None, **_):
    return uniform(schema, grid, values or {})


def _ic_maxwellian(schema, grid, constants, amplitude=0.1, mode=1, **_):
    """Each phase density a Maxwellian with density ``1 + a cos kx``; fields zero."""
    if not isinstance(grid, PhaseGrid):
        raise SchemaError("maxwellian initial data needs a phase grid")
    dens = 1.0 + amplitude * np.cos(_wave(grid, mode))
    fields = {}
    for k, var in enumerate(v for v in schema if v.kind == "phase"):
        fields[var.name] = maxwellian(grid, density=dens, mass=constants.m[min(k, constants.n_species - 1)])
    return State(schema, grid, fields)


INITIAL_CONDITIONS = {
    "zero": _ic_zero,
    "uniform": _ic_uniform,
    "random": _ic_random,
    "planewave": planewave,
    "mhd_smooth": mhd_smooth,
    "maxwellian": _ic_maxwellian,
}


# --------------------------------------------------------------------------
# runs


@dataclass
class RunConfig:
    """Everything a run needs; see ``configs/*.toml`` for the file form."""

    bracket: str
    hamiltonian: str = None
    steps: int = 100
    dt: float = None
    cfl: float = 0.1
    stride: int = 1
    seed: int = 0
    name: str = "run"
    dims: tuple = (16, 1, 1)
    lengths: tuple = (1.0, 1.0, 1.0)
    pdims: tuple = None
    pmax: tuple = None
    constants: Constants = field(default_factory=Constants)
    initial: dict = field(default_factory=lambda: {"kind": "random"})
    hamiltonian_params: dict = field(default_factory=dict)
    monitors: list = None

    def __post_init__(self):
        if self.hamiltonian is None:
            self.hamiltonian = self.bracket
        if self.bracket not in br.CATALOG:
            raise SchemaError(f"unknown bracket {self.bracket!r}")
        if self.hamiltonian not in HAMILTONIANS:
            raise SchemaError(f"unknown hamiltonian {self.hamiltonian!r}")
        if int(self.steps) < 1:
            raise SchemaError(f"steps must be >= 1, got {self.steps}")
        if self.dt is not None and not float(self.dt) > 0.0:
            raise SchemaError(f"dt must be > 0, got {self.dt}")
        if int(self.stride) < 1:
            raise SchemaError(f"stride must be >= 1, got {self.stride}")
        kind = self.initial.get("kind", "random")
        if kind not in INITIAL_CONDITIONS:
            raise SchemaError(f"unknown initial condition {kind!r}; choose from {', '.join(INITIAL_CONDITIONS)}")
        self.steps = int(self.steps)
        self.stride = int(self.stride)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        grid = d.pop("grid", {})
        const = d.pop("constants", {})
        known = {"bracket", "hamiltonian", "steps", "dt", "cfl", "stride", "seed", "name",
                 "initial", "hamiltonian_params", "monitors"}
        unknown = set(d) - known
        if unknown:
            raise SchemaError(f"unknown config keys {sorted(unknown)}")
        if "bracket" not in d:
            raise SchemaError("config needs a 'bracket' entry")
        kw = {k: v for k, v in d.items()}
        if isinstance(kw.get("monitors"), dict):
            kw["monitors"] = list(kw["monitors"].get("names", []))
        for key in ("dims", "lengths", "pdims", "pmax"):
            if key in grid:
                kw[key] = tuple(grid[key])
        kw["constants"] = Constants(**const)
        return cls(**kw)

    @classmethod
    def load(cls, path):
        return cls.from_dict(load_toml(path))

    def make_grid(self):
        sp = Grid3(self.dims, self.lengths)
        if br.get_bracket(self.bracket).schema.has_phase:
            return PhaseGrid(sp, self.pdims or (8, 1, 1), self.pmax or (1.0, 1.0, 1.0))
        return sp

    def time_step(self, grid):
        return float(self.dt) if self.dt is not None else cfl_dt(grid, self.constants, self.cfl)

    def initial_state(self, schema, grid):
        params = dict(self.initial)
        kind = params.pop("kind", "random")
        params.setdefault("seed", self.seed)
        return INITIAL_CONDITIONS[kind](schema, grid, self.constants, **params)


def default_monitors(schema):
    """Integrals of scalar and phase variables, plus squares of phase ones."""
    out = []
    for v in schema:
        if v.kind in ("scalar", "phase"):
            out.append(f"integral:{v.name}")
        if v.kind == "phase":
            out.append(f"square:{v.name}")
    return out


def evaluate_monitor(name, x):
    """``integral:<var>``, ``square:<var>``, ``cube:<var>`` or ``norm:<var>``."""
    try:
        kind, var = name.split(":", 1)
    except ValueError:
        raise SchemaError(f"monitor {name!r} must look like kind:variable") from None
    a = x[var]
    power = {"integral": 1, "square": 2, "cube": 3}.get(kind)
    w = x.schema.weight(var, x.grid)
    if power is not None:
        return float(np.sum(a ** power) * w)
    if kind == "norm":
        return float(np.sqrt(np.sum(a * a) * w))
    raise SchemaError(f"unknown monitor kind {kind!r}")


@dataclass
class RunResult:
    config: RunConfig
    columns: list
    rows: list
    final: State
    meta: dict = field(default_factory=dict)

    def column(self, name):
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([r[0]] + [repr(float(v)) for v in r[1:]])
        return buf.getvalue()


def l2_distance(x, y):
    d = x - y
    return math.sqrt(max(d.dot(d), 0.0))


def run(config, out_dir=None):
    """Integrate ``config`` and record energy, monitors and constraint residuals.

    When ``out_dir`` is given, ``series.csv`` and ``final.snap`` are written
    there.  Blow-ups propagate as :class:`BlowUpError` with the step index.
    """
    const = config.constants
    bracket = br.get_bracket(config.bracket)
    H = get_hamiltonian(config.hamiltonian, const, **dict(config.hamiltonian_params))
    if H.schema != bracket.schema:
        raise SchemaError(f"hamiltonian {config.hamiltonian} expects {H.schema.names}, "
                          f"bracket {config.bracket} carries {bracket.schema.names}")
    bracket.check_constants(const)
    grid = config.make_grid()
    x = config.initial_state(bracket.schema, grid)
    dt = config.time_step(grid)
    monitors = list(config.monitors) if config.monitors is not None else default_monitors(bracket.schema)
    constraint_names = list(bracket.constraints)
    columns = (["step", "time", "energy"] + [f"monitor:{m}" for m in monitors]
               + [f"constraint:{c}" for c in constraint_names])

    def record(n, state):
        res = bracket.constraint_residuals(state, const)
        return ([n, n * dt, H(state)] + [evaluate_monitor(m, state) for m in monitors]
                + [float(np.max(np.abs(res[c]))) for c in constraint_names])

    rows = [record(0, x)]
    for n in range(1, config.steps + 1):
        x = step_rk4(bracket, H, x, dt, const, step=n)
        if n % config.stride == 0 or n == config.steps:
            rows.append(record(n, x))
    result = RunResult(config, columns, rows, x, {"dt": dt, "t_end": config.steps * dt})
    if config.initial.get("kind") == "planewave":
        params = {k: v for k, v in config.initial.items() if k != "kind"}
        exact = planewave(bracket.schema, grid, const, t=config.steps * dt, **params)
        result.meta["l2_error"] = l2_distance(x, exact)
    energy = result.column("energy")
    scale = abs(energy[0]) if energy[0] != 0.0 else 1.0
    result.meta["energy_drift"] = float(np.max(np.abs(energy - energy[0])) / scale)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "series.csv"), "w", newline="") as fh:
            fh.write(result.to_csv())
        meta = {"config": config.name, "bracket": config.bracket, "hamiltonian": config.hamiltonian,
                "steps": config.steps, "dt": dt, "constants": const.as_dict()}
        write_snapshot(os.path.join(out_dir, "final.snap"), x, meta)
    return result


def shipped_config(name):
    """Path of a config bundled with the package (``maxwell_planewave``, ``mhd_smooth``)."""
    here = os.path.join(os.path.dirname(__file__), "configs", f"{name}.toml")
    if not os.path.exists(here):
        raise SchemaError(f"no shipped config {name!r}")
    return here

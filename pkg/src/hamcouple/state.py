"""Schema-checked field collections, physical constants and snapshots.

A :class:`State` is an immutable mapping from variable names to numpy
arrays living on one grid.  The same container holds tangent vectors and
covectors (variational derivatives): the quadrature pairing :meth:`State.dot`
identifies the dual with the state space.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParityError, SchemaError, StateValidityError
from .grid import Grid3, PhaseGrid

KINDS = ("scalar", "vector", "phase")


@dataclass(frozen=True)
class Var:
    """One state variable.

    Parameters
    ----------
    name : str
    kind : {'scalar', 'vector', 'phase'}
    parity : {+1, -1, None}
        Time-reversal parity; ``None`` means undefined.
    positive : bool
        Physically required to be > 0 (densities).  Random states offset it.
    solenoidal : bool
        Random states draw it as a curl so its discrete divergence vanishes.
    """

    name: str
    kind: str
    parity: object = None
    positive: bool = False
    solenoidal: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown kind {self.kind!r} for {self.name!r}")
        if self.parity not in (None, 1, -1):
            raise SchemaError(f"parity must be +1, -1 or None, got {self.parity!r}")


class StateSchema:
    """Ordered, name-unique list of :class:`Var`."""

    def __init__(self, variables):
        variables = tuple(variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate variable names in {names}")
        self.variables = variables
        self._index = {v.name: v for v in variables}

    @property
    def names(self):
        return tuple(v.name for v in self.variables)

    @property
    def has_phase(self):
        return any(v.kind == "phase" for v in self.variables)

    def __getitem__(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"variable {name!r} not in schema {self.names}") from None

    def __contains__(self, name):
        return name in self._index

    def __iter__(self):
        return iter(self.variables)

    def __len__(self):
        return len(self.variables)

    def __eq__(self, other):
        return isinstance(other, StateSchema) and self.variables == other.variables

    def __hash__(self):
        return hash(self.variables)

    def __repr__(self):
        return f"StateSchema({', '.join(self.names)})"

    def field_shape(self, name, grid):
        var = self[name]
        if var.kind == "phase":
            if not isinstance(grid, PhaseGrid):
                raise SchemaError(f"{name!r} is a phase density but grid is not a PhaseGrid")
            return grid.shape
        dims = grid.spatial.dims
        return dims if var.kind == "scalar" else (3,) + dims

    def weight(self, name, grid):
        """Quadrature weight attached to each coefficient of ``name``."""
        if self[name].kind == "phase":
            return grid.quad_weight
        return grid.spatial.quad_weight

    def describe(self):
        return [{"name": v.name, "kind": v.kind, "parity": v.parity,
                 "positive": v.positive, "solenoidal": v.solenoidal}
                for v in self.variables]

    @classmethod
    def from_description(cls, items):
        return cls(Var(d["name"], d["kind"], d.get("parity"), bool(d.get("positive", False)),
                       bool(d.get("solenoidal", False))) for d in items)


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


class State:
    """Immutable collection of fields, one per schema entry.

    Arithmetic (``+``, ``-``, scalar ``*``) and :meth:`dot` require identical
    schemas and grids.
    """

    __slots__ = ("schema", "grid", "_fields")

    def __init__(self, schema, grid, fields):
        if not isinstance(schema, StateSchema):
            schema = StateSchema(schema)
        if schema.has_phase and not isinstance(grid, PhaseGrid):
            raise SchemaError("schema contains a phase density; grid must be a PhaseGrid")
        extra = set(fields) - set(schema.names)
        if extra:
            raise SchemaError(f"fields {sorted(extra)} not in schema {schema.names}")
        data = {}
        for var in schema:
            shape = schema.field_shape(var.name, grid)
            if var.name in fields:
                arr = np.asarray(fields[var.name], dtype=float)
                if arr.shape != shape:
                    raise SchemaError(f"field {var.name!r} has shape {arr.shape}, expected {shape}")
                data[var.name] = _frozen(arr)
            else:
                data[var.name] = _frozen(np.zeros(shape))
        self.schema = schema
        self.grid = grid
        self._fields = data

    # mapping access -------------------------------------------------------
    def __getitem__(self, name):
        try:
            return self._fields[name]
        except KeyError:
            raise SchemaError(f"variable {name!r} not in schema {self.schema.names}") from None

    def items(self):
        return ((n, self._fields[n]) for n in self.schema.names)

    def fields(self):
        """Writable copies of all fields, keyed by name."""
        return {n: a.copy() for n, a in self.items()}

    def replace(self, **updates):
        data = dict(self._fields)
        data.update(updates)
        return State(self.schema, self.grid, data)

    # linear algebra -------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, State):
            raise SchemaError(f"expected a State, got {type(other).__name__}")
        if other.schema != self.schema:
            raise SchemaError(f"schema mismatch: {self.schema.names} vs {other.schema.names}")
        if other.grid != self.grid:
            raise SchemaError("states live on different grids")

    def _combine(self, other, op):
        self._check(other)
        return State(self.schema, self.grid,
                     {n: op(a, other._fields[n]) for n, a in self.items()})

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, alpha):
        alpha = float(alpha)
        return State(self.schema, self.grid, {n: alpha * a for n, a in self.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def axpy(self, alpha, y):
        """Return ``alpha * self + y``."""
        self._check(y)
        return State(self.schema, self.grid,
                     {n: alpha * a + y._fields[n] for n, a in self.items()})

    def dot(self, other):
        """Quadrature pairing summed over all fields."""
        self._check(other)
        total = 0.0
        for n, a in self.items():
            total += self.schema.weight(n, self.grid) * float(np.sum(a * other._fields[n]))
        return total

    def norm(self):
        return math.sqrt(max(self.dot(self), 0.0))

    def max_abs(self):
        return max((float(np.max(np.abs(a))) if a.size else 0.0) for _, a in self.items())

    def is_finite(self):
        return all(np.all(np.isfinite(a)) for _, a in self.items())

    def zeros_like(self):
        return State(self.schema, self.grid, {})

    # flat views -----------------------------------------------------------
    def to_vector(self):
        return np.concatenate([a.ravel() for _, a in self.items()])

    @classmethod
    def from_vector(cls, schema, grid, vec):
        vec = np.asarray(vec, dtype=float)
        shapes = [(v.name, schema.field_shape(v.name, grid)) for v in schema]
        total = sum(int(np.prod(s)) for _, s in shapes)
        if total != vec.size:
            raise SchemaError(f"vector of length {vec.size} does not match schema size {total}")
        data, pos = {}, 0
        for name, shape in shapes:
            size = int(np.prod(shape))
            data[name] = vec[pos:pos + size].reshape(shape)
            pos += size
        return cls(schema, grid, data)

    def weights_vector(self):
        return np.concatenate([np.full(a.size, self.schema.weight(n, self.grid))
                               for n, a in self.items()])

    def blocks(self):
        """Slices of :meth:`to_vector` per variable name."""
        out, pos = {}, 0
        for n, a in self.items():
            out[n] = slice(pos, pos + a.size)
            pos += a.size
        return out

    def __repr__(self):
        return f"State({', '.join(self.schema.names)} on {self.grid.shape})"


def zeros(schema, grid):
    return State(schema, grid, {})


def uniform(schema, grid, values):
    """State with each variable set to a constant (scalar or 3-vector)."""
    data = {}
    for name, val in values.items():
        shape = schema.field_shape(name, grid)
        val = np.asarray(val, dtype=float)
        if schema[name].kind == "vector":
            data[name] = np.broadcast_to(val.reshape((3,) + (1,) * 3), shape)
        else:
            data[name] = np.full(shape, float(val))
    return State(schema, grid, data)


def time_reversal(x):
    """Multiply every field by its parity (fluid-level schemas only)."""
    for var in x.schema:
        if var.parity is None:
            raise ParityError(f"time-reversal parity undefined for {var.name!r}")
    return State(x.schema, x.grid, {v.name: v.parity * x[v.name] for v in x.schema})


def parities(schema):
    out = {}
    for var in schema:
        if var.parity is None:
            raise ParityError(f"time-reversal parity undefined for {var.name!r}")
        out[var.name] = var.parity
    return out


# --------------------------------------------------------------------------
# random band-limited states

_WAVES = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, -1, 0))


def band_limited(grid, rng, n_fields=1, modes=1, amplitude=1.0, mean=0.0):
    """Random real trigonometric fields with wavenumbers ``|k_i| <= modes``.

    Collapsed axes (one point) drop out of the wave set.  Returns an array of
    shape ``(n_fields,) + grid.dims``.
    """
    grid = grid.spatial
    x = grid.coords()
    active = [n > 1 for n in grid.dims]
    waves = set()
    for w in _WAVES:
        w = tuple(k if act else 0 for k, act in zip(w, active))
        if any(w):
            waves.add(w)
    for m in range(2, modes + 1):
        for i in range(3):
            if active[i]:
                w = [0, 0, 0]
                w[i] = m
                waves.add(tuple(w))
    waves = sorted(waves)
    out = np.empty((n_fields,) + grid.dims)
    for j in range(n_fields):
        f = np.full(grid.dims, mean + amplitude * rng.uniform(-0.5, 0.5))
        for w in waves:
            phase = sum(2.0 * np.pi * w[i] * x[i] / grid.lengths[i] for i in range(3))
            f = f + amplitude * (rng.normal() * np.cos(phase) + rng.normal() * np.sin(phase)) / len(waves)
        out[j] = f
    return out


def maxwellian(pgrid, density=1.0, drift=(0.0, 0.0, 0.0), temperature=None, mass=1.0):
    """Discrete Maxwellian in momentum, shape ``pgrid.pdims`` broadcastable.

    ``density`` may be a spatial array and ``drift`` a spatial vector field of
    shape ``(3, n1, n2, n3)``; in every cell the momentum profile is
    normalized so its discrete integral is exactly one.
    """
    if temperature is None:
        active = [P for P, q in zip(pgrid.pmax, pgrid.pdims) if q > 1] or [1.0]
        temperature = (min(active) / 8.0) ** 2 / mass
    p = pgrid.momenta()
    drift = np.asarray(drift, dtype=float)
    if drift.ndim == 1:
        drift = drift.reshape((3,) + (1,) * 6)
    else:
        drift = drift.reshape(drift.shape + (1, 1, 1))
    active = np.array([q > 1 for q in pgrid.pdims]).reshape((3,) + (1,) * 6)
    arg = np.where(active, (p - drift) ** 2, 0.0).sum(axis=0) / (2.0 * mass * temperature)
    prof = np.exp(-arg)
    prof = prof / (np.sum(prof, axis=(-3, -2, -1), keepdims=True) * pgrid.momentum_weight)
    density = np.asarray(density, dtype=float)
    if density.ndim == 3:
        density = density.reshape(density.shape + (1, 1, 1))
    return density * prof


def random_state(schema, grid, seed=0, amplitude=0.3, modes=1):
    """Deterministic random band-limited state.

    Positive variables get mean 1 and relative perturbation ``amplitude``;
    solenoidal vectors are curls of random potentials; phase densities are a
    spatially modulated Maxwellian times a smooth positive momentum factor.
    """
    rng = np.random.default_rng(seed)
    sp = grid.spatial
    data = {}
    for var in schema:
        if var.kind == "scalar":
            mean = 1.0 if var.positive else 0.0
            data[var.name] = band_limited(sp, rng, 1, modes, amplitude, mean)[0]
        elif var.kind == "vector":
            if var.solenoidal:
                pot = band_limited(sp, rng, 3, modes, amplitude)
                v = sp.curl(pot)
                scale = max(float(np.max(np.abs(v))), 1e-300)
                data[var.name] = v * (amplitude / scale) if np.any(v) else v
            else:
                data[var.name] = band_limited(sp, rng, 3, modes, amplitude)
        else:
            dens = band_limited(sp, rng, 1, modes, amplitude, 1.0)[0]
            f = maxwellian(grid, density=dens)
            p = grid.momenta()
            tilt = 1.0 + 0.1 * amplitude * np.tanh(p[0] * rng.normal() + p[1] * rng.normal())
            data[var.name] = f * tilt
    return State(schema, grid, data)


def check_positive(x, names=None):
    """Raise :class:`StateValidityError` if a positive variable is <= 0 somewhere."""
    for var in x.schema:
        if (names is None and var.positive) or (names is not None and var.name in names):
            if np.any(x[var.name] <= 0.0):
                raise StateValidityError(f"{var.name} must be > 0 everywhere (min {x[var.name].min():.3e})")


# --------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class Constants:
    """Physical constants; per-species ``m`` and ``z`` are tuples."""

    eps0: float = 1.0
    mu0: float = 1.0
    e: float = 1.0
    m: tuple = (1.0,)
    z: tuple = (1.0,)

    def __post_init__(self):
        m = tuple(float(v) for v in np.atleast_1d(self.m))
        z = tuple(float(v) for v in np.atleast_1d(self.z))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "z", z)
        if len(m) != len(z) or len(m) not in (1, 2):
            raise SchemaError(f"species count must be 1 or 2 with matching m, z; got {m}, {z}")
        vals = (self.eps0, self.mu0, self.e) + m + z
        if not all(v > 0.0 and math.isfinite(v) for v in vals):
            raise SchemaError(f"all constants must be finite and > 0, got {self}")

    @property
    def n_species(self):
        return len(self.m)

    @property
    def c2(self):
        return 1.0 / (self.eps0 * self.mu0)

    @property
    def c(self):
        return math.sqrt(self.c2)

    def charge(self, species=0):
        """``z e`` of one particle."""
        return self.z[species] * self.e

    def charge_per_mass(self, species=0):
        return self.z[species] * self.e / self.m[species]

    def species(self, k):
        return Constants(self.eps0, self.mu0, self.e, (self.m[k],), (self.z[k],))

    @classmethod
    def binary(cls, m=(1.0, 2.0), z=(1.0, 2.0), **kw):
        return cls(m=m, z=z, **kw)

    def as_dict(self):
        return {"eps0": self.eps0, "mu0": self.mu0, "e": self.e,
                "m": list(self.m), "z": list(self.z)}


# --------------------------------------------------------------------------
# snapshot files

MAGIC = b"HAMCOUPLE-SNAPSHOT 1\n"


def _grid_description(grid):
    sp = grid.spatial
    d = {"dims": list(sp.dims), "lengths": list(sp.lengths)}
    if isinstance(grid, PhaseGrid):
        d["pdims"] = list(grid.pdims)
        d["pmax"] = list(grid.pmax)
    return d


def _grid_from_description(d):
    sp = Grid3(tuple(d["dims"]), tuple(d["lengths"]))
    if "pdims" in d:
        return PhaseGrid(sp, tuple(d["pdims"]), tuple(d["pmax"]))
    return sp


def write_snapshot(path, x, meta=None):
    """Write ``x`` as a self-describing binary file.

    Layout: the magic line, the header byte length as decimal text plus a
    newline, a UTF-8 JSON header (schema, grid, shapes, meta), then every
    field as little-endian float64 in C order, in schema order.
    """
    header = {
        "schema": x.schema.describe(),
        "grid": _grid_description(x.grid),
        "shapes": {n: list(a.shape) for n, a in x.items()},
        "dtype": "<f8",
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(f"{len(blob)}\n".encode("ascii"))
        fh.write(blob)
        for _, a in x.items():
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def read_snapshot(path):
    """Inverse of :func:`write_snapshot`; returns ``(state, meta)``."""
    with open(path, "rb") as fh:
        if fh.readline() != MAGIC:
            raise SchemaError(f"{path} is not a snapshot file")
        n = int(fh.readline().decode("ascii"))
        header = json.loads(fh.read(n).decode("utf-8"))
        schema = StateSchema.from_description(header["schema"])
        grid = _grid_from_description(header["grid"])
        data = {}
        for var in schema:
            shape = tuple(header["shapes"][var.name])
            count = int(np.prod(shape))
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise SchemaError(f"truncated snapshot at field {var.name!r}")
            data[var.name] = np.frombuffer(raw, dtype="<f8").reshape(shape)
    return State(schema, grid, data), header.get("meta", {})

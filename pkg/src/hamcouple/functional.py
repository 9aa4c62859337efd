"""Functionals on states and their variational derivatives.

A variational derivative is stored as a :class:`~hamcouple.state.State`
with the schema of its argument: for ``F(x) = sum_i w_i g(x_i)`` the array
gradient ``dF/dx_i`` divided by the quadrature weight ``w_i`` is the density
``delta F / delta x`` at node ``i``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, SchemaError, StateValidityError
from .grid import PhaseGrid
from .state import State, band_limited


class Functional:
    """Scalar functional with an optional analytic variational derivative.

    Parameters
    ----------
    evaluate : callable(State) -> float
    derivative : callable(State) -> State, optional
        When missing, :func:`numeric_derivative` is used.
    name : str
    """

    def __init__(self, evaluate, derivative=None, name="F"):
        self._evaluate = evaluate
        self._derivative = derivative
        self.name = name

    def __call__(self, x):
        return float(self._evaluate(x))

    evaluate = __call__

    @property
    def has_analytic_derivative(self):
        return self._derivative is not None

    def derivative(self, x, h=None):
        if self._derivative is None:
            return numeric_derivative(self, x, h)
        return self._derivative(x)

    def __mul__(self, other):
        return product(self, other)

    def __repr__(self):
        return f"Functional({self.name})"


def product(F, G):
    """Pointwise real product ``F * G`` with derivative ``F dG + G dF``."""
    def ev(x):
        return F(x) * G(x)

    def der(x):
        return F.derivative(x) * G(x) + G.derivative(x) * F(x)

    return Functional(ev, der, name=f"({F.name})*({G.name})")


def numeric_derivative(F, x, h=None):
    """Central-difference variational derivative of ``F`` at ``x``.

    Each coefficient is perturbed by ``h_i = h * (1 + |x_i|)`` (``h`` defaults
    to 1e-5) and the array gradient is divided by that coefficient's
    quadrature weight.  This is the independent oracle for analytic
    derivatives.
    """
    h = 1e-5 if h is None else float(h)
    if not h > 0.0:
        raise ValueError(f"step must be > 0, got {h}")
    v0 = x.to_vector()
    w = x.weights_vector()
    grad = np.empty_like(v0)
    for i in range(v0.size):
        step = h * (1.0 + abs(v0[i]))
        vp = v0.copy()
        vm = v0.copy()
        vp[i] += step
        vm[i] -= step
        fp = F(State.from_vector(x.schema, x.grid, vp))
        fm = F(State.from_vector(x.schema, x.grid, vm))
        grad[i] = (fp - fm) / (2.0 * step)
    if not np.all(np.isfinite(grad)):
        raise NumericalFailure(f"non-finite numeric derivative of {F.name}")
    return State.from_vector(x.schema, x.grid, grad / w)


def linearization_residual(F, x, v, eps=1e-5):
    """``|(F(x+eps v) - F(x-eps v)) / (2 eps) - <dF(x), v>|``."""
    fd = (F(v.axpy(eps, x)) - F(v.axpy(-eps, x))) / (2.0 * eps)
    return abs(fd - F.derivative(x).dot(v))


# --------------------------------------------------------------------------
# entropy density of the distribution function


@dataclass(frozen=True)
class EntropyDensity:
    """Smooth function ``sigma(f)`` and its derivative; default ``-f ln f``."""

    name: str = "boltzmann"

    def value(self, f):
        f = np.asarray(f, dtype=float)
        if np.any(f < 0.0):
            raise StateValidityError("entropy density needs f >= 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(f > 0.0, -f * np.log(np.where(f > 0.0, f, 1.0)), 0.0)
        return out

    def derivative(self, f):
        f = np.asarray(f, dtype=float)
        if np.any(f <= 0.0):
            raise StateValidityError("entropy derivative needs f > 0")
        return -(np.log(f) + 1.0)


BOLTZMANN_ENTROPY = EntropyDensity()


# --------------------------------------------------------------------------
# deterministic test functionals


def smooth_weight(grid, rng, kind, modes=1, mean=0.0, amplitude=1.0):
    """Band-limited weight field of the shape a variable of ``kind`` has."""
    sp = grid.spatial
    if kind == "scalar":
        return band_limited(sp, rng, 1, modes, amplitude, mean)[0]
    if kind == "vector":
        return band_limited(sp, rng, 3, modes, amplitude, mean)
    if not isinstance(grid, PhaseGrid):
        raise SchemaError("phase weight needs a PhaseGrid")
    space = band_limited(sp, rng, 1, modes, amplitude, mean)[0]
    p = grid.momenta()
    mom = np.ones(grid.pdims)
    for i in range(3):
        if grid.pdims[i] > 1:
            kp = np.pi / grid.pmax[i]
            mom = mom + rng.normal() * np.cos(kp * p[i, 0, 0, 0]) + rng.normal() * np.sin(kp * p[i, 0, 0, 0])
    return space[..., None, None, None] * mom / 3.0


def _weights(x_schema, grid, rng, modes, mean=0.0):
    return {v.name: smooth_weight(grid, rng, v.kind, modes, mean) for v in x_schema}


def linear_functional(weights, name="linear"):
    """``F(x) = sum_v <w_v, x_v>``; state-independent derivative."""
    def ev(x):
        return sum(x.schema.weight(n, x.grid) * float(np.sum(w * x[n])) for n, w in weights.items())

    def der(x):
        return State(x.schema, x.grid, {n: w for n, w in weights.items()})

    return Functional(ev, der, name)


def quadratic_functional(kernels, name="quadratic"):
    """``F(x) = 1/2 sum_v <x_v, k_v x_v>`` with pointwise kernels ``k_v``."""
    def ev(x):
        return sum(0.5 * x.schema.weight(n, x.grid) * float(np.sum(k * x[n] ** 2))
                   for n, k in kernels.items())

    def der(x):
        return State(x.schema, x.grid, {n: k * x[n] for n, k in kernels.items()})

    return Functional(ev, der, name)


def cubic_functional(weights, name="cubic"):
    """``F(x) = 1/3 sum_v <w_v, x_v^3>``."""
    def ev(x):
        return sum(x.schema.weight(n, x.grid) * float(np.sum(w * x[n] ** 3)) / 3.0
                   for n, w in weights.items())

    def der(x):
        return State(x.schema, x.grid, {n: w * x[n] ** 2 for n, w in weights.items()})

    return Functional(ev, der, name)


def _component(a, kind, comp):
    return a[comp] if kind == "vector" else a


def coupling_functional(pairs, name="coupling"):
    """``F(x) = sum <w, x_a[i] x_b[j]>`` over ``(a, i, b, j, w)`` entries.

    Spatial weights only; phase variables are not coupled this way.
    """
    def ev(x):
        total = 0.0
        for a, i, b, j, w in pairs:
            ka, kb = x.schema[a].kind, x.schema[b].kind
            total += x.grid.spatial.quad_weight * float(
                np.sum(w * _component(x[a], ka, i) * _component(x[b], kb, j)))
        return total

    def der(x):
        out = {n: np.zeros(x.schema.field_shape(n, x.grid)) for n in x.schema.names}
        for a, i, b, j, w in pairs:
            ka, kb = x.schema[a].kind, x.schema[b].kind
            xa, xb = _component(x[a], ka, i), _component(x[b], kb, j)
            if ka == "vector":
                out[a][i] += w * xb
            else:
                out[a] += w * xb
            if kb == "vector":
                out[b][j] += w * xa
            else:
                out[b] += w * xa
        return State(x.schema, x.grid, out)

    return Functional(ev, der, name)


def test_functional_suite(schema, grid, seed=0, modes=1):
    """Deterministic list of five functionals with analytic derivatives.

    Two linear, one quadratic, one bilinear coupling between consecutive
    spatial variables, one cubic.  Weights are band-limited with wavenumbers
    up to ``modes``.
    """
    rng = np.random.default_rng(seed)
    suite = [
        linear_functional(_weights(schema, grid, rng, modes), "linear-a"),
        linear_functional(_weights(schema, grid, rng, modes), "linear-b"),
        quadratic_functional(_weights(schema, grid, rng, modes, mean=1.0), "quadratic"),
    ]
    spatial = [v for v in schema if v.kind != "phase"]
    pairs = []
    for a, b in zip(spatial, spatial[1:] + spatial[:1]):
        if a.name == b.name:
            continue
        i = int(rng.integers(3)) if a.kind == "vector" else 0
        j = int(rng.integers(3)) if b.kind == "vector" else 0
        pairs.append((a.name, i, b.name, j, smooth_weight(grid, rng, "scalar", modes)))
    if pairs:
        suite.append(coupling_functional(pairs, "coupling"))
    else:
        suite.append(quadratic_functional(_weights(schema, grid, rng, modes), "quadratic-b"))
    suite.append(cubic_functional(_weights(schema, grid, rng, modes), "cubic"))
    return suite


test_functional_suite.__test__ = False

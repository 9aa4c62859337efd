"""Periodic spatial and phase-space lattices with spectral calculus.

Every derivative is a Fourier multiplier ``i k`` with the Nyquist mode
removed, so the discrete operator is real and exactly skew-adjoint under
the rectangle-rule pairing.  That makes discrete integration by parts hold
to rounding, which is what the bracket antisymmetry tests lean on.

Array layout
------------
spatial scalar   ``(n1, n2, n3)``
spatial vector   ``(3, n1, n2, n3)``
phase density    ``(n1, n2, n3, q1, q2, q3)``

Derivatives always act on the trailing grid axes, so leading component
axes broadcast through.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SchemaError

SPATIAL_AXES = ("r1", "r2", "r3")
MOMENTUM_AXES = ("p1", "p2", "p3")


@lru_cache(maxsize=None)
def _multiplier(n, length):
    """rfft-space ``i k`` for ``n`` points on a period ``length``."""
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    if n % 2 == 0:
        k[-1] = 0.0
    out = 1j * k
    out.flags.writeable = False
    return out


def spectral_diff(a, axis, n, length):
    """Periodic spectral derivative of ``a`` along array axis ``axis``."""
    if n == 1:
        return np.zeros_like(a, dtype=float)
    mult = _multiplier(n, float(length))
    shape = [1] * a.ndim
    shape[axis] = mult.size
    ah = np.fft.rfft(a, axis=axis)
    ah *= mult.reshape(shape)
    return np.fft.irfft(ah, n=n, axis=axis)


def _as_triple(values, cast, name):
    values = tuple(cast(v) for v in values)
    if len(values) != 3:
        raise SchemaError(f"{name} needs 3 entries, got {len(values)}")
    return values


@dataclass(frozen=True)
class Grid3:
    """Periodic box ``[0, L1) x [0, L2) x [0, L3)`` with ``dims`` points per axis."""

    dims: tuple
    lengths: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        dims = _as_triple(self.dims, int, "dims")
        lengths = _as_triple(self.lengths, float, "lengths")
        if min(dims) < 1:
            raise SchemaError(f"dims must be >= 1, got {dims}")
        if min(lengths) <= 0.0:
            raise SchemaError(f"lengths must be > 0, got {lengths}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lengths", lengths)

    @property
    def shape(self):
        return self.dims

    @property
    def size(self):
        return int(np.prod(self.dims))

    @property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.lengths, self.dims))

    @property
    def quad_weight(self):
        return float(np.prod(self.spacing))

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    @property
    def spatial(self):
        return self

    def coords(self):
        """Node coordinates as an array of shape ``(3, n1, n2, n3)``."""
        axes = [np.arange(n) * h for n, h in zip(self.dims, self.spacing)]
        return np.array(np.meshgrid(*axes, indexing="ij"))

    def _axis(self, axis):
        if axis in SPATIAL_AXES:
            return SPATIAL_AXES.index(axis)
        if isinstance(axis, (int, np.integer)) and 0 <= axis < 3:
            return int(axis)
        raise SchemaError(f"axis {axis!r} is not a spatial axis")

    def derivative(self, a, axis):
        i = self._axis(axis)
        if a.ndim < 3 or a.shape[-3:] != self.dims:
            raise SchemaError(f"field of shape {a.shape} is not on grid {self.dims}")
        return spectral_diff(a, a.ndim - 3 + i, self.dims[i], self.lengths[i])

    def grad(self, s):
        return np.stack([self.derivative(s, i) for i in range(3)])

    def div(self, v):
        _check_vector(v, self)
        return sum(self.derivative(v[i], i) for i in range(3))

    def curl(self, v):
        _check_vector(v, self)
        d = self.derivative
        return np.stack([d(v[2], 1) - d(v[1], 2),
                         d(v[0], 2) - d(v[2], 0),
                         d(v[1], 0) - d(v[0], 1)])

    def integrate(self, a):
        """Rectangle rule over the three trailing axes."""
        if a.shape[-3:] != self.dims:
            raise SchemaError(f"field of shape {a.shape} is not on grid {self.dims}")
        return np.sum(a, axis=(-3, -2, -1)) * self.quad_weight


def _check_vector(v, grid):
    if v.shape != (3,) + grid.dims:
        raise SchemaError(f"expected vector field of shape {(3,) + grid.dims}, got {v.shape}")


@dataclass(frozen=True)
class PhaseGrid:
    """Spatial grid times a momentum box ``[-pmax, pmax)`` per axis.

    The momentum box is treated as periodic for differentiation.  That is only
    faithful when densities are negligible on the outer momentum shell; see
    :meth:`boundary_mass`.
    """

    spatial: Grid3
    pdims: tuple
    pmax: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not isinstance(self.spatial, Grid3):
            raise SchemaError("PhaseGrid.spatial must be a Grid3")
        pdims = _as_triple(self.pdims, int, "pdims")
        pmax = _as_triple(self.pmax, float, "pmax")
        if min(pdims) < 1:
            raise SchemaError(f"pdims must be >= 1, got {pdims}")
        if min(pmax) <= 0.0:
            raise SchemaError(f"pmax must be > 0, got {pmax}")
        object.__setattr__(self, "pdims", pdims)
        object.__setattr__(self, "pmax", pmax)

    @property
    def dims(self):
        return self.spatial.dims

    @property
    def shape(self):
        return self.spatial.dims + self.pdims

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def pspacing(self):
        return tuple(2.0 * P / q for P, q in zip(self.pmax, self.pdims))

    @property
    def momentum_weight(self):
        return float(np.prod(self.pspacing))

    @property
    def quad_weight(self):
        return self.spatial.quad_weight * self.momentum_weight

    def momenta(self):
        """Momentum node values, shape ``(3, 1, 1, 1, q1, q2, q3)`` for broadcasting.

        A collapsed momentum axis (one point) sits at p = 0.
        """
        axes = [-P + np.arange(q) * h if q > 1 else np.zeros(1)
                for P, q, h in zip(self.pmax, self.pdims, self.pspacing)]
        p = np.array(np.meshgrid(*axes, indexing="ij"))
        return p.reshape((3, 1, 1, 1) + self.pdims)

    def derivative(self, a, axis):
        if a.ndim < 6 or a.shape[-6:] != self.shape:
            raise SchemaError(f"field of shape {a.shape} is not on phase grid {self.shape}")
        if axis in SPATIAL_AXES:
            i = SPATIAL_AXES.index(axis)
            return spectral_diff(a, a.ndim - 6 + i, self.dims[i], self.spatial.lengths[i])
        if axis in MOMENTUM_AXES:
            i = MOMENTUM_AXES.index(axis)
            return spectral_diff(a, a.ndim - 3 + i, self.pdims[i], 2.0 * self.pmax[i])
        raise SchemaError(f"unknown axis {axis!r}")

    def grad_r(self, f):
        return np.stack([self.derivative(f, ax) for ax in SPATIAL_AXES])

    def grad_p(self, f):
        return np.stack([self.derivative(f, ax) for ax in MOMENTUM_AXES])

    def p_integrate(self, a):
        """``int dp`` over the three trailing momentum axes (spatial field out)."""
        if a.shape[-6:] != self.shape:
            raise SchemaError(f"field of shape {a.shape} is not on phase grid {self.shape}")
        return np.sum(a, axis=(-3, -2, -1)) * self.momentum_weight

    def integrate(self, a):
        return self.spatial.integrate(self.p_integrate(a))

    def boundary_mass(self, f):
        """Max ``|f|`` over the outermost momentum shell (truncation diagnostic)."""
        f = np.abs(np.asarray(f))
        shell = 0.0
        for i, q in enumerate(self.pdims):
            if q < 2:
                continue
            ax = f.ndim - 3 + i
            shell = max(shell, float(np.take(f, [0, q - 1], axis=ax).max()))
        return shell


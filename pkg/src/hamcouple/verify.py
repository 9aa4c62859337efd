"""Structural checks on brackets: antisymmetry, Leibniz, Jacobi, Casimirs, energy.

Jacobi is evaluated through the directional-derivative form of the cyclic
sum: for covector densities ``a, b, c`` and ``{A, B}(x) = <a, L(x) b>``,

    J = sum_cyc d/dt <a, L(x + t L(x) c) b>.

Every catalog bivector is at most quadratic in the state, so a central
difference is exact up to rounding for any step.  With band-limited data on
grids that resolve the triple products, discrete ``J`` is rounding-level for
a genuine Poisson bivector.
"""
from dataclasses import dataclass

import numpy as np

from . import brackets as br
from .functional import Functional, product, smooth_weight, test_functional_suite
from .grid import Grid3, PhaseGrid
from .state import Constants, State, random_state


@dataclass
class CheckResult:
    check: str
    residual: float
    tol: float
    note: str = ""
    informational: bool = False
    ok: bool = None

    @property
    def passed(self):
        if self.ok is not None:
            return bool(self.ok)
        return self.informational or bool(self.residual <= self.tol)

    @property
    def verdict(self):
        if self.informational and self.ok is None:
            return "INFO"
        return "PASS" if self.passed else "FAIL"

    def row(self):
        return f"{self.check:<28s} {self.residual:11.3e} {self.tol:9.0e}  {self.verdict}  {self.note}".rstrip()


def format_table(results):
    head = f"{'check':<28s} {'residual':>11s} {'tol':>9s}  verdict"
    return "\n".join([head, "-" * len(head)] + [r.row() for r in results])


# --------------------------------------------------------------------------
# grids and data


def default_constants(bracket):
    if bracket.species == 2:
        return Constants.binary()
    return Constants()


def grid_for(bracket, n=6, pn=None, pmax=1.0):
    """``(n, n, 1)`` spatial grid; phase brackets add a ``(pn, pn, 1)`` momentum box."""
    sp = Grid3((n, n, 1))
    if bracket.schema.has_phase:
        pn = n if pn is None else pn
        return PhaseGrid(sp, (pn, pn, 1), (pmax, pmax, pmax))
    return sp


def band_limited_state(schema, grid, seed=0, amplitude=0.3, solenoidal=True):
    """Random state whose every field is band-limited with modes <= 1.

    Phase densities use momentum modes of period ``2 pmax`` as well, unlike
    :func:`~hamcouple.state.random_state` which draws Maxwellians.
    """
    x = random_state(schema, grid, seed, amplitude)
    if not schema.has_phase:
        return x
    rng = np.random.default_rng(seed + 7919)
    fields = dict(x.items())
    for v in schema:
        if v.kind == "phase":
            fields[v.name] = 1.0 + amplitude * smooth_weight(grid, rng, "phase")
    return State(schema, grid, fields)


def band_limited_covector(schema, grid, rng):
    return State(schema, grid, {v.name: smooth_weight(grid, rng, v.kind) for v in schema})


def smooth_covector(schema, grid, rng):
    """Smooth covector with an infinite Fourier tail (``exp`` of a trig sum)."""
    out = {}
    for v in schema:
        base = smooth_weight(grid, rng, v.kind)
        out[v.name] = np.exp(0.8 * base) - 1.0
    return State(schema, grid, out)


# --------------------------------------------------------------------------
# individual checks


def antisymmetry_residual(bracket, x, F, H, constants=None):
    """``|{F,H} + {H,F}| / (1 + |{F,H}|)``."""
    dF, dH = F.derivative(x), H.derivative(x)
    fh = dF.dot(bracket.apply(x, dH, constants))
    hf = dH.dot(bracket.apply(x, dF, constants))
    return abs(fh + hf) / (1.0 + abs(fh))


def leibniz_residual(bracket, x, F, G, H, constants=None):
    """``|{FG, H} - F{G,H} - G{F,H}| / (1 + scale)``."""
    dH = H.derivative(x)
    xd = bracket.apply(x, dH, constants)
    fg = product(F, G).derivative(x).dot(xd)
    f, g = F(x), G(x)
    gh = G.derivative(x).dot(xd)
    fh = F.derivative(x).dot(xd)
    return abs(fg - f * gh - g * fh) / (1.0 + abs(f * gh) + abs(g * fh))


def energy_residual(bracket, x, H, constants=None):
    """``|<dH, L dH>| / (1 + |dH|^2 |L dH| scale)``."""
    dH = H.derivative(x)
    xd = bracket.apply(x, dH, constants)
    return abs(dH.dot(xd)) / (1.0 + dH.norm() * xd.norm())


def jacobi_residual(bracket, x, a, b, c, constants=None):
    """Cyclic sum for linear functionals with densities ``a, b, c``.

    Returns ``(|J|, scale)`` where ``scale`` is the sum of the absolute cyclic
    terms.  Positivity checks are off: the bivector is an algebraic object
    here and the probe states may leave the physical domain.
    """
    total, scale = 0.0, 0.0
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        v = bracket.apply(x, r, constants, check=False)
        h = max(x.max_abs(), 1.0) / max(v.max_abs(), 1e-300)
        plus = p.dot(bracket.apply(v.axpy(h, x), q, constants, check=False))
        minus = p.dot(bracket.apply(v.axpy(-h, x), q, constants, check=False))
        d = (plus - minus) / (2.0 * h)
        total += d
        scale += abs(d)
    return abs(total), scale


def jacobi_dense(bracket, x, a, b, c, constants=None):
    """Same cyclic sum on the assembled matrix ``K(x)`` (coordinate gradients).

    ``a, b, c`` are covector densities; the coordinate gradients are
    ``w * a`` etc.  Independent of :func:`jacobi_residual` up to the shared
    kernel: uses only matrix products of densely assembled bivectors.
    """
    w = x.weights_vector()
    A, B, C = (w * s.to_vector() for s in (a, b, c))
    K = br.dense_bivector(bracket, x, constants, check=False)
    x0 = x.to_vector()
    total, scale = 0.0, 0.0
    for p, q, r in ((A, B, C), (B, C, A), (C, A, B)):
        v = K @ r
        h = max(np.max(np.abs(x0)), 1.0) / max(np.max(np.abs(v)), 1e-300)
        Kp = br.dense_bivector(bracket, State.from_vector(x.schema, x.grid, x0 + h * v), constants, check=False)
        Km = br.dense_bivector(bracket, State.from_vector(x.schema, x.grid, x0 - h * v), constants, check=False)
        d = p @ ((Kp - Km) @ q) / (2.0 * h)
        total += d
        scale += abs(d)
    return abs(total), scale


def dense_antisymmetry(bracket, x, constants=None):
    """``max |K + K^T| / max |K|`` of the assembled bivector."""
    K = br.dense_bivector(bracket, x, constants)
    top = float(np.max(np.abs(K)))
    return float(np.max(np.abs(K + K.T))) / top if top > 0 else 0.0


def gauss_surface_state(x, constants=None):
    """Replace ``rho`` so the fluid Gauss law holds exactly (sign of rho unconstrained)."""
    const = constants or Constants()
    rho = const.eps0 * x.grid.spatial.div(x["E"]) / const.charge_per_mass(0)
    return x.replace(rho=rho)


# --------------------------------------------------------------------------
# Casimirs


def power_functional(var, k):
    """``int x_var^k``."""
    def ev(x):
        return float(np.sum(x[var] ** k) * x.schema.weight(var, x.grid))

    def der(x):
        return State(x.schema, x.grid, {var: k * x[var] ** (k - 1)})

    return Functional(ev, der, f"int {var}^{k}")


def component_integral(var, comp):
    def ev(x):
        return float(np.sum(x[var][comp]) * x.schema.weight(var, x.grid))

    def der(x):
        d = np.zeros(x.schema.field_shape(var, x.grid))
        d[comp] = 1.0
        return State(x.schema, x.grid, {var: d})

    return Functional(ev, der, f"int {var}[{comp}]")


def catalog_casimirs(bracket):
    """Known Casimir functionals for a catalog bracket."""
    names = bracket.schema.names
    if bracket.name == "vlasov":
        return [power_functional("f", k) for k in (1, 2, 3)]
    if bracket.name in ("ked", "ked_binary"):
        return [power_functional(v.name, 1) for v in bracket.schema if v.kind == "phase"]
    if bracket.name == "em":
        return [component_integral(v, i) for v in ("E", "B") for i in range(3)]
    if bracket.name == "em_canonical":
        return []
    return [power_functional(n, 1) for n in names if n.startswith(("rho", "s"))]


def casimir_residuals(bracket, x, casimirs, hamiltonians, constants=None):
    """``max |{C, H}| / (1 + |dC| |L dH|)`` over the given pairs."""
    worst = 0.0
    for H in hamiltonians:
        xd = bracket.apply(x, H.derivative(x), constants)
        for C in casimirs:
            dC = C.derivative(x)
            worst = max(worst, abs(dC.dot(xd)) / (1.0 + dC.norm() * xd.norm()))
    return worst


# --------------------------------------------------------------------------
# suites


CONSTRAINT_DEPENDENT_JACOBI = {"ehd": "Gauss residual"}
DENSE_LIMIT = 400


def verify_bracket(bracket, n=6, seed=0, constants=None, states=3, refinement=False):
    """Run the standard suite on one bracket; returns a list of :class:`CheckResult`."""
    if isinstance(bracket, str):
        bracket = br.get_bracket(bracket)
    const = constants or default_constants(bracket)
    grid = grid_for(bracket, n)
    xs = [random_state(bracket.schema, grid, seed + k) for k in range(states)]
    suite = test_functional_suite(bracket.schema, grid, seed)
    results = []

    anti = max(antisymmetry_residual(bracket, x, F, H, const)
               for x in xs for i, F in enumerate(suite) for H in suite[i + 1:])
    results.append(CheckResult("antisymmetry", anti, 1e-10))
    leib = max(leibniz_residual(bracket, x, suite[0], suite[2], suite[4], const) for x in xs)
    results.append(CheckResult("leibniz", leib, 1e-10))
    energy = max(energy_residual(bracket, x, H, const) for x in xs for H in suite)
    results.append(CheckResult("energy <dH, L dH>", energy, 1e-12))

    # Jacobi on band-limited data
    rng = np.random.default_rng(seed + 101)
    tol = 1e-11 if bracket.constant else 1e-8
    jac = 0.0
    dense = random_state(bracket.schema, grid).to_vector().size <= DENSE_LIMIT
    note = "dense oracle" if dense else "directional"
    for k in range(states):
        x = band_limited_state(bracket.schema, grid, seed + k)
        if bracket.name in CONSTRAINT_DEPENDENT_JACOBI:
            x = gauss_surface_state(x, const)
        a, b, c = (band_limited_covector(bracket.schema, grid, rng) for _ in range(3))
        if dense:
            r, s = jacobi_dense(bracket, x, a, b, c, const)
        else:
            r, s = jacobi_residual(bracket, x, a, b, c, const)
        jac = max(jac, r / max(1.0, s))
    if bracket.name in CONSTRAINT_DEPENDENT_JACOBI:
        note += f"; on {CONSTRAINT_DEPENDENT_JACOBI[bracket.name]} = 0 surface"
    results.append(CheckResult("jacobi", jac, tol, note))
    if bracket.name in CONSTRAINT_DEPENDENT_JACOBI:
        x = band_limited_state(bracket.schema, grid, seed)
        a, b, c = (band_limited_covector(bracket.schema, grid, rng) for _ in range(3))
        r, s = jacobi_residual(bracket, x, a, b, c, const)
        results.append(CheckResult("jacobi off constraint", r / max(1.0, s), float("nan"),
                                   "scales with the Gauss residual", informational=True))

    cas = catalog_casimirs(bracket)
    if cas:
        cgrid = grid_for(bracket, max(n, 8))
        cx = [band_limited_state(bracket.schema, cgrid, seed + k) for k in range(states)]
        csuite = test_functional_suite(bracket.schema, cgrid, seed)
        worst = max(casimir_residuals(bracket, x, cas, csuite, const) for x in cx)
        results.append(CheckResult("casimirs", worst, 1e-10, ", ".join(C.name for C in cas)))

    if refinement:
        study = jacobi_refinement(bracket, seed=seed, constants=const)
        ok = all(b <= a * (1 + 1e-6) or b < 1e-12 for a, b in zip(study[1::2], study[3::2]))
        results.append(CheckResult("jacobi refinement", study[-1], float("nan"),
                                   ("non-increasing " if ok else "increasing ") +
                                   " ".join(f"N={int(m)}:{r:.1e}" for m, r in zip(study[::2], study[1::2])),
                                   informational=True, ok=ok))
    return results


def jacobi_refinement(bracket, sizes=(4, 6, 8, 12, 16), seed=0, constants=None):
    """Jacobi residuals for non-band-limited smooth covectors as the grid refines.

    Returns a flat list ``[N0, r0, N1, r1, ...]`` with relative residuals.
    """
    const = constants or default_constants(bracket)
    out = []
    for n in sizes:
        grid = grid_for(bracket, n)
        rng = np.random.default_rng(seed + 11)
        x = band_limited_state(bracket.schema, grid, seed)
        if bracket.name in CONSTRAINT_DEPENDENT_JACOBI:
            x = gauss_surface_state(x, const)
        a, b, c = (smooth_covector(bracket.schema, grid, rng) for _ in range(3))
        r, s = jacobi_residual(bracket, x, a, b, c, const)
        out += [n, r / max(1.0, s)]
    return out

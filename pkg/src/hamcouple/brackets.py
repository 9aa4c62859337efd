"""Field Poisson brackets as bivector applications.

Each :class:`Bracket` maps a state ``x`` and a covector ``c = dH`` to the
tangent vector ``xdot = L(x) c``; the bracket value is
``{F, H}(x) = <dF, L(x) dH>``.  Kernels are written so that every term has
its exact discrete partner: derivatives act on state fields and on ``c``,
and the spectral derivative is skew under the quadrature pairing, so
antisymmetry holds to rounding.

Notation in kernel comments: ``b`` is the momentum component of ``c``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError, StateValidityError
from .grid import MOMENTUM_AXES, PhaseGrid
from .state import Constants, State, StateSchema, Var

# --------------------------------------------------------------------------
# small field calculus helpers (all on a Grid3)


def _d(g, a, i):
    return g.derivative(a, i)


def _div(g, v):
    return _d(g, v[0], 0) + _d(g, v[1], 1) + _d(g, v[2], 2)


def _grad(g, s):
    return np.stack([_d(g, s, i) for i in range(3)])


def _curl(g, v):
    return np.stack([_d(g, v[2], 1) - _d(g, v[1], 2),
                     _d(g, v[0], 2) - _d(g, v[2], 0),
                     _d(g, v[1], 0) - _d(g, v[0], 1)])


def _cross(a, b):
    return np.stack([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def _to_phase(a):
    """Broadcast a spatial array over the three momentum axes."""
    return a[..., None, None, None]


# --------------------------------------------------------------------------


class _Out(dict):
    """Accumulator for tangent components."""

    def add(self, name, value):
        if name in self:
            self[name] = self[name] + value
        else:
            self[name] = value


@dataclass
class Bracket:
    """A Poisson bivector ``L(x)`` given by its action on covectors.

    Parameters
    ----------
    name : str
    schema : StateSchema
    kernel : callable(grid, constants, x: dict, c: dict, out: _Out)
        Accumulates tangent components into ``out``.
    constraints : dict name -> callable(grid, constants, x: dict) -> array
        Residual fields preserved by the flow.
    species : int
        Number of species the constants must provide (binary brackets: 2).
    positive : tuple of str
        Variables that must be > 0 for the bracket to be applied.
    constant : bool
        True when ``L`` does not depend on the state.
    """

    name: str
    schema: StateSchema
    kernel: object
    constraints: dict = field(default_factory=dict)
    species: int = 1
    positive: tuple = ()
    constant: bool = False
    description: str = ""

    @property
    def needs_phase_grid(self):
        return self.schema.has_phase

    def check_constants(self, constants):
        constants = constants or Constants()
        if self.species == 2 and constants.n_species != 2:
            raise SchemaError(f"{self.name} needs 2 species, constants carry {constants.n_species}")
        return constants

    def _check_state(self, x, what="state"):
        if x.schema != self.schema:
            raise SchemaError(f"{self.name}: {what} schema {x.schema.names} "
                              f"does not match {self.schema.names}")

    def apply(self, x, dH, constants=None, check=True):
        """Tangent vector ``L(x) dH`` as a :class:`State`."""
        constants = self.check_constants(constants)
        self._check_state(x)
        self._check_state(dH, "covector")
        if dH.grid != x.grid:
            raise SchemaError("state and covector live on different grids")
        if check:
            for name in self.positive:
                if np.any(x[name] <= 0.0):
                    raise StateValidityError(f"{self.name}: {name} must be > 0 everywhere")
        out = _Out()
        self.kernel(x.grid, constants, dict(x.items()), dict(dH.items()), out)
        return State(self.schema, x.grid, out)

    def value(self, x, dF, dH, constants=None):
        """``{F, H}(x) = <dF, L(x) dH>``."""
        return dF.dot(self.apply(x, dH, constants))

    def poisson(self, F, H, x, constants=None):
        return self.value(x, F.derivative(x), H.derivative(x), constants)

    def constraint_residuals(self, x, constants=None):
        constants = self.check_constants(constants)
        self._check_state(x)
        xf = dict(x.items())
        return {n: fn(x.grid, constants, xf) for n, fn in self.constraints.items()}

    def __repr__(self):
        return f"Bracket({self.name}: {', '.join(self.schema.names)})"


# --------------------------------------------------------------------------
# kernel building blocks


def _momentum_lie_poisson(g, M, b, mname, out):
    """Lie-Poisson part of the vector-field algebra.

    ``Mdot_j = -D_i(M_j b_i) - M_i D_j b_i``, i.e. ``<M, (b.D)a - (a.D)b>``.
    """
    rows = []
    for j in range(3):
        rows.append(-(_d(g, M[j] * b[0], 0) + _d(g, M[j] * b[1], 1) + _d(g, M[j] * b[2], 2))
                    - (M[0] * _d(g, b[0], j) + M[1] * _d(g, b[1], j) + M[2] * _d(g, b[2], j)))
    out.add(mname, np.stack(rows))


def _advected_scalar(g, alpha, c_alpha, b, aname, mname, out):
    """Scalar density carried by the flow.

    ``alphadot = -D.(alpha b)`` and ``Mdot = -alpha D c_alpha``.
    """
    out.add(aname, -_div(g, alpha * b))
    out.add(mname, -alpha * _grad(g, c_alpha))


def _hydro_kernel(mom, scalars):
    def kernel(grid, const, x, c, out):
        g = grid.spatial
        b = c[mom]
        _momentum_lie_poisson(g, x[mom], b, mom, out)
        for name in scalars:
            _advected_scalar(g, x[name], c[name], b, name, mom, out)
    return kernel


def _em_kernel(ename="E", bname="B"):
    def kernel(grid, const, x, c, out):
        g = grid.spatial
        out.add(ename, _curl(g, c[bname]) / const.eps0)
        out.add(bname, -_curl(g, c[ename]) / const.eps0)
    return kernel


def _em_canonical_kernel(grid, const, x, c, out):
    out.add("A", c["Y"] / const.eps0)
    out.add("Y", -c["A"] / const.eps0)


def _vlasov_kernel(fname):
    """``fdot = -D_r.(f D_p c) + D_p.(f D_r c)``."""
    def kernel(grid, const, x, c, out):
        f, cf = x[fname], c[fname]
        acc = 0.0
        for i in range(3):
            ri, pi = f"r{i + 1}", f"p{i + 1}"
            acc = acc - grid.derivative(f * grid.derivative(cf, pi), ri)
            acc = acc + grid.derivative(f * grid.derivative(cf, ri), pi)
        out.add(fname, acc)
    return kernel


def _ked_coupling(fname, species):
    """Electric exchange and magnetic rotation terms for one kinetic species.

    ``fdot += -(ze/eps0) D_p f . c_E - ze D_p.[f (D_p c_f x B)]``,
    ``Edot += (ze/eps0) int dp (D_p f) c_f``.
    """
    def kernel(grid, const, x, c, out):
        ze = const.charge(species)
        f, cf = x[fname], c[fname]
        grad_f = [grid.derivative(f, ax) for ax in MOMENTUM_AXES]
        grad_c = [grid.derivative(cf, ax) for ax in MOMENTUM_AXES]
        cE = c["E"]
        B = [_to_phase(x["B"][i]) for i in range(3)]
        fdot = -(ze / const.eps0) * sum(grad_f[i] * _to_phase(cE[i]) for i in range(3))
        rot = _cross(grad_c, B)
        fdot = fdot - ze * sum(grid.derivative(f * rot[i], MOMENTUM_AXES[i]) for i in range(3))
        out.add(fname, fdot)
        out.add("E", (ze / const.eps0) * np.stack([grid.p_integrate(grad_f[i] * cf) for i in range(3)]))
    return kernel


def _charge_coupling(mom, rho, species):
    """``<(q/eps0) rho, a_M . c_E - c_M . a_E>`` with ``q = ze/m``."""
    def kernel(grid, const, x, c, out):
        q = const.charge_per_mass(species) / const.eps0
        out.add(mom, q * x[rho] * c["E"])
        out.add("E", -q * x[rho] * c[mom])
    return kernel


def _lorentz(mom, rho, species):
    """``<(ze/m) rho B, a_M x c_M>``, so ``Mdot += (ze/m) rho c_M x B``."""
    def kernel(grid, const, x, c, out):
        q = const.charge_per_mass(species)
        out.add(mom, q * x[rho] * _cross(c[mom], x["B"]))
    return kernel


def _field_transport(mom, vname):
    """Transport of a vector field by the momentum covector.

    ``Vdot += curl(c_M x V)`` and ``Mdot += -V x curl(c_V)``; this is the
    pair of displayed integrals ``<V, (b.D)a_V - (a.D)b_V>`` and
    ``<a_M, (V.D) b_V> - <b_M, (V.D) a_V>`` after exact regrouping.
    """
    def kernel(grid, const, x, c, out):
        g = grid.spatial
        V = x[vname]
        out.add(vname, _curl(g, _cross(c[mom], V)))
        out.add(mom, -_cross(V, _curl(g, c[vname])))
    return kernel


def _constraint_residual_coupling(mom, rho, species):
    """Makes the total-momentum bracket the exact image of the velocity one.

    ``<a_M x c_M, W>`` with ``W = G B - eps0 (div B) E`` and Gauss residual
    ``G = eps0 div E - (ze/m) rho``.  Vanishes on the constraint surface.
    """
    def kernel(grid, const, x, c, out):
        g = grid.spatial
        G = const.eps0 * _div(g, x["E"]) - const.charge_per_mass(species) * x[rho]
        W = G * x["B"] - const.eps0 * _div(g, x["B"]) * x["E"]
        out.add(mom, _cross(c[mom], W))
    return kernel


def _combine(*kernels):
    def kernel(grid, const, x, c, out):
        for k in kernels:
            k(grid, const, x, c, out)
    return kernel


# --------------------------------------------------------------------------
# constraints


def _div_b(grid, const, x):
    return _div(grid.spatial, x["B"])


def _div_e(grid, const, x):
    return _div(grid.spatial, x["E"])


def _gauss_fluid(rhos):
    def fn(grid, const, x):
        charge = sum(const.charge_per_mass(k) * x[r] for k, r in rhos)
        return _div(grid.spatial, x["E"]) - charge / const.eps0
    return fn


def _gauss_kinetic(fs):
    def fn(grid, const, x):
        charge = sum(const.charge(k) * grid.p_integrate(x[f]) for k, f in fs)
        return _div(grid.spatial, x["E"]) - charge / const.eps0
    return fn


# --------------------------------------------------------------------------
# variables


def _rho(name="rho"):
    return Var(name, "scalar", 1, positive=True)


def _s(name="s"):
    return Var(name, "scalar", 1, positive=True)


def _mom(name):
    return Var(name, "vector", -1)


E_VAR = Var("E", "vector", 1)
B_VAR = Var("B", "vector", -1, solenoidal=True)


# --------------------------------------------------------------------------
# catalog


def em_canonical():
    """Canonical field bracket on vector potential ``A`` and momentum ``Y``."""
    schema = StateSchema([Var("A", "vector"), Var("Y", "vector")])
    return Bracket("em_canonical", schema, _em_canonical_kernel, constant=True,
                   description="(1/eps0) int F_A.H_Y - H_A.F_Y")


def em():
    schema = StateSchema([E_VAR, B_VAR])
    return Bracket("em", schema, _em_kernel(), {"div_B": _div_b, "div_E": _div_e}, constant=True,
                   description="Edot = curl(H_B)/eps0, Bdot = -curl(H_E)/eps0")


def vlasov(fname="f"):
    schema = StateSchema([Var(fname, "phase")])
    return Bracket("vlasov", schema, _vlasov_kernel(fname),
                   description="int f (D_r F_f . D_p H_f - D_r H_f . D_p F_f)")


def hydro(momentum="u"):
    """Fluid bracket in ``(momentum, rho, s)``; ``momentum`` is ``u`` or ``M``."""
    schema = StateSchema([_mom(momentum), _rho(), _s()])
    return Bracket("hydro", schema, _hydro_kernel(momentum, ("rho", "s")), positive=("rho",))


def hydro_binary():
    """Direct product of two fluid brackets, species suffixes 1 and 2."""
    b1 = rename(hydro(), {"u": "u1", "rho": "rho1", "s": "s1"})
    b2 = rename(hydro(), {"u": "u2", "rho": "rho2", "s": "s2"})
    b = direct_product(b1, b2, name="hydro_binary")
    order = ["u1", "u2", "rho1", "rho2", "s1", "s2"]
    return reorder(b, order)


def classical_binary():
    """One momentum, two densities, one entropy."""
    schema = StateSchema([_mom("u"), _rho("rho1"), _rho("rho2"), _s()])
    return Bracket("classical_binary", schema, _hydro_kernel("u", ("rho1", "rho2", "s")),
                   positive=("rho1", "rho2"))


def ked():
    schema = StateSchema([Var("f", "phase"), E_VAR, B_VAR])
    kernel = _combine(_vlasov_kernel("f"), _em_kernel(), _ked_coupling("f", 0))
    return Bracket("ked", schema, kernel,
                   {"div_B": _div_b, "gauss": _gauss_kinetic([(0, "f")])})


def ked_binary():
    schema = StateSchema([Var("f1", "phase"), Var("f2", "phase"), E_VAR, B_VAR])
    kernel = _combine(_vlasov_kernel("f1"), _vlasov_kernel("f2"), _em_kernel(),
                      _ked_coupling("f1", 0), _ked_coupling("f2", 1))
    return Bracket("ked_binary", schema, kernel,
                   {"div_B": _div_b, "gauss": _gauss_kinetic([(0, "f1"), (1, "f2")])}, species=2)


def emhd():
    """Velocity form ``(rho, u, s, E, B)``."""
    schema = StateSchema([_rho(), _mom("u"), _s(), E_VAR, B_VAR])
    kernel = _combine(_hydro_kernel("u", ("rho", "s")), _em_kernel(),
                      _charge_coupling("u", "rho", 0), _lorentz("u", "rho", 0))
    return Bracket("emhd", schema, kernel,
                   {"div_B": _div_b, "gauss": _gauss_fluid([(0, "rho")])}, positive=("rho",))


def emhd_total():
    """Total-momentum form ``(rho, M, s, E, B)`` with ``M = u + eps0 E x B``."""
    schema = StateSchema([_rho(), _mom("M"), _s(), E_VAR, B_VAR])
    kernel = _combine(_hydro_kernel("M", ("rho", "s")), _em_kernel(),
                      _field_transport("M", "E"), _charge_coupling("M", "rho", 0),
                      _field_transport("M", "B"), _constraint_residual_coupling("M", "rho", 0))
    return Bracket("emhd_total", schema, kernel,
                   {"div_B": _div_b, "gauss": _gauss_fluid([(0, "rho")])}, positive=("rho",))


def bemhd():
    schema = StateSchema([_rho("rho1"), _rho("rho2"), _mom("u1"), _mom("u2"),
                          _s("s1"), _s("s2"), E_VAR, B_VAR])
    kernel = _combine(_hydro_kernel("u1", ("rho1", "s1")), _hydro_kernel("u2", ("rho2", "s2")),
                      _em_kernel(),
                      _charge_coupling("u1", "rho1", 0), _charge_coupling("u2", "rho2", 1),
                      _lorentz("u1", "rho1", 0), _lorentz("u2", "rho2", 1))
    return Bracket("bemhd", schema, kernel,
                   {"div_B": _div_b, "gauss": _gauss_fluid([(0, "rho1"), (1, "rho2")])},
                   species=2, positive=("rho1", "rho2"))


def cbemhd():
    schema = StateSchema([_rho("rho1"), _rho("rho2"), _mom("u"), _s(), E_VAR, B_VAR])
    kernel = _combine(_hydro_kernel("u", ("rho1", "rho2", "s")), _em_kernel(),
                      _charge_coupling("u", "rho1", 0), _charge_coupling("u", "rho2", 1),
                      _lorentz("u", "rho1", 0), _lorentz("u", "rho2", 1))
    return Bracket("cbemhd", schema, kernel,
                   {"div_B": _div_b, "gauss": _gauss_fluid([(0, "rho1"), (1, "rho2")])},
                   species=2, positive=("rho1", "rho2"))


def mhd():
    schema = StateSchema([_rho(), _mom("M"), _s(), B_VAR])
    kernel = _combine(_hydro_kernel("M", ("rho", "s")), _field_transport("M", "B"))
    return Bracket("mhd", schema, kernel, {"div_B": _div_b}, positive=("rho",))


def ehd():
    schema = StateSchema([_rho(), _mom("M"), _s(), E_VAR])
    kernel = _combine(_hydro_kernel("M", ("rho", "s")), _field_transport("M", "E"),
                      _charge_coupling("M", "rho", 0))
    return Bracket("ehd", schema, kernel, {"gauss": _gauss_fluid([(0, "rho")])}, positive=("rho",))


CATALOG = {
    "em_canonical": em_canonical,
    "em": em,
    "vlasov": vlasov,
    "hydro": hydro,
    "hydro_binary": hydro_binary,
    "classical_binary": classical_binary,
    "ked": ked,
    "ked_binary": ked_binary,
    "emhd": emhd,
    "emhd_total": emhd_total,
    "bemhd": bemhd,
    "cbemhd": cbemhd,
    "mhd": mhd,
    "ehd": ehd,
}

BRACKET_NAMES = tuple(CATALOG)


def get_bracket(name):
    try:
        return CATALOG[name]()
    except KeyError:
        raise SchemaError(f"unknown bracket {name!r}; choose from {', '.join(BRACKET_NAMES)}") from None


# --------------------------------------------------------------------------
# combinators


def rename(bracket, mapping, name=None):
    """Same bivector with variables renamed by ``mapping`` (old -> new)."""
    inverse = {new: old for old, new in mapping.items()}
    unknown = set(mapping) - set(bracket.schema.names)
    if unknown:
        raise SchemaError(f"cannot rename unknown variables {sorted(unknown)}")
    schema = StateSchema([Var(mapping.get(v.name, v.name), v.kind, v.parity, v.positive, v.solenoidal)
                          for v in bracket.schema])

    def to_old(d):
        return {inverse.get(k, k): v for k, v in d.items()}

    def kernel(grid, const, x, c, out):
        inner = _Out()
        bracket.kernel(grid, const, to_old(x), to_old(c), inner)
        for k, v in inner.items():
            out.add(mapping.get(k, k), v)

    def wrap(fn):
        return lambda grid, const, x: fn(grid, const, to_old(x))

    return Bracket(name or bracket.name, schema, kernel,
                   {k: wrap(fn) for k, fn in bracket.constraints.items()},
                   bracket.species, tuple(mapping.get(p, p) for p in bracket.positive),
                   bracket.constant, bracket.description)


def reorder(bracket, order):
    """Same bracket with schema variables listed in ``order``."""
    if sorted(order) != sorted(bracket.schema.names):
        raise SchemaError(f"order {order} is not a permutation of {bracket.schema.names}")
    schema = StateSchema([bracket.schema[n] for n in order])
    return Bracket(bracket.name, schema, bracket.kernel, bracket.constraints, bracket.species,
                   bracket.positive, bracket.constant, bracket.description)


def direct_product(b1, b2, name=None):
    """Blockwise sum of two brackets on disjoint variables."""
    clash = set(b1.schema.names) & set(b2.schema.names)
    if clash:
        raise SchemaError(f"direct product needs disjoint variables; shared: {sorted(clash)}")
    schema = StateSchema(list(b1.schema) + list(b2.schema))
    constraints = dict(b1.constraints)
    for k, fn in b2.constraints.items():
        constraints[k if k not in constraints else f"{k}_2"] = fn
    return Bracket(name or f"{b1.name}x{b2.name}", schema, _combine(b1.kernel, b2.kernel),
                   constraints, max(b1.species, b2.species), b1.positive + b2.positive,
                   b1.constant and b2.constant)


# Lie-derivative actions of a vector field ``a`` on tensor fields.  For each
# kind: ``act(a, v)``, and the exact discrete adjoints
#   <a, adj_a(v, w)> = <w, act(a, v)>,   <v, adj_v(a, w)> = <w, act(a, v)>.


def _act(g, kind, a, v):
    if kind == "function":
        return -sum(a[j] * _d(g, v, j) for j in range(3))
    if kind == "density":
        return -_div(g, v * a)
    if kind == "one_form":
        return np.stack([-sum(a[j] * _d(g, v[i], j) + v[j] * _d(g, a[j], i) for j in range(3))
                         for i in range(3)])
    if kind == "vector":
        return np.stack([-sum(a[j] * _d(g, v[i], j) - v[j] * _d(g, a[i], j) for j in range(3))
                         for i in range(3)])
    if kind == "two_form":
        da = _div(g, a)
        return np.stack([-sum(a[j] * _d(g, v[i], j) - v[j] * _d(g, a[i], j) for j in range(3))
                         - v[i] * da for i in range(3)])
    raise SchemaError(f"unknown action kind {kind!r}")


def _adj_a(g, kind, v, w):
    if kind == "function":
        return -w * _grad(g, v)
    if kind == "density":
        return v * _grad(g, w)
    if kind == "one_form":
        return np.stack([-sum(w[i] * _d(g, v[i], k) for i in range(3))
                         + sum(_d(g, w[i] * v[k], i) for i in range(3)) for k in range(3)])
    if kind in ("vector", "two_form"):
        base = np.stack([-sum(w[i] * _d(g, v[i], k) for i in range(3))
                         - sum(_d(g, w[k] * v[j], j) for j in range(3)) for k in range(3)])
        if kind == "two_form":
            base = base + _grad(g, sum(w[i] * v[i] for i in range(3)))
        return base
    raise SchemaError(f"unknown action kind {kind!r}")


def _adj_v(g, kind, a, w):
    if kind == "function":
        return _div(g, w * a)
    if kind == "density":
        return sum(a[j] * _d(g, w, j) for j in range(3))
    if kind == "one_form":
        return np.stack([sum(_d(g, w[k] * a[j], j) for j in range(3))
                         - sum(w[j] * _d(g, a[k], j) for j in range(3)) for k in range(3)])
    if kind in ("vector", "two_form"):
        base = np.stack([sum(_d(g, w[k] * a[j], j) for j in range(3))
                         + sum(w[i] * _d(g, a[i], k) for i in range(3)) for k in range(3)])
        if kind == "two_form":
            base = base - w * _div(g, a)
        return base
    raise SchemaError(f"unknown action kind {kind!r}")


ACTION_KINDS = ("function", "density", "one_form", "vector", "two_form")


@dataclass(frozen=True)
class Action:
    """Lie-derivative action of the momentum's vector field on one variable.

    ``form='dual'`` treats the variable as living in the dual space, so the
    bracket gains ``<v, a |> c_v> - <v, b |> a_v>``; ``form='primal'`` treats
    it as a configuration variable, adding ``<a_v, b |> v> - <c_v, a |> v>``.
    Here ``a`` and ``b`` are the momentum components of ``dF`` and ``dH``.
    """

    var: str
    kind: str
    form: str = "dual"
    parity: object = 1
    positive: bool = False

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise SchemaError(f"unknown action kind {self.kind!r}; choose from {ACTION_KINDS}")
        if self.form not in ("dual", "primal"):
            raise SchemaError(f"action form must be 'dual' or 'primal', got {self.form!r}")


def semidirect_vector(base, actions, momentum="M", name=None):
    """Couple ``base`` to variables acted on by its momentum vector field.

    Variables named in ``actions`` and absent from ``base`` are appended to
    the schema.  ``base`` must contain the vector variable ``momentum``.
    """
    if momentum not in base.schema or base.schema[momentum].kind != "vector":
        raise SchemaError(f"base bracket has no vector momentum {momentum!r}")
    actions = tuple(actions)
    names = [a.var for a in actions]
    if len(set(names)) != len(names) or momentum in names:
        raise SchemaError(f"action variables must be distinct and differ from {momentum!r}")
    extra = []
    for act in actions:
        kind = "scalar" if act.kind in ("function", "density") else "vector"
        if act.var in base.schema:
            if base.schema[act.var].kind != kind:
                raise SchemaError(f"{act.var!r} has kind {base.schema[act.var].kind}, action needs {kind}")
        else:
            extra.append(Var(act.var, kind, act.parity, act.positive))
    schema = StateSchema(list(base.schema) + extra)

    def kernel(grid, const, x, c, out):
        g = grid.spatial
        base.kernel(grid, const, x, c, out)
        b = c[momentum]
        for act in actions:
            v, cv = x[act.var], c[act.var]
            if act.form == "dual":
                out.add(momentum, _adj_a(g, act.kind, cv, v))
                out.add(act.var, -_adj_v(g, act.kind, b, v))
            else:
                out.add(act.var, _act(g, act.kind, b, v))
                out.add(momentum, -_adj_a(g, act.kind, v, cv))

    positive = base.positive + tuple(a.var for a in actions if a.positive and a.var not in base.schema)
    return Bracket(name or f"{base.name}+semidirect", schema, kernel, dict(base.constraints),
                   base.species, positive, False)


def momentum_bracket(momentum="M"):
    """Lie-Poisson bracket of the vector-field algebra alone."""
    schema = StateSchema([_mom(momentum)])

    def kernel(grid, const, x, c, out):
        _momentum_lie_poisson(grid.spatial, x[momentum], c[momentum], momentum, out)

    return Bracket("momentum", schema, kernel)


def hydro_semidirect(momentum="u"):
    """Fluid bracket rebuilt as momentum bracket plus two advected scalars."""
    return semidirect_vector(momentum_bracket(momentum),
                             [Action("rho", "function", "dual", 1, True),
                              Action("s", "function", "dual", 1, True)],
                             momentum=momentum, name="hydro_semidirect")


def emhd_canonical():
    """Fluid bracket coupled to ``(A, Y)``: ``A`` primal one-form, ``Y`` dual one-form."""
    base = direct_product(hydro("M"), em_canonical(), name="hydro_em_canonical")
    return semidirect_vector(base, [Action("A", "one_form", "primal", None),
                                    Action("Y", "one_form", "dual", None)],
                             momentum="M", name="emhd_canonical")


def emhd_semidirect():
    """Fluid bracket coupled to ``(E, B)``: ``B`` primal two-form, ``E`` dual one-form.

    Differs from :func:`emhd_total` only by terms proportional to the Gauss
    residual and ``div B``; see :func:`emhd_constraint_gap`.
    """
    base = direct_product(hydro("M"), em(), name="hydro_em")
    b = semidirect_vector(base, [Action("E", "one_form", "dual"),
                                 Action("B", "two_form", "primal")],
                          momentum="M", name="emhd_semidirect")
    return reorder(b, ["rho", "M", "s", "E", "B"])


def emhd_constraint_gap(x, dH, constants=None):
    """Closed form of ``emhd_total.apply - emhd_semidirect.apply``.

    With ``G = eps0 div E - (ze/m) rho`` and ``b = dH_M``:
    ``Edot: b G / eps0``, ``Bdot: b div B``,
    ``Mdot: -c_E G / eps0 - c_B div B + b x (G B - eps0 (div B) E)``.
    """
    constants = constants or Constants()
    g = x.grid.spatial
    divE, divB = _div(g, x["E"]), _div(g, x["B"])
    G = constants.eps0 * divE - constants.charge_per_mass(0) * x["rho"]
    b = dH["M"]
    W = G * x["B"] - constants.eps0 * divB * x["E"]
    gap = {
        "E": b * G / constants.eps0,
        "B": b * divB,
        "M": -dH["E"] * G / constants.eps0 - dH["B"] * divB + _cross(b, W),
    }
    return State(x.schema, x.grid, gap)


# --------------------------------------------------------------------------
# dense bivector oracle


def dense_bivector(bracket, x, constants=None, check=True):
    """Coordinate matrix ``K`` with ``xdot = K grad_x(H)`` (vectors in schema order).

    Column ``i`` is ``apply(x, e_i / w_i)``: a unit coordinate gradient is the
    covector density ``e_i / w_i``.  ``K`` is antisymmetric iff the bracket is.
    """
    w = x.weights_vector()
    n = w.size
    K = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0 / w[i]
        K[:, i] = bracket.apply(x, State.from_vector(x.schema, x.grid, e), constants, check).to_vector()
    return K

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from hamcouple import brackets as br
from hamcouple import dynamics as dy
from hamcouple.errors import SchemaError, StateValidityError
from hamcouple.functional import test_functional_suite
from hamcouple.grid import Grid3, PhaseGrid
from hamcouple.state import Constants, State, random_state, uniform, zeros
from hamcouple.verify import default_constants, grid_for

ODD = Constants(eps0=0.7, mu0=1.4, e=1.1, m=(1.3,), z=(0.8,))
ODD2 = Constants(eps0=0.7, mu0=1.4, e=1.1, m=(1.3, 2.2), z=(0.8, 1.7))


def test_catalog_names():
    assert br.BRACKET_NAMES == ("em_canonical", "em", "vlasov", "hydro", "hydro_binary",
                                "classical_binary", "ked", "ked_binary", "emhd", "emhd_total",
                                "bemhd", "cbemhd", "mhd", "ehd")
    with pytest.raises(SchemaError):
        br.get_bracket("nosuch")


def test_schema_mismatch_rejected():
    g = Grid3((4, 4, 1))
    x = random_state(br.hydro().schema, g)
    with pytest.raises(SchemaError):
        br.em().apply(x, x)
    c = random_state(br.hydro().schema, Grid3((4, 2, 1)))
    with pytest.raises(SchemaError):
        br.hydro().apply(x, c)


def test_binary_needs_two_species():
    g = Grid3((4, 4, 1))
    b = br.bemhd()
    x = random_state(b.schema, g)
    with pytest.raises(SchemaError):
        b.apply(x, x, Constants())


def test_nonpositive_density_rejected():
    g = Grid3((4, 1, 1))
    b = br.hydro()
    x = uniform(b.schema, g, {"rho": 0.0, "s": 1.0})
    with pytest.raises(StateValidityError):
        b.apply(x, x)


# --------------------------------------------------------------------------
# electromagnetism


def test_em_uniform_fields_are_stationary():
    g = Grid3((4, 4, 4))
    b = br.em()
    x = uniform(b.schema, g, {"E": (1.0, -2.0, 0.3), "B": (0.0, 0.0, 0.0)})
    H = dy.get_hamiltonian("em", ODD)
    assert dy.rhs(b, H, x, ODD).max_abs() == 0.0


def test_em_matches_maxwell():
    g = Grid3((6, 6, 6))
    b = br.em()
    x = random_state(b.schema, g, 2)
    out = dy.rhs(b, dy.get_hamiltonian("em", ODD), x, ODD)
    ref = oracles.maxwell(g, x, ODD)
    for k in ("E", "B"):
        assert np.abs(out[k] - ref[k]).max() < 1e-12


def test_em_preserves_div_b():
    g = Grid3((6, 6, 6))
    b = br.em()
    x = random_state(b.schema, g, 1)
    c = random_state(b.schema, g, 7, amplitude=1.0)
    v = b.apply(x, c, ODD)
    assert np.abs(g.div(v["B"])).max() < 1e-12


def test_em_canonical_block_structure():
    g = Grid3((4, 4, 1))
    b = br.em_canonical()
    x = random_state(b.schema, g, 0)
    c = random_state(b.schema, g, 3).replace(A=np.zeros((3,) + g.dims))
    v = b.apply(x, c, ODD)
    assert np.abs(v["A"] - c["Y"] / ODD.eps0).max() < 1e-15
    assert np.abs(v["Y"]).max() == 0.0


def test_em_canonical_pushes_forward_to_maxwell():
    # B = curl A, E = -Y maps the canonical flow onto the (E, B) flow
    g = Grid3((6, 6, 1))
    b = br.em_canonical()
    x = random_state(b.schema, g, 4)
    v = dy.rhs(b, dy.get_hamiltonian("em_canonical", ODD), x, ODD)
    y = State(br.em().schema, g, {"E": -x["Y"], "B": g.curl(x["A"])})
    w = dy.rhs(br.em(), dy.get_hamiltonian("em", ODD), y, ODD)
    assert np.abs(-v["Y"] - w["E"]).max() < 1e-12
    assert np.abs(g.curl(v["A"]) - w["B"]).max() < 1e-12


# --------------------------------------------------------------------------
# kinetic


def phase_grid(n=(4, 4, 1), q=(8, 8, 1), pmax=1.5):
    return PhaseGrid(Grid3(n), q, (pmax, pmax, pmax))


def test_vlasov_uniform_potential_is_stationary():
    pg = phase_grid()
    b = br.vlasov()
    x = State(b.schema, pg, {"f": np.broadcast_to(random_state(b.schema, pg, 0)["f"][:1, :1], pg.shape)})
    H = dy.get_hamiltonian("vlasov", ODD, potential=np.full(pg.dims, 0.4))
    assert dy.rhs(b, H, x, ODD).max_abs() < 1e-14


def test_vlasov_force_term_sign():
    # spatially uniform f: fdot = z e grad(phi) . grad_p f
    pg = phase_grid()
    b = br.vlasov()
    f0 = random_state(b.schema, pg, 0)["f"][:1, :1, :1]
    x = State(b.schema, pg, {"f": np.broadcast_to(f0, pg.shape)})
    X = pg.spatial.coords()
    phi = np.sin(2 * np.pi * X[0]) + 0.3 * np.cos(2 * np.pi * X[1])
    H = dy.get_hamiltonian("vlasov", ODD, potential=phi)
    fd = dy.rhs(b, H, x, ODD)["f"]
    gphi = pg.spatial.grad(phi)
    gp = pg.grad_p(x["f"])
    ref = ODD.charge(0) * sum(gphi[i][..., None, None, None] * gp[i] for i in range(3))
    assert np.abs(fd - ref).max() < 1e-12


def test_ked_without_particles_is_maxwell():
    pg = phase_grid()
    b = br.ked()
    x = random_state(b.schema, pg, 3).replace(f=np.zeros(pg.shape))
    v = dy.rhs(b, dy.get_hamiltonian("ked", ODD), x, ODD)
    ref = oracles.maxwell(pg.spatial, x, ODD)
    assert np.abs(v["E"] - ref["E"]).max() < 1e-12
    assert np.abs(v["B"] - ref["B"]).max() < 1e-12
    assert np.abs(v["f"]).max() == 0.0


def test_ked_electric_force_sign():
    # B = 0, uniform f and E: fdot = -z e E . grad_p f
    pg = phase_grid()
    b = br.ked()
    f0 = random_state(br.vlasov().schema, pg, 1)["f"][:1, :1, :1]
    x = uniform(b.schema, pg, {"E": (0.3, -0.2, 0.0), "B": (0.0, 0.0, 0.0)})
    x = x.replace(f=np.broadcast_to(f0, pg.shape))
    v = dy.rhs(b, dy.get_hamiltonian("ked", ODD), x, ODD)
    gp = pg.grad_p(x["f"])
    ref = -ODD.charge(0) * (0.3 * gp[0] - 0.2 * gp[1])
    assert np.abs(v["f"] - ref).max() < 1e-12
    # the same sign from the dense bivector on a 4x1x1 x 4x1x1 grid
    tiny = PhaseGrid(Grid3((4, 1, 1)), (4, 1, 1), (1.0, 1.0, 1.0))
    y = random_state(b.schema, tiny, 2)
    K = br.dense_bivector(b, y, ODD)
    c = random_state(b.schema, tiny, 9, amplitude=1.0)
    assert np.abs(K @ (c.weights_vector() * c.to_vector()) - b.apply(y, c, ODD).to_vector()).max() < 1e-12


@pytest.mark.parametrize("name", ["ked", "ked_binary", "emhd", "bemhd", "cbemhd", "emhd_total", "ehd"])
def test_gauss_residual_is_constant(name):
    b = br.get_bracket(name)
    const = ODD2 if b.species == 2 else ODD
    g = grid_for(b, 6, 8, 1.5)
    x = random_state(b.schema, g, 0)
    c = random_state(b.schema, g, 5, amplitude=1.0)
    xd = b.apply(x, c, const)
    rate = b.constraint_residuals(xd, const)["gauss"] - b.constraint_residuals(zeros(b.schema, g), const)["gauss"]
    assert np.abs(rate).max() < 1e-10


# --------------------------------------------------------------------------
# fluids


def test_hydro_uniform_state_stationary():
    g = Grid3((6, 6, 6))
    b = br.hydro()
    x = uniform(b.schema, g, {"rho": 1.3, "u": (0.0, 0.0, 0.0), "s": 0.7})
    assert dy.rhs(b, dy.get_hamiltonian("hydro"), x).max_abs() == 0.0


def test_hydro_semidirect_equals_catalog():
    g = Grid3((6, 6, 1))
    h, hs = br.hydro(), br.hydro_semidirect()
    for seed in range(3):
        x = random_state(h.schema, g, seed)
        c = random_state(h.schema, g, seed + 10, amplitude=1.0)
        assert (h.apply(x, c) - hs.apply(x, c)).max_abs() < 1e-12


def test_hydro_binary_is_two_independent_fluids():
    g = Grid3((8, 8, 1))
    b = br.hydro_binary()
    x = random_state(b.schema, g, 3)
    v = dy.rhs(b, dy.get_hamiltonian("hydro_binary"), x)
    h = br.hydro()
    H = dy.get_hamiltonian("hydro")
    for k in "12":
        y = State(h.schema, g, {"u": x["u" + k], "rho": x["rho" + k], "s": x["s" + k]})
        w = dy.rhs(h, H, y)
        for n in ("u", "rho", "s"):
            assert np.abs(v[n + k] - w[n]).max() < 1e-13


def test_hydro_binary_uniform_stationary():
    g = Grid3((4, 4, 1))
    b = br.hydro_binary()
    x = uniform(b.schema, g, {"rho1": 1.0, "rho2": 2.0, "s1": 0.5, "s2": 0.1})
    assert dy.rhs(b, dy.get_hamiltonian("hydro_binary", alpha=0.3), x).max_abs() == 0.0


def test_emhd_matches_hand_coded():
    # the two routes arrange the nonlinear products differently, so resolve them well
    g = Grid3((32, 32, 1))
    b = br.emhd()
    eos = dy.IdealEOS()
    H = dy.get_hamiltonian("emhd", ODD)
    sp = (("rho", "u", "s", 0),)
    for seed in range(3):
        x = random_state(b.schema, g, seed, amplitude=0.2)
        v = dy.rhs(b, H, x, ODD)
        ref = oracles.two_fluid_em(g, x, eos, ODD, sp)
        for k in b.schema.names:
            assert np.abs(v[k] - ref[k]).max() < 1e-10, k


def test_emhd_uniform_field_pull():
    # rho uniform, u = 0, E uniform, B = 0: udot = (z e / m) rho E
    g = Grid3((4, 4, 4))
    b = br.emhd()
    x = uniform(b.schema, g, {"rho": 1.5, "s": 1.0, "E": (0.2, 0.0, -0.1)})
    v = dy.rhs(b, dy.get_hamiltonian("emhd", ODD), x, ODD)
    qm = ODD.charge_per_mass(0)
    assert np.allclose(v["u"][:, 0, 0, 0], qm * 1.5 * np.array([0.2, 0.0, -0.1]), atol=1e-15)
    # dense oracle agrees with the kernel on a 4^3 grid
    y = random_state(b.schema, Grid3((4, 4, 4)), 1)
    c = random_state(b.schema, y.grid, 3, amplitude=1.0)
    K = br.dense_bivector(b, y, ODD)
    assert np.abs(K @ (c.weights_vector() * c.to_vector()) - b.apply(y, c, ODD).to_vector()).max() < 1e-11


def test_emhd_coupling_vanishes_as_charge_vanishes():
    g = Grid3((6, 6, 1))
    b = br.emhd()
    x = random_state(b.schema, g, 0)
    c = random_state(b.schema, g, 4, amplitude=1.0)
    weak = Constants(eps0=0.7, mu0=1.4, m=(1.3,), z=(1e-13,))
    v = b.apply(x, c, weak)
    ref = br.direct_product(br.hydro(), br.em()).apply(
        State(br.direct_product(br.hydro(), br.em()).schema, g, dict(x.items())),
        State(br.direct_product(br.hydro(), br.em()).schema, g, dict(c.items())), weak)
    for k in b.schema.names:
        assert np.abs(v[k] - ref[k]).max() < 1e-11


def test_emhd_total_without_fields_is_hydro():
    g = Grid3((6, 6, 1))
    b = br.emhd_total()
    x = random_state(b.schema, g, 1).replace(E=np.zeros((3,) + g.dims), B=np.zeros((3,) + g.dims))
    c = random_state(b.schema, g, 2, amplitude=1.0).replace(E=np.zeros((3,) + g.dims),
                                                            B=np.zeros((3,) + g.dims))
    v = b.apply(x, c, ODD)
    h = br.hydro("M")
    y = State(h.schema, g, {k: x[k] for k in h.schema.names})
    w = h.apply(y, State(h.schema, g, {k: c[k] for k in h.schema.names}))
    for k in h.schema.names:
        assert np.abs(v[k] - w[k]).max() < 1e-13
    # the charge current still drives the electric field
    qm = ODD.charge_per_mass(0)
    assert np.abs(v["E"] + qm / ODD.eps0 * x["rho"] * c["M"]).max() < 1e-13
    assert np.abs(v["B"]).max() < 1e-13


def test_bemhd_matches_hand_coded():
    g = Grid3((32, 32, 1))
    b = br.bemhd()
    eos = dy.IdealEOS()
    H = dy.get_hamiltonian("bemhd", ODD2)
    for seed in range(3):
        x = random_state(b.schema, g, seed, amplitude=0.2)
        v = dy.rhs(b, H, x, ODD2)
        ref = oracles.two_fluid_em(g, x, eos, ODD2)
        for k in b.schema.names:
            assert np.abs(v[k] - ref[k]).max() < 1e-10, k


def test_bemhd_identical_species_evolve_identically():
    g = Grid3((6, 6, 1))
    b = br.bemhd()
    const = Constants(m=(1.2, 1.2), z=(0.7, 0.7))
    x = random_state(b.schema, g, 0)
    x = x.replace(rho2=x["rho1"], u2=x["u1"], s2=x["s1"])
    v = dy.rhs(b, dy.get_hamiltonian("bemhd", const), x, const)
    for a, c in (("rho1", "rho2"), ("u1", "u2"), ("s1", "s2")):
        assert np.array_equal(v[a], v[c])


def test_mhd_matches_hand_coded():
    g = Grid3((32, 1, 1))
    b = br.mhd()
    x = dy.mhd_smooth(b.schema, g, Constants(), amplitude=0.1)
    v = dy.rhs(b, dy.get_hamiltonian("mhd"), x)
    ref = oracles.ideal_mhd(g, x, dy.IdealEOS())
    for k in b.schema.names:
        assert np.abs(v[k] - ref[k]).max() < 1e-9


@pytest.mark.parametrize("name", ["mhd", "ehd"])
def test_uniform_magnetized_states_are_stationary(name):
    g = Grid3((4, 4, 4))
    b = br.get_bracket(name)
    vals = {"rho": 1.2, "s": 0.3, "M": (0.0, 0.0, 0.0)}
    vals["B" if name == "mhd" else "E"] = (0.3, 0.1, -0.4)
    x = uniform(b.schema, g, vals)
    if name == "ehd":
        # neutral background keeps the Gauss law satisfied; the charge term still pulls
        H = dy.get_hamiltonian(name)
        v = dy.rhs(b, H, x)
        assert np.abs(v["rho"]).max() == 0 and np.abs(v["s"]).max() == 0
        assert np.abs(v["E"]).max() == 0
    else:
        assert dy.rhs(b, dy.get_hamiltonian(name), x).max_abs() == 0.0


# --------------------------------------------------------------------------
# combinators


def test_direct_product_name_collision():
    with pytest.raises(SchemaError):
        br.direct_product(br.em(), br.em())


def test_direct_product_of_two_maxwell_systems():
    g = Grid3((6, 6, 1))
    second = br.rename(br.em(), {"E": "E2", "B": "B2"})
    both = br.direct_product(br.em(), second)
    x = random_state(both.schema, g, 0)
    c = random_state(both.schema, g, 1, amplitude=1.0)
    v = both.apply(x, c, ODD)
    e = br.em()
    for suffix in ("", "2"):
        y = State(e.schema, g, {"E": x["E" + suffix], "B": x["B" + suffix]})
        d = State(e.schema, g, {"E": c["E" + suffix], "B": c["B" + suffix]})
        w = e.apply(y, d, ODD)
        assert np.array_equal(v["E" + suffix], w["E"])
        assert np.array_equal(v["B" + suffix], w["B"])


def test_unknown_action_kind():
    with pytest.raises(SchemaError):
        br.Action("rho", "spinor")
    with pytest.raises(SchemaError):
        br.semidirect_vector(br.momentum_bracket("M"), [br.Action("M", "function")], "M")


def test_emhd_canonical_composition():
    b = br.emhd_canonical()
    assert set(b.schema.names) == {"M", "rho", "s", "A", "Y"}
    from hamcouple.verify import verify_bracket
    res = verify_bracket(b, n=6, states=2)
    assert all(r.passed for r in res), [r.row() for r in res]


def test_emhd_semidirect_matches_total_up_to_constraint_gap():
    g = Grid3((8, 8, 1))
    t, sd = br.emhd_total(), br.emhd_semidirect()
    x = random_state(t.schema, g, 3)
    c = random_state(t.schema, g, 5, amplitude=1.0)
    gap = br.emhd_constraint_gap(x, c, ODD)
    assert (t.apply(x, c, ODD) - sd.apply(x, c, ODD) - gap).max_abs() < 1e-12


@pytest.mark.parametrize("name", ["em", "hydro", "mhd", "emhd", "vlasov"])
def test_dense_bivector_is_skew(name):
    from hamcouple.verify import dense_antisymmetry
    b = br.get_bracket(name)
    g = grid_for(b, 4, 4)
    x = random_state(b.schema, g, 0)
    assert dense_antisymmetry(b, x, default_constants(b)) < 1e-13


# --------------------------------------------------------------------------
# properties


@given(st.sampled_from(br.BRACKET_NAMES), st.integers(0, 10_000))
def test_antisymmetry_property(name, seed):
    b = br.get_bracket(name)
    g = grid_for(b, 4, 4, 1.0)
    const = ODD2 if b.species == 2 else ODD
    x = random_state(b.schema, g, seed)
    rng = np.random.default_rng(seed)
    a = random_state(b.schema, g, int(rng.integers(1 << 30)), amplitude=1.0)
    c = random_state(b.schema, g, int(rng.integers(1 << 30)), amplitude=1.0)
    ac, ca = a.dot(b.apply(x, c, const)), c.dot(b.apply(x, a, const))
    assert abs(ac + ca) <= 1e-10 * (1 + abs(ac))


@given(st.sampled_from(br.BRACKET_NAMES), st.integers(0, 10_000), st.floats(-2, 2))
def test_bilinearity_property(name, seed, alpha):
    b = br.get_bracket(name)
    g = grid_for(b, 4, 4, 1.0)
    const = default_constants(b)
    x = random_state(b.schema, g, seed)
    a = random_state(b.schema, g, seed + 1, amplitude=1.0)
    c = random_state(b.schema, g, seed + 2, amplitude=1.0)
    lhs = b.apply(x, a.axpy(alpha, c), const)
    rhs = b.apply(x, a, const).axpy(alpha, b.apply(x, c, const))
    assert (lhs - rhs).max_abs() <= 1e-12 * (1 + lhs.max_abs())


@given(st.sampled_from(["hydro", "mhd", "emhd", "classical_binary"]), st.integers(0, 10_000))
def test_leibniz_property(name, seed):
    from hamcouple.verify import leibniz_residual
    b = br.get_bracket(name)
    g = grid_for(b, 4)
    x = random_state(b.schema, g, seed)
    suite = test_functional_suite(b.schema, g, seed)
    assert leibniz_residual(b, x, suite[2], suite[4], suite[3], default_constants(b)) < 1e-10

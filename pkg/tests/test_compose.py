import numpy as np
import pytest

from hamcouple import brackets as br
from hamcouple import compose as cp
from hamcouple import liealg as la
from hamcouple import verify as vf
from hamcouple.errors import CompatibilityError, SchemaError
from hamcouple.grid import Grid3
from hamcouple.state import random_state


def test_shipped_specs_listed():
    assert set(cp.shipped_specs()) >= {"se3", "sl2_borel", "direct_so3_heisenberg",
                                       "semidirect_hydro", "direct_em_hydro", "emhd_canonical"}


@pytest.mark.parametrize("name", ["se3", "sl2_borel", "direct_so3_heisenberg"])
def test_matched_pair_specs_reproduce_known_algebras(name):
    res = cp.build_matched_pair(cp.load_spec(name))
    assert res.passed
    assert res.expected_residual == 0.0
    assert res.jacobi < 1e-14
    assert any("jacobi" in line for line in res.lines)


def test_incompatible_matched_pair_raises():
    d = dict(cp.load_spec("se3"))
    d["right_action"] = [[0, 0, 1, 1.0]]
    with pytest.raises(CompatibilityError):
        cp.build_matched_pair(d)


def test_semidirect_reproduces_catalog_hydro():
    built = cp.build_fields(cp.load_spec("semidirect_hydro"))
    resid = cp.equivalence_residual(built, br.hydro(), Grid3((6, 6, 1)))
    assert resid < 1e-12


def test_direct_product_keeps_blocks_separate():
    b = cp.build_fields(cp.load_spec("direct_em_hydro"))
    assert set(b.schema.names) == {"E", "B", "w", "n", "sigma"}
    g = Grid3((6, 6, 1))
    x = random_state(b.schema, g, 0)
    c = random_state(b.schema, g, 1, amplitude=1.0).replace(E=np.zeros((3,) + g.dims), B=np.zeros((3,) + g.dims))
    v = b.apply(x, c)
    assert not np.any(v["E"]) and not np.any(v["B"])


def test_emhd_canonical_spec_satisfies_jacobi():
    b = cp.build_fields(cp.load_spec("emhd_canonical"))
    res = vf.verify_bracket(b, n=6, states=1)
    by = {r.check: r for r in res}
    assert by["jacobi"].passed, vf.format_table(res)
    assert by["antisymmetry"].passed


def test_spec_errors(tmp_path):
    with pytest.raises(SchemaError):
        cp.load_spec("no_such_spec")
    with pytest.raises(SchemaError):
        cp.build_fields({"type": "bogus"})
    with pytest.raises(SchemaError):
        cp.build_fields({"type": "direct", "operands": [{"bracket": "em"}]})
    with pytest.raises(SchemaError):
        cp.equivalence_residual(br.em(), br.hydro(), Grid3((2, 2, 1)))
    p = tmp_path / "s.toml"
    p.write_text('type = "direct"\n[[operands]]\nbracket = "em"\n[[operands]]\nbracket = "hydro"\n')
    assert set(cp.build_fields(cp.load_spec(str(p))).schema.names) == {"E", "B", "u", "rho", "s"}


def test_expected_algebra_mismatch_fails():
    d = dict(cp.load_spec("direct_so3_heisenberg"))
    d["expect"] = "se3"
    res = cp.build_matched_pair(d)
    assert res.expected_residual > 0.0
    assert not res.passed

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamcouple import brackets as br
from hamcouple import ocrr
from hamcouple.errors import ParityError, SchemaError
from hamcouple.grid import Grid3
from hamcouple.state import Constants, State, StateSchema, Var, random_state


def state(name, seed=0, dims=(4, 3, 1)):
    b = br.get_bracket(name)
    return b, random_state(b.schema, Grid3(dims), seed)


@pytest.mark.parametrize("name", ocrr.OCRR_BRACKETS)
def test_catalog_bivectors_satisfy_reciprocity(name):
    b, x = state(name)
    rep = ocrr.check_bivector_parity(b, x)
    assert rep.passed, rep.text()
    assert rep.max_residual < 1e-12


def test_zero_matrix_matches_bivector_check():
    b, x = state("mhd")
    a = ocrr.check_combined(b, x, None)
    z = ocrr.check_combined(b, x, np.zeros((x.to_vector().size,) * 2))
    assert a.passed and z.passed
    assert [r.reversibility for r in a.blocks] == [r.reversibility for r in ocrr.check_bivector_parity(b, x).blocks]


def test_even_diagonal_matrix_passes():
    b, x = state("hydro")
    n = x.to_vector().size
    rep = ocrr.check_combined(b, x, lambda y: np.diag(1.0 + y.to_vector() ** 2))
    assert rep.passed
    assert ocrr.check_combined(b, x, np.eye(n)).passed


def test_asymmetric_matrix_raises():
    b, x = state("hydro")
    n = x.to_vector().size
    M = np.zeros((n, n))
    M[0, 1] = 1.0
    with pytest.raises(ocrr.MatrixValidationError):
        ocrr.check_combined(b, x, M)
    with pytest.raises(ocrr.MatrixValidationError):
        ocrr.check_combined(b, x, np.zeros((n + 1, n + 1)))


def test_violating_matrix_fails_at_located_block():
    b, x = state("mhd")
    M = ocrr.parity_violating_matrix(x)
    rep = ocrr.check_combined(b, x, M)
    assert not rep.passed
    fails = {f.block for f in rep.failures}
    # first odd variable is the momentum, first even one the density
    assert fails == {("rho", "M")} or fails == {("M", "rho")}
    assert "FAIL" in rep.text()
    assert "rho-M" in rep.to_csv() or "M-rho" in rep.to_csv()


def test_zero_bivector_passes():
    b = br.em()
    x = State(b.schema, Grid3((3, 1, 1)), {})
    rep = ocrr.check_bivector_parity(b, x)
    assert rep.passed


def test_time_reversal_rows():
    b, x = state("emhd")
    rep = ocrr.check_bivector_parity(b, x)
    par = {frozenset(blk.block): blk.parity for blk in rep.blocks}
    # u odd, rho even, E even, B odd
    assert par[frozenset(("u", "rho"))] == -1
    assert par[frozenset(("E", "B"))] == -1
    assert par[frozenset(("E", "rho"))] == 1
    assert len(rep.to_csv().splitlines()) == len(rep.blocks) + 1


def test_unparitied_schema_raises():
    b = br.vlasov()
    with pytest.raises(ParityError):
        ocrr.check_bivector_parity(b, None)
    b = br.em_canonical()
    with pytest.raises(ParityError):
        ocrr.check_bivector_parity(b, None)


def test_dense_limit():
    b, x = state("mhd", dims=(6, 6, 1))
    with pytest.raises(SchemaError):
        ocrr.check_bivector_parity(b, x, max_unknowns=10)


def test_violating_matrix_needs_both_parities():
    b = br.hydro()
    x = random_state(b.schema, Grid3((2, 1, 1)))
    assert ocrr.parity_violating_matrix(x).any()
    ev = StateSchema([Var("rho", "scalar", 1, positive=True)])
    with pytest.raises(ParityError):
        ocrr.parity_violating_matrix(random_state(ev, Grid3((2, 1, 1))))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["hydro", "mhd", "emhd", "ehd"]))
def test_reciprocity_property(seed, name):
    b = br.get_bracket(name)
    x = random_state(b.schema, Grid3((3, 3, 1)), seed)
    const = Constants(eps0=0.8, mu0=1.1, e=1.3, m=(0.9,), z=(1.2,))
    assert ocrr.check_bivector_parity(b, x, constants=const).passed

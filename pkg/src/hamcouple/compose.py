"""Build brackets and matched-pair algebras from composition spec files.

Spec ``type`` values
--------------------
``matched_pair``
    Finite-dimensional pair, keys as in
    :func:`hamcouple.liealg.matched_pair_from_dict`; optional ``expect`` in
    ``se3``, ``sl2`` or ``direct`` compares the result with a known algebra.
``direct``
    ``[[operands]]`` tables with ``bracket`` and optional ``rename`` maps.
``semidirect``
    ``base`` (catalog name, ``momentum``, ``hydro_M``, or a list of those
    combined as a direct product), ``momentum`` variable name, and
    ``[[actions]]`` with ``var``, ``kind``, ``form``, ``parity``
    (``1``, ``-1`` or ``"none"``) and ``positive``.  Optional
    ``compare_to`` names a catalog bracket for an equivalence residual.
"""
import os
from dataclasses import dataclass, field

import numpy as np

from . import brackets as br
from . import liealg as la
from .config import load_toml
from .errors import SchemaError
from .state import random_state

SPEC_DIR = os.path.join(os.path.dirname(__file__), "specs")


def resolve_spec(path_or_name):
    """A file path, or the stem of a spec shipped in ``hamcouple/specs``."""
    if os.path.exists(path_or_name):
        return path_or_name
    shipped = os.path.join(SPEC_DIR, f"{path_or_name}.toml")
    if os.path.exists(shipped):
        return shipped
    raise SchemaError(f"no spec file {path_or_name!r}")


def shipped_specs():
    return sorted(f[:-5] for f in os.listdir(SPEC_DIR) if f.endswith(".toml"))


@dataclass
class MatchedPairResult:
    spec: la.MatchedPairSpec
    algebra: la.LieAlgebra
    jacobi: float
    expected: str = None
    expected_residual: float = None
    lines: list = field(default_factory=list)

    @property
    def passed(self):
        ok = self.jacobi <= la.identity_tolerance(self.algebra.dim)
        if self.expected_residual is not None:
            ok = ok and self.expected_residual == 0.0
        return ok


def _expected_constants(name, spec):
    if name == "se3":
        return la.se3_structure_constants()
    if name == "sl2":
        return la.sl2().c
    if name == "direct":
        return la.direct_sum(spec.g, spec.k).c
    raise SchemaError(f"unknown expected algebra {name!r}")


def build_matched_pair(d):
    """Validate a matched-pair spec mapping; raises CompatibilityError on failure."""
    spec = la.matched_pair_from_dict(d)
    alg = la.matched_pair_algebra(spec)
    jac = float(np.max(np.abs(la.jacobi_tensor(alg.c)), initial=0.0))
    res = MatchedPairResult(spec, alg, jac)
    res.lines.append(f"matched pair {spec.name}: dim g = {spec.g.dim}, dim k = {spec.k.dim}")
    for identity, (idx, worst) in spec.residuals.items():
        res.lines.append(f"  compatibility {identity:<24s} {worst:.3e}  worst at {tuple(int(i) for i in idx)}")
    res.lines.append(f"  jacobi of combined algebra      {jac:.3e}")
    if d.get("expect"):
        res.expected = d["expect"]
        ref = _expected_constants(res.expected, spec)
        res.expected_residual = float(np.max(np.abs(alg.c - ref)))
        res.lines.append(f"  difference from {res.expected:<15s} {res.expected_residual:.3e}")
    return res


def _base_bracket(name):
    if name == "momentum":
        raise SchemaError("base 'momentum' needs the momentum name; use build_fields")
    if name == "hydro_M":
        return br.hydro("M")
    return br.get_bracket(name)


def _parity(value):
    if value in (None, "none", "None"):
        return None
    return int(value)


def build_fields(d):
    """Field-level bracket described by a ``direct`` or ``semidirect`` spec."""
    kind = d.get("type")
    name = d.get("name")
    if kind == "direct":
        ops = d.get("operands", [])
        if len(ops) < 2:
            raise SchemaError("direct spec needs at least two operands")
        parts = []
        for op in ops:
            b = br.get_bracket(op["bracket"])
            if op.get("rename"):
                b = br.rename(b, dict(op["rename"]))
            parts.append(b)
        out = parts[0]
        for b in parts[1:]:
            out = br.direct_product(out, b)
        out.name = name or out.name
        return out
    if kind == "semidirect":
        mom = d.get("momentum", "M")
        bases = d.get("base", "momentum")
        bases = [bases] if isinstance(bases, str) else list(bases)
        parts = [br.momentum_bracket(mom) if b == "momentum" else _base_bracket(b) for b in bases]
        base = parts[0]
        for b in parts[1:]:
            base = br.direct_product(base, b)
        actions = [br.Action(a["var"], a["kind"], a.get("form", "dual"), _parity(a.get("parity", 1)),
                             bool(a.get("positive", False))) for a in d.get("actions", [])]
        return br.semidirect_vector(base, actions, momentum=mom, name=name)
    raise SchemaError(f"unknown spec type {kind!r}; use matched_pair, direct or semidirect")


def equivalence_residual(built, reference, grid, seeds=(0, 1, 2), constants=None):
    """``max |built.apply - reference.apply|`` on random states and covectors."""
    if sorted(built.schema.names) != sorted(reference.schema.names):
        raise SchemaError(f"cannot compare {built.schema.names} with {reference.schema.names}")
    built = br.reorder(built, reference.schema.names)
    worst = 0.0
    for s in seeds:
        x = random_state(reference.schema, grid, s)
        c = random_state(reference.schema, grid, 100 + s, amplitude=1.0)
        worst = max(worst, (built.apply(x, c, constants) - reference.apply(x, c, constants)).max_abs())
    return worst


def load_spec(path_or_name):
    return load_toml(resolve_spec(path_or_name))

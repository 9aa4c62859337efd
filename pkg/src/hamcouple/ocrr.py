"""Onsager-Casimir reciprocity checks on assembled bivectors.

For time-reversal ``I`` and block parities ``P_i``, two block laws are
checked on the dense coordinate matrix ``K``:

reversibility
    ``K_ij(I x) = -P_i P_j K_ij(x)``: entries coupling variables of equal
    parity are odd functions of the state, and vice versa.
dressed symmetry
    ``K_ij(x) = P_i P_j K_ji(I x)^T``, the reciprocal relation itself.  For a
    bivector plus a symmetric matrix ``M`` only this law applies to the sum.
"""
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import brackets as br
from .errors import ParityError, SchemaError
from .state import Constants, parities, time_reversal


class MatrixValidationError(ValueError):
    """A user-supplied coefficient matrix is not symmetric or has the wrong size."""


@dataclass
class BlockResult:
    block: tuple
    parity: int
    reversibility: float
    symmetry: float
    tol: float

    @property
    def passed(self):
        return self.reversibility <= self.tol and self.symmetry <= self.tol

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


@dataclass
class ParityReport:
    bracket: str
    tol: float
    blocks: list = field(default_factory=list)
    scale: float = 1.0

    @property
    def passed(self):
        return all(b.passed for b in self.blocks)

    @property
    def failures(self):
        return [b for b in self.blocks if not b.passed]

    @property
    def max_residual(self):
        return max((max(b.reversibility, b.symmetry) for b in self.blocks), default=0.0)

    def text(self):
        head = f"{'block':<14s} {'P_i*P_j':>7s} {'reversibility':>14s} {'symmetry':>11s}  verdict"
        lines = [f"OCRR check for {self.bracket} (tol {self.tol:.0e} x {self.scale:.3g})", head,
                 "-" * len(head)]
        for b in self.blocks:
            lines.append(f"{b.block[0] + '-' + b.block[1]:<14s} {b.parity:>+7d} "
                         f"{b.reversibility:14.3e} {b.symmetry:11.3e}  {b.verdict}")
        lines.append("PASS" if self.passed else f"FAIL ({len(self.failures)} blocks)")
        return "\n".join(lines)

    __str__ = text

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["block", "parity_product", "reversibility", "symmetry", "verdict"])
        for b in self.blocks:
            w.writerow([f"{b.block[0]}-{b.block[1]}", b.parity, repr(b.reversibility),
                        repr(b.symmetry), b.verdict])
        return buf.getvalue()


def _block_laws(name, x, K, KI, tol, L=None, LI=None):
    """Fill a report; reversibility uses ``L`` (defaults to ``K``), symmetry uses ``K``."""
    L = K if L is None else L
    LI = KI if LI is None else LI
    par = parities(x.schema)
    sl = x.blocks()
    scale = max(1.0, float(np.max(np.abs(K))) if K.size else 1.0)
    report = ParityReport(name, tol, scale=scale)
    names = x.schema.names
    for a, i in enumerate(names):
        for j in names[a:]:
            pp = par[i] * par[j]
            rev = sym = 0.0
            for p, q in ((i, j), (j, i)):
                Lpq, LIpq = L[sl[p], sl[q]], LI[sl[p], sl[q]]
                rev = max(rev, float(np.max(np.abs(LIpq + pp * Lpq), initial=0.0)))
                Kpq, KIqp = K[sl[p], sl[q]], KI[sl[q], sl[p]]
                sym = max(sym, float(np.max(np.abs(Kpq - pp * KIqp.T), initial=0.0)))
            report.blocks.append(BlockResult((i, j), pp, rev / scale, sym / scale, tol))
    return report


def check_bivector_parity(bracket, x, tol=1e-10, constants=None, max_unknowns=None):
    """Both parity laws for the bivector of ``bracket`` at ``x``.

    Raises :class:`ParityError` when a variable has no parity (``A``, ``Y``,
    phase densities).
    """
    if isinstance(bracket, str):
        bracket = br.get_bracket(bracket)
    parities(bracket.schema)
    if max_unknowns is not None and x.to_vector().size > max_unknowns:
        raise SchemaError(f"{x.to_vector().size} unknowns exceed the dense limit {max_unknowns}")
    const = constants or (Constants.binary() if bracket.species == 2 else Constants())
    K = br.dense_bivector(bracket, x, const)
    KI = br.dense_bivector(bracket, time_reversal(x), const)
    return _block_laws(bracket.name, x, K, KI, tol)


def check_combined(bracket, x, M_sym=None, tol=1e-10, constants=None):
    """Reciprocity of ``K = L + M`` with ``M`` a symmetric coefficient matrix.

    ``M_sym`` is a callable ``state -> matrix`` (or a fixed matrix, or None
    for ``M = 0``).  An asymmetric ``M`` raises :class:`MatrixValidationError`;
    a parity-violating ``M`` yields FAIL rows naming the offending blocks.
    """
    if isinstance(bracket, str):
        bracket = br.get_bracket(bracket)
    parities(bracket.schema)
    const = constants or (Constants.binary() if bracket.species == 2 else Constants())
    xI = time_reversal(x)
    L = br.dense_bivector(bracket, x, const)
    LI = br.dense_bivector(bracket, xI, const)
    if M_sym is None:
        return _block_laws(bracket.name, x, L, LI, tol)

    def supply(y):
        M = np.asarray(M_sym(y) if callable(M_sym) else M_sym, dtype=float)
        if M.shape != L.shape:
            raise MatrixValidationError(f"M has shape {M.shape}, bivector is {L.shape}")
        top = max(1.0, float(np.max(np.abs(M))))
        if np.max(np.abs(M - M.T)) > 1e-12 * top:
            raise MatrixValidationError("coefficient matrix M is not symmetric")
        return M

    M, MI = supply(x), supply(xI)
    return _block_laws(bracket.name + "+M", x, L + M, LI + MI, tol, L, LI)


def parity_vector(x):
    """Per-unknown parity signs in :meth:`State.to_vector` order."""
    par = parities(x.schema)
    return np.concatenate([np.full(a.size, par[n], dtype=float) for n, a in x.items()])


def parity_violating_matrix(x, scale=1.0):
    """Symmetric ``M`` with a constant entry between the first odd and first even blocks.

    A constant coefficient coupling opposite parities breaks reciprocity.
    """
    par = parities(x.schema)
    sl = x.blocks()
    odd = next((n for n in x.schema.names if par[n] == -1), None)
    even = next((n for n in x.schema.names if par[n] == 1), None)
    if odd is None or even is None:
        raise ParityError("schema needs both an odd and an even variable")
    n = x.to_vector().size
    M = np.zeros((n, n))
    i, j = sl[odd].start, sl[even].start
    M[i, j] = M[j, i] = scale
    return M


OCRR_BRACKETS = ("em", "hydro", "mhd", "ehd", "emhd", "emhd_total", "bemhd", "cbemhd")

"""Finite-dimensional Lie algebras, Lie-Poisson dynamics and matched pairs.

Conventions
-----------
Structure constants ``c[k, i, j]`` satisfy ``[e_i, e_j] = c[k, i, j] e_k``.
The Lie-Poisson bracket is the plus bracket ``{F, H}(mu) = <mu, [dF, dH]>``
and the evolution is the unique ``mudot`` with ``<dF, mudot> = {F, H}``::

    mudot_j = sum_{k, i} mu_k c[k, j, i] dH_i

A matched pair stores two action tensors::

    (eta |> xi)^a     = L[a, alpha, b] eta^alpha xi^b     (k acts on g)
    (eta <| xi)^alpha = R[alpha, beta, b] eta^beta xi^b   (g acts on k)
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import CompatibilityError, SchemaError


def identity_tolerance(n, scale=1.0):
    """1e-12 up to dimension 20, then ``n^3`` machine epsilons, times ``scale``."""
    tol = 1e-12 if n <= 20 else n ** 3 * np.finfo(float).eps
    return tol * max(1.0, scale)


def jacobi_tensor(c):
    """``J[l, i, j, k]`` = cyclic sum of ``[[e_i, e_j], e_k]`` components."""
    t = np.einsum("mij,lmk->lijk", c, c)
    return t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))


def _worst(residual):
    idx = np.unravel_index(int(np.argmax(np.abs(residual))), residual.shape)
    return idx, float(np.abs(residual[idx]))


class LieAlgebra:
    """Lie algebra given by structure constants, validated at construction.

    Raises
    ------
    CompatibilityError
        If antisymmetry or Jacobi fails beyond :func:`identity_tolerance`.
    """

    def __init__(self, c, name="g", tol=None, check=True):
        c = np.array(c, dtype=float)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise SchemaError(f"structure constants must be (n, n, n), got {c.shape}")
        self.c = c
        self.c.flags.writeable = False
        self.name = name
        if check:
            scale = float(np.max(np.abs(c))) if c.size else 1.0
            tol = identity_tolerance(self.dim, scale ** 2) if tol is None else tol
            idx, res = _worst(c + np.transpose(c, (0, 2, 1))) if c.size else ((0,), 0.0)
            if res > tol:
                raise CompatibilityError("antisymmetry", idx, res)
            idx, res = self.jacobi_residual()
            if res > tol:
                raise CompatibilityError("jacobi", idx, res)

    @property
    def dim(self):
        return self.c.shape[0]

    def bracket(self, x, y):
        return np.einsum("kij,i,j->k", self.c, x, y)

    def ad(self, x):
        """Matrix of ``y -> [x, y]``."""
        return np.einsum("kij,i->kj", self.c, x)

    def jacobi_residual(self):
        if self.dim == 0:
            return (0,), 0.0
        return _worst(jacobi_tensor(self.c))

    def change_basis(self, A):
        """Structure constants in the basis ``e'_i = A[p, i] e_p``."""
        A = np.asarray(A, dtype=float)
        Ainv = np.linalg.inv(A)
        c = np.einsum("km,mpq,pi,qj->kij", Ainv, self.c, A, A)
        return LieAlgebra(c, name=self.name, tol=1e-9)

    def __repr__(self):
        return f"LieAlgebra({self.name}, dim={self.dim})"


def abelian(n, name=None):
    return LieAlgebra(np.zeros((n, n, n)), name or f"abelian{n}")


def so3():
    """``[e_i, e_j] = eps_ijk e_k``."""
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[k, i, j] = 1.0
        c[k, j, i] = -1.0
    return LieAlgebra(c, "so3")


def sl2():
    """Basis (H, E, F): ``[H,E] = 2E, [H,F] = -2F, [E,F] = H``."""
    c = np.zeros((3, 3, 3))
    for k, i, j, v in ((1, 0, 1, 2.0), (2, 0, 2, -2.0), (0, 1, 2, 1.0)):
        c[k, i, j] = v
        c[k, j, i] = -v
    return LieAlgebra(c, "sl2")


def heisenberg():
    """Basis (X, Y, Z): ``[X, Y] = Z``."""
    c = np.zeros((3, 3, 3))
    c[2, 0, 1], c[2, 1, 0] = 1.0, -1.0
    return LieAlgebra(c, "heisenberg")


# --------------------------------------------------------------------------
# Lie-Poisson dynamics


def _vec(v, n, what):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise SchemaError(f"{what} must have length {n}, got shape {v.shape}")
    return v


def lie_poisson_bracket(alg, mu, dF, dH):
    """``<mu, [dF, dH]>``."""
    n = alg.dim
    mu, dF, dH = (_vec(v, n, w) for v, w in ((mu, "mu"), (dF, "dF"), (dH, "dH")))
    return float(np.einsum("k,kij,i,j->", mu, alg.c, dF, dH))


def lie_poisson_evolution(alg, mu, dH):
    """``mudot_j = sum mu_k c[k, j, i] dH_i`` so that ``<dF, mudot> = {F, H}``."""
    n = alg.dim
    mu, dH = _vec(mu, n, "mu"), _vec(dH, n, "dH")
    return np.einsum("k,kji,i->j", mu, alg.c, dH)


def rk4_flow(rhs, x0, dt, steps):
    """Fixed-step RK4 on ``numpy`` vectors; returns the trajectory."""
    x = np.array(x0, dtype=float)
    out = [x.copy()]
    for _ in range(steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out.append(x.copy())
    return np.array(out)


class CanonicalBracket:
    """Constant canonical bivector on ``(r, p)`` with ``n_pairs`` pairs.

    ``J = [[0, I], [-I, 0]]`` so that ``{F, H} = F_r . H_p - F_p . H_r`` and
    ``rdot = H_p``, ``pdot = -H_r``.  The displayed formula this replaces has
    the opposite overall sign; this sign is the one that yields the stated
    Hamilton equations.
    """

    def __init__(self, n_pairs):
        if int(n_pairs) < 1:
            raise SchemaError("n_pairs must be >= 1")
        self.n_pairs = int(n_pairs)
        n = self.n_pairs
        J = np.zeros((2 * n, 2 * n))
        J[:n, n:] = np.eye(n)
        J[n:, :n] = -np.eye(n)
        self.J = J

    @property
    def dim(self):
        return 2 * self.n_pairs

    def bracket(self, dF, dH):
        return float(np.asarray(dF) @ self.J @ np.asarray(dH))

    def evolution(self, dH):
        return self.J @ np.asarray(dH, dtype=float)


def canonical_bracket_finite(n_pairs):
    return CanonicalBracket(n_pairs)


@dataclass
class CasimirReport:
    max_residual: float
    tol: float
    samples: int

    @property
    def passed(self):
        return self.max_residual < self.tol

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"casimir residual {self.max_residual:.3e} (tol {self.tol:.0e}) {verdict}"


def casimir_check(alg, C, gradC, samples=20, seed=0, tol=1e-10):
    """Max ``|<mu, [dF, grad C(mu)]>|`` over random ``mu`` and ``dF``.

    ``C`` is accepted for interface symmetry; only its gradient enters.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        mu = rng.normal(size=alg.dim)
        dF = rng.normal(size=alg.dim)
        worst = max(worst, abs(lie_poisson_bracket(alg, mu, dF, np.asarray(gradC(mu), dtype=float))))
    return CasimirReport(worst, tol, samples)


# --------------------------------------------------------------------------
# matched pairs


def _compat_residuals(g, k, L, R):
    """Residual tensors of the representation laws and both compatibilities."""
    cg, ck = g.c, k.c
    out = {}
    # left representation: [eta1, eta2] |> xi = eta1 |> (eta2 |> xi) - eta2 |> (eta1 |> xi)
    lhs = np.einsum("gab,axy->gxyb", L, ck)
    rhs = np.einsum("gxa,ayb->gxyb", L, L) - np.einsum("gya,axb->gxyb", L, L)
    out["left_representation"] = lhs - rhs
    # right representation: eta <| [xi1, xi2] = (eta <| xi1) <| xi2 - (eta <| xi2) <| xi1
    lhs = np.einsum("abm,mxy->abxy", R, cg)
    rhs = np.einsum("agy,gbx->abxy", R, R) - np.einsum("agx,gby->abxy", R, R)
    out["right_representation"] = lhs - rhs
    # eta |> [xi1, xi2] = [eta |> xi1, xi2] + [xi1, eta |> xi2]
    #                     + (eta <| xi1) |> xi2 - (eta <| xi2) |> xi1
    lhs = np.einsum("aem,mxy->aexy", L, cg)
    rhs = (np.einsum("amn,mex,ny->aexy", cg, L, np.eye(g.dim))
           + np.einsum("amn,mx,ney->aexy", cg, np.eye(g.dim), L)
           + np.einsum("agy,gex->aexy", L, R)
           - np.einsum("agx,gey->aexy", L, R))
    out["compatibility_left"] = lhs - rhs
    # [eta1, eta2] <| xi = [eta1, eta2 <| xi] + [eta1 <| xi, eta2]
    #                      + eta1 <| (eta2 |> xi) - eta2 <| (eta1 |> xi)
    lhs = np.einsum("amx,mpq->apqx", R, ck)
    rhs = (np.einsum("amn,mp,nqx->apqx", ck, np.eye(k.dim), R)
           + np.einsum("amn,mpx,nq->apqx", ck, R, np.eye(k.dim))
           + np.einsum("apb,bqx->apqx", R, L)
           - np.einsum("aqb,bpx->apqx", R, L))
    out["compatibility_right"] = lhs - rhs
    return out


@dataclass
class MatchedPairSpec:
    """Two Lie algebras in mutual action; identities checked at construction.

    Parameters
    ----------
    g, k : LieAlgebra
    left_action : array (n, m, n)
        ``L[a, alpha, b]``; ``None`` means zero.
    right_action : array (m, m, n)
        ``R[alpha, beta, b]``; ``None`` means zero.
    """

    g: LieAlgebra
    k: LieAlgebra
    left_action: np.ndarray = None
    right_action: np.ndarray = None
    name: str = "matched_pair"
    tol: float = None
    residuals: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n, m = self.g.dim, self.k.dim
        L = np.zeros((n, m, n)) if self.left_action is None else np.array(self.left_action, dtype=float)
        R = np.zeros((m, m, n)) if self.right_action is None else np.array(self.right_action, dtype=float)
        if L.shape != (n, m, n):
            raise SchemaError(f"left action must have shape {(n, m, n)}, got {L.shape}")
        if R.shape != (m, m, n):
            raise SchemaError(f"right action must have shape {(m, m, n)}, got {R.shape}")
        self.left_action, self.right_action = L, R
        scale = max([1.0] + [float(np.max(np.abs(t))) for t in (L, R, self.g.c, self.k.c) if t.size])
        tol = identity_tolerance(n + m, scale ** 2) if self.tol is None else self.tol
        self.tol = tol
        self.residuals = {}
        for identity, res in _compat_residuals(self.g, self.k, L, R).items():
            if res.size == 0:
                self.residuals[identity] = ((), 0.0)
                continue
            idx, worst = _worst(res)
            self.residuals[identity] = (idx, worst)
        for identity, (idx, worst) in self.residuals.items():
            if worst > tol:
                raise CompatibilityError(identity, idx, worst)

    @property
    def is_semidirect(self):
        return not np.any(self.right_action) or not np.any(self.left_action)


def matched_pair_algebra(spec):
    """Structure constants of ``g |x| k`` on the basis ``(e_1..e_n, f_1..f_m)``."""
    g, k, L, R = spec.g, spec.k, spec.left_action, spec.right_action
    n, m = g.dim, k.dim
    c = np.zeros((n + m, n + m, n + m))
    c[:n, :n, :n] = g.c
    c[n:, n:, n:] = k.c
    # [f_alpha, e_b] = (f_alpha |> e_b, f_alpha <| e_b)
    c[:n, n:, :n] = L
    c[n:, n:, :n] = R
    c[:n, :n, n:] = -np.transpose(L, (0, 2, 1))
    c[n:, :n, n:] = -np.transpose(R, (0, 2, 1))
    return LieAlgebra(c, name=f"{g.name}|x|{k.name}", tol=spec.tol)


def direct_sum(g, k):
    return matched_pair_algebra(MatchedPairSpec(g, k, name="direct"))


def se3_spec():
    """Abelian translations acted on by rotations: ``L[a, alpha, b] = eps_{a alpha b}``."""
    L = np.zeros((3, 3, 3))
    for a, al, b in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        L[a, al, b] = 1.0
        L[a, b, al] = -1.0
    return MatchedPairSpec(abelian(3, "R3"), so3(), left_action=L, name="se3")


def se3_structure_constants():
    """Hand-written se(3) on ``(P1, P2, P3, J1, J2, J3)``.

    ``[J_i, J_j] = eps_ijk J_k``, ``[J_i, P_j] = eps_ijk P_k``, ``[P_i, P_j] = 0``.
    """
    c = np.zeros((6, 6, 6))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[3 + k, 3 + i, 3 + j], c[3 + k, 3 + j, 3 + i] = 1.0, -1.0
        c[k, 3 + i, j], c[k, j, 3 + i] = 1.0, -1.0
        c[k, 3 + j, i], c[k, i, 3 + j] = -1.0, 1.0
    return c


def sl2_borel_spec():
    """sl(2) split as Borel ``{H, E}`` matched with ``{F}``; both actions nonzero."""
    c = np.zeros((2, 2, 2))
    c[1, 0, 1], c[1, 1, 0] = 2.0, -2.0
    borel = LieAlgebra(c, "borel")
    L = np.zeros((2, 1, 2))
    R = np.zeros((1, 1, 2))
    L[0, 0, 1] = -1.0   # F |> E = -H
    R[0, 0, 0] = 2.0    # F <| H = 2F
    return MatchedPairSpec(borel, abelian(1, "F"), left_action=L, right_action=R, name="sl2_borel")


def random_semidirect_spec(seed, dim=3, base="so3"):
    """Random compatible semidirect spec for property tests.

    ``g`` is ``base`` in a random basis, ``k`` is another random basis of the
    same algebra, and ``k`` acts on ``g`` by the adjoint action transported
    through the basis change.  Such an action is a derivation and a
    representation, so the right action can be zero.
    """
    rng = np.random.default_rng(seed)
    algs = {"so3": so3, "sl2": sl2, "heisenberg": heisenberg}
    a0 = algs[base]()
    while True:
        A = rng.normal(size=(3, 3)) + 2.0 * np.eye(3)
        Bm = rng.normal(size=(3, 3)) + 2.0 * np.eye(3)
        if abs(np.linalg.det(A)) > 0.3 and abs(np.linalg.det(Bm)) > 0.3:
            break
    g = a0.change_basis(A)
    k = a0.change_basis(Bm)
    # eta in k-basis -> original coords Bm @ eta -> g-basis A^{-1} Bm eta
    T = np.linalg.solve(A, Bm)
    L = np.einsum("apq,pl->alq", g.c, T)
    return MatchedPairSpec(g, k, left_action=L, name=f"random_{base}_{seed}", tol=1e-9)


# --------------------------------------------------------------------------
# config loading


def _tensor_from_entries(shape, entries, antisymmetric=False):
    t = np.zeros(shape)
    for entry in entries or []:
        *idx, val = entry
        idx = tuple(int(i) for i in idx)
        if len(idx) != len(shape):
            raise SchemaError(f"entry {entry} does not match tensor rank {len(shape)}")
        t[idx] = float(val)
        if antisymmetric:
            k, i, j = idx
            t[k, j, i] = -float(val)
    return t


def algebra_from_dict(d, name="g"):
    n = int(d["dim"])
    c = _tensor_from_entries((n, n, n), d.get("c", []), antisymmetric=True)
    return LieAlgebra(c, name=d.get("name", name))


def matched_pair_from_dict(d):
    """Build a :class:`MatchedPairSpec` from a parsed config mapping.

    Keys: ``[g]`` and ``[k]`` tables each with ``dim`` and ``c`` (a list of
    ``[k, i, j, value]`` entries; the ``[k, j, i]`` entry is set to
    ``-value``), plus optional ``left_action`` (``[a, alpha, b, value]``) and
    ``right_action`` (``[alpha, beta, b, value]``) entry lists.
    """
    g = algebra_from_dict(d["g"], "g")
    k = algebra_from_dict(d["k"], "k")
    n, m = g.dim, k.dim
    L = _tensor_from_entries((n, m, n), d.get("left_action"))
    R = _tensor_from_entries((m, m, n), d.get("right_action"))
    return MatchedPairSpec(g, k, L, R, name=d.get("name", "matched_pair"))


def load_matched_pair(path):
    from .config import load_toml
    return matched_pair_from_dict(load_toml(path))

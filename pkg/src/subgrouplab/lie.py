"""Lie algebras from structure constants: derived algebra, Ricci minimum, diameter bound.

Structure constants follow ``[e_i, e_j] = sum_k c[i][j][k] e_k``.  All
algebraic checks run over exact rationals (sympy); the Ricci minimum is
exact whenever the characteristic roots are rational.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
import sympy

from ._zlinalg import as_fraction
from . import rotations as rot


class LieAlgebraError(ValueError):
    pass


def _rat(x) -> sympy.Rational:
    f = as_fraction(x)
    return sympy.Rational(f.numerator, f.denominator)


def levi_civita() -> list:
    c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    for i, j, k in itertools.permutations(range(3)):
        c[i][j][k] = int(sympy.LeviCivita(i, j, k))
    return c


@dataclass(frozen=True)
class Subalgebra:
    """Row basis (in parent coordinates) of a subspace closed under bracket."""

    basis: tuple[tuple[sympy.Rational, ...], ...]
    parent_dim: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def codim(self) -> int:
        return self.parent_dim - self.dim

    def matrix(self) -> sympy.Matrix:
        if not self.basis:
            return sympy.zeros(0, self.parent_dim)
        return sympy.Matrix(self.basis)


class LieAlgebraData:
    """Finite-dimensional real Lie algebra with a positive-definite inner product."""

    def __init__(self, c, gram=None, name: str = "", check: bool = True):
        n = len(c)
        self.n = n
        self.name = name or f"g{n}"
        self.c = tuple(tuple(tuple(_rat(v) for v in row) for row in plane) for plane in c)
        if any(len(p) != n or any(len(r) != n for r in p) for p in self.c):
            raise LieAlgebraError("structure constants must be n x n x n")
        if gram is None:
            G = sympy.eye(n)
        else:
            rows = gram.tolist() if isinstance(gram, sympy.MatrixBase) else gram
            G = sympy.Matrix([[_rat(v) for v in r] for r in rows])
        if G.shape != (n, n):
            raise LieAlgebraError("gram matrix has the wrong shape")
        self.gram = G
        if check:
            self.validate()

    # invariants ------------------------------------------------------------
    def validate(self) -> None:
        n, c = self.n, self.c
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if c[i][j][k] != -c[j][i][k]:
                        raise LieAlgebraError("structure constants are not antisymmetric")
        for i, j, k in itertools.combinations(range(n), 3):
            s = (self.bracket_vec(self.basis_vec(i), self.bracket_vec(self.basis_vec(j), self.basis_vec(k)))
                 + self.bracket_vec(self.basis_vec(j), self.bracket_vec(self.basis_vec(k), self.basis_vec(i)))
                 + self.bracket_vec(self.basis_vec(k), self.bracket_vec(self.basis_vec(i), self.basis_vec(j))))
            if any(s):
                raise LieAlgebraError("Jacobi identity fails")
        G = self.gram
        if G != G.T:
            raise LieAlgebraError("gram matrix is not symmetric")
        if any(G[:k, :k].det() <= 0 for k in range(1, n + 1)):
            raise LieAlgebraError("gram matrix is not positive definite")

    @cached_property
    def is_invariant(self) -> bool:
        """<[x,y],z> + <y,[x,z]> = 0 on basis triples."""
        G = self.gram
        for a in range(self.n):
            A = self.ad(a)
            if (A.T * G + G * A) != sympy.zeros(self.n, self.n):
                return False
        return True

    # algebra ----------------------------------------------------------------
    def basis_vec(self, i: int) -> list:
        return [sympy.Integer(1) if k == i else sympy.Integer(0) for k in range(self.n)]

    def bracket_vec(self, x: Sequence, y: Sequence) -> list:
        n, c = self.n, self.c
        out = [sympy.Integer(0)] * n
        for i in range(n):
            if x[i] == 0:
                continue
            for j in range(n):
                if y[j] == 0:
                    continue
                w = x[i] * y[j]
                for k in range(n):
                    if c[i][j][k]:
                        out[k] += w * c[i][j][k]
        return out

    def ad(self, a: int) -> sympy.Matrix:
        """Matrix of ad(e_a): column i holds [e_a, e_i]."""
        return sympy.Matrix(self.n, self.n, lambda k, i: self.c[a][i][k])

    def ad_numeric(self) -> np.ndarray:
        return np.array([[[float(self.c[a][i][k]) for i in range(self.n)] for k in range(self.n)]
                         for a in range(self.n)])

    def scaled(self, factor) -> "LieAlgebraData":
        """Same bracket, inner product multiplied by ``factor``."""
        f = _rat(factor)
        if f <= 0:
            raise LieAlgebraError("scale factor must be positive")
        return LieAlgebraData(self.c, self.gram * f, name=f"{self.name}*{f}", check=False)

    def to_json(self) -> dict:
        s = lambda v: str(v) if isinstance(v, sympy.Rational) and v.q != 1 else f"{v}/1"
        return {"n": self.n,
                "c": [[[s(v) for v in row] for row in p] for p in self.c],
                "gram": [[s(v) for v in row] for row in self.gram.tolist()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "LieAlgebraData":
        n = int(data["n"])
        L = cls(data["c"], data.get("gram"), name=data.get("name", ""))
        if L.n != n:
            raise LieAlgebraError("declared n does not match the structure constants")
        return L

    def __repr__(self) -> str:
        return f"LieAlgebraData({self.name}, n={self.n})"


# constructors --------------------------------------------------------------

def abelian(m: int) -> LieAlgebraData:
    return LieAlgebraData([[[0] * m for _ in range(m)] for _ in range(m)], name=f"R{m}")


def so3(gram_scale=1) -> LieAlgebraData:
    """so(3) in the basis L_k (rotation generators); orthonormal for -1/2 tr(XY)."""
    return LieAlgebraData(levi_civita(), sympy.eye(3) * _rat(gram_scale), name="so3")


def su2(trace_form: str = "-2tr") -> LieAlgebraData:
    """su(2) in the basis -i/2 sigma_k.

    ``trace_form`` picks the inner product: ``"-2tr"`` (<x,y> = -2 tr(xy),
    basis orthonormal, isometric to standard so(3)) or ``"-1/2tr"``.
    """
    forms = {"-2tr": sympy.eye(3), "-1/2tr": sympy.eye(3) / 4}
    if trace_form not in forms:
        raise LieAlgebraError(f"unknown trace form {trace_form!r}")
    return LieAlgebraData(levi_civita(), forms[trace_form], name="su2")


def direct_sum(*algebras: LieAlgebraData) -> LieAlgebraData:
    n = sum(L.n for L in algebras)
    c = [[[0] * n for _ in range(n)] for _ in range(n)]
    G = sympy.zeros(n, n)
    off = 0
    for L in algebras:
        for i, j, k in itertools.product(range(L.n), repeat=3):
            c[off + i][off + j][off + k] = L.c[i][j][k]
        G[off:off + L.n, off:off + L.n] = L.gram
        off += L.n
    return LieAlgebraData(c, G, name="+".join(L.name for L in algebras))


def u2() -> LieAlgebraData:
    L = direct_sum(su2(), abelian(1))
    L.name = "u2"
    return L


def from_matrices(mats: Sequence[np.ndarray], gram=None, max_den: int = 10**6) -> LieAlgebraData:
    """Structure constants of a matrix Lie algebra spanned by ``mats``.

    Coefficients are fitted by least squares and rationalized; the bracket
    relations are then re-verified numerically.
    """
    X = [np.asarray(m, dtype=complex) for m in mats]
    n = len(X)
    V = np.array([x.reshape(-1) for x in X]).T
    Vr = np.vstack([V.real, V.imag])
    c = [[[0] * n for _ in range(n)] for _ in range(n)]
    for i, j in itertools.product(range(n), repeat=2):
        br = X[i] @ X[j] - X[j] @ X[i]
        b = np.concatenate([br.reshape(-1).real, br.reshape(-1).imag])
        sol, *_ = np.linalg.lstsq(Vr, b, rcond=None)
        if np.linalg.norm(Vr @ sol - b) > 1e-8 * max(1.0, np.linalg.norm(b)):
            raise LieAlgebraError("matrices do not span a Lie algebra")
        c[i][j] = [Fraction(float(v)).limit_denominator(max_den) for v in sol]
    return LieAlgebraData(c, gram)


# operations ------------------------------------------------------------------

def derived_subalgebra(L: LieAlgebraData) -> Subalgebra:
    """Exact row-reduced basis of span{[e_i, e_j]}."""
    rows = [list(L.c[i][j]) for i in range(L.n) for j in range(i + 1, L.n)]
    if not rows:
        return Subalgebra((), L.n)
    M = sympy.Matrix(rows)
    R, piv = M.rref()
    basis = tuple(tuple(R.row(k)) for k in range(len(piv)))
    S = Subalgebra(basis, L.n)
    if L.is_invariant and not _is_ideal(L, S):
        raise LieAlgebraError("derived subalgebra of a compact-type algebra is not an ideal")
    return S


def _in_span(S: Subalgebra, v) -> bool:
    if not any(v):
        return True
    if S.dim == 0:
        return False
    M = S.matrix()
    return M.col_join(sympy.Matrix([list(v)])).rank() == M.rank()


def _is_ideal(L: LieAlgebraData, S: Subalgebra) -> bool:
    return all(_in_span(S, L.bracket_vec(L.basis_vec(k), list(b))) for k in range(L.n) for b in S.basis)


def is_closed_subalgebra(L: LieAlgebraData, S: Subalgebra) -> bool:
    return all(_in_span(S, L.bracket_vec(list(a), list(b))) for a in S.basis for b in S.basis)


def is_perfect(L: LieAlgebraData) -> bool:
    if not L.is_invariant:
        raise LieAlgebraError("perfectness test needs an ad-invariant inner product")
    return derived_subalgebra(L).dim == L.n


def ricci_form(L: LieAlgebraData) -> sympy.Matrix:
    """R_ab = 1/4 tr(ad(e_a)^* ad(e_b)), adjoint taken w.r.t. the gram matrix."""
    G = L.gram
    Gi = G.inv()
    ads = [L.ad(a) for a in range(L.n)]
    R = sympy.zeros(L.n, L.n)
    for a in range(L.n):
        Astar = Gi * ads[a].T * G
        for b in range(a, L.n):
            v = (Astar * ads[b]).trace() / 4
            R[a, b] = R[b, a] = v
    return R


def ricci_min(L: LieAlgebraData, exact: bool = False):
    """Smallest value of 1/4 ||ad(x)||_HS^2 over unit vectors x.

    Computed as the smallest root of det(R - lambda G) = 0.  With
    ``exact=True`` a sympy number is returned (algebraic in general).
    """
    if not L.is_invariant:
        raise LieAlgebraError("Ricci minimum needs an ad-invariant inner product")
    if derived_subalgebra(L).dim != L.n:
        raise LieAlgebraError("algebra is not semisimple; Ricci minimum would vanish")
    R = ricci_form(L)
    lam = sympy.Symbol("lam")
    poly = sympy.Poly((R - lam * L.gram).det(), lam)
    roots = sympy.real_roots(poly)
    rmin = min(roots, key=lambda r: float(r))
    if float(rmin) <= 0:
        raise LieAlgebraError("Ricci minimum is not positive")
    return sympy.nsimplify(rmin) if exact else float(rmin)


def myers_bound(L: LieAlgebraData, exact: bool = False):
    """Delta = pi sqrt((n - 1) / Ric_min)."""
    if L.n < 2:
        raise LieAlgebraError("diameter bound needs n >= 2")
    r = ricci_min(L, exact=True)
    val = sympy.pi * sympy.sqrt(sympy.Integer(L.n - 1) / r)
    return sympy.simplify(val) if exact else float(val)


# exponential coverage -----------------------------------------------------------

@dataclass
class CoverageReport:
    covered: bool
    gap: float
    threshold: float
    grid_spacing: float
    oracle_mesh: float
    oracle_size: int
    refined: int = 0

    def __bool__(self) -> bool:
        return self.covered


def _chart_compatible(L: LieAlgebraData) -> bool:
    lc = levi_civita()
    return L.n == 3 and all(L.c[i][j][k] == lc[i][j][k] for i, j, k in itertools.product(range(3), repeat=3))


def exp_coverage_check(G, L: LieAlgebraData, delta: float, mesh: float,
                       oracle_mesh: float | None = None, chunk: int = 200_000,
                       batch_size: int = 64) -> CoverageReport:
    """Does exp of the closed delta-ball of L cover the matrix group G?

    A grid of spacing ``h`` with certified image mesh ``mesh`` is laid over
    the ball (in the inner product of ``L``).  For every point of an
    independent quaternion oracle net the distance to the image grid is
    bounded above through a nearby grid point; points whose bound exceeds
    the threshold ``2 mesh + oracle_mesh`` are measured exactly against the
    whole image, worst first, stopping at the first confirmed gap.
    """
    from .groups import MatrixGroup

    if not isinstance(G, MatrixGroup):
        raise LieAlgebraError("coverage check supports SO3 and SU2 only")
    if not _chart_compatible(L):
        raise LieAlgebraError("algebra basis does not match the group's generators")
    if delta <= 0 or mesh <= 0:
        raise ValueError("delta and mesh must be positive")
    oracle_mesh = 2 * mesh if oracle_mesh is None else oracle_mesh
    h = mesh / (G.exp_lipschitz * math.sqrt(3) / 2)
    gram = np.array(L.gram.tolist(), dtype=float)
    # eigen-box bounding the ellipsoid w^T gram w <= delta^2
    half = delta * np.sqrt(np.diag(np.linalg.inv(gram)))
    kmax = np.ceil(half / h).astype(int)

    def inside(idx: np.ndarray) -> np.ndarray:
        w = idx * h
        return np.einsum("ni,ij,nj->n", w, gram, w) <= delta**2 * (1 + 1e-12)

    oracle = G.quaternion_net(oracle_mesh)
    threshold = 2 * mesh + oracle.mesh
    feats = oracle.features
    pts = oracle.elements
    W = G.log_batch(np.array(pts))
    norm = np.sqrt(np.einsum("ni,ij,nj->n", W, gram, W))
    scale = np.where(norm > delta, delta / np.maximum(norm, 1e-300), 1.0)
    base = np.rint(W * scale[:, None] / h).astype(np.int64)
    best = np.full(len(W), np.inf)
    offsets = np.array(list(itertools.product((0, -1, 1), repeat=3)))
    for off in offsets:
        idx = base + off
        ok = inside(idx)
        if not ok.any():
            continue
        img = G.pack(G.exp(idx[ok] * h))
        d = np.sqrt(((img - feats[ok]) ** 2).sum(axis=1))
        sel = np.nonzero(ok)[0]
        best[sel] = np.minimum(best[sel], d)
    # exact distances for the worst points, a batch at a time, until one
    # fails or all are cleared
    order = np.argsort(-best)
    n_bad = int((best > threshold).sum())
    refined = 0
    axes = [np.arange(-k, k + 1) for k in kmax]
    step = max(1, chunk // max(1, len(axes[1]) * len(axes[2])))
    while refined < n_bad:
        batch = order[refined:min(n_bad, refined + batch_size)]
        exact = np.full(len(batch), np.inf)
        for s in range(0, len(axes[0]), step):
            a0 = axes[0][s:s + step]
            grid = np.stack(np.meshgrid(a0, axes[1], axes[2], indexing="ij"), -1).reshape(-1, 3)
            grid = grid[inside(grid)]
            if len(grid):
                D = G.pairwise(feats[batch], G.pack(G.exp(grid * h)))
                np.minimum(exact, D.min(axis=1), out=exact)
        best[batch] = np.minimum(best[batch], exact)
        refined += len(batch)
        if (best[batch] > threshold).any():
            break
    gap = float(best.max()) if refined >= n_bad else float(best[order[:refined]].max())
    return CoverageReport(gap <= threshold, gap, threshold, h, oracle.mesh, len(pts), refined)

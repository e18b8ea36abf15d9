"""Independent slow oracles used to pin down the fast code paths."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import sympy

from subgrouplab.cohomology import FiniteModule
from subgrouplab.finite import FiniteGroup


# ---------------------------------------------------------------------------
# H^2 by enumerating cocycles and coboundaries
# ---------------------------------------------------------------------------

class _Mod:
    """Elements of Z/k_1 + ... + Z/k_r coded as integers."""

    def __init__(self, M: FiniteModule):
        self.M = M
        self.k = M.factors
        self.elems = list(itertools.product(*[range(k) for k in self.k]))
        self.index = {e: i for i, e in enumerate(self.elems)}
        n = len(self.elems)
        self.n = n
        self.add = [[self.index[tuple((a + b) % k for a, b, k in zip(x, y, self.k))]
                     for y in self.elems] for x in self.elems]
        self.neg = [self.index[tuple((-a) % k for a, k in zip(x, self.k))] for x in self.elems]
        self.act = {}
        for g in M.group.elements:
            A = M.action[g]
            self.act[g] = [self.index[tuple(int(v) % k for v, k in zip(A @ np.array(x, dtype=np.int64), self.k))]
                           for x in self.elems]
        # inverse of the action table, to solve g.x = y
        self.unact = {g: {y: x for x, y in enumerate(t)} for g, t in self.act.items()}

    def scale(self, x: int, c: int) -> int:
        return self.index[tuple((c * a) % k for a, k in zip(self.elems[x], self.k))]


def _cocycles(F: FiniteGroup, R: _Mod) -> list[tuple]:
    """All normalized 2-cocycles by backtracking with forced-value propagation."""
    ne = [g for g in F.elements if g != F.identity]
    var = {(g, h): i for i, (g, h) in enumerate(itertools.product(ne, ne))}
    e = F.identity
    # dc(g,h,k) = g.c(h,k) - c(gh,k) + c(g,hk) - c(g,h)
    eqs = []
    for g, h, k in itertools.product(ne, ne, ne):
        terms = [("act", g, (h, k), 1), ("id", None, (F.mul(g, h), k), -1),
                 ("id", None, (g, F.mul(h, k)), 1), ("id", None, (g, h), -1)]
        eqs.append([(kind, a, var[p], s) for kind, a, p, s in terms if e not in p])
    by_var = [[] for _ in var]
    for j, eq in enumerate(eqs):
        for t in eq:
            by_var[t[2]].append(j)

    def value(eq, vals):
        tot = 0
        for kind, g, v, s in eq:
            x = vals[v]
            if kind == "act":
                x = R.act[g][x]
            tot = R.add[tot][x if s > 0 else R.neg[x]]
        return tot

    out = []
    nv = len(var)
    vals = [None] * nv

    def propagate(start):
        assigned = []
        stack = [start]
        while stack:
            v = stack.pop()
            for j in by_var[v]:
                eq = eqs[j]
                free = [t for t in eq if vals[t[2]] is None]
                if not free:
                    if value(eq, vals) != 0:
                        return assigned, False
                    continue
                if len(free) > 1 or any(t[2] == free[0][2] for t in eq if t is not free[0]):
                    continue
                kind, g, fv, s = free[0]
                vals[fv] = 0
                rest = value([t for t in eq if t is not free[0]], vals)
                # s * act(x) + rest = 0
                target = R.neg[rest] if s > 0 else rest
                x = R.unact[g][target] if kind == "act" else target
                vals[fv] = x
                assigned.append(fv)
                stack.append(fv)
        return assigned, True

    def search(i):
        while i < nv and vals[i] is not None:
            i += 1
        if i == nv:
            # each equation was checked when its last variable was set
            out.append(tuple(vals))
            return
        for x in range(R.n):
            vals[i] = x
            assigned, ok = propagate(i)
            if ok:
                search(i + 1)
            for v in assigned:
                vals[v] = None
        vals[i] = None

    if nv == 0:
        return [()]
    search(0)
    return out


def _coboundaries(F: FiniteGroup, R: _Mod) -> set:
    ne = [g for g in F.elements if g != F.identity]
    out = set()
    for a in itertools.product(range(R.n), repeat=len(ne)):
        av = dict(zip(ne, a))
        av[F.identity] = 0
        out.add(tuple(R.add[R.add[R.act[g][av[h]]][R.neg[av[F.mul(g, h)]]]][av[g]]
                      for g in ne for h in ne))
    return out


def _prime_factors(n: int) -> list[int]:
    return sorted(int(p) for p in sympy.factorint(n))


def brute_h2(F: FiniteGroup, M: FiniteModule) -> list[int]:
    """Invariant factors of H^2(F, M) from |{z : p^j z in B}| counts."""
    R = _Mod(M)
    Z = _cocycles(F, R)
    B = _coboundaries(F, R)
    if not set(B) <= set(Z):
        raise AssertionError("oracle: coboundary that is not a cocycle")
    order = len(Z) // len(B)
    if order * len(B) != len(Z):
        raise AssertionError("oracle: |B| does not divide |Z|")
    parts: list[list[int]] = []
    for p in _prime_factors(order):
        logs, j = [0], 1
        while True:
            c = sum(1 for z in Z if tuple(R.scale(x, p ** j) for x in z) in B) // len(B)
            logs.append(round(math.log(c, p)))
            if c == p ** _vp(order, p):
                break
            j += 1
        # number of cyclic p-factors of order >= p^j is logs[j] - logs[j-1]
        ge = [logs[i] - logs[i - 1] for i in range(1, len(logs))] + [0]
        exps = []
        for i in range(len(ge) - 1):
            exps += [i + 1] * (ge[i] - ge[i + 1])
        parts.append(sorted((p ** x for x in exps), reverse=True))
    width = max((len(q) for q in parts), default=0)
    inv = [1] * width
    for q in parts:
        for i, v in enumerate(q):
            inv[i] *= v
    return sorted(inv)


def _vp(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


# ---------------------------------------------------------------------------
# Hausdorff distance with the scalar metric
# ---------------------------------------------------------------------------

def brute_hausdorff(G, A, B) -> float:
    ab = max(min(G.distance(a, b) for b in B) for a in A)
    ba = max(min(G.distance(a, b) for a in A) for b in B)
    return max(ab, ba)


# ---------------------------------------------------------------------------
# center components on a rational grid
# ---------------------------------------------------------------------------

def grid_center_components(action: dict, m: int, n: int = 12) -> tuple[int, int]:
    """(dimension, component count) of the common fixed torus of the action."""
    mats = [np.array(A, dtype=np.int64) for A in action.values()]
    rows = np.vstack([A - np.eye(m, dtype=np.int64) for A in mats])
    dim = m - int(sympy.Matrix(rows).rank())
    pts = [np.array(x) for x in itertools.product(range(n), repeat=m)]
    fixed = [x for x in pts if all(not ((A @ x - x) % n).any() for A in mats)]
    if dim == 0:
        return 0, len(fixed)
    ker = sympy.Matrix(rows).nullspace()
    W = sympy.Matrix.hstack(*ker)
    proj = sympy.eye(m) - W * (W.T * W).inv() * W.T

    def on_identity_component(x):
        for z in itertools.product(range(-2, 3), repeat=m):
            v = sympy.Matrix([Fraction(int(a), n) - b for a, b in zip(x, z)])
            if all(c == 0 for c in proj * v):
                return True
        return False

    comp = sum(1 for x in fixed if on_identity_component(x))
    return dim, len(fixed) // comp


# ---------------------------------------------------------------------------
# Lie algebra oracles
# ---------------------------------------------------------------------------

def sphere_ricci_min(L, samples: int = 100_000, seed: int = 0) -> float:
    """min Ric(v, v) over random unit vectors, Ric(v, v) = 1/4 sum_i |[v, e_i]|^2."""
    n = L.n
    G = np.array(L.gram.tolist(), dtype=float)
    c = np.array([[[float(L.c[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)])
    C = np.linalg.cholesky(G)
    E = np.linalg.inv(C).T  # columns are orthonormal
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(samples, n))
    V /= np.sqrt(np.einsum("si,ij,sj->s", V, G, V))[:, None]
    tot = np.zeros(samples)
    for i in range(n):
        br = np.einsum("sa,b,abk->sk", V, E[:, i], c)
        tot += np.einsum("si,ij,sj->s", br, G, br)
    return float((tot / 4).min())


def derived_dim_rank(L) -> int:
    """Rank of the span of all brackets of basis vectors, exactly."""
    n = L.n
    cols = [[L.c[i][j][k] for k in range(n)] for i in range(n) for j in range(n)]
    return int(sympy.Matrix(cols).rank())


# ---------------------------------------------------------------------------
# irreducibility over Q in rank 2 through eigenvectors
# ---------------------------------------------------------------------------

def _rational_sqrt(q: Fraction):
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def _eigenlines(A) -> list[tuple[Fraction, Fraction]] | None:
    """Rational eigenlines of a 2x2 integer matrix; None means every line is one."""
    a, b, c, d = (Fraction(int(v)) for v in (A[0][0], A[0][1], A[1][0], A[1][1]))
    if b == 0 and c == 0 and a == d:
        return None
    tr, det = a + d, a * d - b * c
    r = _rational_sqrt(tr * tr - 4 * det)
    if r is None:
        return []
    lines = set()
    for lam in {(tr + r) / 2, (tr - r) / 2}:
        # (A - lam) v = 0
        p, q = a - lam, b
        v = (-q, p) if (p != 0 or q != 0) else (-(d - lam), c)
        lines.add(_normalize(v))
    return sorted(lines)


def _normalize(v):
    x, y = v
    s = x if x != 0 else y
    return (x / s, y / s)


def eigen_irreducible_2d(matrices) -> bool:
    """True iff no line in Q^2 is fixed by every matrix."""
    common = None
    for A in matrices:
        ls = _eigenlines(A)
        if ls is None:
            continue
        common = set(ls) if common is None else common & set(ls)
        if not common:
            return True
    return False

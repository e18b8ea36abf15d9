"""Isolation verdicts, approximating subgroup sequences, conjugacy search and
the finite-subgroup gap of SO(3)."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from . import rotations as rot
from .groups import (CompactGroup, Conjugate, CyclicGridSubgroup, FiniteExplicit, FiniteSubgroup,
                     MatrixGroup, SemidirectGroup, SubgroupHandle, Torus)
from .hyperspace import hausdorff_distance
from .lie import LieAlgebraData, Subalgebra, derived_subalgebra, is_perfect


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerfectIdentityComponent:
    pass


@dataclass(frozen=True)
class NonPerfect:
    witness: Subalgebra

    @property
    def codim(self) -> int:
        return self.witness.codim


@dataclass(frozen=True)
class IsolationVerdict:
    isolated: bool
    reason: PerfectIdentityComponent | NonPerfect

    def to_json(self) -> dict:
        out: dict[str, Any] = {"isolated": self.isolated}
        if isinstance(self.reason, NonPerfect):
            out["reason"] = "non-perfect"
            out["derived_dim"] = self.reason.witness.dim
            out["codim"] = self.reason.codim
        else:
            out["reason"] = "perfect identity component"
        return out


def isolation_verdict(L: LieAlgebraData) -> IsolationVerdict:
    """K is isolated up to conjugacy iff the Lie algebra of its identity component is perfect."""
    if is_perfect(L):
        return IsolationVerdict(True, PerfectIdentityComponent())
    return IsolationVerdict(False, NonPerfect(derived_subalgebra(L)))


# ---------------------------------------------------------------------------
# approximating sequences
# ---------------------------------------------------------------------------

def approximation_sequence(G: Torus | SemidirectGroup, ns: Sequence[int]) -> list[CyclicGridSubgroup]:
    """The proper subgroups (C_n)^m x| F of T^m x| F for each n."""
    if not isinstance(G, (Torus, SemidirectGroup)):
        raise TypeError("approximation sequences are built for tori and semidirect products")
    out = []
    for n in ns:
        if int(n) < 1:
            raise ValueError("n must be positive")
        out.append(CyclicGridSubgroup(G, int(n)))
    return out


# ---------------------------------------------------------------------------
# conjugacy search
# ---------------------------------------------------------------------------

@dataclass
class ConjugacySearchResult:
    best_g: Any
    residual: float
    baseline: float
    iterations: int
    converged: bool
    tolerance: float
    error_bound: float
    restarts: list = field(default_factory=list)

    @property
    def status(self) -> str:
        return "converged" if self.converged else "non-converged"


class _Chart:
    """Parametrization of the ambient group used by the search."""

    def __init__(self, G: CompactGroup):
        self.G = G
        if isinstance(G, MatrixGroup):
            self.dim, self.step, self.parts = 3, 0.5, [None]
        elif isinstance(G, SemidirectGroup):
            self.dim, self.step, self.parts = G.m, 0.25, list(G.F.elements)
        elif isinstance(G, Torus):
            self.dim, self.step, self.parts = G.m, 0.25, [None]
        elif isinstance(G, FiniteExplicit):
            self.dim, self.step, self.parts = 0, 0.0, list(G.F.elements)
        else:
            raise TypeError("no search chart for this group")

    def element(self, x, part):
        G = self.G
        if isinstance(G, MatrixGroup):
            return G.exp(np.asarray(x, float))[0]
        if isinstance(G, SemidirectGroup):
            return (tuple(float(v) % 1.0 for v in x), part)
        if isinstance(G, Torus):
            return tuple(float(v) % 1.0 for v in x)
        return part

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        if isinstance(self.G, MatrixGroup):
            v = rng.normal(size=3)
            return v / np.linalg.norm(v) * rng.uniform(0, self.G.chart_radius)
        return rng.uniform(0, 1, size=self.dim)


def conjugacy_search(H: SubgroupHandle, K: SubgroupHandle, ambient: CompactGroup | None = None,
                     budget: int = 2000, tol: float = 1e-6, seed: int = 0, restarts: int = 4,
                     eps: float | None = None) -> ConjugacySearchResult:
    """Minimize g -> d_H(g H g^-1, K) by multi-start Nelder-Mead in chart coordinates.

    The identity is always evaluated first, so the residual never exceeds the
    unconjugated baseline.  ``budget`` caps the total number of objective
    evaluations.
    """
    G = ambient or H.parent
    KS = K.sample(eps)
    HS = H.sample(eps)
    lip = getattr(G, "left_lipschitz", 1.0)
    chart = _Chart(G)
    evals = 0

    def measure(g) -> float:
        nonlocal evals
        evals += 1
        C = Conjugate(G, H, g).sample(eps)
        return hausdorff_distance(C, KS).estimate

    ident = G.identity()
    baseline = measure(ident)
    best = (baseline, ident)
    err_base = HS.mesh + KS.mesh
    log: list = []
    rng = np.random.default_rng(seed)

    if chart.dim == 0:
        for part in chart.parts:
            v = measure(part)
            if v < best[0]:
                best = (v, part)
    else:
        per_part = max(1, budget // max(1, restarts * len(chart.parts)))
        for r in range(restarts):
            x0 = np.zeros(chart.dim) if r == 0 else chart.random_start(rng)
            for part in chart.parts:
                if evals >= budget:
                    break
                simplex = np.vstack([x0] + [x0 + chart.step * e for e in np.eye(chart.dim)])
                f = lambda x: measure(chart.element(x, part))
                res = minimize(f, x0, method="Nelder-Mead",
                               options={"initial_simplex": simplex, "maxfev": per_part,
                                        "xatol": tol * 1e-2, "fatol": tol * 1e-2})
                g = chart.element(res.x, part)
                v = float(res.fun)
                log.append({"restart": r, "part": part, "residual": v, "nfev": int(res.nfev)})
                if v < best[0]:
                    best = (v, g)
            if best[0] <= tol:
                break
    residual, g = best
    err = err_base * (1 + lip)
    return ConjugacySearchResult(g, residual, baseline, evals, residual <= tol + err, tol, err, log)


# ---------------------------------------------------------------------------
# finite-subgroup gap of SO(3)
# ---------------------------------------------------------------------------

@dataclass
class TuringGapResult:
    min_gap: float
    error_bound: float
    argmin: str
    mesh: float
    gaps: dict
    exact: dict
    far_point: Any = None

    @property
    def certified_positive(self) -> bool:
        return self.min_gap - self.error_bound > 0


def default_rotation_candidates(G: MatrixGroup | None = None, max_order: int = 60) -> list[FiniteSubgroup]:
    G = G or MatrixGroup("SO3")
    out = []
    for n in range(1, max_order + 1):
        out.append(FiniteSubgroup(G, tuple(rot.cyclic_rotations(n)), f"C{n}"))
    for n in range(2, max_order // 2 + 1):
        out.append(FiniteSubgroup(G, tuple(rot.dihedral_rotations(n)), f"D{n}"))
    out.append(FiniteSubgroup(G, tuple(rot.tetrahedral_rotations()), "T"))
    out.append(FiniteSubgroup(G, tuple(rot.octahedral_rotations()), "O"))
    out.append(FiniteSubgroup(G, tuple(rot.icosahedral_rotations()), "I"))
    if G.kind == "SU2":
        out = [FiniteSubgroup(G, tuple(rot.binary_lift(np.array(c.elements))), "2" + c.label) for c in out]
    return out


class _NetMax:
    """max over the exp-grid net of x -> min_f d(x, f), by branch and bound.

    Cubes of 2^l grid cells are represented by an inner grid point; every
    point of the cube is within r_l = L * sqrt(3) * h * 2^(l-1) of it, and
    x -> min_f d(x, f) is 1-Lipschitz, so cubes with value + r_l below the
    best net value found so far are discarded.
    """

    def __init__(self, G: MatrixGroup, h: float, top_level: int = 5):
        self.G, self.h = G, h
        self.reach = G.chart_radius + h * math.sqrt(3) / 2
        self.K = int(math.ceil(self.reach / h))
        self.top = top_level
        size = 2 ** top_level
        starts = np.arange(-self.K, self.K + 1, size)
        corners = np.stack(np.meshgrid(starts, starts, starts, indexing="ij"), -1).reshape(-1, 3)
        self.corners = corners[self._alive(corners, top_level)]

    def _alive(self, corners: np.ndarray, level: int) -> np.ndarray:
        size = 2 ** level
        lo = corners
        hi = np.minimum(corners + size - 1, self.K)
        ok = (lo <= self.K).all(axis=1)
        # nearest point of the index box to the origin
        near = np.clip(0, lo, hi)
        return ok & (np.linalg.norm(near * self.h, axis=1) <= self.reach)

    def _values(self, idx: np.ndarray, F: np.ndarray) -> np.ndarray:
        X = self.G.pack(self.G.exp(idx * self.h))
        n2 = 2.0 * self.G.size
        best = np.full(len(X), -np.inf)
        for s in range(0, F.shape[0], 64):
            best = np.maximum(best, (X @ F[s:s + 64].T).max(axis=1))
        return np.sqrt(np.maximum(n2 - 2.0 * best, 0.0))

    def run(self, F: np.ndarray, stop_above: float = np.inf):
        h, G = self.h, self.G
        lip = G.exp_lipschitz
        lb, arg = -np.inf, None
        corners, level = self.corners, self.top
        exact = True
        while len(corners):
            off = (2 ** level - 1) // 2
            reps = np.minimum(corners + off, self.K)
            vals = self._values(reps, F)
            in_net = np.linalg.norm(reps * h, axis=1) <= self.reach
            if in_net.any():
                j = int(np.argmax(np.where(in_net, vals, -np.inf)))
                if vals[j] > lb:
                    lb, arg = float(vals[j]), reps[j].copy()
            if lb > stop_above:
                exact = False
                break
            if level == 0:
                break
            r = lip * math.sqrt(3) * h * 2 ** (level - 1)
            keep = corners[vals + r > lb]
            level -= 1
            size = 2 ** level
            kids = (keep[:, None, :] + size * np.array(
                [[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)])[None]).reshape(-1, 3)
            corners = kids[self._alive(kids, level)]
        return lb, arg, exact

    def nearest_net_distance(self, F: np.ndarray, radius: int = 2) -> float:
        """max over f of the distance from f to the net (local search around log f)."""
        G, h = self.G, self.h
        elems = G.unpack(F)
        W = G.log_batch(np.array(elems))
        rng = np.arange(-radius, radius + 1)
        offs = np.stack(np.meshgrid(rng, rng, rng, indexing="ij"), -1).reshape(-1, 3)
        worst = 0.0
        for w, f in zip(W, F):
            reps = [w]
            nw = np.linalg.norm(w)
            if nw > G.chart_radius - 1e-6 and nw > 0:
                reps.append(w - 2 * G.chart_radius * w / nw if G.kind == "SU2" else -w)
            best = np.inf
            for c in reps:
                idx = np.rint(c / h).astype(int)[None] + offs
                idx = idx[np.linalg.norm(idx * h, axis=1) <= self.reach]
                if len(idx):
                    d = G.pairwise(f[None], G.pack(G.exp(idx * h)))[0]
                    best = min(best, float(d.min()))
            worst = max(worst, best)
        return worst


def turing_gap(G: MatrixGroup | None = None, candidates: Sequence[FiniteSubgroup] | None = None,
               mesh: float = 0.02) -> TuringGapResult:
    """Smallest Hausdorff distance from a finite subgroup to the whole group.

    The group is represented by an exp-grid net of certified ``mesh``.  For
    each candidate the sampled estimate (max over net points of the distance
    to the candidate) is found by branch and bound; a candidate is abandoned
    as soon as its partial value exceeds the best gap found so far.
    """
    G = G or MatrixGroup("SO3")
    if candidates is None:
        candidates = default_rotation_candidates(G)
    h = mesh / (G.exp_lipschitz * math.sqrt(3) / 2)
    net_mesh = G.exp_lipschitz * math.sqrt(3) / 2 * h
    solver = _NetMax(G, h)
    # small-gap candidates first makes the early exit effective
    order = sorted(range(len(candidates)), key=lambda i: -len(candidates[i]))
    best, best_i, far = np.inf, -1, None
    gaps, exact = {}, {}
    for i in order:
        C = candidates[i]
        F = G.pack(list(C.elements))
        val, arg, ex = solver.run(F, stop_above=best)
        if ex:
            val = max(val, solver.nearest_net_distance(F))
        label = C.label or f"#{i}"
        gaps[label], exact[label] = val, ex
        if ex and (val < best or (val == best and i < best_i)):
            best, best_i, far = val, i, arg
    label = candidates[best_i].label or f"#{best_i}"
    far_elem = G.exp(far * h)[0] if far is not None else None
    return TuringGapResult(best, net_mesh + G.tau, label, net_mesh, gaps, exact, far_elem)

"""Concrete compact groups realized as samplable metric groups, and their subgroups.

Four descriptor kinds are supported: explicit finite groups, tori ``T^m``,
semidirect products ``T^m x|_alpha F`` with an integer-matrix action, and the
matrix groups SO(3) and SU(2).  Each group exposes the group law, a
compatible metric (both a scalar pure-Python version and a vectorized one
over packed feature arrays) and an epsilon-net generator.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from . import rotations as rot
from ._zlinalg import integer_invariant_factors
from .finite import FiniteGroup

TAU_FLOAT = 1e-9


class GroupError(ValueError):
    pass


def _mod1(x):
    return x % 1


def _torus_feature(t) -> list[float]:
    return [float(c) for c in t]


# ---------------------------------------------------------------------------
# sample sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SampleSet:
    """Finite sample of a compact subset with a certified net radius.

    ``mesh`` is an upper bound on the distance from any point of the
    represented set to the nearest sample point; 0 means the set is exactly
    the listed points.
    """

    group: "CompactGroup"
    points: tuple
    mesh: float = 0.0
    _features: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mesh < 0:
            raise ValueError("mesh must be non-negative")
        if self._features is None and len(self.points) == 0:
            raise ValueError("sample sets are non-empty")

    @classmethod
    def from_features(cls, group: "CompactGroup", features: np.ndarray, mesh: float) -> "SampleSet":
        if len(features) == 0:
            raise ValueError("sample sets are non-empty")
        return cls(group, (), mesh, np.ascontiguousarray(features, dtype=float))

    @cached_property
    def features(self) -> np.ndarray:
        if self._features is not None:
            return self._features
        return self.group.pack(self.points)

    @cached_property
    def elements(self) -> tuple:
        if self.points:
            return self.points
        return tuple(self.group.unpack(self._features))

    def __len__(self) -> int:
        return len(self.points) if self.points else len(self._features)


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

class CompactGroup(ABC):
    """Interface shared by all samplable groups."""

    name: str = "G"
    exact: bool = True
    dim: int = 0

    @property
    def tau(self) -> float:
        return 0.0 if self.exact else TAU_FLOAT

    @abstractmethod
    def identity(self): ...

    @abstractmethod
    def multiply(self, a, b): ...

    @abstractmethod
    def inverse(self, a): ...

    @abstractmethod
    def distance(self, a, b) -> float:
        """Scalar metric, evaluated in plain Python floats."""

    @abstractmethod
    def pack(self, points) -> np.ndarray: ...

    @abstractmethod
    def unpack(self, features: np.ndarray) -> list: ...

    @abstractmethod
    def pairwise(self, FA: np.ndarray, FB: np.ndarray) -> np.ndarray:
        """Distance matrix between packed feature rows (same float ops as ``distance``)."""

    @abstractmethod
    def eps_net(self, eps: float) -> SampleSet: ...

    @abstractmethod
    def contains(self, x) -> bool: ...

    def conjugate(self, g, h):
        return self.multiply(self.multiply(g, h), self.inverse(g))

    def conjugation_lipschitz(self, g) -> float:
        return 1.0

    left_lipschitz: float = 1.0

    def equal(self, a, b) -> bool:
        return self.distance(a, b) <= self.tau

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def _sequential_sqdist(FA: np.ndarray, FB: np.ndarray, wrap: bool) -> np.ndarray:
    s = None
    for k in range(FA.shape[1]):
        d = FA[:, None, k] - FB[None, :, k]
        if wrap:
            d = d - np.floor(d + 0.5)
        sq = d * d
        s = sq if s is None else s + sq
    return s


def _scalar_sqdist(a: Sequence[float], b: Sequence[float], wrap: bool) -> float:
    s = None
    for x, y in zip(a, b):
        d = x - y
        if wrap:
            d = d - math.floor(d + 0.5)
        sq = d * d
        s = sq if s is None else s + sq
    return 0.0 if s is None else s


class FiniteExplicit(CompactGroup):
    """An abstract finite group with the discrete metric."""

    def __init__(self, F: FiniteGroup):
        self.F = F
        self.name = F.name

    def identity(self):
        return self.F.identity

    def multiply(self, a, b):
        return self.F.mul(a, b)

    def inverse(self, a):
        return self.F.inv(a)

    def distance(self, a, b) -> float:
        return 0.0 if a == b else 1.0

    def pack(self, points):
        return np.array([[float(self.F.index[p])] for p in points])

    def unpack(self, features):
        return [self.F.elements[int(round(x))] for x in features[:, 0]]

    def pairwise(self, FA, FB):
        return np.where(FA[:, None, 0] == FB[None, :, 0], 0.0, 1.0)

    def eps_net(self, eps: float) -> SampleSet:
        if eps <= 0:
            raise ValueError("eps must be positive")
        return SampleSet(self, tuple(self.F.elements), 0.0)

    def contains(self, x) -> bool:
        return x in self.F.index


class Torus(CompactGroup):
    """T^m = R^m / Z^m; elements are tuples of Fractions (or floats) in [0, 1)."""

    def __init__(self, m: int):
        if m <= 0:
            raise GroupError("torus dimension must be positive")
        self.m = m
        self.dim = m
        self.name = f"T{m}"

    @property
    def diameter(self) -> float:
        return math.sqrt(self.m) / 2

    def element(self, coords) -> tuple:
        if len(coords) != self.m:
            raise GroupError("wrong number of torus coordinates")
        return tuple(_mod1(c if isinstance(c, (float, Fraction)) else Fraction(c)) for c in coords)

    def identity(self):
        return tuple(Fraction(0) for _ in range(self.m))

    def multiply(self, a, b):
        return tuple(_mod1(x + y) for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(_mod1(-x) for x in a)

    def distance(self, a, b) -> float:
        return math.sqrt(_scalar_sqdist(_torus_feature(a), _torus_feature(b), True))

    def pack(self, points):
        return np.array([_torus_feature(p) for p in points], dtype=float).reshape(-1, self.m)

    def unpack(self, features):
        return [tuple(float(x) % 1.0 for x in row) for row in features]

    def pairwise(self, FA, FB):
        return np.sqrt(_sequential_sqdist(FA, FB, True))

    def grid(self, n: int) -> list[tuple]:
        ticks = [Fraction(k, n) for k in range(n)]
        return [tuple(c) for c in itertools.product(ticks, repeat=self.m)]

    def grid_mesh(self, n: int) -> float:
        return math.sqrt(self.m) / (2 * n)

    def eps_net(self, eps: float) -> SampleSet:
        if eps <= 0:
            raise ValueError("eps must be positive")
        n = int(math.floor(math.sqrt(self.m) / (2 * eps))) + 1
        return SampleSet.from_features(self, self._grid_features(n), self.grid_mesh(n))

    def _grid_features(self, n: int) -> np.ndarray:
        t = np.arange(n) / n
        mesh = np.meshgrid(*([t] * self.m), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.m)

    def contains(self, x) -> bool:
        return len(x) == self.m and all(0 <= c < 1 for c in x)


class SemidirectGroup(CompactGroup):
    """T^m x|_alpha F with law (t1, g1)(t2, g2) = (t1 + alpha(g1) t2, g1 g2).

    The metric is the torus metric inside one F-component and the constant
    ``1 + diam(T^m)`` across components.
    """

    def __init__(self, m: int, F: FiniteGroup, action: Mapping[str, Sequence[Sequence[int]]], name: str = ""):
        if m <= 0:
            raise GroupError("torus dimension must be positive")
        self.m = m
        self.dim = m
        self.F = F
        self.action = {g: np.array(action[g], dtype=np.int64).reshape(m, m) for g in F.elements}
        self.name = name or f"T{m}x{F.name}"
        self._check_action()
        self._op_norm = {g: float(np.linalg.norm(A.astype(float), 2)) for g, A in self.action.items()}
        self.left_lipschitz = max(self._op_norm.values())

    def _check_action(self):
        I = np.eye(self.m, dtype=np.int64)
        if not np.array_equal(self.action[self.F.identity], I):
            raise GroupError("action of the identity must be the identity matrix")
        for g, A in self.action.items():
            if abs(round(np.linalg.det(A))) != 1:
                raise GroupError(f"action matrix of {g} is not unimodular")
        for g in self.F.elements:
            for h in self.F.elements:
                if not np.array_equal(self.action[g] @ self.action[h], self.action[self.F.mul(g, h)]):
                    raise GroupError(f"action is not a homomorphism at ({g}, {h})")

    @property
    def torus(self) -> Torus:
        return Torus(self.m)

    @property
    def diameter(self) -> float:
        return 1.0 + math.sqrt(self.m) / 2

    def act(self, g: str, t) -> tuple:
        A = self.action[g]
        return tuple(_mod1(sum(int(A[i, j]) * t[j] for j in range(self.m))) for i in range(self.m))

    def element(self, coords, g: str) -> tuple:
        return (Torus(self.m).element(coords), g)

    def identity(self):
        return (tuple(Fraction(0) for _ in range(self.m)), self.F.identity)

    def multiply(self, a, b):
        (t1, g1), (t2, g2) = a, b
        s = self.act(g1, t2)
        return (tuple(_mod1(x + y) for x, y in zip(t1, s)), self.F.mul(g1, g2))

    def inverse(self, a):
        t, g = a
        gi = self.F.inv(g)
        s = self.act(gi, t)
        return (tuple(_mod1(-x) for x in s), gi)

    def distance(self, a, b) -> float:
        if a[1] != b[1]:
            return self.diameter
        return math.sqrt(_scalar_sqdist(_torus_feature(a[0]), _torus_feature(b[0]), True))

    def pack(self, points):
        rows = [_torus_feature(t) + [float(self.F.index[g])] for t, g in points]
        return np.array(rows, dtype=float).reshape(-1, self.m + 1)

    def unpack(self, features):
        return [(tuple(float(x) % 1.0 for x in row[:-1]), self.F.elements[int(round(row[-1]))])
                for row in features]

    def pairwise(self, FA, FB):
        d = np.sqrt(_sequential_sqdist(FA[:, :-1], FB[:, :-1], True))
        same = FA[:, None, -1] == FB[None, :, -1]
        return np.where(same, d, self.diameter)

    def grid(self, n: int) -> list[tuple]:
        return [(t, g) for g in self.F.elements for t in Torus(self.m).grid(n)]

    def eps_net(self, eps: float) -> SampleSet:
        if eps <= 0:
            raise ValueError("eps must be positive")
        T = Torus(self.m)
        n = int(math.floor(math.sqrt(self.m) / (2 * eps))) + 1
        base = T._grid_features(n)
        blocks = [np.hstack([base, np.full((len(base), 1), float(i))]) for i in range(len(self.F))]
        return SampleSet.from_features(self, np.vstack(blocks), T.grid_mesh(n))

    def contains(self, x) -> bool:
        t, g = x
        return g in self.F.index and Torus(self.m).contains(t)

    def conjugation_lipschitz(self, g) -> float:
        return self._op_norm[g[1]]

    def rep(self):
        from .intrep import IntegerRep
        return IntegerRep(self.F, {g: A.tolist() for g, A in self.action.items()})

    def to_json(self) -> dict:
        return {"type": "semidirect", "m": self.m, "elements": list(self.F.elements),
                "table": self.F.table(), "action": {g: A.tolist() for g, A in self.action.items()}}


class MatrixGroup(CompactGroup):
    """SO(3) or SU(2) with the Frobenius metric."""

    exact = False
    dim = 3

    def __init__(self, kind: str):
        kind = kind.upper()
        if kind not in ("SO3", "SU2"):
            raise GroupError(f"unsupported matrix group {kind!r}")
        self.kind = kind
        self.name = kind
        self.size = 3 if kind == "SO3" else 2
        # Frobenius-Lipschitz constant of exp w.r.t. the Euclidean norm of the
        # chart coordinates (|w| = rotation angle for SO3, half-angle*2 for SU2)
        self.exp_lipschitz = math.sqrt(2) if kind == "SO3" else math.sqrt(2) / 2
        self.chart_radius = math.pi if kind == "SO3" else 2 * math.pi

    @property
    def diameter(self) -> float:
        return 2 * math.sqrt(2)

    def identity(self):
        return np.eye(self.size, dtype=float if self.kind == "SO3" else complex)

    def multiply(self, a, b):
        return np.asarray(a) @ np.asarray(b)

    def inverse(self, a):
        return np.asarray(a).conj().T

    def exp(self, w) -> np.ndarray:
        """Stack of exponentials; a single vector gives a stack of one."""
        return rot.rodrigues(w) if self.kind == "SO3" else rot.su2_exp(w)

    def log(self, g) -> np.ndarray:
        return rot.so3_log(g) if self.kind == "SO3" else rot.su2_log(g)

    def log_batch(self, gs) -> np.ndarray:
        return rot.so3_log_batch(gs) if self.kind == "SO3" else rot.su2_log_batch(gs)

    def _flat(self, a) -> list[float]:
        a = np.asarray(a)
        if self.kind == "SO3":
            return [float(x) for x in a.reshape(-1)]
        out = []
        for z in a.reshape(-1):
            out += [float(z.real), float(z.imag)]
        return out

    def distance(self, a, b) -> float:
        return math.sqrt(_scalar_sqdist(self._flat(a), self._flat(b), False))

    def pack(self, points):
        arr = np.asarray(points)
        if arr.ndim == 2:
            arr = arr[None]
        if self.kind == "SO3":
            return np.ascontiguousarray(arr.reshape(len(arr), 9).real.astype(float))
        flat = arr.reshape(len(arr), 4)
        out = np.empty((len(arr), 8))
        out[:, 0::2] = flat.real
        out[:, 1::2] = flat.imag
        return out

    def unpack(self, features):
        if self.kind == "SO3":
            return list(features.reshape(-1, 3, 3))
        z = features[:, 0::2] + 1j * features[:, 1::2]
        return list(z.reshape(-1, 2, 2))

    def pairwise(self, FA, FB):
        return np.sqrt(_sequential_sqdist(FA, FB, False))

    def chart_grid(self, spacing: float, radius: float | None = None) -> np.ndarray:
        """Cubic grid of chart coordinates covering the ball of ``radius``."""
        R = self.chart_radius if radius is None else radius
        reach = R + spacing * math.sqrt(3) / 2
        k = int(math.ceil(reach / spacing))
        t = np.arange(-k, k + 1) * spacing
        g = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1).reshape(-1, 3)
        return g[np.linalg.norm(g, axis=1) <= reach]

    def eps_net(self, eps: float) -> SampleSet:
        """Exponential-chart grid; certified mesh = exp_lipschitz * sqrt(3)/2 * spacing."""
        if eps <= 0:
            raise ValueError("eps must be positive")
        spacing = eps / 2 if self.kind == "SO3" else eps
        pts = self.exp(self.chart_grid(spacing))
        mesh = self.exp_lipschitz * math.sqrt(3) / 2 * spacing
        return SampleSet.from_features(self, self.pack(pts), mesh)

    def quaternion_net(self, mesh: float) -> SampleSet:
        """Independent net from a cube grid on S^3 (used as an oracle)."""
        # quaternion distance -> Frobenius: SO3 factor 2 sqrt 2, SU2 factor sqrt 2
        factor = 2 * math.sqrt(2) if self.kind == "SO3" else math.sqrt(2)
        steps = int(math.ceil(factor * math.sqrt(3) / mesh))
        q = rot.quaternion_cube_grid(steps)
        if self.kind == "SO3":
            q = q[(q[:, 0] > 1e-12) | ((np.abs(q[:, 0]) <= 1e-12) & (q[:, 1:] @ [4.0, 2.0, 1.0] >= 0))]
            pts = rot.quat_to_so3(q)
        else:
            pts = rot.quat_to_su2(q)
        return SampleSet.from_features(self, self.pack(pts), factor * math.sqrt(3) / steps)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        if x.shape != (self.size, self.size):
            return False
        if not np.allclose(x.conj().T @ x, np.eye(self.size), atol=1e-8):
            return False
        return abs(np.linalg.det(x) - 1) < 1e-8


# ---------------------------------------------------------------------------
# subgroup handles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SubgroupHandle:
    """A compact subgroup of ``parent`` together with a way to sample it."""

    parent: CompactGroup

    @property
    def exact(self) -> bool:
        return False

    @property
    def finite(self) -> bool:
        return False

    def sample(self, eps: float | None = None) -> SampleSet:
        raise NotImplementedError

    def check_closure(self, eps: float | None = None) -> bool:
        """Sampled elements closed under products and inverses up to tolerance."""
        S = self.sample(eps)
        G = self.parent
        tol = S.mesh * (1 + G.left_lipschitz) + G.tau + S.mesh
        pts = S.elements
        feats = S.features
        for a in pts:
            prods = G.pack([G.multiply(a, b) for b in pts] + [G.inverse(a)])
            if G.pairwise(prods, feats).min(axis=1).max() > tol + 1e-12:
                return False
        return True


@dataclass(frozen=True, eq=False)
class Full(SubgroupHandle):
    def sample(self, eps=None):
        if eps is None:
            raise ValueError("sampling the full group needs eps")
        return self.parent.eps_net(eps)


@dataclass(frozen=True, eq=False)
class FiniteSubgroup(SubgroupHandle):
    elements: tuple = ()
    label: str = ""

    def __post_init__(self):
        if not self.elements:
            raise GroupError("finite subgroup needs elements")

    @property
    def exact(self):
        return True

    @property
    def finite(self):
        return True

    def __len__(self):
        return len(self.elements)

    def sample(self, eps=None):
        return SampleSet(self.parent, tuple(self.elements), 0.0)


@dataclass(frozen=True, eq=False)
class CyclicGridSubgroup(SubgroupHandle):
    """(C_n)^m (x| F) inside a torus or semidirect product."""

    n: int = 1

    def __post_init__(self):
        if not isinstance(self.parent, (Torus, SemidirectGroup)):
            raise GroupError("cyclic grids live in tori or semidirect products")
        if self.n < 1:
            raise GroupError("n must be positive")

    @property
    def exact(self):
        return True

    @property
    def finite(self):
        return True

    @cached_property
    def elements(self) -> tuple:
        return tuple(self.parent.grid(self.n))

    def __len__(self):
        return len(self.elements)

    def sample(self, eps=None):
        return SampleSet(self.parent, self.elements, 0.0)


@dataclass(frozen=True, eq=False)
class Conjugate(SubgroupHandle):
    inner: SubgroupHandle | None = None
    by: Any = None

    @property
    def exact(self):
        return self.inner.exact and self.parent.exact

    @property
    def finite(self):
        return self.inner.finite

    def sample(self, eps=None):
        S = self.inner.sample(eps)
        G = self.parent
        pts = tuple(G.conjugate(self.by, h) for h in S.elements)
        return SampleSet(G, pts, S.mesh * G.conjugation_lipschitz(self.by))


def conjugate_subgroup(H: SubgroupHandle, g) -> Conjugate:
    """The subgroup g H g^-1."""
    if not H.parent.contains(g):
        raise GroupError("conjugating element is not in the parent group")
    return Conjugate(H.parent, H, g)


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------

def build_semidirect(m: int, rep, name: str = "") -> SemidirectGroup:
    """T^m x|_rep F from a verified integer representation."""
    if m <= 0:
        raise GroupError("m must be positive")
    if rep.m != m:
        raise GroupError("representation has the wrong degree")
    rep.verify()
    return SemidirectGroup(m, rep.group, rep.matrices, name=name)


def eps_net(G: CompactGroup, eps: float) -> SampleSet:
    return G.eps_net(eps)


def center_components(G: SemidirectGroup) -> tuple[int, int]:
    """(dimension, number of components) of the center of a faithful T^m x| F.

    The center is Fix(alpha) x {e}; Fix(alpha) is read off the Smith form of
    the stacked matrices alpha(g) - I.
    """
    I = np.eye(G.m, dtype=np.int64)
    kernel = [g for g, A in G.action.items() if np.array_equal(A, I)]
    if len(kernel) > 1:
        raise GroupError("action is not faithful")
    rows: list[list[int]] = []
    for g in G.F.elements:
        rows += (G.action[g] - I).tolist()
    factors = integer_invariant_factors(rows)
    nonzero = [d for d in factors if d != 0]
    comps = 1
    for d in nonzero:
        comps *= d
    return G.m - len(nonzero), comps


def so3() -> MatrixGroup:
    return MatrixGroup("SO3")


def su2() -> MatrixGroup:
    return MatrixGroup("SU2")


def rotation_subgroup(G: MatrixGroup, mats, label: str = "") -> FiniteSubgroup:
    return FiniteSubgroup(G, tuple(np.asarray(m) for m in mats), label)


def group_alpha() -> SemidirectGroup:
    from .intrep import IntegerRep
    return build_semidirect(2, IntegerRep.example_alpha(), name="G_alpha")


def group_beta() -> SemidirectGroup:
    from .intrep import IntegerRep
    return build_semidirect(2, IntegerRep.example_beta(), name="G_beta")


def group_from_json(data: Mapping) -> CompactGroup:
    """Parse a JSON group descriptor (or a named preset string)."""
    if isinstance(data, str):
        presets = {"G_alpha": group_alpha, "G_beta": group_beta, "SO3": so3, "SU2": su2,
                   "T": lambda: Torus(1), "T1": lambda: Torus(1), "T2": lambda: Torus(2)}
        if data not in presets:
            raise GroupError(f"unknown group preset {data!r}")
        return presets[data]()
    kind = data.get("type")
    if kind == "torus":
        return Torus(int(data["m"]))
    if kind in ("SO3", "SU2", "matrix"):
        return MatrixGroup(data.get("name", kind))
    if kind == "finite":
        return FiniteExplicit(FiniteGroup.from_json(data))
    if kind == "semidirect":
        F = FiniteGroup.from_json(data)
        for row in data["action"].values():
            for r in row:
                for v in r:
                    if not isinstance(v, int):
                        raise GroupError("action entries must be integers")
        return SemidirectGroup(int(data["m"]), F, data["action"], name=data.get("name", ""))
    raise GroupError(f"unknown group descriptor type {kind!r}")

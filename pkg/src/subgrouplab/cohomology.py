"""Low-degree cohomology of finite groups with finite coefficients.

Cochains are normalized (vanish when an argument is the identity) and the
coboundaries are the left-action bar formulas

    (da)(g, h)     = a(g) + g.a(h) - a(gh)
    (df)(g, h, k)  = g.f(h, k) - f(gh, k) + f(g, hk) - f(g, h).

H^2 is computed prime by prime with a Smith form over Z/p^a.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from ._zlinalg import LocalSmith, factorize, lcm_all, solve_mod
from .finite import FiniteGroup


class CohomologyError(ValueError):
    pass


class NoSolution(CohomologyError):
    """m [f_s] is nonzero in the finite surrogate."""


class FiniteModule:
    """M = Z/k_1 + ... + Z/k_r with F acting through integer matrices."""

    def __init__(self, group: FiniteGroup, factors: Sequence[int],
                 action: Mapping[str, Sequence[Sequence[int]]] | None = None):
        self.group = group
        self.factors = tuple(int(k) for k in factors)
        if any(k < 1 for k in self.factors):
            raise CohomologyError("invariant factors must be positive")
        r = len(self.factors)
        self.r = r
        I = np.eye(r, dtype=np.int64)
        if action is None:
            action = {g: I for g in group.elements}
        self.action = {g: np.array(action[g], dtype=np.int64).reshape(r, r) for g in group.elements}
        self._k = np.array(self.factors, dtype=np.int64)
        self._validate()

    def _validate(self) -> None:
        k = self._k
        for g, A in self.action.items():
            # column j must send k_j to 0 mod every k_i
            if ((A * k[None, :]) % k[:, None]).any():
                raise CohomologyError(f"action of {g} is not well defined on the factors")
        e = self.group.identity
        if not self.equal_maps(self.action[e], np.eye(self.r, dtype=np.int64)):
            raise CohomologyError("identity must act trivially")
        for g in self.group.elements:
            for h in self.group.elements:
                gh = self.group.mul(g, h)
                if not self.equal_maps(self.action[g] @ self.action[h], self.action[gh]):
                    raise CohomologyError(f"action is not a homomorphism at ({g}, {h})")

    def equal_maps(self, A, B) -> bool:
        return not ((np.asarray(A) - np.asarray(B)) % self._k[:, None]).any()

    @property
    def order(self) -> int:
        out = 1
        for k in self.factors:
            out *= k
        return out

    @property
    def exponent(self) -> int:
        return lcm_all(self.factors)

    def zero(self) -> tuple:
        return (0,) * self.r

    def reduce(self, x) -> tuple:
        return tuple(int(v) for v in np.asarray(x, dtype=np.int64) % self._k)

    def add(self, x, y) -> tuple:
        return self.reduce(np.add(x, y))

    def neg(self, x) -> tuple:
        return self.reduce(np.negative(x))

    def scale(self, c: int, x) -> tuple:
        return self.reduce(c * np.asarray(x, dtype=np.int64))

    def act(self, g: str, x) -> tuple:
        return self.reduce(self.action[g] @ np.asarray(x, dtype=np.int64))

    def elements(self):
        for x in itertools.product(*(range(k) for k in self.factors)):
            yield tuple(x)

    def __repr__(self) -> str:
        return f"FiniteModule({self.group.name}, {self.factors})"

    @classmethod
    def trivial_action(cls, group: FiniteGroup, factors: Sequence[int]) -> "FiniteModule":
        return cls(group, factors)

    @classmethod
    def from_generators(cls, group: FiniteGroup, factors: Sequence[int],
                        gen_action: Mapping[str, Sequence[Sequence[int]]]) -> "FiniteModule":
        """Extend matrices given on generators to all of the group by words."""
        gens = list(gen_action)
        r = len(factors)
        words = group._words(gens)
        if len(words) != len(group):
            raise CohomologyError("listed elements do not generate the group")
        mats = {g: np.array(gen_action[g], dtype=np.int64).reshape(r, r) for g in gens}
        action = {}
        for g, w in words.items():
            A = np.eye(r, dtype=np.int64)
            for k in w:
                A = A @ mats[gens[k]]
            action[g] = A
        return cls(group, factors, action)


# ---------------------------------------------------------------------------
# cochains
# ---------------------------------------------------------------------------

@dataclass
class CochainTable:
    """Normalized 1- or 2-cochain; missing keys mean 0."""

    module: FiniteModule
    degree: int
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise CohomologyError("only degrees 1 and 2 are supported")
        self.values = {k: self.module.reduce(v) for k, v in self.values.items()}

    def __call__(self, *args) -> tuple:
        return self.values.get(args if self.degree == 2 else args[0], self.module.zero())

    @property
    def normalized(self) -> bool:
        e = self.module.group.identity
        return all(not any(v) for k, v in self.values.items()
                   if (k == e if self.degree == 1 else e in k))

    def is_zero(self) -> bool:
        return all(not any(v) for v in self.values.values())

    def __add__(self, other: "CochainTable") -> "CochainTable":
        keys = set(self.values) | set(other.values)
        return CochainTable(self.module, self.degree,
                            {k: self.module.add(self.values.get(k, self.module.zero()),
                                                other.values.get(k, self.module.zero())) for k in keys})

    def __sub__(self, other: "CochainTable") -> "CochainTable":
        return self + other.scaled(-1)

    def scaled(self, c: int) -> "CochainTable":
        return CochainTable(self.module, self.degree, {k: self.module.scale(c, v) for k, v in self.values.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, CochainTable) and self.degree == other.degree and (self - other).is_zero()

    def is_cocycle(self) -> bool:
        if self.degree != 2:
            raise CohomologyError("cocycle test is for degree 2")
        M, F = self.module, self.module.group
        f = self
        for g, h, k in itertools.product(F.elements, repeat=3):
            lhs = M.add(M.act(g, f(h, k)), f(g, F.mul(h, k)))
            rhs = M.add(f(F.mul(g, h), k), f(g, h))
            if lhs != rhs:
                return False
        return True

    def to_json(self) -> dict:
        key = (lambda k: k) if self.degree == 1 else (lambda k: ",".join(k))
        return {"degree": self.degree, "factors": list(self.module.factors),
                "values": {key(k): list(v) for k, v in sorted(self.values.items()) if any(v)}}


def coboundary(a: CochainTable) -> CochainTable:
    """(da)(g, h) = a(g) + g.a(h) - a(gh)."""
    if a.degree != 1:
        raise CohomologyError("coboundary expects a 1-cochain")
    if not a.normalized:
        raise CohomologyError("1-cochain is not normalized")
    M, F = a.module, a.module.group
    vals = {}
    for g, h in itertools.product(F.elements, repeat=2):
        v = M.add(M.add(a(g), M.act(g, a(h))), M.neg(a(F.mul(g, h))))
        if any(v):
            vals[(g, h)] = v
    return CochainTable(M, 2, vals)


# ---------------------------------------------------------------------------
# H^2
# ---------------------------------------------------------------------------

MAX_F = 12
MAX_RANK = 3


def _coboundary_matrices(M: FiniteModule):
    """Integer matrices of d1 and d2 on normalized cochains.

    Returns (D1, D2, col_mod1, col_mod2, row_mod2) where the *_mod arrays give
    the modulus k_i of each coordinate.
    """
    F = M.group
    ne = [g for g in F.elements if g != F.identity]
    idx1 = {g: n for n, g in enumerate(ne)}
    pairs = [(g, h) for g in ne for h in ne]
    idx2 = {p: n for n, p in enumerate(pairs)}
    r = M.r
    k = np.array(M.factors, dtype=np.int64)
    D1 = np.zeros((len(pairs) * r, len(ne) * r), dtype=np.int64)
    for (g, h), row in idx2.items():
        R = row * r
        D1[R:R + r, idx1[g] * r: idx1[g] * r + r] += np.eye(r, dtype=np.int64)
        D1[R:R + r, idx1[h] * r: idx1[h] * r + r] += M.action[g]
        gh = F.mul(g, h)
        if gh != F.identity:
            D1[R:R + r, idx1[gh] * r: idx1[gh] * r + r] -= np.eye(r, dtype=np.int64)
    triples = list(itertools.product(ne, repeat=3))
    D2 = np.zeros((len(triples) * r, len(pairs) * r), dtype=np.int64)
    I = np.eye(r, dtype=np.int64)

    def put(R, pair, block):
        a, b = pair
        if a == F.identity or b == F.identity:
            return
        c = idx2[pair] * r
        D2[R:R + r, c:c + r] += block

    for t, (g, h, l) in enumerate(triples):
        R = t * r
        put(R, (h, l), M.action[g])
        put(R, (F.mul(g, h), l), -I)
        put(R, (g, F.mul(h, l)), I)
        put(R, (g, h), -I)
    col1 = np.tile(k, len(ne))
    col2 = np.tile(k, len(pairs))
    row2 = np.tile(k, len(triples))
    return D1, D2, col1, col2, row2


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0 and n:
        n //= p
        v += 1
    return v


def _h2_local(D1, D2, col2, row2, p: int, a: int) -> list[int]:
    """Exponents of the p-primary part of H^2."""
    R = p**a
    vp = np.vectorize(lambda n: _vp(int(n), p))
    e_col = vp(col2)
    e_row = vp(row2)
    # cocycle rows live mod p^e_row: scale them into Z/p^a
    scale = np.array([p ** (a - int(e)) for e in e_row], dtype=np.int64)
    A = (D2 % R) * scale[:, None] % R
    ls = LocalSmith(A, p, a, track_qinv=True)
    n2 = D2.shape[1]
    f = np.zeros(n2, dtype=np.int64)
    f[:ls.rank] = [max(0, a - s) for s in ls.exponents]
    # generators of coboundaries plus the zero lattice of the cochain group
    gens = np.hstack([D1 % R, np.diag([p ** int(e) for e in e_col]).astype(np.int64) % R])
    Z = (ls.Qinv @ gens) % R
    pf = np.array([p ** int(x) for x in f], dtype=np.int64)
    if ((Z % pf[:, None]) != 0).any():
        raise CohomologyError("internal: coboundary not inside the cocycle module")
    C = Z // pf[:, None]
    rel = np.hstack([np.diag([p ** int(a - x) for x in f]).astype(np.int64), C])
    ls2 = LocalSmith(rel, p, a + 1)
    return sorted((e for e in ls2.exponents if e > 0), reverse=True)


def h2(F: FiniteGroup, M: FiniteModule) -> list[int]:
    """Invariant factors (ascending, divisibility chain) of H^2(F; M)."""
    if M.group is not F and M.group.elements != F.elements:
        raise CohomologyError("module is over a different group")
    if len(F) > MAX_F or M.r > MAX_RANK:
        raise CohomologyError(f"size limit exceeded (|F| <= {MAX_F}, rank <= {MAX_RANK})")
    if len(F) == 1 or M.order == 1:
        return []
    D1, D2, _, col2, row2 = _coboundary_matrices(M)
    parts = []
    for p, a in factorize(M.exponent).items():
        parts.append([p**e for e in _h2_local(D1, D2, col2, row2, p, a)])
    width = max((len(x) for x in parts), default=0)
    out = []
    for i in range(width):
        d = 1
        for x in parts:
            if i < len(x):
                d *= x[i]
        out.append(d)
    return sorted(out)


# ---------------------------------------------------------------------------
# extensions
# ---------------------------------------------------------------------------

class Extension:
    """A finite group E with abelian normal T and quotient map pi: E -> F.

    ``T_coords`` identifies T with (Z/N)^d; when omitted and T is cyclic the
    coordinates are taken from a generator.
    """

    def __init__(self, E: FiniteGroup, T: Sequence[str], pi: Mapping[str, str],
                 T_coords: Mapping[str, Sequence[int]] | None = None, N: int | None = None):
        self.E = E
        self.T = tuple(T)
        self.pi = dict(pi)
        Tset = set(self.T)
        if E.identity not in Tset:
            raise CohomologyError("T must contain the identity")
        for x in self.T:
            for y in self.T:
                if E.mul(x, y) not in Tset or E.mul(x, y) != E.mul(y, x):
                    raise CohomologyError("T is not an abelian subgroup")
            for g in E.elements:
                if E.mul(E.mul(g, x), E.inv(g)) not in Tset:
                    raise CohomologyError("T is not normal")
        self.F = self._quotient_group()
        kernel = {x for x in E.elements if self.pi[x] == self.F.identity}
        if kernel != Tset:
            raise CohomologyError("kernel of pi is not T")
        self._set_coords(T_coords, N)

    def _quotient_group(self) -> FiniteGroup:
        E, pi = self.E, self.pi
        ids = []
        lift = {}
        for x in E.elements:
            if pi[x] not in lift:
                lift[pi[x]] = x
                ids.append(pi[x])
        table = [[pi[E.mul(lift[a], lift[b])] for b in ids] for a in ids]
        for x in E.elements:
            for y in E.elements:
                if pi[E.mul(x, y)] != table[ids.index(pi[x])][ids.index(pi[y])]:
                    raise CohomologyError("pi is not a homomorphism")
        ident = pi[E.identity]
        ids.remove(ident)
        ids.insert(0, ident)
        return FiniteGroup(ids, [[pi[E.mul(lift[a], lift[b])] for b in ids] for a in ids], name="F")

    def _set_coords(self, T_coords, N) -> None:
        E = self.E
        if T_coords is None:
            n = len(self.T)
            gen = next((t for t in self.T if E.order_of(t) == n), None)
            if gen is None:
                raise CohomologyError("T is not cyclic; give T_coords")
            T_coords, x = {}, E.identity
            for k in range(n):
                T_coords[x] = (k,)
                x = E.mul(x, gen)
            N = n
        self.coords = {t: tuple(int(v) for v in c) for t, c in T_coords.items()}
        self.d = len(next(iter(self.coords.values())))
        self.N = int(N if N is not None else max(max(c) for c in self.coords.values()) + 1)
        self.from_coords = {tuple(v % self.N for v in c): t for t, c in self.coords.items()}
        if len(self.from_coords) != len(self.T) or len(self.T) != self.N**self.d:
            raise CohomologyError("T_coords must be a bijection T -> (Z/N)^d")
        for x in self.T:
            for y in self.T:
                s = tuple((a + b) % self.N for a, b in zip(self.coords[x], self.coords[y]))
                if self.coords[E.mul(x, y)] != s:
                    raise CohomologyError("T_coords is not additive")

    def module(self, section: Mapping[str, str] | None = None) -> FiniteModule:
        """T as an F-module through conjugation by lifts."""
        s = section or self.canonical_section()
        E, d = self.E, self.d
        basis = []
        for i in range(d):
            basis.append(self.from_coords[tuple(int(i == j) for j in range(d))])
        action = {}
        for g in self.F.elements:
            cols = [self.coords[E.mul(E.mul(s[g], b), E.inv(s[g]))] for b in basis]
            action[g] = np.array(cols, dtype=np.int64).T
        return FiniteModule(self.F, (self.N,) * d, action)

    def canonical_section(self) -> dict:
        s = {}
        for x in self.E.elements:
            s.setdefault(self.pi[x], x)
        s[self.F.identity] = self.E.identity
        return s

    def check_section(self, s: Mapping[str, str]) -> None:
        if set(s) != set(self.F.elements):
            raise CohomologyError("section must be defined on all of F")
        if any(self.pi[s[g]] != g for g in self.F.elements):
            raise CohomologyError("not a section: pi(s(g)) != g")
        if s[self.F.identity] != self.E.identity:
            raise CohomologyError("section must send e to e")

    @classmethod
    def from_json(cls, data: Mapping) -> tuple["Extension", dict]:
        E = FiniteGroup.from_json(data["E"] if isinstance(data["E"], Mapping) else {"table": data["E"]})
        ext = cls(E, data["T"], data["pi"], data.get("T_coords"), data.get("N"))
        section = dict(data["section"]) if "section" in data else ext.canonical_section()
        ext.check_section(section)
        return ext, section


def cocycle_from_section(ext: Extension, s: Mapping[str, str]) -> CochainTable:
    """f_s(g, h) = s(g) s(h) s(gh)^-1, written additively in T."""
    ext.check_section(s)
    E, F = ext.E, ext.F
    M = ext.module(s)
    vals = {}
    for g, h in itertools.product(F.elements, repeat=2):
        t = E.mul(E.mul(s[g], s[h]), E.inv(s[F.mul(g, h)]))
        vals[(g, h)] = ext.coords[t]
    f = CochainTable(M, 2, vals)
    if not f.is_cocycle():
        raise CohomologyError("internal: section cocycle fails the cocycle identity")
    return f


def twist_section(ext: Extension, s: Mapping[str, str], a: CochainTable) -> dict:
    """s'(g) = a(g) s(g)."""
    return {g: ext.E.mul(ext.from_coords[tuple(a(g))], s[g]) for g in ext.F.elements}


@dataclass
class SplittingReport:
    m: int
    N: int
    a_prime: CochainTable
    a: CochainTable
    new_section: dict
    values_in_T_m: bool
    F_prime: tuple
    T_m: tuple
    T_F_prime_is_E: bool
    intersection_is_T_m: bool

    @property
    def ok(self) -> bool:
        return self.values_in_T_m and self.T_F_prime_is_E and self.intersection_is_T_m

    def to_json(self) -> dict:
        return {"m": self.m, "N": self.N, "a_prime": self.a_prime.to_json(), "a": self.a.to_json(),
                "new_section": self.new_section, "values_in_T_m": self.values_in_T_m,
                "F_prime_order": len(self.F_prime), "T_m_order": len(self.T_m),
                "T_F_prime_is_E": self.T_F_prime_is_E, "intersection_is_T_m": self.intersection_is_T_m,
                "ok": self.ok}


def split_after_quotient(ext: Extension, s: Mapping[str, str] | None = None) -> SplittingReport:
    """Modify the section so its cocycle lands in T_m = {t : m t = 0}, m = |F|.

    Solves m (f_s + da) = 0 over Z/N for a, sets a' = m a and s' = a s, and
    verifies that F' = <s'(F), T_m> satisfies T F' = E and T meet F' = T_m.
    """
    s = dict(s) if s is not None else ext.canonical_section()
    f = cocycle_from_section(ext, s)
    M, F, E = f.module, ext.F, ext.E
    m = len(F)
    N = ext.N
    D1, _, _, _, _ = _coboundary_matrices(M)
    ne = [g for g in F.elements if g != F.identity]
    rhs = np.concatenate([np.array(f(g, h), dtype=np.int64) for g in ne for h in ne]) if ne else np.zeros(0, np.int64)
    sol = solve_mod((m * D1) % N, (-m * rhs) % N, N) if ne else np.zeros(0, np.int64)
    if sol is None:
        raise NoSolution(f"m [f_s] is nonzero over Z/{N}; enlarge N")
    d = M.r
    a = CochainTable(M, 1, {g: sol[i * d:(i + 1) * d] for i, g in enumerate(ne)})
    a_prime = a.scaled(m)
    if not (f.scaled(m) + coboundary(a_prime)).is_zero():
        raise CohomologyError("internal: m f_s + da' is not zero")
    s2 = twist_section(ext, s, a)
    f2 = cocycle_from_section(ext, s2)
    if not (f2 - f - coboundary(a)).is_zero():
        raise CohomologyError("internal: section change is not a coboundary shift")
    in_Tm = f2.scaled(m).is_zero()
    T_m = tuple(t for t in ext.T if not any((m * v) % N for v in ext.coords[t]))
    Fp = E.closure(list(s2.values()) + list(T_m))
    TF = {E.mul(t, x) for t in ext.T for x in Fp}
    inter = set(ext.T) & set(Fp)
    return SplittingReport(m, N, a_prime, a, s2, in_Tm, Fp, T_m,
                           len(TF) == len(E), inter == set(T_m))


# ---------------------------------------------------------------------------
# small example builders
# ---------------------------------------------------------------------------

def cyclic_extension(n: int, t: int) -> tuple[Extension, dict]:
    """Z/n with T = <t>, F = Z/n / T, section by smallest representatives."""
    E = FiniteGroup.cyclic(n)
    T = E.closure([str(t % n)])
    q = n // len(T)
    pi = {x: str(int(x) % q) for x in E.elements}
    T_coords = {str((k * t) % n): (k,) for k in range(len(T))}
    ext = Extension(E, T, pi, T_coords, len(T))
    s = {str(k): str(k) for k in range(q)}
    return ext, s


def torus_shadow(rep_matrices: Mapping[str, Sequence[Sequence[int]]], F: FiniteGroup, N: int,
                 section_shift: Mapping[str, Sequence[int]] | None = None) -> tuple[Extension, dict]:
    """Finite shadow ((1/N)Z)^d/Z^d x| F of a torus semidirect product.

    Elements are ids ``"x1,..,xd|g"``; the section sends g to
    (section_shift[g] / N, g).
    """
    d = len(next(iter(rep_matrices.values())))
    A = {g: np.array(rep_matrices[g], dtype=np.int64) for g in F.elements}
    coords = list(itertools.product(range(N), repeat=d))

    def eid(x, g):
        return ",".join(map(str, x)) + "|" + g

    els = [eid(x, g) for g in F.elements for x in coords]

    def mul(u, v):
        xu, gu = u.split("|")
        xv, gv = v.split("|")
        a = np.array(list(map(int, xu.split(","))))
        b = np.array(list(map(int, xv.split(","))))
        return eid(tuple(int(c) for c in (a + A[gu] @ b) % N), F.mul(gu, gv))

    E = FiniteGroup.from_function(els, mul, name=f"shadow{N}")
    T = [eid(x, F.identity) for x in coords]
    pi = {u: u.split("|")[1] for u in els}
    T_coords = {eid(x, F.identity): x for x in coords}
    ext = Extension(E, T, pi, T_coords, N)
    shift = section_shift or {}
    s = {g: eid(tuple(int(v) % N for v in shift.get(g, (0,) * d)), g) for g in F.elements}
    s[F.identity] = E.identity
    return ext, s

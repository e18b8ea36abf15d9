"""Homomorphisms between samplable groups acting on subgroups: images,
preimages and an openness probe for the induced map on compact subgroups."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import rotations as rot
from .groups import (CompactGroup, FiniteSubgroup, GroupError, MatrixGroup, SampleSet,
                     SemidirectGroup, SubgroupHandle, Torus, build_semidirect)
from .hyperspace import (Ball, Region, Verdict, VietorisNbhd, hausdorff_distance,
                         vietoris_contains)
from .intrep import RationalLattice, invariant_lattice_quotient


def _frac_matrix(M) -> list[list[Fraction]]:
    return [[Fraction(int(v.p), int(v.q)) for v in row] for row in M.tolist()]


def _matvec(M, x) -> tuple:
    return tuple(sum((M[i][j] * x[j] for j in range(len(x))), Fraction(0)) % 1 for i in range(len(M)))


def _opnorm(M) -> float:
    return float(np.linalg.norm(np.array([[float(v) for v in r] for r in M]), 2))


class Rule:
    """How a homomorphism acts; subclasses fill in the data below."""

    lipschitz: float = 1.0
    openness: float = 1.0  # f(B(x, r)) contains B(f(x), r / openness)
    image_cap: float = math.inf
    kernel_finite: bool = True

    def apply(self, x): ...

    def lift(self, y): ...

    def kernel(self, eps: float) -> tuple[list, float]: ...


class IdentityRule(Rule):
    def __init__(self, G: CompactGroup):
        self.G = G

    def apply(self, x):
        return x

    def lift(self, y):
        return y

    def kernel(self, eps):
        return [self.G.identity()], 0.0


class TorusProjection(Rule):
    """T^m -> T^k keeping the listed coordinates."""

    def __init__(self, domain: Torus, coords: Sequence[int]):
        self.coords = tuple(coords)
        self.m = domain.m
        if not self.coords or len(set(self.coords)) != len(self.coords) or \
                any(not 0 <= c < self.m for c in self.coords):
            raise GroupError("bad coordinate subset")
        self.rest = tuple(i for i in range(self.m) if i not in self.coords)
        self.kernel_finite = not self.rest

    def apply(self, x):
        return tuple(x[i] for i in self.coords)

    def lift(self, y):
        x = [Fraction(0)] * self.m
        for i, c in enumerate(self.coords):
            x[c] = y[i]
        return tuple(x)

    def kernel(self, eps):
        if not self.rest:
            return [tuple(Fraction(0) for _ in range(self.m))], 0.0
        T = Torus(len(self.rest))
        n = int(math.floor(math.sqrt(T.m) / (2 * eps))) + 1
        out = []
        for z in T.grid(n):
            x = [Fraction(0)] * self.m
            for i, c in enumerate(self.rest):
                x[c] = z[i]
            out.append(tuple(x))
        return out, T.grid_mesh(n)


class TorusLatticeQuotient(Rule):
    """T^m -> T^m / (L / Z^m) written as x -> B^-1 x."""

    def __init__(self, domain: Torus, lattice: RationalLattice):
        if lattice.m != domain.m:
            raise GroupError("lattice rank does not match the torus")
        self.lattice = lattice
        B = lattice.basis_matrix()
        self.B = _frac_matrix(B)
        self.Binv = _frac_matrix(B.inv())
        self.lipschitz = _opnorm(self.Binv)
        self.openness = _opnorm(self.B)
        self.m = domain.m

    def apply(self, x):
        return _matvec(self.Binv, x)

    def lift(self, y):
        return _matvec(self.B, y)

    def kernel(self, eps):
        D = self.lattice.denominator
        pts = set()
        import itertools
        for z in itertools.product(range(D), repeat=self.m):
            x = tuple(Fraction(v, D) for v in z)
            y = [sum((self.Binv[i][j] * x[j] for j in range(self.m)), Fraction(0)) for i in range(self.m)]
            if all(v.denominator == 1 for v in y):
                pts.add(x)
        return sorted(pts), 0.0


class SemidirectQuotient(Rule):
    """(x, f) -> (B^-1 x, q(f)) between semidirect products."""

    def __init__(self, domain: SemidirectGroup, lattice: RationalLattice,
                 codomain: SemidirectGroup | None = None, q: Mapping[str, str] | None = None):
        self.domain = domain
        self.tq = TorusLatticeQuotient(Torus(domain.m), lattice)
        if q is None:
            q = {g: g for g in domain.F.elements}
        self.q = dict(q)
        if codomain is None:
            if any(k != v for k, v in self.q.items()):
                raise GroupError("a non-identity F-map needs an explicit codomain")
            codomain = build_semidirect(domain.m, invariant_lattice_quotient(domain.rep(), lattice),
                                        name=f"{domain.name}/L")
        self.codomain = codomain
        Bi, B = self.tq.Binv, self.tq.B
        for g in domain.F.elements:
            A = domain.action[g]
            ind = [[sum((Bi[i][k] * int(A[k][l]) * B[l][j] for k in range(domain.m) for l in range(domain.m)),
                        Fraction(0)) for j in range(domain.m)] for i in range(domain.m)]
            if any(ind[i][j] != int(codomain.action[self.q[g]][i][j]) for i in range(domain.m) for j in range(domain.m)):
                raise GroupError(f"actions are not compatible at {g}")
        self.kernel_F = [g for g in domain.F.elements if self.q[g] == codomain.F.identity]
        self.section_F = {}
        for g in domain.F.elements:
            self.section_F.setdefault(self.q[g], g)
        self.lipschitz = max(self.tq.lipschitz, 1.0)
        self.openness = self.tq.openness
        self.image_cap = codomain.diameter

    def apply(self, x):
        return (self.tq.apply(x[0]), self.q[x[1]])

    def lift(self, y):
        return (self.tq.lift(y[0]), self.section_F[y[1]])

    def kernel(self, eps):
        lat, _ = self.tq.kernel(eps)
        return [(t, g) for g in self.kernel_F for t in lat], 0.0


class SU2toSO3(Rule):
    """The double cover; Frobenius-Lipschitz 2 and open with modulus 1."""

    lipschitz = 2.0
    openness = 1.0

    def apply(self, x):
        return rot.su2_to_so3(x)[0]

    def lift(self, y):
        return rot.quat_to_su2(rot.so3_to_quat(y))[0]

    def kernel(self, eps):
        return [np.eye(2, dtype=complex), -np.eye(2, dtype=complex)], 0.0


class Composite(Rule):
    def __init__(self, first: "GroupHom", second: "GroupHom"):
        self.first, self.second = first, second
        self.lipschitz = first.rule.lipschitz * second.rule.lipschitz
        self.openness = first.rule.openness * second.rule.openness
        self.kernel_finite = first.rule.kernel_finite and second.rule.kernel_finite

    def apply(self, x):
        return self.second.apply(self.first.apply(x))

    def lift(self, y):
        return self.first.lift(self.second.lift(y))

    def kernel(self, eps):
        K2, m2 = self.second.rule.kernel(eps)
        inner = lift_preimage(self.first, FiniteSubgroup(self.first.codomain, tuple(K2)))
        S = inner.sample(eps)
        return list(S.elements), S.mesh + self.first.rule.openness * m2


@dataclass(frozen=True, eq=False)
class GroupHom:
    domain: CompactGroup
    codomain: CompactGroup
    rule: Rule
    name: str = ""

    def apply(self, x):
        return self.rule.apply(x)

    def lift(self, y):
        return self.rule.lift(y)

    def image_radius(self, r: float) -> float:
        return min(r / self.rule.openness, self.rule.image_cap)

    def check_identity(self) -> bool:
        return self.codomain.equal(self.apply(self.domain.identity()), self.codomain.identity())

    def __repr__(self) -> str:
        return f"GroupHom({self.name or type(self.rule).__name__})"


def identity_hom(G: CompactGroup) -> GroupHom:
    return GroupHom(G, G, IdentityRule(G), "id")


def torus_projection(m: int, coords: Sequence[int]) -> GroupHom:
    T = Torus(m)
    return GroupHom(T, Torus(len(coords)), TorusProjection(T, coords), f"proj{tuple(coords)}")


def torus_lattice_quotient(m: int, lattice: RationalLattice) -> GroupHom:
    T = Torus(m)
    return GroupHom(T, Torus(m), TorusLatticeQuotient(T, lattice), "torus/L")


def semidirect_quotient(G: SemidirectGroup, lattice: RationalLattice, codomain=None, q=None) -> GroupHom:
    rule = SemidirectQuotient(G, lattice, codomain, q)
    return GroupHom(G, rule.codomain, rule, f"{G.name}/L")


def su2_to_so3() -> GroupHom:
    return GroupHom(MatrixGroup("SU2"), MatrixGroup("SO3"), SU2toSO3(), "SU2->SO3")


def compose(f: GroupHom, g: GroupHom) -> GroupHom:
    """g after f."""
    return GroupHom(f.domain, g.codomain, Composite(f, g), f"{g.name}.{f.name}")


# ---------------------------------------------------------------------------
# images and preimages
# ---------------------------------------------------------------------------

def _dedupe(G: CompactGroup, pts: list) -> list:
    if G.exact:
        seen, out = set(), []
        for p in pts:
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out
    feats = np.round(G.pack(pts), 9) + 0.0
    _, idx = np.unique(feats, axis=0, return_index=True)
    return [pts[i] for i in sorted(idx)]


@dataclass(frozen=True, eq=False)
class ImageHandle(SubgroupHandle):
    hom: GroupHom | None = None
    source: SubgroupHandle | None = None

    @property
    def exact(self):
        return self.source.exact

    @property
    def finite(self):
        return self.source.finite

    def sample(self, eps=None) -> SampleSet:
        S = self.source.sample(eps)
        pts = _dedupe(self.parent, [self.hom.apply(x) for x in S.elements])
        return SampleSet(self.parent, tuple(pts), self.hom.rule.lipschitz * S.mesh)


@dataclass(frozen=True, eq=False)
class PreimageHandle(SubgroupHandle):
    hom: GroupHom | None = None
    target: SubgroupHandle | None = None
    kernel_eps: float = 0.05

    @property
    def exact(self):
        return self.target.exact and self.hom.rule.kernel_finite

    @property
    def finite(self):
        return self.target.finite and self.hom.rule.kernel_finite

    def sample(self, eps=None) -> SampleSet:
        S = self.target.sample(eps)
        G = self.parent
        ker, kmesh = self.hom.rule.kernel(eps or self.kernel_eps)
        pts = []
        for y in S.elements:
            x0 = self.hom.lift(y)
            pts += [G.multiply(x0, k) for k in ker]
        pts = _dedupe(G, pts)
        mesh = self.hom.rule.openness * S.mesh + G.left_lipschitz * kmesh
        return SampleSet(G, tuple(pts), mesh)


def pushforward(f: GroupHom, K: SubgroupHandle) -> SubgroupHandle:
    """f(K); finite exact inputs give a FiniteSubgroup of the codomain."""
    if isinstance(f.rule, IdentityRule):
        return K
    if K.parent is not f.domain and repr(K.parent) != repr(f.domain):
        raise GroupError("subgroup does not live in the domain of f")
    if K.finite and K.exact:
        S = K.sample()
        pts = _dedupe(f.codomain, [f.apply(x) for x in S.elements])
        return FiniteSubgroup(f.codomain, tuple(pts), f"f({getattr(K, 'label', '')})")
    return ImageHandle(f.codomain, f, K)


def lift_preimage(f: GroupHom, L: SubgroupHandle, kernel_eps: float = 0.05) -> SubgroupHandle:
    """f^-1(L): lifts of L's samples translated by a sampled kernel."""
    if L.parent is not f.codomain and repr(L.parent) != repr(f.codomain):
        raise GroupError("subgroup does not live in the codomain of f")
    P = PreimageHandle(f.domain, f, L, kernel_eps)
    if P.finite and P.exact:
        return FiniteSubgroup(f.domain, P.sample().elements, "preimage")
    return P


def round_trip(f: GroupHom, L: SubgroupHandle, eps: float | None = None, kernel_eps: float = 0.05):
    """(estimate, budget) for d_H(f(f^-1(L)), L)."""
    img = pushforward(f, lift_preimage(f, L, kernel_eps))
    A, B = img.sample(eps), L.sample(eps)
    est, err = hausdorff_distance(A, B)
    return est, err + f.codomain.tau * (1 + f.rule.lipschitz)


# ---------------------------------------------------------------------------
# openness probe
# ---------------------------------------------------------------------------

@dataclass
class ProbeEntry:
    label: str
    in_image_nbhd: str
    lifted_in_nbhd: str
    onto: bool
    image_distance: float
    tolerance: float

    @property
    def applicable(self) -> bool:
        return self.in_image_nbhd == "true"

    @property
    def passed(self) -> bool:
        return self.lifted_in_nbhd == "true" and self.onto

    @property
    def status(self) -> str:
        if not self.applicable:
            return "outside"
        return "pass" if self.passed else "fail"


@dataclass
class ProbeReport:
    image_nbhd: VietorisNbhd
    entries: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        """Every candidate inside the image neighborhood lifts; at least one does."""
        used = [e for e in self.entries if e.applicable]
        return bool(used) and all(e.passed for e in used)

    def to_json(self) -> dict:
        return {"all_pass": self.all_pass,
                "candidates": [{"label": e.label, "in_image_nbhd": e.in_image_nbhd,
                                "lifted_in_nbhd": e.lifted_in_nbhd, "onto": e.onto,
                                "image_distance": e.image_distance, "tolerance": e.tolerance,
                                "status": e.status} for e in self.entries]}


def _hull(G: CompactGroup, KS: SampleSet, U0: Region):
    """Closed-ball hull C of K inside U0: (centers, radii) or None for the whole group."""
    if U0.whole:
        return None
    slack = U0.slack(G, KS.features) - KS.mesh - G.tau
    if (slack <= 0).any():
        raise ValueError("K is not inside U0 with a margin")
    return list(KS.elements), slack / 2


def image_neighborhood(f: GroupHom, K: SubgroupHandle, nbhd: VietorisNbhd, eps=None):
    """V_i = f(U_i meet int C) as ball unions, together with the hull C."""
    G = f.domain
    KS = K.sample(eps)
    hull = _hull(G, KS, nbhd.U0)
    if hull is None:
        V0 = Region.everything()
    else:
        V0 = Region(tuple(Ball(f.apply(c), f.image_radius(r)) for c, r in zip(*hull)))
    Vs = []
    feats = KS.features
    for U in nbhd.Us:
        s = U.slack(G, feats) - KS.mesh - G.tau
        j = int(np.argmax(s))
        if s[j] <= 0:
            raise ValueError("K does not meet some U_i with a margin")
        r = s[j] if hull is None else min(s[j], hull[1][j])
        Vs.append(Region.ball(f.apply(KS.elements[j]), f.image_radius(r)))
    return VietorisNbhd(V0, tuple(Vs)), hull


def openness_probe(f: GroupHom, K: SubgroupHandle, nbhd: VietorisNbhd,
                   battery: Sequence[SubgroupHandle], eps: float | None = None,
                   kernel_eps: float = 0.05) -> ProbeReport:
    """Check V(V_0..V_n) inside S(f)(V(U_0..U_n)) on a battery of codomain subgroups.

    Each candidate L in the image neighborhood is lifted to f^-1(L) meet C,
    which must lie in the original neighborhood and map onto L.
    """
    G = f.domain
    if not vietoris_contains(K.sample(eps), nbhd):
        raise ValueError("nbhd is not a neighborhood of K")
    V, hull = image_neighborhood(f, K, nbhd, eps)
    report = ProbeReport(V)
    for i, L in enumerate(battery):
        label = getattr(L, "label", "") or f"#{i}"
        LS = L.sample(eps)
        inV = vietoris_contains(LS, V).verdict
        P = lift_preimage(f, L, kernel_eps)
        PS = P.sample(eps)
        if hull is not None:
            centers, radii = hull
            D = G.pairwise(PS.features, G.pack(centers))
            keep = (D <= radii[None, :]).any(axis=1)
            PS = SampleSet(G, tuple(p for p, k in zip(PS.elements, keep) if k), PS.mesh)
        lifted = vietoris_contains(PS, nbhd).verdict
        img = SampleSet(f.codomain, tuple(_dedupe(f.codomain, [f.apply(x) for x in PS.elements])),
                        f.rule.lipschitz * PS.mesh)
        est, err = hausdorff_distance(img, LS)
        tol = err + 2 * f.codomain.tau
        report.entries.append(ProbeEntry(label, inV.value, lifted.value, est <= tol, est, tol))
    return report


# ---------------------------------------------------------------------------
# stock cases
# ---------------------------------------------------------------------------

def _torus_projection_case():
    f = torus_projection(2, [0])
    h = Fraction(1, 2)
    K = FiniteSubgroup(f.domain, tuple((Fraction(i, 2), Fraction(j, 2)) for i in range(2) for j in range(2)),
                       "C2xC2")
    nbhd = VietorisNbhd(Region.everything(), (Region.ball((h, h), 0.2), Region.ball((Fraction(0), h), 0.2)))
    battery = [FiniteSubgroup(f.codomain, tuple((Fraction(i, n),) for i in range(n)), f"C{n}")
               for n in (2, 4, 6)]
    battery.append(pushforward(f, K))
    return f, K, nbhd, battery


def _covering_case():
    f = su2_to_so3()
    ico = rot.icosahedral_rotations()
    K = FiniteSubgroup(f.domain, tuple(rot.binary_lift(np.asarray(ico))), "2I")
    ks = K.elements
    nbhd = VietorisNbhd(Region.everything(), tuple(Region.ball(ks[i], 0.3) for i in (1, 7, 29, 60)))
    I = FiniteSubgroup(f.codomain, tuple(ico), "I")
    battery = [I]
    for k, w in enumerate(([0.02, 0.0, 0.0], [0.0, 0.03, -0.01], [0.01, 0.01, 0.04])):
        g = rot.rodrigues(np.array(w))[0]
        battery.append(FiniteSubgroup(f.codomain, tuple(g @ x @ g.T for x in ico), f"I^g{k}"))
    return f, K, nbhd, battery


PROBE_CASES: dict[str, Callable] = {"torus-projection": _torus_projection_case,
                                    "su2-so3": _covering_case}


def round_trip_corpus() -> list[tuple[str, GroupHom, SubgroupHandle]]:
    """Pairs (f, L) across projections, lattice quotients and the double cover."""
    from .groups import CyclicGridSubgroup, Full, group_alpha, group_beta

    h = Fraction(1, 2)
    out = []
    p = torus_projection(2, [0])
    for n in (1, 2, 3):
        out.append((f"proj T2->T, C{n}", p, CyclicGridSubgroup(p.codomain, n)))
    p3 = torus_projection(3, [0, 2])
    out.append(("proj T3->T2, C4^2", p3, CyclicGridSubgroup(p3.codomain, 4)))
    q = torus_lattice_quotient(2, RationalLattice([[h, h]]))
    out.append(("T2/<(1/2,1/2)>, C3^2", q, CyclicGridSubgroup(q.codomain, 3)))
    out.append(("T2/<(1/2,1/2)>, T2", q, Full(q.codomain)))
    for G in (group_alpha(), group_beta()):
        lat = RationalLattice([[h, h]]) if G.name.endswith("alpha") else RationalLattice([[h, 0]])
        s = semidirect_quotient(G, lat)
        out.append((f"{G.name}/L, C2 grid", s, CyclicGridSubgroup(s.codomain, 2)))
        out.append((f"{G.name}/L, whole", s, Full(s.codomain)))
    c = su2_to_so3()
    for n in (3, 5):
        out.append((f"SU2->SO3, C{n}", c, FiniteSubgroup(c.codomain, tuple(rot.cyclic_rotations(n)), f"C{n}")))
    out.append(("SU2->SO3, D4", c, FiniteSubgroup(c.codomain, tuple(rot.dihedral_rotations(4)), "D4")))
    out.append(("SU2->SO3, O", c, FiniteSubgroup(c.codomain, tuple(rot.octahedral_rotations()), "O")))
    return out

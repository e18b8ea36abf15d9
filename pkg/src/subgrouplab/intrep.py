"""Integer representations F -> GL(m, Z): faithfulness, rational irreducibility,
invariant-lattice quotients, GL(m, Z)-conjugacy and minimality.

Everything in this module is exact (integers, Fractions, sympy rationals).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

import numpy as np
import sympy

from ._zlinalg import as_fraction, integer_invariant_factors, lcm_all, lower_hnf
from .finite import FiniteGroup


class RepError(ValueError):
    pass


Matrix = tuple  # tuple of tuples of ints


def _tup(M) -> Matrix:
    if isinstance(M, sympy.MatrixBase):
        M = M.tolist()
    return tuple(tuple(int(v) for v in row) for row in M)


def _sym(M) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(as_fraction(v).numerator, as_fraction(v).denominator)
                          if not isinstance(v, (int, sympy.Integer)) else v for v in row] for row in M])


def _primitive(v) -> tuple[int, ...]:
    """Scale a rational vector to a primitive integer vector with positive leading entry."""
    fr = [as_fraction(sympy.nsimplify(x)) if not isinstance(x, (int, Fraction)) else Fraction(x) for x in v]
    den = lcm_all(f.denominator for f in fr)
    ints = [int(f * den) for f in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints] if g else ints
    lead = next((x for x in ints if x), 1)
    return tuple(-x for x in ints) if lead < 0 else tuple(ints)


class IntegerRep:
    """A homomorphism F -> GL(m, Z) given on every element."""

    def __init__(self, group: FiniteGroup, matrices: Mapping[str, Sequence[Sequence[int]]], name: str = ""):
        self.group = group
        self.matrices = {g: _tup(matrices[g]) for g in group.elements}
        ms = {len(M) for M in self.matrices.values()}
        if len(ms) != 1:
            raise RepError("matrices have different sizes")
        self.m = ms.pop()
        if self.m <= 0 or any(len(r) != self.m for M in self.matrices.values() for r in M):
            raise RepError("matrices must be square with m > 0")
        self.name = name

    def verify(self) -> "IntegerRep":
        F = self.group
        I = _tup(sympy.eye(self.m).tolist())
        if self.matrices[F.identity] != I:
            raise RepError("identity must map to the identity matrix")
        for g, M in self.matrices.items():
            if abs(sympy.Matrix(M).det()) != 1:
                raise RepError(f"matrix of {g} is not unimodular")
        for g in F.elements:
            Ag = sympy.Matrix(self.matrices[g])
            for h in F.elements:
                if _tup(Ag * sympy.Matrix(self.matrices[h])) != self.matrices[F.mul(g, h)]:
                    raise RepError(f"not a homomorphism at ({g}, {h})")
        return self

    def sym(self, g: str) -> sympy.Matrix:
        return sympy.Matrix(self.matrices[g])

    @property
    def generator_matrices(self) -> list[sympy.Matrix]:
        return [self.sym(g) for g in self.group.generators] or [sympy.eye(self.m)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntegerRep) and self.group.elements == other.group.elements
                and self.matrices == other.matrices)

    def __repr__(self) -> str:
        return f"IntegerRep({self.name or self.group.name}, m={self.m})"

    # constructors -----------------------------------------------------------
    @classmethod
    def from_generators(cls, gens, name: str = "", limit: int = 1000) -> "IntegerRep":
        """The finite matrix group generated by ``gens``, acting on itself."""
        gens = [_tup(g) for g in gens]
        m = len(gens[0])
        ident = tuple(tuple(int(i == j) for j in range(m)) for i in range(m))

        def mul(a, b):
            return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(m)) for j in range(m)) for i in range(m))

        order, seen, frontier = [ident], {ident}, [ident]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        order.append(y)
                        nxt.append(y)
                        if len(order) > limit:
                            raise RepError("generated group is larger than the limit")
            frontier = nxt
        label = {M: str(i) for i, M in enumerate(order)}
        F = FiniteGroup.from_function([str(i) for i in range(len(order))],
                                      lambda a, b: label[mul(order[int(a)], order[int(b)])], name=name)
        return cls(F, {str(i): M for i, M in enumerate(order)}, name).verify()

    @classmethod
    def from_generator(cls, M, name: str = "") -> "IntegerRep":
        """Cyclic group Z_k generated by a finite-order unimodular matrix."""
        A = sympy.Matrix(M)
        m = A.rows
        powers = [sympy.eye(m)]
        while True:
            nxt = powers[-1] * A
            if nxt == sympy.eye(m):
                break
            powers.append(nxt)
            if len(powers) > 120:
                raise RepError("matrix does not have small finite order")
        F = FiniteGroup.cyclic(len(powers))
        return cls(F, {str(k): powers[k].tolist() for k in range(len(powers))}, name).verify()

    @classmethod
    def trivial(cls, m: int, group: FiniteGroup | None = None) -> "IntegerRep":
        F = group or FiniteGroup.trivial()
        I = sympy.eye(m).tolist()
        return cls(F, {g: I for g in F.elements}, name="trivial").verify()

    @classmethod
    def example_alpha(cls) -> "IntegerRep":
        return cls.from_generator([[1, 0], [0, -1]], name="alpha")

    @classmethod
    def example_beta(cls) -> "IntegerRep":
        return cls.from_generator([[1, 1], [0, -1]], name="beta")

    @classmethod
    def from_json(cls, data: Mapping) -> "IntegerRep":
        F = FiniteGroup.from_json(data)
        mats = data["matrices"] if "matrices" in data else data["action"]
        for M in mats.values():
            for row in M:
                if not all(isinstance(v, int) for v in row):
                    raise RepError("matrix entries must be integers")
        return cls(F, mats, name=data.get("name", "")).verify()

    def to_json(self) -> dict:
        return {"elements": list(self.group.elements), "table": self.group.table(),
                "matrices": {g: [list(r) for r in M] for g, M in self.matrices.items()}}


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

class RationalLattice:
    """Lattice Z^m <= L <= (1/N) Z^m, stored by its lower-triangular Hermite basis."""

    def __init__(self, generators: Sequence[Sequence], include_integers: bool = True):
        gens = [[as_fraction(v) for v in g] for g in generators]
        if not gens:
            raise RepError("lattice needs generators")
        m = len(gens[0])
        if include_integers:
            gens += [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
        D = lcm_all(v.denominator for g in gens for v in g)
        try:
            H = lower_hnf([[int(v * D) for v in g] for g in gens])
        except ValueError as exc:
            raise RepError(str(exc)) from None
        self.m = m
        self.denominator = D
        self.basis = tuple(tuple(Fraction(v, D) for v in row) for row in H)
        for i in range(m):
            e = [Fraction(int(i == j)) for j in range(m)]
            if not self.contains(e):
                raise RepError("lattice does not contain Z^m")

    @classmethod
    def scaled_integers(cls, m: int, k: int) -> "RationalLattice":
        return cls([[Fraction(int(i == j), k) for j in range(m)] for i in range(m)])

    def basis_matrix(self) -> sympy.Matrix:
        """Columns are the basis vectors."""
        return _sym(self.basis).T

    def contains(self, v) -> bool:
        c = self.basis_matrix().solve(sympy.Matrix([as_fraction(x) for x in v]).applyfunc(sympy.nsimplify))
        return all(x.is_integer for x in c)

    @property
    def index_data(self) -> list[int]:
        """Invariant factors of L / Z^m (ones dropped)."""
        Binv = self.basis_matrix().inv()
        facs = integer_invariant_factors(Binv.tolist())
        return [d for d in facs if d != 1]

    @property
    def index(self) -> int:
        out = 1
        for d in self.index_data:
            out *= d
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalLattice) and self.basis == other.basis

    def __repr__(self) -> str:
        rows = ", ".join("(" + ", ".join(str(v) for v in r) + ")" for r in self.basis)
        return f"RationalLattice[{rows}]"


def inverse_scaled_lattice(L: RationalLattice) -> RationalLattice:
    """(1/N) B^{-1} Z^m: quotienting by it after L multiplies the torus by N."""
    N = L.denominator
    Binv = L.basis_matrix().inv()
    cols = [[Fraction(int(Binv[i, j]), N) for i in range(L.m)] for j in range(L.m)]
    return RationalLattice(cols)


def invariant_lattice_quotient(rep: IntegerRep, lattice: RationalLattice) -> IntegerRep:
    """Action induced on T^m / (L / Z^m), written in the basis of L."""
    if lattice.m != rep.m:
        raise RepError("lattice and representation have different ranks")
    B = lattice.basis_matrix()
    Binv = B.inv()
    out = {}
    for g in rep.group.elements:
        C = Binv * rep.sym(g) * B
        for j in range(rep.m):
            if not all(C[i, j].is_integer for i in range(rep.m)):
                raise RepError(f"lattice not invariant: element {g} moves basis vector {j} out of it")
        out[g] = C.tolist()
    return IntegerRep(rep.group, out, name=f"{rep.name}/L").verify()


# ---------------------------------------------------------------------------
# faithfulness and irreducibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Faithfulness:
    faithful: bool
    kernel: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.faithful


def is_faithful(rep: IntegerRep) -> Faithfulness:
    I = _tup(sympy.eye(rep.m).tolist())
    ker = tuple(g for g in rep.group.elements if rep.matrices[g] == I)
    return Faithfulness(len(ker) == 1, ker)


@dataclass(frozen=True)
class Irreducible:
    method: str = ""

    kind = "irreducible"


@dataclass(frozen=True)
class Reducible:
    witness: tuple[tuple[int, ...], ...]
    kind = "reducible"


@dataclass(frozen=True)
class Undecided:
    draws: int = 0
    kind = "undecided"


def is_invariant_subspace(rep: IntegerRep, basis: Sequence[Sequence]) -> bool:
    W = sympy.Matrix([list(map(sympy.nsimplify, b)) for b in basis]).T
    r = W.rank()
    if r == 0 or r == rep.m:
        return False
    for A in rep.generator_matrices:
        if W.row_join(A * W).rank() != r:
            return False
    return True


def _reducible(rep: IntegerRep, vectors) -> Reducible | None:
    basis = [_primitive(v) for v in vectors]
    if basis and is_invariant_subspace(rep, basis):
        M = sympy.Matrix(basis)
        rref, piv = M.rref()
        return Reducible(tuple(_primitive(rref.row(k)) for k in range(len(piv))))
    return None


def _spin(rep: IntegerRep, v: sympy.Matrix) -> list:
    """Span of the orbit of v; a proper nonzero spin is an invariant subspace."""
    vecs = [v]
    basis = sympy.Matrix.hstack(v)
    frontier = [v]
    while frontier:
        nxt = []
        for w in frontier:
            for A in rep.generator_matrices:
                u = A * w
                cand = basis.row_join(u)
                if cand.rank() > basis.rank():
                    basis = cand
                    vecs.append(u)
                    nxt.append(u)
        frontier = nxt
    return [list(x) for x in vecs]


def _rational_eigenlines(A: sympy.Matrix) -> list:
    lam = sympy.Symbol("x")
    roots = sympy.roots(A.charpoly(lam).as_expr(), lam, filter="Q")
    lines = []
    for r in sorted(roots, key=lambda t: -t):
        for v in (A - r * sympy.eye(A.rows)).nullspace():
            lines.append(list(v))
    return lines


def rational_irreducible(rep: IntegerRep, draws: int = 20, seed: int = 0):
    """Decide irreducibility of the Q-representation.

    m = 1 is irreducible; m = 2 uses common rational eigenvectors; larger m
    uses random group-algebra elements z, whose characteristic-polynomial
    factors give candidate invariant subspaces ker p(z), and certifies
    irreducibility once some z has an irreducible characteristic polynomial.
    """
    m = rep.m
    if m == 1:
        return Irreducible("dimension one")
    mats = [rep.sym(g) for g in rep.group.elements]
    if m == 2:
        nonscalar = [A for A in mats if not A.is_diagonal() or A[0, 0] != A[1, 1]]
        if not nonscalar:
            return Reducible(((1, 0),))
        for line in _rational_eigenlines(nonscalar[0]):
            r = _reducible(rep, [line])
            if r:
                return r
        return Irreducible("no common rational eigenvector")
    # spins of standard vectors are cheap sound witnesses
    for i in range(m):
        e = sympy.Matrix([int(i == j) for j in range(m)])
        span = _spin(rep, e)
        if len(span) < m:
            r = _reducible(rep, span)
            if r:
                return r
    rng = random.Random(seed)
    x = sympy.Symbol("x")
    certified = False
    for _ in range(draws):
        z = sympy.zeros(m, m)
        for A in mats:
            z += rng.randint(-3, 3) * A
        cp = z.charpoly(x).as_expr()
        _, factors = sympy.factor_list(cp, x)
        if len(factors) == 1 and factors[0][1] == 1 and sympy.degree(factors[0][0], x) == m:
            certified = True
            break
        for p, e in factors:
            P = (sympy.Poly(p, x) ** e)
            Pz = sympy.zeros(m, m)
            for c in P.all_coeffs():
                Pz = Pz * z + c * sympy.eye(m)
            K = Pz.nullspace()
            if 0 < len(K) < m:
                r = _reducible(rep, [list(v) for v in K])
                if r:
                    return r
                for v in K:
                    span = _spin(rep, v)
                    if len(span) < m:
                        r = _reducible(rep, span)
                        if r:
                            return r
    if certified:
        return Irreducible("generic element with irreducible characteristic polynomial")
    return Undecided(draws)


# ---------------------------------------------------------------------------
# GL(m, Z) conjugacy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Conjugacy:
    P: Matrix
    sigma: dict

    found = True


@dataclass(frozen=True)
class NotFoundWithinBound:
    bound: int
    found = False


def _entry_key(v: int) -> int:
    return 2 * abs(v) - (1 if v > 0 else 0) if v else 0


def _order_key(P: Sequence[int]):
    return (sum(abs(v) for v in P), tuple(_entry_key(v) for v in P))


def _verify_conjugacy(P: sympy.Matrix, A: IntegerRep, B: IntegerRep, sigma: Mapping[str, str]) -> bool:
    if abs(P.det()) != 1:
        return False
    return all(P * A.sym(g) == B.sym(sigma[g]) * P for g in A.group.elements)


def glz_conjugate(repA: IntegerRep, repB: IntegerRep, bound: int = 3, cap: int = 200_000):
    """Find P in GL(m, Z) and an isomorphism sigma with P A(g) P^-1 = B(sigma(g)).

    Candidates are ordered by L1 norm, then lexicographically with entries
    ordered 0, 1, -1, 2, -2, ...; every returned pair is verified exactly.
    """
    if repA.m != repB.m:
        raise RepError("representations have different degrees")
    m = repA.m
    sigmas = repA.group.isomorphisms(repB.group)
    if not sigmas:
        raise RepError("underlying finite groups are not isomorphic")
    gens = repA.group.generators or (repA.group.identity,)
    hits = []
    for sigma in sigmas:
        # P A_g - B_sigma(g) P = 0, linear in the m*m entries of P
        rows = []
        for g in gens:
            A, Bm = repA.sym(g), repB.sym(sigma[g])
            for i in range(m):
                for j in range(m):
                    row = [0] * (m * m)
                    for k in range(m):
                        row[i * m + k] += A[k, j]
                        row[k * m + j] -= Bm[i, k]
                    rows.append(row)
        kernel = sympy.Matrix(rows).nullspace()
        if not kernel:
            continue
        for vec in _bounded_lattice_points(kernel, rows, m, bound, cap):
            P = sympy.Matrix(m, m, list(vec))
            if _verify_conjugacy(P, repA, repB, sigma):
                hits.append((_order_key(vec), len(hits), vec, sigma))
    if not hits:
        return NotFoundWithinBound(bound)
    hits.sort(key=lambda t: (t[0], t[1]))
    _, _, vec, sigma = hits[0]
    return Conjugacy(_tup(sympy.Matrix(m, m, list(vec)).tolist()), dict(sigma))


def _bounded_lattice_points(kernel, rows, m: int, bound: int, cap: int):
    """Integer vectors with entries in [-bound, bound] in the span of ``kernel``.

    ``rows`` is the integer system whose null space ``kernel`` spans.
    """
    if (2 * bound + 1) ** (m * m) <= cap:
        box = np.array(list(itertools.product(range(-bound, bound + 1), repeat=m * m)), dtype=np.int64)
        M = np.array([[int(v) for v in r] for r in rows], dtype=np.int64)
        for vec in box[~(box @ M.T).any(axis=1)]:
            yield tuple(int(v) for v in vec)
        return
    K = sympy.Matrix.hstack(*kernel)
    # free coordinates: pivot rows of the kernel basis determine the rest
    R, piv = K.T.rref()
    free = list(piv)
    basis = R[:len(piv), :]
    count = 0
    for vals in itertools.product(range(-bound, bound + 1), repeat=len(free)):
        vec = sympy.Matrix([vals]) * basis
        count += 1
        if count > cap:
            return
        if all(v.is_integer and abs(v) <= bound for v in vec):
            yield tuple(int(v) for v in vec)


# ---------------------------------------------------------------------------
# minimality
# ---------------------------------------------------------------------------

@dataclass
class MinimalityReport:
    faithful: bool
    kernel: tuple
    irreducibility: str
    witness: tuple | None
    quotient_self_conjugate: dict = field(default_factory=dict)

    @property
    def minimal(self) -> bool:
        return (self.faithful and self.irreducibility == "irreducible"
                and all(self.quotient_self_conjugate.values()))

    def to_json(self) -> dict:
        return {"minimal": self.minimal, "faithful": self.faithful, "kernel": list(self.kernel),
                "rationally_irreducible": self.irreducibility,
                "witness": [list(v) for v in self.witness] if self.witness else None,
                "quotient_self_conjugate": {str(k): v for k, v in self.quotient_self_conjugate.items()}}


def minimality_check(rep: IntegerRep, ks: Sequence[int] = (2, 3)) -> MinimalityReport:
    """Faithful + rationally irreducible + T^m/((1/k)Z^m/Z^m) conjugate back to the original."""
    f = is_faithful(rep)
    verdict = rational_irreducible(rep)
    quot = {}
    for k in ks:
        Q = invariant_lattice_quotient(rep, RationalLattice.scaled_integers(rep.m, k))
        quot[k] = glz_conjugate(Q, rep).found
    witness = verdict.witness if isinstance(verdict, Reducible) else None
    return MinimalityReport(f.faithful, f.kernel, verdict.kind, witness, quot)

"""Integer and modular linear algebra used by the exact modules.

Everything here works on small dense matrices.  Matrices over ``Z/p^a`` are
held in ``int64`` numpy arrays with entries reduced into ``[0, p^a)``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np
import sympy
from sympy.matrices.normalforms import invariant_factors as _sympy_invariant_factors


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    raise TypeError(f"cannot read {x!r} as an exact rational")


def to_sympy(rows) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(as_fraction(v).numerator, as_fraction(v).denominator)
                          for v in row] for row in rows])


def integer_invariant_factors(rows: Sequence[Sequence[int]]) -> list[int]:
    """Invariant factors of an integer matrix, zeros included for the rank defect."""
    mat = sympy.Matrix(rows)
    if mat.rows == 0 or mat.cols == 0:
        return []
    return [int(abs(d)) for d in _sympy_invariant_factors(mat, domain=sympy.ZZ)]


def factorize(n: int) -> dict[int, int]:
    return {int(p): int(e) for p, e in sympy.factorint(n).items()}


def valuation(x: int, p: int, cap: int) -> int:
    """p-adic valuation of ``x`` seen as an element of ``Z/p^cap``."""
    if x % p**cap == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _valuations(block: np.ndarray, p: int, a: int) -> np.ndarray:
    out = np.zeros(block.shape, dtype=np.int64)
    q = 1
    for _ in range(a):
        q *= p
        out += (block % q == 0)
    return out


class LocalSmith:
    """Smith form over the local ring ``Z/p^a``.

    Finds invertible ``P`` (rows) and ``Q`` (columns) with
    ``P @ A @ Q == diag(p**e_0, p**e_1, ...)`` modulo ``p**a``.  ``P``, ``Q``
    and ``Q^{-1}`` are tracked only on request since ``P`` can be large.
    """

    def __init__(self, A, p: int, a: int, *, track_p: bool = False,
                 track_q: bool = False, track_qinv: bool = False):
        self.p, self.a = p, a
        R = p**a
        self.modulus = R
        A = np.array(A, dtype=np.int64) % R
        m, n = A.shape
        P = np.eye(m, dtype=np.int64) if track_p else None
        Q = np.eye(n, dtype=np.int64) if track_q else None
        Qi = np.eye(n, dtype=np.int64) if track_qinv else None
        exps: list[int] = []
        for k in range(min(m, n)):
            sub = A[k:, k:]
            if not sub.any():
                break
            vals = _valuations(sub, p, a)
            flat = int(np.argmin(vals))
            i, j = divmod(flat, sub.shape[1])
            e = int(vals[i, j])
            i += k
            j += k
            if i != k:
                A[[k, i]] = A[[i, k]]
                if P is not None:
                    P[[k, i]] = P[[i, k]]
            if j != k:
                A[:, [k, j]] = A[:, [j, k]]
                if Q is not None:
                    Q[:, [k, j]] = Q[:, [j, k]]
                if Qi is not None:
                    Qi[[k, j]] = Qi[[j, k]]
            pe = p**e
            unit = int(A[k, k]) // pe
            uinv = pow(unit, -1, R)
            A[k] = (A[k] * uinv) % R
            if P is not None:
                P[k] = (P[k] * uinv) % R
            # clear the pivot column below
            c = A[k + 1:, k] // pe
            if c.any():
                A[k + 1:] = (A[k + 1:] - np.outer(c, A[k])) % R
                if P is not None:
                    P[k + 1:] = (P[k + 1:] - np.outer(c, P[k])) % R
            # clear the pivot row to the right
            c = A[k, k + 1:] // pe
            if c.any():
                A[:, k + 1:] = (A[:, k + 1:] - np.outer(A[:, k], c)) % R
                if Q is not None:
                    Q[:, k + 1:] = (Q[:, k + 1:] - np.outer(Q[:, k], c)) % R
                if Qi is not None:
                    Qi[k] = (Qi[k] + c @ Qi[k + 1:]) % R
            exps.append(e)
        self.exponents = exps
        self.rank = len(exps)
        self.P, self.Q, self.Qinv = P, Q, Qi
        self.shape = (m, n)


def solve_mod(A, b, N: int) -> np.ndarray | None:
    """One solution of ``A x = b (mod N)`` or None if the system is inconsistent."""
    A = np.array(A, dtype=np.int64)
    b = np.array(b, dtype=np.int64).reshape(-1)
    m, n = A.shape
    if N == 1:
        return np.zeros(n, dtype=np.int64)
    parts = []
    for p, a in factorize(N).items():
        R = p**a
        ls = LocalSmith(A, p, a, track_p=True, track_q=True)
        rhs = (ls.P @ (b % R)) % R
        y = np.zeros(n, dtype=np.int64)
        for i, e in enumerate(ls.exponents):
            v = valuation(int(rhs[i]), p, a)
            if v < e:
                return None
            y[i] = (int(rhs[i]) // p**e) % R
        if (rhs[ls.rank:] % R).any():
            return None
        parts.append(((ls.Q @ y) % R, R))
    # CRT, coordinate-wise
    x = np.zeros(n, dtype=object)
    M = 1
    for sol, R in parts:
        x_new = np.zeros(n, dtype=object)
        for i in range(n):
            x_new[i] = int(sympy.ntheory.modular.crt([M, R], [int(x[i]), int(sol[i])])[0]) if M > 1 else int(sol[i])
        x = x_new
        M *= R
    return np.array([int(v) % N for v in x], dtype=np.int64)


def lower_hnf(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Lower-triangular row Hermite form of the lattice spanned by integer rows.

    Returns a square basis ``H`` (the lattice must have full rank) with
    ``H[i][j] = 0`` for ``j > i``, positive diagonal and
    ``0 <= H[i][j] < H[j][j]`` below the diagonal.
    """
    work = [list(map(int, r)) for r in rows if any(r)]
    if not work:
        raise ValueError("lattice is zero")
    m = len(work[0])
    basis: list[list[int] | None] = [None] * m
    for col in range(m - 1, -1, -1):
        live = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                q = r[col] // piv[col]
                r = [x - q * y for x, y in zip(r, piv)]
                if r[col] != 0:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            live = nxt
        if not live:
            raise ValueError("lattice is not of full rank")
        piv = live[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis[col] = piv
        work = rest
    H = [list(b) for b in basis]  # type: ignore[arg-type]
    for i in range(m):
        for j in range(i - 1, -1, -1):
            q = H[i][j] // H[j][j]
            if q:
                H[i] = [x - q * y for x, y in zip(H[i], H[j])]
    return H


def lcm_all(values) -> int:
    out = 1
    for v in values:
        v = int(v)
        out = out * v // gcd(out, v)
    return out


def int_det(M) -> int:
    return int(sympy.Matrix(M).det())

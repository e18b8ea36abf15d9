"""Closed-form SO(3)/SU(2) machinery: exponentials, logs, quaternions, finite subgroups."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

# so(3) generators with [L1, L2] = L3 and cyclic
SO3_GENERATORS = np.array([
    [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
    [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
    [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
], dtype=float)

# su(2) generators -i/2 sigma_k, same structure constants as SO3_GENERATORS
SU2_GENERATORS = -0.5j * PAULI


def rodrigues(omega) -> np.ndarray:
    """Rotation matrices exp(hat(omega)) for an (N, 3) array of axis-angle vectors."""
    w = np.atleast_2d(np.asarray(omega, dtype=float))
    theta = np.linalg.norm(w, axis=1)
    K = np.zeros((len(w), 3, 3))
    K[:, 0, 1], K[:, 0, 2] = -w[:, 2], w[:, 1]
    K[:, 1, 0], K[:, 1, 2] = w[:, 2], -w[:, 0]
    K[:, 2, 0], K[:, 2, 1] = -w[:, 1], w[:, 0]
    small = theta < 1e-8
    t = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(t) / t)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(t)) / t**2)
    KK = K @ K
    return np.eye(3)[None] + a[:, None, None] * K + b[:, None, None] * KK


def so3_log(R) -> np.ndarray:
    """Axis-angle vector of a rotation, angle in [0, pi]."""
    R = np.asarray(R, dtype=float)
    c = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = math.acos(c)
    v = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if theta < 1e-8:
        return 0.5 * v
    if math.pi - theta > 1e-6:
        return theta / (2.0 * math.sin(theta)) * v
    # near pi: axis from the symmetric part
    B = (R + np.eye(3)) / 2.0
    k = int(np.argmax(np.diag(B)))
    axis = B[:, k] / math.sqrt(max(B[k, k], 1e-300))
    if np.dot(axis, v) < 0:
        axis = -axis
    return theta * axis / np.linalg.norm(axis)


def su2_exp(omega) -> np.ndarray:
    """exp(sum_k w_k (-i/2) sigma_k) for an (N, 3) array; closed form."""
    w = np.atleast_2d(np.asarray(omega, dtype=float))
    theta = np.linalg.norm(w, axis=1)
    half = theta / 2.0
    small = theta < 1e-12
    s = np.where(small, 0.5, np.sin(half) / np.where(small, 1.0, theta))
    c = np.cos(half)
    U = np.empty((len(w), 2, 2), dtype=complex)
    # cos(t/2) I - i sin(t/2) (n . sigma)
    U[:, 0, 0] = c - 1j * s * w[:, 2]
    U[:, 1, 1] = c + 1j * s * w[:, 2]
    U[:, 0, 1] = -1j * s * w[:, 0] - s * w[:, 1]
    U[:, 1, 0] = -1j * s * w[:, 0] + s * w[:, 1]
    return U


def su2_log(U) -> np.ndarray:
    """Coordinates w with su2_exp(w) = U, |w| in [0, 2 pi]."""
    U = np.asarray(U, dtype=complex)
    q = su2_to_quat(U)[0]
    a = float(np.clip(q[0], -1.0, 1.0))
    half = math.acos(a)
    v = q[1:]
    n = np.linalg.norm(v)
    if n < 1e-15:
        return np.zeros(3) if a > 0 else np.array([2 * math.pi, 0.0, 0.0])
    return 2.0 * half * v / n


# quaternions q = (a, b, c, d) ~ a + b i + c j + d k ---------------------------

def quat_to_su2(q) -> np.ndarray:
    q = np.atleast_2d(np.asarray(q, dtype=float))
    a, b, c, d = q.T
    U = np.empty((len(q), 2, 2), dtype=complex)
    U[:, 0, 0] = a - 1j * d
    U[:, 0, 1] = -c - 1j * b
    U[:, 1, 0] = c - 1j * b
    U[:, 1, 1] = a + 1j * d
    return U


def su2_to_quat(U) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim == 2:
        U = U[None]
    a = U[:, 0, 0].real
    d = -U[:, 0, 0].imag
    b = -U[:, 1, 0].imag
    c = U[:, 1, 0].real
    return np.stack([a, b, c, d], axis=1)


def quat_to_so3(q) -> np.ndarray:
    q = np.atleast_2d(np.asarray(q, dtype=float))
    a, b, c, d = q.T
    R = np.empty((len(q), 3, 3))
    R[:, 0, 0] = a * a + b * b - c * c - d * d
    R[:, 0, 1] = 2 * (b * c - a * d)
    R[:, 0, 2] = 2 * (b * d + a * c)
    R[:, 1, 0] = 2 * (b * c + a * d)
    R[:, 1, 1] = a * a - b * b + c * c - d * d
    R[:, 1, 2] = 2 * (c * d - a * b)
    R[:, 2, 0] = 2 * (b * d - a * c)
    R[:, 2, 1] = 2 * (c * d + a * b)
    R[:, 2, 2] = a * a - b * b - c * c + d * d
    return R


def so3_to_quat(R) -> np.ndarray:
    """One of the two unit quaternions of a rotation (Shepperd's method)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    cands = np.array([tr, R[0, 0], R[1, 1], R[2, 2]])
    k = int(np.argmax(cands))
    if k == 0:
        a = 0.5 * math.sqrt(max(1.0 + tr, 0.0))
        q = [a, (R[2, 1] - R[1, 2]) / (4 * a), (R[0, 2] - R[2, 0]) / (4 * a), (R[1, 0] - R[0, 1]) / (4 * a)]
    elif k == 1:
        b = 0.5 * math.sqrt(max(1.0 + R[0, 0] - R[1, 1] - R[2, 2], 0.0))
        q = [(R[2, 1] - R[1, 2]) / (4 * b), b, (R[0, 1] + R[1, 0]) / (4 * b), (R[0, 2] + R[2, 0]) / (4 * b)]
    elif k == 2:
        c = 0.5 * math.sqrt(max(1.0 - R[0, 0] + R[1, 1] - R[2, 2], 0.0))
        q = [(R[0, 2] - R[2, 0]) / (4 * c), (R[0, 1] + R[1, 0]) / (4 * c), c, (R[1, 2] + R[2, 1]) / (4 * c)]
    else:
        d = 0.5 * math.sqrt(max(1.0 - R[0, 0] - R[1, 1] + R[2, 2], 0.0))
        q = [(R[1, 0] - R[0, 1]) / (4 * d), (R[0, 2] + R[2, 0]) / (4 * d), (R[1, 2] + R[2, 1]) / (4 * d), d]
    q = np.array(q)
    return q / np.linalg.norm(q)


def su2_to_so3(U) -> np.ndarray:
    return quat_to_so3(su2_to_quat(U))


def quaternion_cube_grid(step_count: int) -> np.ndarray:
    """Unit quaternions from a grid on the faces of the cube [-1, 1]^4.

    Each face carries a ``(step_count + 1)^3`` grid of spacing ``2 / step_count``;
    radial projection onto S^3 does not increase distances, so every unit
    quaternion lies within ``sqrt(3)/step_count`` of the returned set.
    """
    t = np.linspace(-1.0, 1.0, step_count + 1)
    inner = t[1:-1]
    faces = []
    for axis in range(4):
        # a point is listed on the face of its first coordinate equal to +-1
        axes = [inner] * axis + [t] * (3 - axis)
        g = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        for sign in (1.0, -1.0):
            faces.append(np.insert(g, axis, sign, axis=1))
    pts = np.concatenate(faces)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


# finite subgroups -------------------------------------------------------------

def matrix_closure(gens: Sequence[np.ndarray], decimals: int = 9, limit: int = 10000) -> np.ndarray:
    """Finite group generated by ``gens`` (float matrices), deduplicated by rounding."""
    gens = [np.asarray(g) for g in gens]
    ident = np.eye(gens[0].shape[0], dtype=gens[0].dtype)

    def key(M):
        M = np.round(M, decimals) + 0.0
        return M.tobytes()

    seen = {key(ident): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x @ g
                k = key(y)
                if k not in seen:
                    seen[k] = y
                    nxt.append(y)
        frontier = nxt
        if len(seen) > limit:
            raise ValueError("generated group is larger than the limit")
    return np.array(list(seen.values()))


def axis_rotation(axis: Sequence[float], angle: float) -> np.ndarray:
    a = np.asarray(axis, dtype=float)
    return rodrigues(angle * a / np.linalg.norm(a))[0]


def cyclic_rotations(n: int, axis=(0.0, 0.0, 1.0)) -> np.ndarray:
    return rodrigues(np.array([2 * math.pi * k / n * np.asarray(axis, float) / np.linalg.norm(axis)
                               for k in range(n)]))


def dihedral_rotations(n: int) -> np.ndarray:
    """Order-2n dihedral group: C_n about z plus the half-turn about x."""
    flip = axis_rotation((1, 0, 0), math.pi)
    C = cyclic_rotations(n)
    return np.concatenate([C, C @ flip])


def tetrahedral_rotations() -> np.ndarray:
    perm = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    return matrix_closure([perm, np.diag([1.0, -1.0, -1.0])])


def octahedral_rotations() -> np.ndarray:
    perm = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    quarter = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
    return matrix_closure([perm, quarter])


def icosahedral_rotations() -> np.ndarray:
    phi = (1 + math.sqrt(5)) / 2
    perm = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    five = 0.5 * np.array([[1, -phi, 1 / phi], [phi, 1 / phi, -1], [1 / phi, 1, phi]])
    return matrix_closure([perm, np.diag([1.0, -1.0, -1.0]), five])


def binary_lift(rotations: np.ndarray) -> np.ndarray:
    """Full preimage in SU(2) of a finite rotation group."""
    qs = [so3_to_quat(R) for R in rotations]
    qs = np.array(qs + [-q for q in qs])
    return quat_to_su2(qs)


def frobenius(A, B) -> float:
    return float(np.linalg.norm(np.asarray(A) - np.asarray(B)))


def is_closed(elements: np.ndarray, tol: float, dist: Callable | None = None) -> bool:
    """Every product lies within ``tol`` of the set (Frobenius)."""
    flat = elements.reshape(len(elements), -1)
    for g in elements:
        prods = (g[None] @ elements).reshape(len(elements), -1)
        d = np.sqrt((np.abs(prods[:, None, :] - flat[None, :, :]) ** 2).sum(-1)).min(axis=1)
        if d.max() > tol:
            return False
    return True


def so3_log_batch(Rs) -> np.ndarray:
    """Vectorized ``so3_log``; rows with angle near pi fall back to the scalar routine."""
    Rs = np.asarray(Rs, dtype=float).reshape(-1, 3, 3)
    c = np.clip((np.trace(Rs, axis1=1, axis2=2) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(c)
    v = np.stack([Rs[:, 2, 1] - Rs[:, 1, 2], Rs[:, 0, 2] - Rs[:, 2, 0], Rs[:, 1, 0] - Rs[:, 0, 1]], axis=1)
    s = np.sin(theta)
    factor = np.where(theta < 1e-8, 0.5, theta / (2.0 * np.where(theta < 1e-8, 1.0, s)))
    out = factor[:, None] * v
    for i in np.nonzero(math.pi - theta <= 1e-6)[0]:
        out[i] = so3_log(Rs[i])
    return out


def su2_log_batch(Us) -> np.ndarray:
    Us = np.asarray(Us, dtype=complex).reshape(-1, 2, 2)
    q = su2_to_quat(Us)
    half = np.arccos(np.clip(q[:, 0], -1.0, 1.0))
    v = q[:, 1:]
    n = np.linalg.norm(v, axis=1)
    out = 2.0 * half[:, None] * v / np.where(n < 1e-15, 1.0, n)[:, None]
    out[(n < 1e-15) & (q[:, 0] < 0)] = [2 * math.pi, 0.0, 0.0]
    return out

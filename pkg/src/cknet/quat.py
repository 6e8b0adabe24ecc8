"""Quaternion algebra as complex 2x2 matrices.

A quaternion w + x i + y j + z k is stored as the matrix

    w*sigma0 + x*(-i*sigma1) + y*(-i*sigma2) + z*(-i*sigma3)
      = [[w - i z, -y - i x],
         [y - i x,  w + i z]]

with sigma0..sigma3 the identity and Pauli matrices.  Membership in the
quaternion span is m22 = conj(m11), m21 = -conj(m12).  R^3 is identified
with the imaginary (trace-free) quaternions; the squared norm is the
determinant, and

    dot(x, y) = -tr(x y)/2,    cross(x, y) = (x y)^{tr=0}.

All functions accept numpy arrays with matrices in the last two axes
(shape (..., 2, 2)) and vectors in the last axis (shape (..., 3)).
"""

from __future__ import annotations

import numpy as np

from .errors import Singular

sigma0 = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)
sigma1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
sigma2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
sigma3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

#: absolute tolerance for membership / identity checks on O(1) entries
MEMBER_TOL = 1e-12


def quat(w, x, y, z):
    """Build quaternion matrices from four real (broadcastable) components."""
    w, x, y, z = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (w, x, y, z)))
    m = np.empty(w.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = w - 1j * z
    m[..., 0, 1] = -y - 1j * x
    m[..., 1, 0] = y - 1j * x
    m[..., 1, 1] = w + 1j * z
    return m


def parts(q):
    """Real components (w, x, y, z), averaging the redundant entries."""
    q = np.asarray(q, dtype=complex)
    w = (q[..., 0, 0] + q[..., 1, 1]).real / 2.0
    x = -(q[..., 0, 1] + q[..., 1, 0]).imag / 2.0
    y = (q[..., 1, 0] - q[..., 0, 1]).real / 2.0
    z = (q[..., 1, 1] - q[..., 0, 0]).imag / 2.0
    return w, x, y, z


def membership_residual(q):
    """Max deviation from the quaternion-span conditions."""
    q = np.asarray(q, dtype=complex)
    r1 = np.abs(q[..., 1, 1] - q[..., 0, 0].conj())
    r2 = np.abs(q[..., 1, 0] + q[..., 0, 1].conj())
    return float(np.max(np.maximum(r1, r2))) if q.size else 0.0


def is_quaternion(q, tol=MEMBER_TOL):
    return membership_residual(q) <= tol


def embed(v):
    """Vec3 -> imaginary quaternion: (x,y,z) |-> x(-i s1) + y(-i s2) + z(-i s3)."""
    v = np.asarray(v, dtype=float)
    return quat(np.zeros(v.shape[:-1]), v[..., 0], v[..., 1], v[..., 2])


def coords_complex(q):
    """Complex (x, y, z) coordinates of the trace-free part of q.

    The basis (sigma0, -i sigma1, -i sigma2, -i sigma3) spans all complex
    2x2 matrices over C, so these linear combinations are defined for any
    matrix; they are real exactly on quaternion-span members.
    """
    q = np.asarray(q, dtype=complex)
    x = 0.5j * (q[..., 0, 1] + q[..., 1, 0])
    y = 0.5 * (q[..., 1, 0] - q[..., 0, 1])
    z = 0.5j * (q[..., 0, 0] - q[..., 1, 1])
    return np.stack([x, y, z], axis=-1)


def project(q):
    """Trace-free projection followed by reading real R^3 coordinates."""
    return coords_complex(q).real


def dot(x, y):
    """Euclidean dot product computed as -tr(xy)/2 in the matrix model."""
    p = embed(x) @ embed(y)
    return -(p[..., 0, 0] + p[..., 1, 1]).real / 2.0


def cross(x, y):
    """Euclidean cross product computed as (xy)^{tr=0} in the matrix model."""
    return project(embed(x) @ embed(y))


def mul(a, b):
    """Quaternion product (matrix product)."""
    return np.asarray(a, dtype=complex) @ np.asarray(b, dtype=complex)


def det(q):
    """Determinant; equals the squared quaternion norm on members."""
    q = np.asarray(q, dtype=complex)
    return q[..., 0, 0] * q[..., 1, 1] - q[..., 0, 1] * q[..., 1, 0]


def norm2(q):
    """Squared norm of a quaternion (real part of the determinant)."""
    return det(q).real


def qconj(q):
    """Quaternion conjugate (adjugate matrix): w - xi - yj - zk."""
    q = np.asarray(q, dtype=complex)
    out = np.empty_like(q)
    out[..., 0, 0] = q[..., 1, 1]
    out[..., 0, 1] = -q[..., 0, 1]
    out[..., 1, 0] = -q[..., 1, 0]
    out[..., 1, 1] = q[..., 0, 0]
    return out


def inv(q, tol=1e-14):
    """Inverse via adjugate / determinant; raises Singular on det ~ 0."""
    q = np.asarray(q, dtype=complex)
    d = det(q)
    bad = np.abs(d) <= tol
    if np.any(bad):
        raise Singular(f"matrix with |det| <= {tol:g} (min |det| = {np.min(np.abs(d)):.3e})")
    return qconj(q) / d[..., None, None]


def conjugate_rotate(R, v):
    """Rotate v by conjugation: project(R^{-1} embed(v) R)."""
    Rm = np.asarray(R, dtype=complex)
    return project(inv(Rm) @ embed(v) @ Rm)

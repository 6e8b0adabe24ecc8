"""Quad lattices, matrix jets, connections, flatness and parallel frames.

A connection assigns an invertible 2x2 matrix to each oriented lattice
edge; positively oriented edges point from (j,k) to (j+1,k) (the L family)
and from (j,k) to (j,k+1) (the M family).  Around the face with corners
p=(j,k), q=(j+1,k), r=(j+1,k+1), s=(j,k+1) flatness reads

    M_rq @ L_qp = L_rs @ M_sp.

Everything is carried as a first-order jet in the spectral parameter t:
``MatJet(val, dot)`` stores the value and the t-derivative, and products,
inverses and powers propagate both layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import NotFlat, Singular
from . import quat


# ---------------------------------------------------------------------------
# matrix jets


@dataclass(frozen=True)
class MatJet:
    """First-order jet of a matrix family t -> A(t): value and derivative.

    Both layers are complex arrays of shape (..., 2, 2); leading axes index
    lattice sites or edges.
    """

    val: np.ndarray
    dot: np.ndarray

    def __post_init__(self):
        val = np.asarray(self.val, dtype=complex)
        dot = np.asarray(self.dot, dtype=complex)
        if val.shape != dot.shape:
            raise ValueError(f"val/dot shape mismatch: {val.shape} vs {dot.shape}")
        object.__setattr__(self, "val", val)
        object.__setattr__(self, "dot", dot)

    @staticmethod
    def constant(val):
        val = np.asarray(val, dtype=complex)
        return MatJet(val, np.zeros_like(val))

    @property
    def shape(self):
        return self.val.shape

    def __getitem__(self, idx):
        return MatJet(self.val[idx], self.dot[idx])

    def __matmul__(self, other):
        if not isinstance(other, MatJet):
            return NotImplemented
        return MatJet(self.val @ other.val, self.dot @ other.val + self.val @ other.dot)

    def __mul__(self, scalar):
        return MatJet(self.val * scalar, self.dot * scalar)

    __rmul__ = __mul__

    def __add__(self, other):
        return MatJet(self.val + other.val, self.dot + other.dot)

    def __sub__(self, other):
        return MatJet(self.val - other.val, self.dot - other.dot)

    def inv(self, tol=1e-14):
        """Jet of the inverse: d/dt A^{-1} = -A^{-1} (dA) A^{-1}."""
        iv = quat.inv(self.val, tol=tol)
        return MatJet(iv, -iv @ self.dot @ iv)

    def power(self, n: int):
        """Jet of the n-th matrix power (n >= 0) by repeated products."""
        if n < 0:
            return self.inv().power(-n)
        eye = np.broadcast_to(np.eye(2, dtype=complex), self.val.shape).copy()
        out = MatJet(eye, np.zeros_like(eye))
        for _ in range(n):
            out = out @ self
        return out


def jet_residual(a: MatJet, b: MatJet) -> float:
    """Entrywise max distance between two jets over both layers."""
    rv = float(np.max(np.abs(a.val - b.val))) if a.val.size else 0.0
    rd = float(np.max(np.abs(a.dot - b.dot))) if a.dot.size else 0.0
    return max(rv, rd)


# ---------------------------------------------------------------------------
# domain and families


@dataclass(frozen=True)
class Domain:
    """Rectangular index window; both ranges are inclusive."""

    j_range: tuple[int, int]
    k_range: tuple[int, int]

    def __post_init__(self):
        if self.j_range[1] < self.j_range[0] or self.k_range[1] < self.k_range[0]:
            raise ValueError(f"empty domain: {self.j_range} x {self.k_range}")

    @property
    def nj(self) -> int:
        return self.j_range[1] - self.j_range[0] + 1

    @property
    def nk(self) -> int:
        return self.k_range[1] - self.k_range[0] + 1

    @property
    def js(self) -> np.ndarray:
        return np.arange(self.j_range[0], self.j_range[1] + 1)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_range[0], self.k_range[1] + 1)

    def transpose(self) -> "Domain":
        return Domain(self.k_range, self.j_range)


@dataclass(frozen=True)
class ConnectionFamily:
    """Edge matrices as jets in t, anchored at the base parameter t0.

    L has shape (nj-1, nk, 2, 2) (edges (j,k)->(j+1,k)) and M has shape
    (nj, nk-1, 2, 2) (edges (j,k)->(j,k+1)).  ``rebuild``, when present,
    reconstructs the same family anchored at another t.
    """

    domain: Domain
    L: MatJet
    M: MatJet
    t0: float = 0.0
    rebuild: Optional[Callable[[float], "ConnectionFamily"]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        nj, nk = self.domain.nj, self.domain.nk
        if self.L.shape != (nj - 1, nk, 2, 2):
            raise ValueError(f"L shape {self.L.shape} != {(nj - 1, nk, 2, 2)}")
        if self.M.shape != (nj, nk - 1, 2, 2):
            raise ValueError(f"M shape {self.M.shape} != {(nj, nk - 1, 2, 2)}")

    def at(self, t: float) -> "ConnectionFamily":
        """The same family re-anchored at t (requires a rebuild hook)."""
        if t == self.t0:
            return self
        if self.rebuild is None:
            raise ValueError("connection has no rebuild hook; cannot change t")
        return self.rebuild(t)

    def transpose(self) -> "ConnectionFamily":
        """Swap the two lattice directions (L and M exchange roles)."""
        swap = lambda jet: MatJet(jet.val.swapaxes(0, 1), jet.dot.swapaxes(0, 1))
        reb = None
        if self.rebuild is not None:
            base = self.rebuild
            reb = lambda t: base(t).transpose()
        return ConnectionFamily(self.domain.transpose(), swap(self.M), swap(self.L), self.t0, reb)


@dataclass(frozen=True)
class FrameFamily:
    """Vertex frames Phi(j,k) as jets, shape (nj, nk, 2, 2)."""

    domain: Domain
    Phi: MatJet
    t0: float = 0.0

    def __post_init__(self):
        nj, nk = self.domain.nj, self.domain.nk
        if self.Phi.shape != (nj, nk, 2, 2):
            raise ValueError(f"Phi shape {self.Phi.shape} != {(nj, nk, 2, 2)}")


# ---------------------------------------------------------------------------
# flatness / integration / gauging


def flatness_residual(conn: ConnectionFamily) -> float:
    """Entrywise max over faces and jet layers of M_rq L_qp - L_rs M_sp."""
    L, M = conn.L, conn.M
    a = MatJet(M.val[1:, :], M.dot[1:, :]) @ MatJet(L.val[:, :-1], L.dot[:, :-1])
    b = MatJet(L.val[:, 1:], L.dot[:, 1:]) @ MatJet(M.val[:-1, :], M.dot[:-1, :])
    return jet_residual(a, b)


def integrate_frame(conn: ConnectionFamily, phi00: MatJet, tol: float = 1e-9) -> FrameFamily:
    """Parallel frame: Phi(0,0)=phi00, transported first along j, then k.

    After integrating along the canonical tree, every j-edge off the k=0
    row is checked for path independence; a violation beyond ``tol``
    raises NotFlat.
    """
    nj, nk = conn.domain.nj, conn.domain.nk
    val = np.empty((nj, nk, 2, 2), dtype=complex)
    dot = np.empty_like(val)
    val[0, 0], dot[0, 0] = phi00.val, phi00.dot
    for j in range(nj - 1):
        step = conn.L[j, 0] @ MatJet(val[j, 0], dot[j, 0])
        val[j + 1, 0], dot[j + 1, 0] = step.val, step.dot
    for k in range(nk - 1):
        step = MatJet(conn.M.val[:, k], conn.M.dot[:, k]) @ MatJet(val[:, k], dot[:, k])
        val[:, k + 1], dot[:, k + 1] = step.val, step.dot
    phi = MatJet(val, dot)
    if nj > 1 and nk > 1:
        lhs = MatJet(phi.val[1:, 1:], phi.dot[1:, 1:])
        rhs = MatJet(conn.L.val[:, 1:], conn.L.dot[:, 1:]) @ MatJet(phi.val[:-1, 1:], phi.dot[:-1, 1:])
        res = jet_residual(lhs, rhs)
        if res > tol:
            raise NotFlat(f"path-independence residual {res:.3e} exceeds {tol:.3e}")
    return FrameFamily(conn.domain, phi, conn.t0)


def gauge(conn: ConnectionFamily, G: MatJet) -> ConnectionFamily:
    """Gauge action on a connection: edge pq maps to G_q eta_qp G_p^{-1}.

    G is a vertex family of jets with shape (nj, nk, 2, 2).  The rebuild
    hook is dropped (the gauged family is anchored at conn.t0 only).
    """
    nj, nk = conn.domain.nj, conn.domain.nk
    if G.shape != (nj, nk, 2, 2):
        raise ValueError(f"gauge shape {G.shape} != {(nj, nk, 2, 2)}")
    Gi = G.inv()
    L = MatJet(G.val[1:, :], G.dot[1:, :]) @ conn.L @ MatJet(Gi.val[:-1, :], Gi.dot[:-1, :])
    M = MatJet(G.val[:, 1:], G.dot[:, 1:]) @ conn.M @ MatJet(Gi.val[:, :-1], Gi.dot[:, :-1])
    return ConnectionFamily(conn.domain, L, M, conn.t0)


def gauge_frame(frames: FrameFamily, G: MatJet) -> FrameFamily:
    """Gauge action on frames: Phi maps to G Phi (parallel for the gauged connection)."""
    nj, nk = frames.domain.nj, frames.domain.nk
    if G.shape != (nj, nk, 2, 2):
        raise ValueError(f"gauge shape {G.shape} != {(nj, nk, 2, 2)}")
    return FrameFamily(frames.domain, G @ frames.Phi, frames.t0)


def admissible_gauge(c_val, c_dot, y) -> MatJet:
    """Vertexwise gauge exp(c(t) sigma0 + i y sigma3) with y independent of t.

    c_val, c_dot are the real value/derivative of the scalar exponent at
    the base parameter; y is a real vertex function.  Gauges of this form
    leave the induced geometry (positions and normals) unchanged.
    """
    c_val = np.asarray(c_val, dtype=float)
    c_dot = np.asarray(c_dot, dtype=float)
    y = np.asarray(y, dtype=float)
    c_val, c_dot, y = np.broadcast_arrays(c_val, c_dot, y)
    val = np.zeros(c_val.shape + (2, 2), dtype=complex)
    val[..., 0, 0] = np.exp(c_val + 1j * y)
    val[..., 1, 1] = np.exp(c_val - 1j * y)
    return MatJet(val, c_dot[..., None, None] * val)

"""Backlund transforms of K = -1 rotational nets in the normal Lax form.

A single transform with real angle parameter alpha moves every contact
element by the fixed distance |sin alpha| while tilting the normal by
the fixed angle alpha; it is driven by a unit scalar field s~ satisfying
Moebius recurrences

    s~(j+1, k) = A(j) . s~(j, k),      s~(j, k+1) = B(j) . s~(j, k),

whose coefficient matrices A, B (and C, D for the companion transform
with angle beta) are built from the normal-form scalars.  The new frame
is W Phi (or V Phi) with

    W = [[cot(a/2) s~/s,  i e^t], [i e^t,  cot(a/2) s/s~]],
    V = [[1, i e^{-t} tan(b/2) s^ s], [i e^{-t} tan(b/2)/(s^ s), 1]].

Composing a pair with beta = -alpha and real sin(alpha) produces a real
net even for complex alpha = +-pi/2 + i y (then |sin alpha| > 1 and the
two scalar fields must be seeded as complex conjugates).  Periodicity in
the rotation direction is controlled by the eigenvalue ratio of B: the
transform closes after N0 steps when B^{N0} is proportional to the
identity, which is a one-parameter root-finding problem in alpha.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

import numpy as np

from .connect import HsLaxData
from .errors import (BranchFailure, ConfigError, NoRoot, PathInconsistent,
                     PoleHit, RealityViolated)
from .lattice import FrameFamily, MatJet
from .nets import ContactElementNet, sym, sym_arrays


@dataclass(frozen=True)
class BacklundParams:
    """Angle parameters and scalar seeds of a (double) Backlund transform.

    beta defaults to -alpha; s_hat0 defaults to 1 for real alpha and to
    conj(s_tilde0) when |sin alpha| > 1 (the reality condition of the
    double transform).
    """

    alpha: complex
    beta: Optional[complex] = None
    s_tilde0: complex = 1.0 + 0.0j
    s_hat0: Optional[complex] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.beta is None:
            object.__setattr__(self, "beta", -self.alpha)
        else:
            object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "s_tilde0", complex(self.s_tilde0))
        if self.s_hat0 is None:
            if abs(np.sin(self.alpha)) > 1.0 and abs(np.sin(self.alpha).imag) < 1e-12:
                object.__setattr__(self, "s_hat0", np.conj(self.s_tilde0))
            else:
                object.__setattr__(self, "s_hat0", 1.0 + 0.0j)
        else:
            object.__setattr__(self, "s_hat0", complex(self.s_hat0))


def _require_real_angle(alpha: complex) -> float:
    if abs(alpha.imag) > 1e-12:
        raise ConfigError(f"single transform needs a real angle, got {alpha}")
    a = float(alpha.real)
    if not (0.0 < abs(a) < np.pi):
        raise ConfigError(f"angle must lie in (-pi,0) or (0,pi), got {a}")
    return a


# ---------------------------------------------------------------------------
# Moebius machinery


def moebius(mat, z):
    """Moebius action (m11 z + m12) / (m21 z + m22); PoleHit near the pole."""
    den = mat[1, 0] * z + mat[1, 1]
    if abs(den) < 1e-14:
        raise PoleHit(f"Moebius denominator vanished at z = {z}")
    return (mat[0, 0] * z + mat[0, 1]) / den


def build_abcd(hs: HsLaxData, alpha: complex, beta: Optional[complex] = None):
    """Coefficient matrices of the scalar recurrences, per profile edge/column.

    A (shape (nj-1, 2, 2)) and B (shape (nj, 2, 2)) propagate s~ along j
    and k for the W transform with angle alpha; C and D do the same for
    the V transform with angle beta (default -alpha).  All four are
    independent of the spectral parameter.
    """
    if beta is None:
        beta = -alpha
    sa, ca = np.sin(alpha), np.cos(alpha)
    sb, cb = np.sin(beta), np.cos(beta)
    u, ell = hs.u, hs.ell
    v, m = hs.s, hs.m
    t1 = np.tan(hs.delta1 / 2.0)
    t2 = np.tan(hs.delta2 / 2.0)

    def pack(e11, e12, e21, e22, n):
        out = np.empty((n, 2, 2), dtype=complex)
        out[:, 0, 0] = e11
        out[:, 0, 1] = e12
        out[:, 1, 0] = e21
        out[:, 1, 1] = e22
        return out

    A = pack(sa * (u / t1 + t1 / u) / ell,
             (1.0 / u - u) * ca - u - 1.0 / u,
             (u - 1.0 / u) * ca - u - 1.0 / u,
             sa * ell * (1.0 / (u * t1) + u * t1), len(u))
    B = pack(sa * (v / t2 + t2 / v) / m,
             (1.0 / v - v) * ca - v - 1.0 / v,
             (v - 1.0 / v) * ca - v - 1.0 / v,
             sa * m * (1.0 / (v * t2) + v * t2), len(v))
    C = pack(sb * ell * (1.0 / (u * t1) + u * t1),
             (u - 1.0 / u) * cb + u + 1.0 / u,
             (1.0 / u - u) * cb + u + 1.0 / u,
             sb * (u / t1 + t1 / u) / ell, len(u))
    D = pack(sb * m * (1.0 / (v * t2) + v * t2),
             (v - 1.0 / v) * cb + v + 1.0 / v,
             (1.0 / v - v) * cb + v + 1.0 / v,
             sb * (v / t2 + t2 / v) / m, len(v))
    return A, B, C, D


def propagate(hs: HsLaxData, alpha: complex, seed: complex, which: str = "tilde",
              beta: Optional[complex] = None, path_tol: float = 1e-10) -> np.ndarray:
    """Scalar field of a transform on the whole grid from its corner seed.

    Fills the first row along j and every column along k, then verifies
    the remaining j-edges (the two recurrences commute on consistent
    data); deviations beyond path_tol raise PathInconsistent.
    """
    A, B, C, D = build_abcd(hs, alpha, beta)
    if which == "tilde":
        Aj, Bj = A, B
    elif which == "hat":
        Aj, Bj = C, D
    else:
        raise ConfigError(f"which must be 'tilde' or 'hat', got {which!r}")
    nj, nk = hs.domain.nj, hs.domain.nk
    s = np.empty((nj, nk), dtype=complex)
    s[0, 0] = seed
    for j in range(nj - 1):
        s[j + 1, 0] = moebius(Aj[j], s[j, 0])
    for j in range(nj):
        for k in range(nk - 1):
            s[j, k + 1] = moebius(Bj[j], s[j, k])
    worst = 0.0
    for j in range(nj - 1):
        for k in range(1, nk):
            worst = max(worst, abs(moebius(Aj[j], s[j, k]) - s[j + 1, k]))
    if worst > path_tol:
        raise PathInconsistent(f"recurrence paths disagree by {worst:.3e} (tol {path_tol:.1e})")
    return s


# ---------------------------------------------------------------------------
# frame transforms


def _w_jet(hs: HsLaxData, alpha: complex, s_tilde: np.ndarray, t0: float) -> MatJet:
    cot = 1.0 / np.tan(alpha / 2.0)
    ratio = s_tilde / hs.s[:, None]
    nj, nk = s_tilde.shape
    val = np.empty((nj, nk, 2, 2), dtype=complex)
    dot = np.zeros_like(val)
    et = np.exp(t0)
    val[..., 0, 0] = cot * ratio
    val[..., 1, 1] = cot / ratio
    val[..., 0, 1] = 1j * et
    val[..., 1, 0] = 1j * et
    dot[..., 0, 1] = 1j * et
    dot[..., 1, 0] = 1j * et
    return MatJet(val, dot)


def _v_jet(hs: HsLaxData, beta: complex, s_hat: np.ndarray, t0: float) -> MatJet:
    tn = np.tan(beta / 2.0)
    prod = s_hat * hs.s[:, None]
    nj, nk = s_hat.shape
    val = np.empty((nj, nk, 2, 2), dtype=complex)
    dot = np.zeros_like(val)
    emt = np.exp(-t0)
    val[..., 0, 0] = 1.0
    val[..., 1, 1] = 1.0
    val[..., 0, 1] = 1j * emt * tn * prod
    val[..., 1, 0] = 1j * emt * tn / prod
    dot[..., 0, 1] = -1j * emt * tn * prod
    dot[..., 1, 0] = -1j * emt * tn / prod
    return MatJet(val, dot)


def single_backlund(frames: FrameFamily, hs: HsLaxData, params: BacklundParams,
                    xi: float = 2.0, which: str = "tilde") -> ContactElementNet:
    """Single Backlund transform of the net framed by ``frames``.

    Real angle only: params.alpha for the W form ("tilde"), params.beta
    for the V form ("hat").  Seeds must be unit scalars.
    """
    angle = params.alpha if which == "tilde" else params.beta
    seed = params.s_tilde0 if which == "tilde" else params.s_hat0
    a = _require_real_angle(complex(angle))
    if abs(abs(seed) - 1.0) > 1e-10:
        raise ConfigError(f"a real-angle transform needs a unit seed, got |seed| = {abs(seed):.6g}")
    s_grid = propagate(hs, params.alpha, seed, which, beta=params.beta)
    if which == "tilde":
        T = _w_jet(hs, a, s_grid, frames.t0)
    else:
        T = _v_jet(hs, a, s_grid, frames.t0)
    new_frames = FrameFamily(frames.domain, T @ frames.Phi, frames.t0)
    return sym(new_frames, xi, 0.0)


# ---------------------------------------------------------------------------
# double transforms


@dataclass(frozen=True)
class DoubleReport:
    """Scalar fields and reality/unitarity residues of a double transform."""

    imag_residue: float
    unit_residual: float
    s_tilde: np.ndarray
    s_hat: np.ndarray
    shat_tilde: np.ndarray


def _check_condition_c(params: BacklundParams) -> None:
    if abs(params.beta + params.alpha) > 1e-12:
        raise ConfigError("double transform requires beta = -alpha")
    sa = np.sin(params.alpha)
    if abs(sa.imag) > 1e-12:
        raise ConfigError(f"double transform requires real sin(alpha), got sin = {sa}")
    if abs(sa.real) <= 1.0:
        for name, seed in (("s_tilde0", params.s_tilde0), ("s_hat0", params.s_hat0)):
            if abs(abs(seed) - 1.0) > 1e-10:
                raise ConfigError(f"|sin alpha| <= 1 requires unit seed {name}")
    else:
        if abs(params.s_hat0 - np.conj(params.s_tilde0)) > 1e-12:
            raise ConfigError("|sin alpha| > 1 requires conjugate seeds s_hat0 = conj(s_tilde0)")


def double_backlund(frames: FrameFamily, hs: HsLaxData, params: BacklundParams,
                    xi: float = 2.0, reality_tol: float = 1e-6):
    """Double Backlund transform with beta = -alpha and real sin(alpha).

    Returns (ContactElementNet, DoubleReport).  The composed scalar field

        s^~ = (s^ s~ - tan^2(a/2)) / (s (1 - tan^2(a/2) s^ s~))

    feeds the closed-form product frame; its coordinates must come out
    real (RealityViolated beyond reality_tol says the seeds and angle
    are inconsistent).
    """
    _check_condition_c(params)
    alpha = params.alpha
    s_tilde = propagate(hs, alpha, params.s_tilde0, "tilde", beta=params.beta)
    s_hat = propagate(hs, alpha, params.s_hat0, "hat", beta=params.beta)
    tn2 = np.tan(alpha / 2.0) ** 2
    s_col = hs.s[:, None]
    den = 1.0 - tn2 * s_hat * s_tilde
    if np.min(np.abs(den)) < 1e-14:
        raise PoleHit("composed scalar field hit a pole")
    shat_tilde = (s_hat * s_tilde - tn2) / (s_col * den)
    unit_residual = float(np.max(np.abs(np.abs(shat_tilde) - 1.0)))
    cot = 1.0 / np.tan(alpha / 2.0)
    tn = np.tan(alpha / 2.0)
    et = np.exp(frames.t0)
    emt = np.exp(-frames.t0)
    nj, nk = s_tilde.shape
    val = np.empty((nj, nk, 2, 2), dtype=complex)
    dot = np.zeros_like(val)
    val[..., 0, 0] = s_tilde * (cot / s_col + tn * shat_tilde)
    val[..., 1, 1] = (cot * s_col + tn / shat_tilde) / s_tilde
    val[..., 0, 1] = 1j * (et - emt * s_col * shat_tilde)
    val[..., 1, 0] = 1j * (et - emt / (s_col * shat_tilde))
    dot[..., 0, 1] = 1j * (et + emt * s_col * shat_tilde)
    dot[..., 1, 0] = 1j * (et + emt / (s_col * shat_tilde))
    VW = MatJet(val, dot)
    new_frames = FrameFamily(frames.domain, VW @ frames.Phi, frames.t0)
    x, n = sym_arrays(new_frames, xi, 0.0)
    imag_residue = float(max(np.max(np.abs(x.imag)), np.max(np.abs(n.imag))))
    if imag_residue > reality_tol:
        raise RealityViolated(f"double transform left R^3 (residue {imag_residue:.3e})")
    net = ContactElementNet(x.real, n.real)
    return net, DoubleReport(imag_residue, unit_residual, s_tilde, s_hat, shat_tilde)


# ---------------------------------------------------------------------------
# rotational periodicity


@dataclass(frozen=True)
class PeriodicAlpha:
    """Root of the periodicity condition: angle, phase index, power residual.

    alpha is real when the recurrence closes for an ordinary transform
    angle; otherwise it lies on the line pi/2 + iy (real sin alpha with
    |sin alpha| > 1), where only the double transform yields a real net.
    """

    alpha: complex
    p: int
    residual: float


def _rotation_matrix(hs: HsLaxData, alpha: float, which: str) -> np.ndarray:
    A, B, C, D = build_abcd(hs, alpha)
    return B[0] if which == "B" else D[0]


def _eigenphase(mat: np.ndarray) -> float:
    lam = np.linalg.eigvals(mat)
    if abs(lam[1]) < 1e-300:
        return np.pi
    r = np.angle(lam[0] / lam[1])
    return abs(r)


def _power_residual(mat: np.ndarray, N0: int) -> float:
    d = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    hat = mat / np.sqrt(d)
    P = np.linalg.matrix_power(hat, N0)
    eye = np.eye(2)
    return float(min(np.max(np.abs(P - eye)), np.max(np.abs(P + eye))))


def find_periodic_alpha(hs: HsLaxData, N0: int, p: Optional[int] = None,
                        which: str = "B", n_scan: int = 720,
                        phase_tol: float = 1e-12, verify_tol: float = 1e-9,
                        y_max: float = 8.0) -> PeriodicAlpha:
    """Transform angle whose rotational recurrence closes after N0 steps.

    Solves eigenphase(B(alpha)) = 2 pi p / N0 (folded into [0, pi]) by
    bracketing and bisection, first for alpha on the real interval
    (0, pi) and then along the line pi/2 + iy where sin alpha is real
    and > 1 (the regime where only the double transform is real);
    p defaults to the smallest index coprime to N0 whose phase the scan
    reaches.  The returned residual is the entrywise distance of the
    normalized N0-th power from +-identity, verified against verify_tol.
    """
    if N0 < 2:
        raise ConfigError(f"need N0 >= 2, got {N0}")
    if which not in ("B", "D"):
        raise ConfigError(f"which must be 'B' or 'D', got {which!r}")
    ps = [p] if p is not None else [q for q in range(1, N0) if gcd(q, N0) == 1]
    paths = (
        lambda sigma: complex(sigma),
        lambda sigma: np.pi / 2.0 + 1j * sigma * (y_max / np.pi),
    )
    grids = [np.linspace(1e-6, np.pi - 1e-6, n_scan) for _ in paths]
    phase_rows = [
        np.array([_eigenphase(_rotation_matrix(hs, path(sig), which)) for sig in grid])
        for path, grid in zip(paths, grids)
    ]
    for p_try in ps:
        target = (2.0 * np.pi * p_try / N0) % (2.0 * np.pi)
        target = min(target, 2.0 * np.pi - target)
        for path, grid, phases in zip(paths, grids, phase_rows):
            f = phases - target
            for i in np.nonzero(f[:-1] * f[1:] <= 0.0)[0]:
                lo, hi = grid[int(i)], grid[int(i) + 1]
                flo = f[int(i)]
                for _ in range(200):
                    mid = (lo + hi) / 2.0
                    fm = _eigenphase(_rotation_matrix(hs, path(mid), which)) - target
                    if abs(fm) < phase_tol or hi - lo < 1e-15:
                        lo = hi = mid
                        break
                    if flo * fm <= 0.0:
                        hi = mid
                    else:
                        lo, flo = mid, fm
                alpha = path((lo + hi) / 2.0)
                if abs(alpha.imag) < 1e-12:
                    alpha = complex(alpha.real)
                residual = _power_residual(_rotation_matrix(hs, alpha, which), N0)
                if residual <= verify_tol:
                    return PeriodicAlpha(alpha, int(p_try), residual)
    raise NoRoot(f"no transform angle (real, or on the line pi/2 + iy with y < {y_max:g}) "
                 f"closes the recurrence after {N0} steps for phase indices {ps}")


# ---------------------------------------------------------------------------
# linear form of the recurrence


def linearize(hs: HsLaxData, params: BacklundParams, zeta_seed: Optional[complex] = None,
              pole_tol: float = 1e-14) -> np.ndarray:
    """Scalar field of the W transform via the linearized recurrence.

    Substituting S = 1/(s~ - zeta) with zeta a Moebius fixed point of B
    turns both recurrences affine:

        S(j+1,k) = (A21 zeta + A22)^2/det(A) S(j,k) + A21 (A21 zeta + A22)/det(A),

    and likewise with B along k; zeta propagates as zeta(j+1) = A(j).zeta(j)
    and is invariant along k.  Returns the reconstructed s~ grid.
    """
    A, B, _, _ = build_abcd(hs, params.alpha, params.beta)
    B0 = B[0]
    if abs(B0[1, 0]) < 1e-14:
        if abs(B0[1, 1] - B0[0, 0]) < 1e-14:
            raise BranchFailure("rotation recurrence at the base column is a pure translation")
        roots = [B0[0, 1] / (B0[1, 1] - B0[0, 0])]
    else:
        disc = np.sqrt((B0[1, 1] - B0[0, 0]) ** 2 + 4.0 * B0[1, 0] * B0[0, 1])
        roots = [((B0[0, 0] - B0[1, 1]) + disc) / (2.0 * B0[1, 0]),
                 ((B0[0, 0] - B0[1, 1]) - disc) / (2.0 * B0[1, 0])]
    if zeta_seed is None:
        lams = [B0[1, 0] * z + B0[1, 1] for z in roots]
        order = sorted(range(len(roots)),
                       key=lambda i: (-abs(lams[i]), round(roots[i].real, 12), round(roots[i].imag, 12)))
        zeta = roots[order[0]]
    else:
        zeta = complex(zeta_seed)
        resid = abs(B0[1, 0] * zeta * zeta + (B0[1, 1] - B0[0, 0]) * zeta - B0[0, 1])
        if resid > 1e-8 * max(1.0, np.max(np.abs(B0))):
            raise ConfigError(f"zeta_seed is not a fixed point of the base recurrence "
                              f"(residual {resid:.3e})")
    nj, nk = hs.domain.nj, hs.domain.nk
    if abs(params.s_tilde0 - zeta) < pole_tol:
        raise PoleHit("seed coincides with the recurrence fixed point")
    zetas = np.empty(nj, dtype=complex)
    zetas[0] = zeta
    for j in range(nj - 1):
        zetas[j + 1] = moebius(A[j], zetas[j])
    S = np.empty((nj, nk), dtype=complex)
    S[0, 0] = 1.0 / (params.s_tilde0 - zeta)
    for j in range(nj - 1):
        den = A[j][1, 0] * zetas[j] + A[j][1, 1]
        detA = A[j][0, 0] * A[j][1, 1] - A[j][0, 1] * A[j][1, 0]
        S[j + 1, 0] = (den * den / detA) * S[j, 0] + A[j][1, 0] * den / detA
    for j in range(nj):
        den = B[j][1, 0] * zetas[j] + B[j][1, 1]
        detB = B[j][0, 0] * B[j][1, 1] - B[j][0, 1] * B[j][1, 0]
        slope = den * den / detB
        offset = B[j][1, 0] * den / detB
        for k in range(nk - 1):
            S[j, k + 1] = slope * S[j, k] + offset
    if np.min(np.abs(S)) < pole_tol:
        raise PoleHit("linearized field hit a pole of the reconstruction")
    return 1.0 / S + zetas[:, None]

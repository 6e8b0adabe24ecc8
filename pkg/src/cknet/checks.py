"""Runnable verification suite for every documented invariant.

Each criterion function builds its own small desk-scale fixtures (cached
across criteria), measures residuals, and returns CheckResult entries;
``run_all`` executes the lot.  The CLI ``check`` subcommand and the
acceptance tests are thin wrappers around this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import lcm

import numpy as np

from . import backlund as bk
from .connect import (build_ck_connection, build_cmc_connection,
                      closing_residual, gauge_to_hs, hs_lax, rotational_frames)
from .lattice import admissible_gauge, flatness_residual, gauge_frame, jet_residual
from .nets import (ContactElementNet, curvature_report, rigid_align,
                   singular_vertices, sym, validate_ec)
from .revolution import (build_rcnet, conservation_drift, elliptic_theta,
                         gauss_from_profile, jacobi, profile_elliptic,
                         profile_hyp, profile_trig, validate_profile)

THETA = np.pi / 6.0  # rotation step of the shared fixtures (k0 = 12)


@dataclass(frozen=True)
class CheckResult:
    """One measured invariant: its worst residual against the tolerance."""

    name: str
    max_residual: float
    tolerance: float
    passed: bool


def _result(name: str, residual: float, tol: float) -> CheckResult:
    residual = float(residual)
    return CheckResult(name, residual, tol, bool(residual <= tol))


# ---------------------------------------------------------------------------
# fixtures (cached; every criterion works on the same small grids)

PROFILE_SPECS = (
    ("trig", 0.6, +1), ("trig", 1.0, +1), ("trig", 1.4, +1),
    ("hyp", 0.6, -1), ("hyp", 1.0, -1), ("hyp", 1.4, -1),
    ("elliptic", 0.6, -1), ("elliptic", 1.0, -1), ("elliptic", 1.4, -1),
    ("elliptic", 0.6, +1), ("elliptic", 1.0, +1), ("elliptic", 1.4, +1),
)


@lru_cache(maxsize=None)
def fixture_profile(kind: str, kappa: float, K_sign: int):
    if kind == "trig":
        return profile_trig(np.full(6, -np.tan(0.05)), kappa, 0.0, j_lo=-3)
    if kind == "hyp":
        AB = (1.0 / kappa ** 2 - 1.0) / 4.0
        A = 2.0 / 3.0 if AB > 0.1 else 0.5
        return profile_hyp(np.full(4, 0.05), A, AB / A, j_lo=-2)
    if kind == "elliptic":
        return profile_elliptic(kappa, K_sign, (-3, 3), j0=4)
    raise ValueError(kind)


@lru_cache(maxsize=None)
def fixture_ck():
    """K=-1 fixture: elliptic kappa=0.6 profile, theta=pi/6, 15 columns."""
    p = fixture_profile("elliptic", 0.6, -1)
    conn, data = build_ck_connection(p, THETA, 15)
    return p, conn, data


@lru_cache(maxsize=None)
def fixture_ck_hs():
    p, conn, data = fixture_ck()
    hs, conn_gauged = gauge_to_hs(conn, data)
    frames = rotational_frames(conn, a0=p.a[0], b0=p.b[0])
    frames_hs = gauge_frame(frames, hs.gauge)
    base_net = sym(frames_hs, 2.0)
    return hs, conn_gauged, frames_hs, base_net


@lru_cache(maxsize=None)
def fixture_ck_hex():
    """K=-1 fixture with k0 = 6 (theta = pi/3) and 26 columns for periodicity."""
    p = fixture_profile("elliptic", 0.6, -1)
    conn, data = build_ck_connection(p, 2.0 * np.pi / 6.0, 26)
    hs, _ = gauge_to_hs(conn, data)
    frames = rotational_frames(conn, a0=p.a[0], b0=p.b[0])
    frames_hs = gauge_frame(frames, hs.gauge)
    base_net = sym(frames_hs, 2.0)
    return hs, frames_hs, base_net


@lru_cache(maxsize=None)
def fixture_cmc(case: int):
    if case == 1:
        p = fixture_profile("trig", 0.6, +1)
    else:
        p = fixture_profile("trig", 1.4, +1)
    conn, data = build_cmc_connection(p, THETA, 15, case)
    return p, conn, data


@lru_cache(maxsize=None)
def fixture_linear():
    """Wide K=-1 fixture for the 30 x 50 linearization comparison."""
    p = profile_elliptic(0.6, -1, (-15, 14), j0=16)
    conn, data = build_ck_connection(p, np.pi / 5.0, 50)
    hs, _ = gauge_to_hs(conn, data)
    return hs


def _cases():
    p1, conn1, _ = fixture_cmc(1)
    p2, conn2, _ = fixture_cmc(2)
    p3, conn3, _ = fixture_ck()
    return ((1, p1, conn1), (2, p2, conn2), (3, p3, conn3))


# ---------------------------------------------------------------------------
# criteria


def criterion_1() -> list[CheckResult]:
    """Every face of every built rotational net has K = K_sign."""
    out = []
    for kind, kappa, K_sign in PROFILE_SPECS:
        p = fixture_profile(kind, kappa, K_sign)
        tag = f"[{kind},kappa={kappa:g},K={K_sign:+d}]"
        out.append(_result(f"c01_gauss_profile{tag}",
                           np.max(np.abs(gauss_from_profile(p) - K_sign)), 1e-12))
        net = build_rcnet(p, 13, k0=12)
        rep = curvature_report(net)
        keep = ~rep.degenerate
        out.append(_result(f"c01_gauss_faces{tag}",
                           np.max(np.abs(rep.K[keep] - K_sign)), 1e-9))
        out.append(_result(f"c01_ec{tag}", validate_ec(net).max_ec, 1e-9))
    return out


def criterion_2() -> list[CheckResult]:
    """Profile conservation laws and elliptic-function identities."""
    out = []
    for kind, kappa, K_sign in PROFILE_SPECS:
        p = fixture_profile(kind, kappa, K_sign)
        tag = f"[{kind},kappa={kappa:g},K={K_sign:+d}]"
        out.append(_result(f"c02_conservation{tag}", conservation_drift(p), 1e-10))
        if kind == "elliptic":
            Theta = elliptic_theta(kappa, 4)
            args = Theta * np.concatenate([p.js, p.js[:-1] + 0.5])
            sn, cn, dn = jacobi(args, kappa)
            worst = max(np.max(np.abs(sn ** 2 + cn ** 2 - 1.0)),
                        np.max(np.abs(dn ** 2 + kappa ** 2 * sn ** 2 - 1.0)))
            out.append(_result(f"c02_jacobi{tag}", worst, 1e-12))
    return out


def criterion_3() -> list[CheckResult]:
    """Flatness of all three connection families, value and derivative layers."""
    out = []
    h = 1e-4
    for case, _, conn in _cases():
        flat = max(flatness_residual(conn.at(t)) for t in (-0.5, 0.0, 0.5))
        out.append(_result(f"c03_flatness[case{case}]", flat, 1e-11))
        fd = 0.0
        for t in (-0.5, 0.0, 0.5):
            mid, up, dn_ = conn.at(t), conn.at(t + h), conn.at(t - h)
            for part in ("L", "M"):
                diff = (getattr(up, part).val - getattr(dn_, part).val) / (2.0 * h)
                fd = max(fd, float(np.max(np.abs(diff - getattr(mid, part).dot))))
        out.append(_result(f"c03_jets[case{case}]", fd, 1e-6))
    return out


def criterion_4() -> list[CheckResult]:
    """Sym reconstruction matches the directly built net up to a rigid motion."""
    out = []
    for case, p, conn in _cases():
        xi = 2.0 if case == 3 else -2.0
        work = conn.transpose() if case == 1 else conn
        frames = rotational_frames(work, a0=p.a[0], b0=p.b[0])
        net = sym(frames, xi)
        target = build_rcnet(p, work.domain.nk, theta=THETA)
        out.append(_result(f"c04_sym[case{case}]", rigid_align(net, target).residual, 1e-8))
    return out


def criterion_5() -> list[CheckResult]:
    """Normal-form gauge is entrywise exact; admissible gauges keep the net."""
    _, conn, _ = fixture_ck()
    hs, conn_gauged, frames_hs, base_net = fixture_ck_hs()
    direct = hs_lax(hs, 0.0)
    ent = max(jet_residual(conn_gauged.L, direct.L), jet_residual(conn_gauged.M, direct.M))
    out = [_result("c05_normal_form_entrywise", ent, 1e-11)]
    frames = rotational_frames(conn, a0=fixture_ck()[0].a[0], b0=fixture_ck()[0].b[0])
    net0 = sym(frames, 2.0)
    jj, kk = np.meshgrid(np.arange(conn.domain.nj), np.arange(conn.domain.nk), indexing="ij")
    G = admissible_gauge(0.02 * np.sin(1.0 + jj + 0.7 * kk),
                         0.10 * np.cos(2.0 + jj - kk),
                         0.30 * np.sin(3.0 * jj + kk))
    net1 = sym(gauge_frame(frames, G), 2.0)
    drift = max(np.max(np.abs(net1.x - net0.x)), np.max(np.abs(net1.n - net0.n)))
    out.append(_result("c05_admissible_gauge", drift, 1e-11))
    return out


def _backlund_residuals(base: ContactElementNet, new: ContactElementNet, alpha: float):
    dx = new.x - base.x
    dist = np.abs(np.linalg.norm(dx, axis=-1) - abs(np.sin(alpha)))
    ang = np.abs(np.einsum("...i,...i->...", base.n, new.n) - np.cos(alpha))
    orth = np.maximum(np.abs(np.einsum("...i,...i->...", dx, base.n)),
                      np.abs(np.einsum("...i,...i->...", dx, new.n)))
    return float(np.max(dist)), float(np.max(ang)), float(np.max(orth))


def criterion_6() -> list[CheckResult]:
    """Single transforms: distance, normal angle, orthogonality, curvature."""
    hs, _, frames_hs, base_net = fixture_ck_hs()
    out = []
    for alpha in (np.pi / 3.0, np.pi / 2.0, 2.0 * np.pi / 3.0):
        for seed in (1.0 + 0.0j, np.exp(0.7j), np.exp(-1.9j)):
            params = bk.BacklundParams(alpha, s_tilde0=seed)
            net = bk.single_backlund(frames_hs, hs, params)
            dist, ang, orth = _backlund_residuals(base_net, net, alpha)
            rep = curvature_report(net)
            keep = ~rep.degenerate
            kres = float(np.max(np.abs(rep.K[keep] + 1.0)))
            tag = f"[alpha={alpha:.3f},seed={np.angle(seed):+.2f}]"
            out.append(_result(f"c06_distance{tag}", dist, 1e-9))
            out.append(_result(f"c06_angle{tag}", ang, 1e-9))
            out.append(_result(f"c06_orthogonality{tag}", orth, 1e-9))
            out.append(_result(f"c06_gauss{tag}", kres, 1e-7))
    return out


def criterion_7() -> list[CheckResult]:
    """Annulus search: the rotational recurrence closes and the net repeats."""
    hs, frames_hs, _ = fixture_ck_hex()
    out = []
    for N0 in (8, 9):
        found = bk.find_periodic_alpha(hs, N0)
        out.append(_result(f"c07_power[N0={N0}]", found.residual, 1e-9))
        if abs(complex(found.alpha).imag) < 1e-12:
            params = bk.BacklundParams(found.alpha.real)
            net = bk.single_backlund(frames_hs, hs, params)
        else:
            params = bk.BacklundParams(found.alpha, s_tilde0=1.3 * np.exp(0.4j))
            net, _ = bk.double_backlund(frames_hs, hs, params)
        period = lcm(6, N0)
        nk = net.x.shape[1]
        drift = np.max(np.abs(net.x[:, period:] - net.x[:, : nk - period]))
        out.append(_result(f"c07_period[N0={N0}]", drift, 1e-8))
    return out


def criterion_8() -> list[CheckResult]:
    """Double transform with complex angle stays real, unit, pseudospherical."""
    hs, _, frames_hs, _ = fixture_ck_hs()
    params = bk.BacklundParams(np.pi / 2.0 + 0.5j, s_tilde0=1.3 * np.exp(0.4j))
    net, rep = bk.double_backlund(frames_hs, hs, params)
    crep = curvature_report(net)
    keep = ~crep.degenerate
    return [
        _result("c08_imag_residue", rep.imag_residue, 1e-9),
        _result("c08_unit_normal", np.max(np.abs(np.linalg.norm(net.n, axis=-1) - 1.0)), 1e-9),
        _result("c08_gauss", np.max(np.abs(crep.K[keep] + 1.0)), 1e-7),
        _result("c08_permutability_unit", rep.unit_residual, 1e-10),
    ]


def criterion_9() -> list[CheckResult]:
    """Linearized recurrence reproduces Moebius propagation on a wide grid."""
    hs = fixture_linear()
    params = bk.BacklundParams(np.pi / 3.0, s_tilde0=np.exp(0.3j))
    direct = bk.propagate(hs, params.alpha, params.s_tilde0, "tilde")
    linear = bk.linearize(hs, params)
    return [_result("c09_linearization", np.max(np.abs(direct - linear)), 1e-9)]


def _brute_singular(net: ContactElementNet) -> set[tuple[int, int]]:
    """Independent singular-vertex scan with plain loops."""
    x, n = net.x, net.n
    nj, nk = x.shape[0], x.shape[1]

    def edge_R(pa, pb):
        dx = x[pb] - x[pa]
        dn = n[pb] - n[pa]
        return -float(np.dot(dn, dx)) / float(np.dot(dx, dx))

    bad = set()
    for j in range(nj):
        for k in range(nk):
            if 1 <= j <= nj - 2:
                if edge_R((j - 1, k), (j, k)) * edge_R((j, k), (j + 1, k)) <= 0.0:
                    bad.add((j, k))
            if 1 <= k <= nk - 2:
                if edge_R((j, k - 1), (j, k)) * edge_R((j, k), (j, k + 1)) <= 0.0:
                    bad.add((j, k))
    return bad


def criterion_10() -> list[CheckResult]:
    """Singular-vertex detector agrees with a brute-force scan."""
    out = []
    for kappa in (0.6, 1.4):
        p = fixture_profile("elliptic", kappa, -1)
        net = build_rcnet(p, 13, theta=THETA)
        mism = len(singular_vertices(net) ^ _brute_singular(net))
        out.append(_result(f"c10_singular[kappa={kappa:g}]", float(mism), 0.5))
    return out


def criterion_11() -> list[CheckResult]:
    """theta = 2 pi / k0 closes the monodromy and the reconstructed net."""
    out = []
    for case, p, conn in _cases():
        xi = 2.0 if case == 3 else -2.0
        work = conn.transpose() if case == 1 else conn
        out.append(_result(f"c11_monodromy[case{case}]", closing_residual(work, 12), 1e-10))
        frames = rotational_frames(work, a0=p.a[0], b0=p.b[0])
        net = sym(frames, xi)
        nk = net.x.shape[1]
        drift = np.max(np.abs(net.x[:, 12:] - net.x[:, : nk - 12]))
        out.append(_result(f"c11_period[case{case}]", drift, 1e-8))
    return out


ALL_CRITERIA = (
    (1, criterion_1), (2, criterion_2), (3, criterion_3), (4, criterion_4),
    (5, criterion_5), (6, criterion_6), (7, criterion_7), (8, criterion_8),
    (9, criterion_9), (10, criterion_10), (11, criterion_11),
)


def run_criterion(number: int) -> list[CheckResult]:
    for num, fn in ALL_CRITERIA:
        if num == number:
            return fn()
    raise ValueError(f"no criterion {number}")


def run_all(numbers=None) -> list[CheckResult]:
    """All acceptance checks (or the listed criterion numbers), flattened.

    A criterion that raises is reported as a single failed entry naming
    the exception instead of aborting the remaining criteria.
    """
    out = []
    for num, fn in ALL_CRITERIA:
        if numbers is None or num in numbers:
            try:
                out.extend(fn())
            except Exception as exc:  # pragma: no cover - defensive surface
                out.append(CheckResult(
                    f"c{num:02d}_error[{type(exc).__name__}]", float("inf"), 0.0, False))
    return out

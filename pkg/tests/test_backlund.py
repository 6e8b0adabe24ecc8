"""Tests for Backlund transforms: recurrences, invariants, periodicity."""

from functools import lru_cache
from math import lcm

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cknet import backlund as bk
from cknet.backlund import (BacklundParams, build_abcd, double_backlund,
                            find_periodic_alpha, linearize, moebius,
                            propagate, single_backlund)
from cknet.connect import build_ck_connection, gauge_to_hs, rotational_frames
from cknet.errors import ConfigError, NoRoot, PoleHit
from cknet.lattice import FrameFamily, MatJet, gauge_frame
from cknet.nets import curvature_report, sym, sym_arrays
from cknet.revolution import profile_elliptic

ALPHA_C = np.pi / 2.0 + 0.5j  # sin is real with |sin| = cosh(0.5) > 1

SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])


@lru_cache(maxsize=None)
def hs_fixture():
    p = profile_elliptic(0.6, -1, (-3, 3), j0=4)
    conn, data = build_ck_connection(p, np.pi / 6.0, 15)
    hs, _ = gauge_to_hs(conn, data)
    frames = gauge_frame(rotational_frames(conn, a0=p.a[0], b0=p.b[0]), hs.gauge)
    return hs, frames, sym(frames, 2.0)


@lru_cache(maxsize=None)
def hex_fixture():
    """Closing rotation (theta = 2 pi / 6) with enough columns for lcm(6, 9)."""
    p = profile_elliptic(0.6, -1, (-3, 3), j0=4)
    conn, data = build_ck_connection(p, 2.0 * np.pi / 6.0, 26)
    hs, _ = gauge_to_hs(conn, data)
    frames = gauge_frame(rotational_frames(conn, a0=p.a[0], b0=p.b[0]), hs.gauge)
    return hs, frames, sym(frames, 2.0)


def transform_residuals(base, new, angle):
    """Distance / normal-angle / tangency deviations of a claimed transform."""
    dx = new.x - base.x
    dist = np.max(np.abs(np.linalg.norm(dx, axis=-1) - abs(np.sin(angle))))
    ang = np.max(np.abs(np.einsum("...i,...i->...", base.n, new.n) - np.cos(angle)))
    orth = max(np.max(np.abs(np.einsum("...i,...i->...", dx, base.n))),
               np.max(np.abs(np.einsum("...i,...i->...", dx, new.n))))
    return dist, ang, orth


def gauss_deviation(net):
    rep = curvature_report(net)
    keep = ~rep.degenerate
    assert np.any(keep)
    return np.max(np.abs(rep.K[keep] + 1.0))


# ---------------------------------------------------------------------------
# parameters and Moebius helpers


def test_params_defaults_real_angle():
    p = BacklundParams(np.pi / 3.0)
    assert p.beta == -p.alpha
    assert p.s_tilde0 == 1.0 + 0.0j
    assert p.s_hat0 == 1.0 + 0.0j


def test_params_defaults_complex_angle_conjugate_seed():
    seed = 1.3 * np.exp(0.4j)
    p = BacklundParams(ALPHA_C, s_tilde0=seed)
    assert p.beta == -ALPHA_C
    assert p.s_hat0 == np.conj(seed)
    q = BacklundParams(ALPHA_C, s_tilde0=seed, s_hat0=2.0j)
    assert q.s_hat0 == 2.0j


def test_moebius_identity_and_composition():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m1 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        m2 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        z = complex(rng.normal(), rng.normal())
        assert moebius(np.eye(2), z) == z
        assert abs(moebius(m1 @ m2, z) - moebius(m1, moebius(m2, z))) < 1e-10


def test_moebius_pole():
    with pytest.raises(PoleHit):
        moebius(np.array([[1.0, 0.0], [1.0, -1.0]]), 1.0)


# ---------------------------------------------------------------------------
# coefficient matrices


def test_abcd_shapes():
    hs, _, _ = hs_fixture()
    A, B, C, D = build_abcd(hs, np.pi / 3.0)
    assert A.shape == (6, 2, 2) and C.shape == (6, 2, 2)
    assert B.shape == (7, 2, 2) and D.shape == (7, 2, 2)


def test_abcd_real_angle_structure():
    """Real angle: entries pair up by conjugation and the maps fix |z| = 1."""
    hs, _, _ = hs_fixture()
    A, B, C, D = build_abcd(hs, np.pi / 3.0)
    for M in (A, B):
        assert np.max(np.abs(M[:, 1, 1] - M[:, 0, 0].conj())) < 1e-12
        assert np.max(np.abs(M[:, 1, 0] - M[:, 0, 1].conj())) < 1e-12
    # the off-diagonals are genuinely complex in this regime
    assert np.max(np.abs(A[:, 0, 1].imag)) > 0.9
    zs = np.exp(1j * np.linspace(0.1, 6.0, 17))
    worst = max(abs(abs(moebius(M, z)) - 1.0)
                for M in (A[0], A[-1], B[0], B[-1], C[0], D[0]) for z in zs)
    assert worst < 1e-12


def test_abcd_complex_angle_structure():
    """On the line pi/2 + iy the off-diagonals are real and |z| = 1 moves."""
    hs, _, _ = hs_fixture()
    A, B, C, D = build_abcd(hs, ALPHA_C)
    for M in (A, B, C, D):
        assert np.max(np.abs(M[..., 0, 1].imag)) < 1e-12
        assert np.max(np.abs(M[..., 1, 0].imag)) < 1e-12
        assert np.max(np.abs(M[:, 1, 1] - M[:, 0, 0].conj())) < 1e-12
    zs = np.exp(1j * np.linspace(0.1, 6.0, 17))
    worst = max(abs(abs(moebius(M, z)) - 1.0) for M in (A[0], B[0]) for z in zs)
    assert worst > 1e-2


def test_companion_matrices_mirror_the_first_pair():
    """With beta = -alpha, C and D are -sigma1 A^T sigma1 and -sigma1 B^T sigma1."""
    hs, _, _ = hs_fixture()
    for alpha in (np.pi / 3.0, ALPHA_C):
        A, B, C, D = build_abcd(hs, alpha)
        for X, Y in ((A, C), (B, D)):
            mirror = -np.einsum("ab,jbc,cd->jad", SIGMA1, X.transpose(0, 2, 1), SIGMA1)
            assert np.max(np.abs(Y - mirror)) < 1e-14


def test_recurrence_face_compatibility():
    """B(j+1) A(j) and A(j) B(j) agree as Moebius maps on every face."""
    hs, _, _ = hs_fixture()
    A, B, C, D = build_abcd(hs, np.pi / 3.0)
    for X, Y in ((A, B), (C, D)):
        for j in range(len(X)):
            n1 = Y[j + 1] @ X[j]
            n2 = X[j] @ Y[j]
            top = np.unravel_index(np.argmax(np.abs(n1)), n1.shape)
            assert np.max(np.abs(n1 / n1[top] - n2 / n2[top])) < 1e-12


# ---------------------------------------------------------------------------
# scalar-field propagation


def test_propagate_keeps_unit_fields_for_real_angle():
    hs, _, _ = hs_fixture()
    for which, seed in (("tilde", np.exp(0.4j)), ("hat", np.exp(-0.4j))):
        s = propagate(hs, np.pi / 3.0, seed, which)
        assert s.shape == (hs.domain.nj, hs.domain.nk)
        assert s[0, 0] == seed
        assert np.max(np.abs(np.abs(s) - 1.0)) < 1e-12


def test_propagate_conjugate_fields_on_complex_angle():
    hs, _, _ = hs_fixture()
    seed = 1.3 * np.exp(0.4j)
    s_tilde = propagate(hs, ALPHA_C, seed, "tilde")
    s_hat = propagate(hs, ALPHA_C, np.conj(seed), "hat")
    assert np.max(np.abs(s_hat - s_tilde.conj())) < 1e-12


def test_propagate_rejects_unknown_field():
    hs, _, _ = hs_fixture()
    with pytest.raises(ConfigError):
        propagate(hs, np.pi / 3.0, 1.0, "both")


# ---------------------------------------------------------------------------
# single transforms


def test_single_backlund_invariants():
    hs, frames, base = hs_fixture()
    for alpha in (np.pi / 3.0, 2.0 * np.pi / 3.0):
        net = single_backlund(frames, hs, BacklundParams(alpha, s_tilde0=np.exp(0.7j)))
        dist, ang, orth = transform_residuals(base, net, alpha)
        assert dist < 1e-9
        assert ang < 1e-9
        assert orth < 1e-9
        assert gauss_deviation(net) < 1e-7


def test_single_backlund_hat_uses_beta():
    hs, frames, base = hs_fixture()
    params = BacklundParams(np.pi / 3.0)
    net = single_backlund(frames, hs, params, which="hat")
    dist, ang, orth = transform_residuals(base, net, params.beta.real)
    assert dist < 1e-9
    assert ang < 1e-9
    assert orth < 1e-9
    assert gauss_deviation(net) < 1e-7


def docstring_w_frames(hs, frames, alpha, seed):
    """New frames built directly from the documented W matrix."""
    s_grid = propagate(hs, alpha, seed, "tilde")
    cot = 1.0 / np.tan(alpha / 2.0)
    ratio = s_grid / hs.s[:, None]
    et = np.exp(frames.t0)
    val = np.empty(s_grid.shape + (2, 2), dtype=complex)
    dot = np.zeros_like(val)
    val[..., 0, 0] = cot * ratio
    val[..., 1, 1] = cot / ratio
    val[..., 0, 1] = 1j * et
    val[..., 1, 0] = 1j * et
    dot[..., 0, 1] = 1j * et
    dot[..., 1, 0] = 1j * et
    return FrameFamily(frames.domain, MatJet(val, dot) @ frames.Phi, frames.t0)


def test_single_matches_documented_w_matrix():
    hs, frames, _ = hs_fixture()
    seed = np.exp(0.4j)
    net = single_backlund(frames, hs, BacklundParams(np.pi / 3.0, s_tilde0=seed))
    x, n = sym_arrays(docstring_w_frames(hs, frames, np.pi / 3.0, seed), 2.0)
    assert np.max(np.abs(x.imag)) < 1e-10
    assert np.max(np.abs(x.real - net.x)) < 1e-10
    assert np.max(np.abs(n.real - net.n)) < 1e-10


def test_complex_angle_w_frame_leaves_real_space():
    """A lone W step with |sin alpha| > 1 has genuinely complex coordinates."""
    hs, frames, _ = hs_fixture()
    x, n = sym_arrays(docstring_w_frames(hs, frames, ALPHA_C, 1.3 * np.exp(0.4j)), 2.0)
    assert np.max(np.abs(x.imag)) > 1e-2


def test_single_backlund_rejections():
    hs, frames, _ = hs_fixture()
    with pytest.raises(ConfigError):
        single_backlund(frames, hs, BacklundParams(ALPHA_C, s_tilde0=1.3 * np.exp(0.4j)))
    with pytest.raises(ConfigError):
        single_backlund(frames, hs, BacklundParams(0.0))
    with pytest.raises(ConfigError):
        single_backlund(frames, hs, BacklundParams(np.pi / 3.0, s_tilde0=1.2 + 0.0j))


# ---------------------------------------------------------------------------
# double transforms


def test_double_backlund_complex_angle_returns_real_net():
    hs, frames, base = hs_fixture()
    params = BacklundParams(ALPHA_C, s_tilde0=1.3 * np.exp(0.4j))
    net, rep = double_backlund(frames, hs, params)
    assert net.x.dtype == float and net.n.dtype == float
    assert rep.imag_residue < 1e-9
    assert rep.unit_residual < 1e-10
    assert np.max(np.abs(np.linalg.norm(net.n, axis=-1) - 1.0)) < 1e-9
    assert gauss_deviation(net) < 1e-7
    # it is a genuine transform, not the identity
    assert np.min(np.linalg.norm(net.x - base.x, axis=-1)) > 0.5


def test_double_backlund_real_angle_permutability():
    """Seeds with s~ s^ = 1 compose to the field 1/s at the corner."""
    hs, frames, _ = hs_fixture()
    params = BacklundParams(np.pi / 3.0, s_tilde0=np.exp(0.4j), s_hat0=np.exp(-0.4j))
    net, rep = double_backlund(frames, hs, params)
    assert abs(rep.shat_tilde[0, 0] - 1.0 / hs.s[0]) < 1e-10
    assert rep.unit_residual < 1e-10
    assert rep.imag_residue < 1e-9
    assert gauss_deviation(net) < 1e-7


def test_double_backlund_condition_rejections():
    hs, frames, _ = hs_fixture()
    with pytest.raises(ConfigError):  # beta must be -alpha
        double_backlund(frames, hs, BacklundParams(np.pi / 3.0, beta=np.pi / 4.0))
    with pytest.raises(ConfigError):  # sin(alpha) must be real
        double_backlund(frames, hs, BacklundParams(np.pi / 3.0 + 0.2j))
    with pytest.raises(ConfigError):  # |sin| <= 1 needs unit seeds
        double_backlund(frames, hs, BacklundParams(np.pi / 3.0, s_tilde0=1.3 * np.exp(0.4j)))
    with pytest.raises(ConfigError):  # |sin| > 1 needs conjugate seeds
        double_backlund(frames, hs, BacklundParams(ALPHA_C, s_tilde0=1.3 * np.exp(0.4j),
                                                   s_hat0=1.0 + 0.0j))


# ---------------------------------------------------------------------------
# rotational periodicity


def test_find_periodic_alpha_lands_on_the_complex_line():
    hs, _, _ = hex_fixture()
    f8 = find_periodic_alpha(hs, 8)
    f9 = find_periodic_alpha(hs, 9)
    for found in (f8, f9):
        assert found.p == 1
        assert found.residual < 1e-9
        assert complex(found.alpha).real == np.pi / 2.0
        assert 1.0 < complex(found.alpha).imag < 2.0
    # a larger N0 asks for a smaller rotation phase, hence a smaller y
    assert complex(f9.alpha).imag < complex(f8.alpha).imag


def test_periodic_alpha_power_and_phase_dual_route():
    hs, _, _ = hex_fixture()
    found = find_periodic_alpha(hs, 8)
    B0 = build_abcd(hs, found.alpha)[1][0]
    lam = np.linalg.eigvals(B0)
    phase = abs(np.angle(lam[0] / lam[1]))
    assert abs(phase - 2.0 * np.pi / 8.0) < 1e-9
    hat = B0 / np.sqrt(B0[0, 0] * B0[1, 1] - B0[0, 1] * B0[1, 0])
    power = np.linalg.matrix_power(hat, 8)
    dev = min(np.max(np.abs(power - np.eye(2))), np.max(np.abs(power + np.eye(2))))
    assert dev < 1e-9


def test_find_periodic_alpha_no_root():
    hs, _, _ = hex_fixture()
    with pytest.raises(NoRoot):
        find_periodic_alpha(hs, 9, p=2)
    with pytest.raises(NoRoot):
        find_periodic_alpha(hs, 8, p=3)
    with pytest.raises(ConfigError):
        find_periodic_alpha(hs, 1)
    with pytest.raises(ConfigError):
        find_periodic_alpha(hs, 8, which="X")


def test_scalar_field_closes_with_the_found_angle():
    hs, _, _ = hex_fixture()
    found = find_periodic_alpha(hs, 8)
    s = propagate(hs, found.alpha, np.exp(0.3j))
    nk = s.shape[1]
    assert np.max(np.abs(s[:, 8:] - s[:, : nk - 8])) < 1e-8


def test_double_transform_annulus_period():
    hs, frames, base = hex_fixture()
    nk = base.x.shape[1]
    assert np.max(np.abs(base.x[:, 6:] - base.x[:, : nk - 6])) < 1e-8
    for N0 in (8, 9):
        found = find_periodic_alpha(hs, N0)
        params = BacklundParams(found.alpha, s_tilde0=1.3 * np.exp(0.4j))
        net, _ = double_backlund(frames, hs, params)
        period = lcm(6, N0)
        drift = np.max(np.abs(net.x[:, period:] - net.x[:, : nk - period]))
        assert drift < 1e-8
        assert gauss_deviation(net) < 1e-7


# ---------------------------------------------------------------------------
# linear form of the recurrence


def test_linearize_matches_propagation():
    hs, _, _ = hs_fixture()
    params = BacklundParams(np.pi / 3.0, s_tilde0=np.exp(0.3j))
    direct = propagate(hs, params.alpha, params.s_tilde0, "tilde")
    assert np.max(np.abs(linearize(hs, params) - direct)) < 1e-9


def test_linearize_fixed_points():
    """Both quadratic roots are Moebius fixed points and stay fixed along j."""
    hs, _, _ = hs_fixture()
    params = BacklundParams(np.pi / 3.0, s_tilde0=np.exp(0.3j))
    A, B, _, _ = build_abcd(hs, params.alpha)
    B0 = B[0]
    roots = np.roots([B0[1, 0], B0[1, 1] - B0[0, 0], -B0[0, 1]])
    assert all(abs(moebius(B0, z) - z) < 1e-10 for z in roots)
    assert all(abs(abs(z) - 1.0) < 1e-10 for z in roots)
    mults = [abs(B0[1, 0] * z + B0[1, 1]) for z in roots]
    zeta = roots[int(np.argmax(mults))]
    for j in range(len(B)):
        assert abs(moebius(B[j], zeta) - zeta) < 1e-10
        if j < len(A):
            zeta = moebius(A[j], zeta)
    other = roots[int(np.argmin(mults))]
    direct = propagate(hs, params.alpha, params.s_tilde0, "tilde")
    assert np.max(np.abs(linearize(hs, params, zeta_seed=other) - direct)) < 1e-9


def test_linearize_rejections():
    hs, _, _ = hs_fixture()
    params = BacklundParams(np.pi / 3.0, s_tilde0=np.exp(0.3j))
    A, B, _, _ = build_abcd(hs, params.alpha)
    B0 = B[0]
    roots = np.roots([B0[1, 0], B0[1, 1] - B0[0, 0], -B0[0, 1]])
    zeta = roots[int(np.argmax([abs(B0[1, 0] * z + B0[1, 1]) for z in roots]))]
    with pytest.raises(PoleHit):
        linearize(hs, BacklundParams(np.pi / 3.0, s_tilde0=zeta))
    with pytest.raises(ConfigError):
        linearize(hs, params, zeta_seed=12.34 + 0.0j)

import functools
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pseudoconvexity.domains import ball, build_slit_domain
from pseudoconvexity.errors import DiscExits, DomainError
from pseudoconvexity.hartogs import BoundaryClass, build_hartogs_domains, classify_point
from pseudoconvexity.levi import (
    DefiningFn, ball_defining, continuity_violation, find_concave_direction,
    hartogs_defining, levi_disc, levi_form, linear_disc, quadric_defining, slit_side_disc,
    tangent_adjust, taylor_residual,
)

RADII = np.logspace(-3, -1, 9)


@functools.lru_cache(maxsize=None)
def domains():
    return build_hartogs_domains(0.3)


def fd_only(r):
    """Same function without analytic derivative oracles."""
    return DefiningFn(r.r, r.dim)


def hartogs_boundary_point(field, z, arg=0.0):
    return np.array([z, np.exp(field.value(np.asarray(z))) * np.exp(1j * arg)])


# -- Levi form --------------------------------------------------------------

def test_levi_form_ball():
    r = ball_defining(2)
    a = np.array([0.3 + 0.1j, -0.7j])
    assert levi_form(r, [0.6, 0.8], a) == pytest.approx(np.vdot(a, a).real)


def test_levi_form_signature():
    r = quadric_defining(np.diag([1.0, -1.0]), np.zeros((2, 2)), c=0.3)
    assert levi_form(r, [0.1, 0.2], [0, 1]) == pytest.approx(-1.0)


def test_levi_form_hartogs_is_minus_quarter_laplacian():
    d0, d = domains()
    for dom, z in ((d0, 0.05 + 0.03j), (d0, 0.6 - 0.2j), (d, 0.01 + 0.1j), (d, 0.5 + 0.4j)):
        r = hartogs_defining(dom.field)
        p = hartogs_boundary_point(dom.field, z)
        assert levi_form(r, p, [1, 0]) == pytest.approx(-dom.field.laplacian(np.asarray(z)) / 4, rel=1e-6)


def test_finite_difference_hessians_match_analytic():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    H = A @ A.conj().T
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Q = B + B.T
    r = quadric_defining(H, Q)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    Hn, Qn = fd_only(r).hessians(z)
    np.testing.assert_allclose(Hn, H, atol=1e-6)
    np.testing.assert_allclose(Qn, Q, atol=1e-6)
    np.testing.assert_allclose(fd_only(r).dz(z), r.dz(z), atol=1e-7)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=8, max_size=8))
def test_levi_form_parallelogram_law(v):
    r = fd_only(quadric_defining(np.array([[2, 1j], [-1j, -1]]), np.array([[0, 1], [1, 0.5]])))
    z = np.array([0.2 + 0.1j, -0.3j])
    H, _ = r.hessians(z)
    a = np.array([v[0] + 1j * v[1], v[2] + 1j * v[3]])
    b = np.array([v[4] + 1j * v[5], v[6] + 1j * v[7]])
    lhs = levi_form(r, z, a + b, H) + levi_form(r, z, a - b, H)
    rhs = 2 * levi_form(r, z, a, H) + 2 * levi_form(r, z, b, H)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)


# -- tangency ----------------------------------------------------------------

def test_tangent_adjust_examples():
    r = ball_defining(2)
    np.testing.assert_array_equal(tangent_adjust(r, [1, 0], [1, 0]), [0, 0])
    np.testing.assert_array_equal(tangent_adjust(r, [1, 0], [0, 1]), [0, 1])


def test_tangent_adjust_rotates_pivot():
    r = ball_defining(2)
    a = tangent_adjust(r, [0, 1], [0.5, 0.5])
    assert a[0] == 0.5 and abs(a @ r.dz(np.array([0, 1]))) < 1e-15


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_tangent_adjust_is_tangent(t, a1, a2, a3, a4):
    r = ball_defining(2)
    z = np.array([np.cos(t), np.sin(t) * 1j])
    a = np.array([a1 + 1j * a2, a3 + 1j * a4])
    adj = tangent_adjust(r, z, a)
    assert abs(adj @ r.dz(z)) <= 1e-10 * max(1, np.linalg.norm(a))
    again = tangent_adjust(r, z, adj)
    np.testing.assert_allclose(again, adj, atol=1e-12)


def test_tangency_with_finite_differences():
    r = fd_only(ball_defining(2))
    z = np.array([0.6, 0.8j])
    adj = tangent_adjust(r, z, [1, 1])
    assert abs(adj @ ball_defining(2).dz(z)) < 1e-8


# -- discs and residuals ---------------------------------------------------

def test_disc_b1_examples():
    r = ball_defining(2)
    disc = levi_disc(r, [1, 0], [0, 1])
    assert disc.b1 == 0
    np.testing.assert_array_equal(disc(np.array(0.0)), [1, 0])
    q = quadric_defining(np.eye(2), np.diag([0.0, 1.0]))
    assert levi_disc(q, [1, 0], [0, 1]).b1 == pytest.approx(-0.5)


def test_disc_rejects_off_boundary_point():
    with pytest.raises(DomainError):
        levi_disc(ball_defining(2), [0.5, 0], [0, 1])


def test_ball_identity_is_exact():
    r = ball_defining(2)
    z = np.array([0.6, 0.8j])
    rep = taylor_residual(r, levi_disc(r, z, [1, 1j]), RADII)
    assert rep.exact and rep.decays
    assert rep.intercept_error() < 1e-10


def test_quadric_residual_decays():
    rng = np.random.default_rng(4)
    B = rng.standard_normal((2, 2))
    q = quadric_defining(np.eye(2), B + B.T)
    # move a point onto the boundary along a ray
    u = np.array([0.3 + 0.4j, 0.5])
    from scipy.optimize import brentq
    t = brentq(lambda s: float(q(s * u)), 0.01, 5)
    z = t * u
    rep = taylor_residual(q, levi_disc(q, z, [0.2, 1]), RADII)
    assert rep.slope >= 0.9
    assert rep.intercept_error() < 1e-3


def test_levi_form_b1_variant_fails_on_quadric():
    # using L(a)/(2 dr/dz1) instead of the holomorphic Hessian leaves a lambda^2 term
    q = quadric_defining(np.eye(2), np.diag([0.0, 1.0]))
    disc = levi_disc(q, [1, 0], [0, 1])
    L = levi_form(q, disc.base, disc.adjusted)
    alt = replace(disc, b1=L / (2 * q.dz(disc.base)[0]))
    rep = taylor_residual(q, alt, RADII)
    assert not rep.decays


def test_hartogs_concave_disc_enters_domain():
    d0, _ = domains()
    r = hartogs_defining(d0.field)
    p = hartogs_boundary_point(d0.field, 0.05 + 0.02j, 0.4)
    a, lam = find_concave_direction(r, p)
    assert lam < 0
    disc = levi_disc(r, p, a)
    rep = taylor_residual(r, disc, RADII)
    assert rep.slope >= 0.9 and rep.intercept_error() < 1e-3
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    for rho in (1e-3, 1e-2):
        assert np.all(r(disc(rho * np.exp(1j * th))) < 0)


# -- concave directions -----------------------------------------------------

def test_ball_has_no_concave_direction():
    assert find_concave_direction(ball_defining(3), np.array([0, 0.6, 0.8j])) is None


def test_flat_piece_has_no_concave_direction():
    r = DefiningFn(lambda Z: np.asarray(Z)[..., 0].real, 2,
                   dz=lambda z: np.array([0.5, 0]), hessians=lambda z: (np.zeros((2, 2)), np.zeros((2, 2))))
    assert find_concave_direction(r, np.array([0, 0.3])) is None


def test_concave_direction_is_tangent_unit():
    r = quadric_defining(np.diag([1.0, 1.0, -2.0]), np.zeros((3, 3)))
    z = np.array([1.0, 0, 0])
    a, lam = find_concave_direction(r, z)
    assert lam == pytest.approx(-2)
    assert abs(a @ r.dz(z)) < 1e-12 and np.linalg.norm(a) == pytest.approx(1)


def test_concave_direction_agrees_with_hartogs_classification():
    d0, d = domains()
    rng = np.random.default_rng(8)
    F = d.field.cap.F
    zs = list(rng.uniform(-0.9, 0.9, 30) * np.exp(1j * rng.uniform(0, 2 * np.pi, 30)))
    lo, hi = F.tree.plateau(0)
    zs += [0.3 * 0.5 * (lo[0] + hi[0]) + 0.1j]
    checked = 0
    for dom in (d0, d):
        r = hartogs_defining(dom.field)
        for z in zs:
            if abs(z) >= 0.95:
                continue
            cls = classify_point(dom.field, z)
            if cls.kind is BoundaryClass.INDETERMINATE or abs(cls.laplacian) < 1e-3:
                continue
            if dom.field.cap is not None and abs(z.real) < 0.3 and F.plateau_level(np.asarray(z.real / 0.3)) != 0:
                continue  # finite differences only resolve the shallow plateau scale
            res = find_concave_direction(r, hartogs_boundary_point(dom.field, z))
            assert (res is not None) == (cls.kind is BoundaryClass.CONCAVE)
            checked += 1
    assert checked >= 30


# -- continuity principle --------------------------------------------------

def test_slit_disc_violates_continuity_principle():
    rep = continuity_violation(build_slit_domain(), slit_side_disc(0.51, 0.3), 1.0)
    assert rep.violation
    assert rep.center_distance == pytest.approx(0.01, abs=1e-9)
    assert rep.edge_distance > 0.05


def test_ball_disc_is_not_a_violation():
    rng = np.random.default_rng(2)
    B = ball(2)
    for _ in range(5):
        c = rng.uniform(-0.3, 0.3, 2) + 1j * rng.uniform(-0.3, 0.3, 2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v *= 0.3 / np.linalg.norm(v)
        assert not continuity_violation(B, linear_disc(c, v), 1.0).violation


def test_disc_exits():
    with pytest.raises(DiscExits):
        continuity_violation(ball(2), linear_disc([0.5, 0], [0.9, 0]), 1.0)
    with pytest.raises(DomainError):
        continuity_violation(ball(2), linear_disc([0, 0], [0.1, 0]), 0.0)

import functools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pseudoconvexity.bergman import BasisFamily, GramKernel, sample_domain
from pseudoconvexity.domains import ball, build_slit_domain, in_d1
from pseudoconvexity.errors import (
    DomainError, GrowthTargetUnreachable, NonNegativeWitness, NotStrictlyPseudoconvex,
)
from pseudoconvexity.levi import DefiningFn, ball_defining, quadric_defining
from pseudoconvexity.witness import (
    Exhaustion, PshWitness, greedy_unbounded_witness, levi_peak_function, neg_log_transform,
    psh_check, sup_regularized,
)

A_SLIT = np.array([1 + 0.5j, 0])


@functools.lru_cache(maxsize=None)
def slit_gram():
    side = BasisFamily.monomials(2, (6, 4), center=(1 + 0.25j, 0), support=in_d1,
                                 support_bbox=[[0.5, 1.5], [0, 0.5], [-1, 1], [-1, 1]])
    return GramKernel(build_slit_domain(), side, 20_000, 0)


def ball_samples(n, seed):
    return sample_domain(ball(2), n, np.random.default_rng(seed))


# -- peak functions ---------------------------------------------------------

def test_ball_peak_is_z1_minus_one():
    w = levi_peak_function(ball_defining(2), [1, 0], dom=ball(2))
    Z = np.array([[0.3 + 0.2j, 0.1j], [0.9, 0.1]])
    np.testing.assert_allclose(w.levi_polynomial(Z), Z[:, 0] - 1, atol=1e-12)


def test_ball_peak_negative_and_tends_to_zero():
    w = levi_peak_function(ball_defining(2), [1, 0], dom=ball(2))
    assert np.all(w(ball_samples(20_000, 1)) < 0)
    vals = [float(w(w.inward_point(t)[None])[0]) for t in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert np.all(np.diff(vals) > 0) and vals[-1] > -1e-3


def test_far_point_is_glued_constant():
    w = levi_peak_function(ball_defining(2), [1, 0], dom=ball(2))
    assert w(np.array([[-0.9, 0]]))[0] == -w.s


def test_glue_is_interior():
    w = levi_peak_function(ball_defining(2), [0, 1], dom=ball(2))
    assert w.s < 0.45 * w.levi_min * w.radius**2


def test_concave_point_rejected():
    r = quadric_defining(np.diag([1.0, -1.0]), np.zeros((2, 2)), c=-1)
    with pytest.raises(NotStrictlyPseudoconvex):
        levi_peak_function(r, [1, 0])


def test_convexifier_used_when_normal_direction_is_concave():
    # r = Re z1 - |z1|^2/2 + |z2|^2: positive on the tangent line, negative along the normal
    q = quadric_defining(np.diag([-0.5, 1.0]), np.zeros((2, 2)), c=0.0)
    r = DefiningFn(lambda Z: q(Z) + np.asarray(Z)[..., 0].real, 2)
    w = levi_peak_function(r, [0, 0], radii=(0.1, 0.05))
    assert w.convexifier > 0 and w.levi_min > 0


def test_witness_passes_psh_check():
    w = levi_peak_function(ball_defining(2), [0.6, 0.8j], dom=ball(2))
    centers = w.base + 0.3 * (ball_samples(300, 2) * 0.5)
    centers = centers[ball(2).contains(centers)]
    assert psh_check(w, ball(2), 300, 0, centers=centers, max_radius=0.05).ok


# -- psh checks -------------------------------------------------------------

def test_psh_check_controls():
    B = ball(2)
    assert psh_check(lambda Z: np.atleast_2d(Z)[:, 0].real, B, 200, 0).ok
    assert psh_check(lambda Z: np.sum(np.abs(np.atleast_2d(Z)) ** 2, axis=1), B, 200, 0).ok
    rep = psh_check(lambda Z: -np.sum(np.abs(np.atleast_2d(Z)) ** 2, axis=1), B, 200, 0)
    assert len(rep.violations) == rep.probes


# -- sup regularization ------------------------------------------------------

def test_single_witness_normalization():
    B = ball(2)
    w = levi_peak_function(ball_defining(2), [1, 0], dom=B)
    Z = ball_samples(20_000, 3)
    dist = np.array([B.distance(z) for z in Z])
    exh = Exhaustion.geometric(1, 0.1)
    u = sup_regularized([w], exh, Z, dist)
    assert u(Z[exh.member(0, Z, dist)]).max() == pytest.approx(-1.0, abs=1e-12)


def test_antipodal_witnesses():
    B = ball(2)
    ws = [levi_peak_function(ball_defining(2), p, dom=B) for p in ([1, 0], [-1, 0])]
    Z = ball_samples(20_000, 4)
    dist = np.array([B.distance(z) for z in Z])
    u = sup_regularized(ws, Exhaustion((0.2, 0.15), (1.0, 1.0)), Z, dist)
    p = ws[0].inward_point(1e-3)[None]
    assert u(p)[0] >= -1e-2
    assert u.components(p)[0, 0] > u.components(p)[1, 0]
    assert np.all(u(Z) < 0)
    v = neg_log_transform(u(np.array([ws[0].inward_point(t) for t in (1e-1, 1e-2, 1e-3)])))
    assert np.all(np.diff(v) > 0)


def test_nonnegative_witness_rejected():
    bad = PshWitness(np.array([0j, 0j]), np.array([1.0, 0j]), np.zeros((2, 2)), -1.0, 1.0, 1.0)
    Z = ball_samples(100, 5)
    with pytest.raises(NonNegativeWitness):
        sup_regularized([bad], Exhaustion.geometric(1), Z, np.ones(len(Z)))


def test_exhaustion_must_nest():
    with pytest.raises(DomainError):
        Exhaustion((0.1, 0.2), (1, 1))


# -- neg log -----------------------------------------------------------------

def test_neg_log_examples():
    assert neg_log_transform(-1.0) == 0.0
    assert neg_log_transform(-np.exp(-1)) == pytest.approx(1.0, abs=1e-15)
    assert neg_log_transform(-1e-6) == pytest.approx(13.8155, abs=1e-4)
    with pytest.raises(DomainError):
        neg_log_transform(0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, -1e-12), st.floats(-10, -1e-12))
def test_neg_log_monotone(u1, u2):
    if u1 < u2:
        assert neg_log_transform(u1) < neg_log_transform(u2)


# -- greedy ------------------------------------------------------------------

def test_greedy_single_level():
    h, tr = greedy_unbounded_witness(build_slit_domain(), slit_gram(), A_SLIT, levels=1,
                                     samples=20_000)
    lv = tr.levels[0]
    assert lv.met and lv.g_at_z >= 1
    assert abs(h(lv.z[None])[0]) == pytest.approx(lv.g_at_z, rel=1e-9)
    assert np.isfinite(tr.h_norm)


def test_greedy_trace_invariants():
    _, tr = greedy_unbounded_witness(build_slit_domain(), slit_gram(), A_SLIT, levels=3,
                                     samples=20_000, strict=False)
    prev = 0.25
    for lv in tr.levels:
        assert np.linalg.norm(lv.z - A_SLIT) < 1 / lv.k
        assert lv.dist < prev
        assert lv.f_norm == pytest.approx(1.0, rel=1e-6)
        # telescoping bound is a genuine lower bound of |h(z_k)|
        assert lv.h_at_z >= lv.bound - 1e-9
        prev = lv.dist


def test_greedy_sampled_normalization_bounds_tail():
    _, tr = greedy_unbounded_witness(build_slit_domain(), slit_gram(), A_SLIT, levels=3,
                                     samples=20_000, strict=False)
    G = tr.g_cross
    for k in range(len(G)):
        assert np.all(G[k, k + 1:] <= 1 + 1e-12)


def test_greedy_small_basis_unreachable():
    with pytest.raises(GrowthTargetUnreachable) as ei:
        greedy_unbounded_witness(build_slit_domain(), slit_gram(), A_SLIT, levels=5,
                                 samples=20_000)
    assert ei.value.level >= 2


def test_greedy_rejects_bad_arguments():
    with pytest.raises(DomainError):
        greedy_unbounded_witness(build_slit_domain(), slit_gram(), A_SLIT, normalization="x")

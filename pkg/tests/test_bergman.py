import functools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pseudoconvexity.bergman import (
    BasisFamily, GramKernel, Method, Verdict, annulus_kernel, annulus_norm2, blowup_scan,
    convexity_check, disc_kernel, disc_norms, mc_gram_kernel, product_kernel, ray,
    scan_verdict, series_estimate,
)
from pseudoconvexity.domains import (
    annulus, ball, build_slit_domain, d1_interior, disc, in_d1, product,
)
from pseudoconvexity.errors import OutsideDomain, SingularGram


@functools.lru_cache(maxsize=None)
def disc_gram():
    return GramKernel(disc(), BasisFamily.monomials(1, 8), 100_000, 0)


# -- series --------------------------------------------------------------

def test_disc_kernel_at_origin():
    assert disc_kernel(0) == pytest.approx(1 / np.pi, rel=1e-15)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_disc_scaling_law(R):
    assert disc_kernel(0, R) == pytest.approx(1 / (np.pi * R**2), rel=1e-15)


def test_disc_kernel_closed_form():
    for z in (0.1, 0.5j, -0.9):
        assert disc_kernel(z) == pytest.approx(1 / (np.pi * (1 - abs(z) ** 2) ** 2), rel=1e-12)


def test_disc_kernel_monotone_on_ray():
    vals = [disc_kernel(t) for t in np.linspace(0, 0.99, 50)]
    assert np.all(np.diff(vals) > 0)


def test_truncation_monotone():
    vals = [disc_kernel(0.7, max_degree=d) for d in range(20)]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] < disc_kernel(0.7)


def test_disc_kernel_outside():
    with pytest.raises(OutsideDomain):
        disc_kernel(1.0)
    with pytest.raises(OutsideDomain):
        annulus_kernel(0.3)


def test_annulus_log_norm():
    assert annulus_norm2(-1) == pytest.approx(2 * np.pi * np.log(3), rel=1e-15)


def test_annulus_norm_matches_quadrature():
    from scipy.integrate import quad
    for k in (-3, -2, 0, 2):
        val = quad(lambda r: 2 * np.pi * r ** (2 * k + 1), 0.5, 1.5)[0]
        assert annulus_norm2(k) == pytest.approx(val, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.55, 1.45), st.floats(0, 2 * np.pi))
def test_annulus_rotation_invariant(r, t):
    assert annulus_kernel(r * np.exp(1j * t)) == pytest.approx(annulus_kernel(r), rel=1e-12)


def test_product_kernel_example():
    assert product_kernel(annulus_kernel(1.0), disc_kernel(0)) == pytest.approx(annulus_kernel(1.0) / np.pi)


def test_series_estimate_wrapper():
    e = series_estimate(0.5, disc_kernel(0.5))
    assert e.method is Method.SERIES and e.value > 0


# -- Monte-Carlo Gram ---------------------------------------------------------

def test_mc_disc_matches_truncated_series():
    gk = disc_gram()
    for z in (0, 0.2, 0.3j, -0.45, 0.5 + 0.3j):
        e = gk([z])
        exact = disc_kernel(z, max_degree=8)
        assert abs(e.value - exact) <= 3 * e.stderr
        assert e.method is Method.MONTE_CARLO and e.samples == 100_000


def test_mc_constant_basis_gives_inverse_volume():
    dom = annulus()
    e = mc_gram_kernel(dom, BasisFamily.monomials(1, 0), [1.0], 20_000, 3)
    assert e.value == pytest.approx(1 / dom.volume, rel=0.03)


def test_mc_gram_matches_closed_form_norms():
    gk = disc_gram()
    norms = disc_norms(gk.basis)
    np.testing.assert_allclose(np.real(np.diag(gk.G)), norms, rtol=0.05)


def test_mc_product_rule():
    P = product(annulus(), disc())
    gk = GramKernel(P, BasisFamily.monomials(2, (6, 6), (-6, 0)), 50_000, 1)
    for z in ((1, 0), (0.8j, 0.3), (-1.2, 0.5j)):
        e = gk(z)
        exact = annulus_kernel(z[0], k_range=(-6, 6)) * disc_kernel(z[1], max_degree=6)
        assert e.value == pytest.approx(exact, rel=0.05)


def test_reproducing_lower_bound():
    gk = disc_gram()
    rng = np.random.default_rng(5)
    z = 0.4 - 0.2j
    v = gk.basis(np.array([[z]]))[0]
    K = gk([z]).value
    for _ in range(50):
        c = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        ratio = abs(c @ v) ** 2 / np.real(c.conj() @ gk.G @ c)
        assert ratio <= K * (1 + 1e-9)
    # the extremal combination c = G^{-1} conj(v) attains it
    c = np.linalg.solve(gk.G, np.conj(v))
    best = abs(c @ v) ** 2 / np.real(c.conj() @ gk.G @ c)
    assert best == pytest.approx(K, rel=1e-6)


def test_domain_monotonicity():
    basis = BasisFamily.monomials(1, 6)
    big = GramKernel(disc(1.0), basis, 50_000, 7)
    small = GramKernel(disc(0.8), basis, 50_000, 7)
    for z in (0, 0.3, -0.5j):
        es, eb = small([z]), big([z])
        assert es.value >= eb.value - 3 * (es.stderr + eb.stderr)


def test_singular_gram_detected():
    dup = BasisFamily(((0,),) * 500, (0j,), label="dup")
    with pytest.raises(SingularGram):
        mc_gram_kernel(disc(), dup, [0.0], 2000, 0)


def test_mc_outside_point_rejected():
    with pytest.raises(OutsideDomain):
        disc_gram()([1.2])


def test_mc_is_deterministic():
    a = mc_gram_kernel(disc(), BasisFamily.monomials(1, 3), [0.3], 5000, 11)
    b = mc_gram_kernel(disc(), BasisFamily.monomials(1, 3), [0.3], 5000, 11)
    assert a == b


def test_too_few_samples_rejected():
    with pytest.raises(ValueError):
        mc_gram_kernel(disc(), BasisFamily.monomials(1, 3), [0.3], 100, 0)


# -- scans ------------------------------------------------------------------

def test_scan_verdict_rules():
    assert scan_verdict([1, 2, 5, 20]) is Verdict.BLOWUP
    assert scan_verdict([1, 1.5, 1.2, 1.9]) is Verdict.BOUNDED
    assert scan_verdict([1, 3, 2, 2.5]) is Verdict.INCONCLUSIVE


def test_disc_series_scan_blows_up():
    rep = blowup_scan(lambda t: t, lambda z: series_estimate(z, disc_kernel(z)), steps=8)
    assert rep.verdict is Verdict.BLOWUP
    np.testing.assert_allclose(rep.values, 1 / (np.pi * (1 - rep.t**2) ** 2), rtol=1e-12)


def test_slit_dichotomy_small():
    D = build_slit_domain()
    a = np.array([1 + 0.5j, 0])
    c = 1 + 0.25j
    side = BasisFamily.monomials(2, (8, 4), center=(c, 0), support=in_d1,
                                 support_bbox=[[0.5, 1.5], [0, 0.5], [-1, 1], [-1, 1]])
    inside = blowup_scan(ray([c, 0], a), GramKernel(D, side, 20_000, 0), steps=6)
    assert inside.verdict is Verdict.BLOWUP
    glob = BasisFamily.monomials(2, (6, 3), (-6, 0))
    outside = blowup_scan(ray([1 + 0.75j, 0], a), GramKernel(D, glob, 20_000, 0), steps=6)
    assert outside.verdict is Verdict.BOUNDED


# -- convexity ---------------------------------------------------------------

def test_convexity_of_d1_interior():
    assert convexity_check(d1_interior(), 10_000, 0)


def test_annulus_is_not_convex():
    res = convexity_check(annulus(), 10_000, 0)
    assert not res
    p, q, t = res.witness
    assert not annulus().member(p + t * (q - p))


def test_ball_is_convex():
    assert convexity_check(ball(2), 5_000, 1)

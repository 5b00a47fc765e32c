"""Bounded regions of ``C^n`` described by sampling-friendly oracles.

Points are complex arrays whose last axis has length ``dim``.  A
:class:`DomainSpec` bundles a vectorised membership test, a bounding box in
real coordinates ``(x1, y1, x2, y2, ...)``, and a boundary-distance oracle.
"""
import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import OutsideDomain


class Side(str, Enum):
    INSIDE_D1 = "inside-D1"
    OUTSIDE_D1 = "outside-D1"


@dataclass
class DomainSpec:
    """A bounded domain given by oracles.

    Attributes
    ----------
    dim : int
        Complex dimension.
    contains : callable
        ``contains(Z) -> bool array`` for ``Z`` of shape ``(..., dim)``.
    bbox : ndarray
        ``(2*dim, 2)`` array of ``[lo, hi]`` per real coordinate.
    distance : callable, optional
        Exact ``dist(z, boundary)`` for one point.  When absent, the distance
        is estimated by bisection along seeded random rays (an upper bound).
    side : callable, optional
        Side label oracle for domains with an internal slit.
    name, params
        Identify the domain for hashing and caching.
    volume : float, optional
        Exact Lebesgue volume when known.
    distances : callable, optional
        Vectorised ``distances(Z) -> float array``; an estimate or lower
        bound, as documented by the domain builder.
    """

    dim: int
    contains: Callable
    bbox: np.ndarray
    distance: Optional[Callable] = None
    side: Optional[Callable] = None
    name: str = "domain"
    params: dict = field(default_factory=dict)
    volume: Optional[float] = None
    distances: Optional[Callable] = None

    def __post_init__(self):
        self.bbox = np.asarray(self.bbox, dtype=float).reshape(2 * self.dim, 2)

    def member(self, z):
        return bool(self.contains(np.asarray(z, dtype=complex).reshape(1, self.dim))[0])

    def boundary_distance(self, z, n_rays=64, seed=0):
        z = np.asarray(z, dtype=complex).reshape(self.dim)
        if not self.member(z):
            raise OutsideDomain(f"{self.name}: point {z} is not in the domain")
        if self.distance is not None:
            return float(self.distance(z))
        return ray_distance(self, z, n_rays=n_rays, seed=seed)

    def distances_many(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        if self.distances is not None:
            return np.asarray(self.distances(Z), dtype=float)
        return np.array([self.boundary_distance(z) for z in Z])

    def bbox_volume(self):
        return float(np.prod(self.bbox[:, 1] - self.bbox[:, 0]))

    def content_hash(self):
        blob = json.dumps({"name": self.name, "dim": self.dim, "params": self.params},
                          sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def to_real(Z):
    """``(..., n)`` complex to ``(..., 2n)`` real ``(x1, y1, x2, y2, ...)``."""
    Z = np.asarray(Z, dtype=complex)
    out = np.empty(Z.shape[:-1] + (2 * Z.shape[-1],))
    out[..., 0::2] = Z.real
    out[..., 1::2] = Z.imag
    return out


def from_real(X):
    X = np.asarray(X, dtype=float)
    return X[..., 0::2] + 1j * X[..., 1::2]


def ray_distance(dom, z, n_rays=64, seed=0, tol=1e-10):
    """Upper bound for ``dist(z, boundary)`` by bisection along random rays."""
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_rays, 2 * dom.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    x0 = to_real(z)
    span = float(np.linalg.norm(dom.bbox[:, 1] - dom.bbox[:, 0]))
    lo = np.zeros(n_rays)
    hi = np.full(n_rays, span)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        inside = dom.contains(from_real(x0 + mid[:, None] * dirs))
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return float(lo.min())


# ---------------------------------------------------------------------------
# model domains

def disc(R=1.0):
    def contains(Z):
        return np.abs(np.asarray(Z)[..., 0]) < R

    def dist(z):
        return R - abs(z[0])

    return DomainSpec(1, contains, [[-R, R], [-R, R]], dist, name="disc",
                      params={"R": R}, volume=np.pi * R**2)


def annulus(r_in=0.5, r_out=1.5):
    def contains(Z):
        a = np.abs(np.asarray(Z)[..., 0])
        return (a > r_in) & (a < r_out)

    def dist(z):
        a = abs(z[0])
        return min(a - r_in, r_out - a)

    return DomainSpec(1, contains, [[-r_out, r_out]] * 2, dist, name="annulus",
                      params={"r_in": r_in, "r_out": r_out},
                      volume=np.pi * (r_out**2 - r_in**2))


def product(*factors):
    """Cartesian product; distance is the minimum of the factor distances."""
    dims = [f.dim for f in factors]
    offs = np.cumsum([0] + dims)

    def contains(Z):
        Z = np.asarray(Z)
        ok = np.ones(Z.shape[:-1], dtype=bool)
        for f, a, b in zip(factors, offs[:-1], offs[1:]):
            ok &= f.contains(Z[..., a:b])
        return ok

    def dist(z):
        return min(f.distance(z[a:b]) for f, a, b in zip(factors, offs[:-1], offs[1:]))

    vol = None
    if all(f.volume is not None for f in factors):
        vol = float(np.prod([f.volume for f in factors]))
    exact = all(f.distance is not None for f in factors)
    return DomainSpec(sum(dims), contains, np.vstack([f.bbox for f in factors]),
                      dist if exact else None,
                      name="product", params={"factors": [[f.name, f.params] for f in factors]},
                      volume=vol)


def ball(n=2, R=1.0):
    def contains(Z):
        return np.sum(np.abs(np.asarray(Z)) ** 2, axis=-1) < R**2

    def dist(z):
        return R - float(np.linalg.norm(z))

    from math import factorial
    return DomainSpec(n, contains, [[-R, R]] * (2 * n), dist, name="ball",
                      params={"n": n, "R": R}, volume=np.pi**n * R ** (2 * n) / factorial(n))


# ---------------------------------------------------------------------------
# the slit product domain

ANNULUS_IN, ANNULUS_OUT = 0.5, 1.5
SLIT_TOL = 1e-12


def slit_quadratic(Z):
    """``(x1 - 1)^2 + (1 + |z2|^2)/(1 - |z2|^2) * y1^2``."""
    Z = np.asarray(Z, dtype=complex)
    z1, s2 = Z[..., 0], np.abs(Z[..., 1]) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return (z1.real - 1.0) ** 2 + (1.0 + s2) / (1.0 - s2) * z1.imag**2


def in_d1(Z):
    """Open inside part ``{... < 1/4, y1 > 0}`` of ``D1`` within ``P x D``."""
    Z = np.asarray(Z, dtype=complex)
    return (slit_quadratic(Z) < 0.25) & (Z[..., 0].imag > 0) & (np.abs(Z[..., 1]) < 1)


def on_slit(Z, tol=SLIT_TOL):
    Z = np.asarray(Z, dtype=complex)
    return (np.abs(slit_quadratic(Z) - 0.25) <= tol) & (Z[..., 0].imag > 0)


def _product_boundary_distance(z):
    a = abs(z[0])
    return min(a - ANNULUS_IN, ANNULUS_OUT - a, 1.0 - abs(z[1]))


def slit_distance(z):
    """Distance from ``z`` to the closure of the slit surface.

    By rotational symmetry in ``z2`` the nearest slit point has ``z2`` on the
    ray through the given ``z2``, so the search is over the angle ``theta``
    of the ellipse in ``(x1, y1)`` and the modulus ``sigma`` of ``z2``.  Parts
    of the surface outside the product are no closer than its boundary, so
    they can be included without changing the minimum of both distances.
    """
    x, y, s = z[0].real, z[0].imag, abs(z[1])

    def f(v):
        th, sig = v
        g = (1.0 + sig**2) / (1.0 - sig**2)
        X = 1.0 + 0.5 * np.cos(th)
        Y = 0.5 * np.sin(th) / np.sqrt(g)
        return (x - X) ** 2 + (y - Y) ** 2 + (s - sig) ** 2

    th = np.linspace(0.0, np.pi, 61)
    sg = np.linspace(0.0, 0.999, 41)
    T, G = np.meshgrid(th, sg)
    vals = f((T, G))
    k = np.argmin(vals)
    res = minimize(f, [T.flat[k], G.flat[k]], method="L-BFGS-B",
                   bounds=[(0.0, np.pi), (0.0, 1.0 - 1e-9)],
                   options={"ftol": 1e-15, "gtol": 1e-12})
    return float(np.sqrt(max(min(res.fun, vals.flat[k]), 0.0)))


def build_slit_domain():
    """``(P x D) minus S``, with ``P`` the annulus ``1/2 < |z1| < 3/2``."""

    def contains(Z):
        Z = np.asarray(Z, dtype=complex)
        a = np.abs(Z[..., 0])
        base = (a > ANNULUS_IN) & (a < ANNULUS_OUT) & (np.abs(Z[..., 1]) < 1.0)
        return base & ~on_slit(Z)

    def dist(z):
        return min(_product_boundary_distance(z), slit_distance(z))

    def side(Z):
        inside = in_d1(Z)
        return np.where(inside, Side.INSIDE_D1.value, Side.OUTSIDE_D1.value)

    return DomainSpec(2, contains, [[-1.5, 1.5], [-1.5, 1.5], [-1, 1], [-1, 1]], dist, side,
                      name="slit", params={"P": [ANNULUS_IN, ANNULUS_OUT], "tol": SLIT_TOL},
                      volume=np.pi * (ANNULUS_OUT**2 - ANNULUS_IN**2) * np.pi,
                      distances=lambda Z: slit_boundary_distance_many(Z))


def d1_interior():
    """The open region ``D^0`` bounded by the slit and ``y1 = 0``."""
    return DomainSpec(2, in_d1, [[0.5, 1.5], [0.0, 0.5], [-1, 1], [-1, 1]], None,
                      name="D1-interior", params={})


def from_hartogs(dom, name="hartogs"):
    """Adapter from a :class:`~pseudoconvexity.hartogs.HartogsDomain`.

    The vectorised distance is a lower bound: with ``gap = e^phi(z) - |w|``
    and ``L`` a Lipschitz bound of ``e^phi`` on ``|z'| <= |z| + gap``,
    ``dist >= gap / sqrt(1 + L^2)``.  ``L`` comes from a polar grid with a
    10% safety factor.
    """

    def contains(Z):
        Z = np.asarray(Z, dtype=complex)
        return dom.contains(Z[..., 0], Z[..., 1])

    radii = np.linspace(0.0, 0.999, 500)
    ang = np.linspace(0.0, 2 * np.pi, 256, endpoint=False)
    zz = radii[:, None] * np.exp(1j * ang)[None, :]
    gx, gy = dom.field.gradient(zz)
    slope = np.exp(dom.field.value(zz)) * np.hypot(gx, gy)
    lip = 1.1 * np.maximum.accumulate(slope.max(axis=1))

    def distances(Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        z, w = Z[:, 0], Z[:, 1]
        rho = np.abs(z)
        ok = rho < 1.0
        gap = np.where(ok, np.exp(dom.field.value(np.where(ok, z, 0.0))) - np.abs(w), 0.0)
        gap = np.maximum(gap, 0.0)
        reach = rho + gap
        idx = np.searchsorted(radii, reach, side="right")
        L = np.where(idx < len(radii), lip[np.minimum(idx, len(radii) - 1)], np.inf)
        lb = gap / np.sqrt(1.0 + L**2)
        return np.minimum(lb, np.maximum(1.0 - rho, 0.0))

    # |w| < exp(phi) and phi <= 1/2 log(1 - |z|^2) + sup(cap) stays below e^0.01
    return DomainSpec(2, contains, [[-1, 1], [-1, 1], [-1.02, 1.02], [-1.02, 1.02]], None,
                      name=name, params={"psi": dom.field.psi.to_dict(),
                                         "cap": dom.field.cap is not None},
                      distances=distances)


def slit_distance_many(Z, coarse=(48, 32), refine=2, chunk=2000):
    """Vectorised :func:`slit_distance` by nested grid search.

    Accurate to roughly ``1e-3``; meant for classifying samples rather than
    certifying single points.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    X0, Y0, S0 = Z[:, 0].real, Z[:, 0].imag, np.abs(Z[:, 1])

    def sq(x, y, s, T, G):
        g = (1.0 + G**2) / (1.0 - G**2)
        return ((x[:, None] - 1.0 - 0.5 * np.cos(T)) ** 2
                + (y[:, None] - 0.5 * np.sin(T) / np.sqrt(g)) ** 2
                + (s[:, None] - G) ** 2)

    th = np.linspace(0.0, np.pi, coarse[0])
    sg = np.linspace(0.0, 0.999, coarse[1])
    T, G = (m.ravel()[None, :] for m in np.meshgrid(th, sg, indexing="ij"))
    off = np.linspace(-1.0, 1.0, 9)
    dT, dG = np.repeat(off, 9)[None, :], np.tile(off, 9)[None, :]
    out = np.empty(len(Z))
    for a in range(0, len(Z), chunk):
        x, y, s = X0[a:a + chunk], Y0[a:a + chunk], S0[a:a + chunk]
        idx = np.arange(len(x))
        d = sq(x, y, s, T, G)
        k = np.argmin(d, axis=1)
        best, bt, bg = d[idx, k], T[0, k], G[0, k]
        ht, hg = th[1] - th[0], sg[1] - sg[0]
        for _ in range(refine):
            Tc = np.clip(bt[:, None] + dT * ht, 0.0, np.pi)
            Gc = np.clip(bg[:, None] + dG * hg, 0.0, 1.0 - 1e-9)
            d = sq(x, y, s, Tc, Gc)
            k = np.argmin(d, axis=1)
            better = d[idx, k] < best
            best = np.where(better, d[idx, k], best)
            bt = np.where(better, Tc[idx, k], bt)
            bg = np.where(better, Gc[idx, k], bg)
            ht, hg = ht / 4.0, hg / 4.0
        out[a:a + chunk] = np.sqrt(best)
    return out


def slit_boundary_distance_many(Z):
    """Distance to the boundary of the slit domain for many points."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    a = np.abs(Z[:, 0])
    prod = np.minimum(np.minimum(a - ANNULUS_IN, ANNULUS_OUT - a), 1.0 - np.abs(Z[:, 1]))
    return np.minimum(prod, slit_distance_many(Z))

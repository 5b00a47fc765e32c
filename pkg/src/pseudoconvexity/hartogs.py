"""Hartogs domains over a concave-on-a-dense-set cap.

Domains have the form ``{(z, w) : |z| < 1, log|w| < phi(z)}``.  Boundary
points over ``z`` are strictly pseudoconvex when ``Laplacian(phi)(z) < 0``
and strictly pseudoconcave when it is positive.

Two graph functions are provided:

* ``phi0 = psi(|z|) / 2``: a radial profile that is ``(|z|^2 - r0^2)/2`` near
  the origin (pseudoconcave there) and ``log(1 - |z|^2)/2`` for
  ``|z| >= r0`` (so the domain is the unit ball there);
* ``phi = phi0 + Phi`` with the cap ``Phi(x + iy) = F(x/r0) chi(y/r0)`` built
  from a Cantor-bump function ``F``.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .cantor_bump import CantorBumpFn, construct_F
from .errors import ConstraintViolation, OutsideDomain

# smoothed positive part (t)_+ * k, with k(u) = 35/32 (1 - u^2)^3 on [-1, 1]
_KERNEL = Polynomial([1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]) * (35.0 / 32.0)
_CDF = _KERNEL.integ(lbnd=-1.0)
_RAMP = _CDF.integ(lbnd=-1.0)

_SMOOTHERSTEP = Polynomial([0.0, 0.0, 0.0, 10.0, -15.0, 6.0])
CHI_RAMP = 0.75


# ---------------------------------------------------------------------------
# radial profile

@dataclass(frozen=True)
class RadialProfile:
    """Smoothed ``psi0(x) = min(log(1 - x^2), x^2 - r0^2)``.

    The minimum is smoothed in the difference variable
    ``d = (x^2 - r0^2) - log(1 - x^2)``: ``psi = a - s(d)`` where ``a`` is the
    quadratic branch and ``s`` is the positive part convolved with a
    compact kernel of half-width ``width``.  Because ``s`` is convex with
    ``0 <= s' <= 1``, the planar Laplacian is a convex combination of the two
    branch Laplacians minus a non-negative term, so ``Laplacian(psi) <= 4``.
    """

    r0: float
    width: float
    crossing: float

    def _parts(self, rho):
        rho = np.asarray(rho, dtype=float)
        q = 1.0 - rho**2
        a = rho**2 - self.r0**2
        with np.errstate(invalid="ignore", divide="ignore"):
            b = np.log(q)  # nan or -inf for rho >= 1, outside the disc
        d = a - b
        u = np.clip(d / self.width, -1.0, 1.0)
        s = np.where(d >= self.width, d, self.width * _RAMP(u))
        s = np.where(d <= -self.width, 0.0, s)
        s1 = np.where(d >= self.width, 1.0, _CDF(u))
        s1 = np.where(d <= -self.width, 0.0, s1)
        s2 = np.where(np.abs(d) < self.width, _KERNEL(u) / self.width, 0.0)
        return rho, q, a, b, d, s, s1, s2

    def raw(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.minimum(np.log(1.0 - rho**2), rho**2 - self.r0**2)

    def __call__(self, rho):
        _, _, a, b, d, s, _, _ = self._parts(rho)
        # return the branches verbatim where the smoothing is inactive
        return np.where(d >= self.width, b, a - s)

    def derivative(self, rho):
        rho, q, _, _, _, _, s1, _ = self._parts(rho)
        return 2.0 * rho - s1 * (2.0 * rho + 2.0 * rho / q)

    def second_derivative(self, rho):
        rho, q, _, _, _, _, s1, s2 = self._parts(rho)
        dd = 2.0 * rho + 2.0 * rho / q
        ddd = 2.0 + 2.0 * (1.0 + rho**2) / q**2
        return 2.0 - s2 * dd**2 - s1 * ddd

    def laplacian(self, rho):
        """Planar Laplacian of ``psi(|z|)``, i.e. ``psi'' + psi'/rho`` (finite at 0)."""
        rho, q, _, _, _, _, s1, s2 = self._parts(rho)
        dd = 2.0 * rho + 2.0 * rho / q
        return (1.0 - s1) * 4.0 - s1 * 4.0 / q**2 - s2 * dd**2

    def to_dict(self):
        return {"r0": self.r0, "width": self.width, "crossing": self.crossing}


def _branch_gap(rho, r0):
    return rho**2 - r0**2 - np.log(1.0 - rho**2)


def max_smoothing_width(r0):
    """Largest admissible kernel half-width keeping the smoothing in ``(r0/2, r0)``."""
    return float(min(-_branch_gap(r0 / 2.0, r0), _branch_gap(r0, r0)))


def build_psi(r0=0.3, smoothing_width=None, n_grid=20001):
    """Build the smoothed radial profile and verify its Laplacian bounds.

    Parameters
    ----------
    r0 : float
        Radius in ``(0, 1/3)``.
    smoothing_width : float, optional
        Kernel half-width, measured in the difference of the two branches.
        Defaults to 90% of :func:`max_smoothing_width`.

    Raises
    ------
    ConstraintViolation
        If the smoothing zone leaves ``(r0/2, r0)`` or a Laplacian bound fails
        on the radial grid.
    """
    if not 0.0 < r0 < 1.0 / 3.0:
        raise ValueError(f"r0 must lie in (0, 1/3), got {r0}")
    wmax = max_smoothing_width(r0)
    w = 0.9 * wmax if smoothing_width is None else float(smoothing_width)
    if not 0.0 < w < wmax:
        raise ConstraintViolation(
            f"smoothing width {w:.4g} must be below {wmax:.4g} to stay inside (r0/2, r0)")
    # the branch difference is increasing, so it has one zero
    crossing = brentq(_branch_gap, r0 / 2.0, r0, args=(r0,), xtol=1e-15)
    prof = RadialProfile(float(r0), w, float(crossing))

    rho = np.linspace(0.0, 0.999, n_grid)
    lap = prof.laplacian(rho)
    tol = 1e-9
    if np.any(lap > 4.0 + tol):
        raise ConstraintViolation("Laplacian of psi exceeds 4")
    outer = rho >= r0
    if np.any(lap[outer] > -4.0 + tol):
        raise ConstraintViolation("Laplacian of psi exceeds -4 beyond r0")
    inner = rho <= r0 / 2.0
    if np.any(np.abs(lap[inner] - 4.0) > tol):
        raise ConstraintViolation("Laplacian of psi differs from 4 inside r0/2")
    off = (rho <= r0 / 2.0) | (rho >= r0)
    if np.any(np.abs(prof(rho[off]) - prof.raw(rho[off])) > 1e-14):
        raise ConstraintViolation("smoothing leaks outside (r0/2, r0)")
    return prof


# ---------------------------------------------------------------------------
# cutoff and cap

def chi(y, nu=0):
    """Even cutoff: 1 on ``[-1, 1]``, 0 off ``(-1.75, 1.75)``, ``C^2``."""
    y = np.asarray(y, dtype=float)
    t = np.clip((np.abs(y) - 1.0) / CHI_RAMP, 0.0, 1.0)
    ramp = (np.abs(y) > 1.0) & (np.abs(y) < 1.0 + CHI_RAMP)
    if nu == 0:
        return 1.0 - _SMOOTHERSTEP(t)
    deriv = -_SMOOTHERSTEP.deriv(nu)(t) / CHI_RAMP**nu
    if nu % 2 == 1:
        deriv = deriv * np.sign(y)
    return np.where(ramp, deriv, 0.0)


def chi_second_sup():
    """``sup |chi''|``, attained at the inflection of the smootherstep."""
    t = (3.0 - np.sqrt(3.0)) / 6.0
    return float(abs(_SMOOTHERSTEP.deriv(2)(t)) / CHI_RAMP**2)


@dataclass(frozen=True)
class CapField:
    """``Phi(x + iy) = F(x / r0) * chi(y / r0)``."""

    F: CantorBumpFn
    r0: float

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return self.F.value(z.real / self.r0) * chi(z.imag / self.r0)

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        u, v = z.real / self.r0, z.imag / self.r0
        gx = self.F.derivative(u) * chi(v) / self.r0
        gy = self.F.value(u) * chi(v, 1) / self.r0
        return gx, gy

    def laplacian(self, z):
        z = np.asarray(z, dtype=complex)
        u, v = z.real / self.r0, z.imag / self.r0
        return (self.F.second_derivative(u) * chi(v)
                + self.F.value(u) * chi(v, 2)) / self.r0**2

    def singular(self, z):
        """Points where ``F''`` has no limit: Cantor candidates under the cutoff."""
        z = np.asarray(z, dtype=complex)
        u, v = z.real / self.r0, z.imag / self.r0
        return (np.abs(u) <= 1.0) & (self.F.plateau_level(u) < 0) & (chi(v) > 0)


def cap_constants(r0):
    """Cantor-bump constants ``(C1, C2)`` that make both Laplacian bounds hold.

    ``C1`` keeps ``|Laplacian(F chi'')| <= 0.9`` (so the annulus bound is
    ``-2 + 0.9 <= -1``); ``C2 = max(1, 16 r0^2)`` gives
    ``2 - C2/r0^2 <= -14`` on plateaus.
    """
    return 0.9 * r0**2 / chi_second_sup(), max(1.0, 16.0 * r0**2)


# ---------------------------------------------------------------------------
# graph functions

class ScalarField2:
    """A real function on the unit disc with value, gradient and Laplacian.

    ``phi = psi(|z|)/2 + cap(z)``; ``cap`` may be ``None``.
    """

    def __init__(self, psi: RadialProfile, cap: Optional[CapField] = None):
        self.psi = psi
        self.cap = cap

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        out = 0.5 * self.psi(np.abs(z))
        if self.cap is not None:
            out = out + self.cap.value(z)
        return out

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        rho = np.abs(z)
        dpsi = self.psi.derivative(rho)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(rho > 0, 0.5 * dpsi / np.where(rho > 0, rho, 1.0), 0.0)
        gx, gy = ratio * z.real, ratio * z.imag
        if self.cap is not None:
            cx, cy = self.cap.gradient(z)
            gx, gy = gx + cx, gy + cy
        return gx, gy

    def laplacian(self, z):
        z = np.asarray(z, dtype=complex)
        out = 0.5 * self.psi.laplacian(np.abs(z))
        if self.cap is not None:
            out = out + self.cap.laplacian(z)
        return out

    def singular(self, z):
        z = np.asarray(z, dtype=complex)
        if self.cap is None:
            return np.zeros(z.shape, dtype=bool)
        return self.cap.singular(z)


class BoundaryClass(str, Enum):
    CONVEX = "PSC+"
    CONCAVE = "PSC-"
    INDETERMINATE = "IND"


@dataclass(frozen=True)
class PointClassification:
    kind: BoundaryClass
    laplacian: float


def classify_point(field: ScalarField2, z0, tol=1e-6):
    """Classify the boundary fibre over ``z0`` by the sign of ``Laplacian(phi)``.

    Points where the cap's second derivative does not exist (Cantor
    candidates with ``chi > 0``) are reported as indeterminate.
    """
    z0 = complex(z0)
    if abs(z0) >= 1.0:
        raise OutsideDomain(f"|z0| = {abs(z0):.6g} is not inside the unit disc")
    lap = float(field.laplacian(np.asarray(z0)))
    if bool(field.singular(np.asarray(z0))):
        return PointClassification(BoundaryClass.INDETERMINATE, lap)
    return PointClassification(_label(lap, tol), lap)


def _label(lap, tol):
    if lap < -tol:
        return BoundaryClass.CONVEX
    if lap > tol:
        return BoundaryClass.CONCAVE
    return BoundaryClass.INDETERMINATE


# ---------------------------------------------------------------------------
# grid scan

@dataclass
class ClassificationMap:
    """Per-cell classification over the cells of an ``n x n`` grid on ``[-1, 1]^2``.

    Only cells with ``|centre| < 1 - margin`` are populated; the rest carry an
    empty label.
    """

    n: int
    margin: float
    x: np.ndarray        # representative abscissa per column
    y: np.ndarray        # cell-centre ordinate per row
    laplacian: np.ndarray
    labels: np.ndarray   # (n, n) array of str, rows indexed by y

    def counts(self):
        vals, cnt = np.unique(self.labels[self.labels != ""], return_counts=True)
        out = {c.value: 0 for c in BoundaryClass}
        out.update({str(v): int(c) for v, c in zip(vals, cnt)})
        return out

    def dense_at_coarse(self):
        """Every 2x2 block lying fully inside the disc holds a PSC+ cell."""
        m = self.n // 2
        lab = self.labels[: 2 * m, : 2 * m].reshape(m, 2, m, 2)
        inside = (lab != "").all(axis=(1, 3))
        hit = (lab == BoundaryClass.CONVEX.value).any(axis=(1, 3))
        return bool(np.all(hit[inside]))

    def rows(self):
        """``(x, y, laplacian, class)`` tuples for populated cells."""
        iy, ix = np.nonzero(self.labels != "")
        for i, j in zip(iy, ix):
            yield float(self.x[j]), float(self.y[i]), float(self.laplacian[i, j]), str(self.labels[i, j])

    def summary(self):
        return {"grid": self.n, "margin": self.margin, "counts": self.counts(),
                "dense_at_coarse": self.dense_at_coarse()}


def _column_representatives(field, edges, centers):
    """Pick one abscissa per grid column.

    The centre is used unless it is a Cantor candidate of the cap; then the
    midpoint of the overlap with the lowest-level plateau meeting the column
    is used, so every column that touches the open set is sampled on it.
    """
    rep = centers.copy()
    cap = field.cap
    if cap is None:
        return rep
    r0, F = cap.r0, cap.F
    u_c = centers / r0
    bad = (np.abs(u_c) < 1.0) & (F.plateau_level(u_c) < 0)
    for j in np.nonzero(bad)[0]:
        lo_u, hi_u = edges[j] / r0, edges[j + 1] / r0
        for n in range(F.depth + 1):
            plo, phi_ = F.tree.plateau(n)
            k = np.searchsorted(plo, hi_u) - 1
            if k >= 0 and phi_[k] > lo_u:
                a, b = max(plo[k], lo_u), min(phi_[k], hi_u)
                rep[j] = 0.5 * (a + b) * r0
                break
    return rep


def scan_boundary(field: ScalarField2, n=512, margin=0.02, tol=1e-6):
    """Classify every cell of an ``n x n`` grid over ``[-1, 1]^2``."""
    edges = np.linspace(-1.0, 1.0, n + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    xs = _column_representatives(field, edges, centers)
    X, Y = np.meshgrid(xs, centers)
    Zc = np.add.outer(1j * centers, centers)  # cell centres decide coverage
    Z = X + 1j * Y
    inside = np.abs(Zc) < 1.0 - margin
    inside &= np.abs(Z) < 1.0
    lap = np.full(Z.shape, np.nan)
    lap[inside] = field.laplacian(Z[inside])
    labels = np.full(Z.shape, "", dtype="<U4")
    lab_in = np.where(lap[inside] < -tol, BoundaryClass.CONVEX.value,
                      np.where(lap[inside] > tol, BoundaryClass.CONCAVE.value,
                               BoundaryClass.INDETERMINATE.value))
    sing = field.singular(Z[inside])
    lab_in = np.where(sing, BoundaryClass.INDETERMINATE.value, lab_in)
    labels[inside] = lab_in
    return ClassificationMap(n, margin, xs, centers, lap, labels)


# ---------------------------------------------------------------------------
# domains

@dataclass
class HartogsDomain:
    """``{(z, w) : |z| < 1, log|w| < phi(z)}``."""

    field: ScalarField2

    def contains(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        base = np.abs(z) < 1.0
        zs = np.where(base, z, 0.0)
        bound = np.exp(self.field.value(zs))
        return base & (np.abs(w) < bound)

    def defining_function(self, Z):
        """``|w|^2 e^{-2 phi(z)} - 1`` for points stacked on the last axis."""
        Z = np.asarray(Z, dtype=complex)
        z, w = Z[..., 0], Z[..., 1]
        return np.abs(w) ** 2 * np.exp(-2.0 * self.field.value(z)) - 1.0


def membership(dom: HartogsDomain, point):
    z, w = point
    return bool(dom.contains(z, w))


def build_hartogs_domains(r0=0.3, eps=0.5, depth=10, smoothing_width=None):
    """Return ``(D0, D)`` built with constants from :func:`cap_constants`."""
    psi = build_psi(r0, smoothing_width)
    C1, C2 = cap_constants(r0)
    F = construct_F(eps, C1, C2, depth=depth)
    d0 = HartogsDomain(ScalarField2(psi))
    d = HartogsDomain(ScalarField2(psi, CapField(F, r0)))
    return d0, d

"""Levi forms, tangent analytic discs and continuity-principle certificates.

Conventions: for a real function ``r`` on ``C^n``

* ``dz[j] = dr/dz_j = (r_{x_j} - i r_{y_j}) / 2``;
* ``H[j, k] = d^2 r / dz_j dzbar_k`` (complex Hessian, Hermitian);
* ``Q[j, k] = d^2 r / dz_j dz_k`` (holomorphic Hessian, symmetric);

so that ``r(z + h) = r(z) + 2 Re(dz . h) + Re(h^T Q h) + h^T H conj(h) + O(|h|^3)``.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domains import DomainSpec
from .errors import DegenerateGradient, DiscExits, DomainError

GRAD_STEP = 1e-6
HESS_STEP = 1e-4


class DefiningFn:
    """A real defining function with derivative oracles.

    Parameters
    ----------
    r : callable
        ``r(Z)`` for complex ``Z`` of shape ``(..., n)``; must broadcast.
    dim : int
    dz, hessians : callable, optional
        Analytic ``dz(z)`` and ``hessians(z) -> (H, Q)``.  When absent,
        central differences with one Richardson step are used.
    """

    def __init__(self, r, dim, dz=None, hessians=None, name="r"):
        self.r = r
        self.dim = dim
        self._dz = dz
        self._hess = hessians
        self.name = name

    def __call__(self, z):
        return np.asarray(self.r(np.asarray(z, dtype=complex)), dtype=float)

    @staticmethod
    def _scale(z):
        return max(1.0, float(np.max(np.abs(z))))

    def _real_grad(self, z, h):
        n = self.dim
        E = np.vstack([np.eye(n), 1j * np.eye(n)])  # x-directions, then y-directions
        plus = self(z[None, :] + h * E)
        minus = self(z[None, :] - h * E)
        return (plus - minus) / (2.0 * h)

    def dz(self, z):
        z = np.asarray(z, dtype=complex)
        if self._dz is not None:
            return np.asarray(self._dz(z), dtype=complex)
        h = GRAD_STEP * self._scale(z)
        g = (4.0 * self._real_grad(z, h / 2.0) - self._real_grad(z, h)) / 3.0
        n = self.dim
        return 0.5 * (g[:n] - 1j * g[n:])

    def _real_hessian(self, z, h):
        n = self.dim
        E = np.vstack([np.eye(n), 1j * np.eye(n)])
        m = 2 * n
        pts = [z]
        for i in range(m):
            for j in range(i, m):
                for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    pts.append(z + h * (si * E[i] + sj * E[j]))
        vals = self(np.array(pts))
        Hr = np.empty((m, m))
        k = 1
        for i in range(m):
            for j in range(i, m):
                pp, pm, mp, mm = vals[k:k + 4]
                k += 4
                Hr[i, j] = Hr[j, i] = (pp - pm - mp + mm) / (4.0 * h * h)
        return Hr

    def hessians(self, z):
        """Return ``(H, Q)``."""
        z = np.asarray(z, dtype=complex)
        if self._hess is not None:
            H, Q = self._hess(z)
            return np.asarray(H, dtype=complex), np.asarray(Q, dtype=complex)
        h = HESS_STEP * self._scale(z)
        Hr = (4.0 * self._real_hessian(z, h / 2.0) - self._real_hessian(z, h)) / 3.0
        n = self.dim
        xx, xy = Hr[:n, :n], Hr[:n, n:]
        yx, yy = Hr[n:, :n], Hr[n:, n:]
        H = 0.25 * ((xx + yy) + 1j * (xy - yx))
        Q = 0.25 * ((xx - yy) - 1j * (xy + yx))
        return H, Q

    def normal(self, z):
        """Outer unit normal in ``C^n`` (gradient of ``r`` as a complex vector)."""
        g = 2.0 * np.conj(self.dz(z))
        nrm = np.linalg.norm(g)
        if nrm == 0:
            raise DegenerateGradient("gradient vanishes")
        return g / nrm


# ---------------------------------------------------------------------------
# model defining functions

def ball_defining(n=2):
    return DefiningFn(lambda Z: np.sum(np.abs(Z) ** 2, axis=-1) - 1.0, n,
                      dz=lambda z: np.conj(z),
                      hessians=lambda z: (np.eye(n, dtype=complex), np.zeros((n, n), complex)),
                      name="ball")


def quadric_defining(H, Q, c=-1.0):
    """``r(z) = z^T H conj(z) + Re(z^T Q z) + c`` with ``H`` Hermitian, ``Q`` symmetric."""
    H = np.asarray(H, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    n = H.shape[0]

    def r(Z):
        Z = np.asarray(Z, dtype=complex)
        herm = np.einsum("...j,jk,...k->...", Z, H, np.conj(Z)).real
        hol = np.einsum("...j,jk,...k->...", Z, Q, Z).real
        return herm + hol + c

    return DefiningFn(r, n, dz=lambda z: H @ np.conj(z) + Q @ z,
                      hessians=lambda z: (H, Q), name="quadric")


def hartogs_defining(field):
    """``r(z, w) = log|w| - phi(z)`` for a Hartogs graph field."""

    def r(Z):
        Z = np.asarray(Z, dtype=complex)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(Z[..., 1])) - field.value(Z[..., 0])

    def dz(z):
        gx, gy = field.gradient(np.asarray(z[0]))
        return np.array([-0.5 * (gx - 1j * gy), 0.5 / z[1]], dtype=complex)

    return DefiningFn(r, 2, dz=dz, name="hartogs")


# ---------------------------------------------------------------------------
# Levi form, tangency, discs

def levi_form(r: DefiningFn, z, a, H=None):
    """``sum_jk H_jk a_j conj(a_k)``; raises if the imaginary residue is large."""
    a = np.asarray(a, dtype=complex)
    if H is None:
        H, _ = r.hessians(z)
    val = a @ H @ np.conj(a)
    if abs(val.imag) > 1e-8 * max(1.0, float(np.vdot(a, a).real)) * max(1.0, np.abs(H).max()):
        raise ValueError(f"Levi form not real: imaginary part {val.imag:.3e}")
    return float(val.real)


def _pivot(g, c):
    if abs(g[0]) >= c:
        return 0
    k = int(np.argmax(np.abs(g)))
    if abs(g[k]) < c:
        raise DegenerateGradient(f"max |dr/dz_k| = {abs(g[k]):.3e} below {c:.3e}")
    return k


def tangent_adjust(r: DefiningFn, z, a, c=1e-8, pivot=None):
    """Project ``a`` onto the complex tangent space by correcting one coordinate.

    The first coordinate is used unless ``|dr/dz_1| < c``; then the coordinate
    with the largest ``|dr/dz_k|`` takes its place.
    """
    g = r.dz(z)
    p = _pivot(g, c) if pivot is None else pivot
    a = np.array(a, dtype=complex)
    a[p] -= (a @ g) / g[p]
    return a


@dataclass(frozen=True)
class AnalyticDisc:
    """``lambda -> z + lambda a + lambda^2 b1 e_pivot``."""

    base: np.ndarray
    direction: np.ndarray
    adjusted: np.ndarray
    b1: complex
    pivot: int

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        out = self.base + lam[..., None] * self.adjusted
        out[..., self.pivot] += lam**2 * self.b1
        return out


def levi_disc(r: DefiningFn, z, a, c=1e-8, boundary_tol=1e-8):
    """Second-order disc tangent to the boundary at ``z``.

    ``b1 = -a^T Q a / (2 dr/dz_p)`` cancels the pure ``lambda^2`` term of
    ``r`` along the disc, leaving ``r(phi(lambda)) = |lambda|^2 L(a) + O(|lambda|^3)``.
    """
    z = np.asarray(z, dtype=complex)
    if abs(float(r(z))) > boundary_tol:
        raise DomainError(f"base point is not on the boundary: r = {float(r(z)):.3e}")
    g = r.dz(z)
    p = _pivot(g, c)
    adj = tangent_adjust(r, z, a, c, pivot=p)
    if np.linalg.norm(adj) <= 1e-12 * np.linalg.norm(a):
        raise DomainError("direction collapses to zero after the tangential correction")
    _, Q = r.hessians(z)
    b1 = complex(-(adj @ Q @ adj) / (2.0 * g[p]))
    return AnalyticDisc(z, np.asarray(a, dtype=complex), adj, b1, p)


@dataclass
class TaylorReport:
    radii: np.ndarray
    residuals: np.ndarray      # sup over the circle of |r(phi)/|lambda|^2 - L|
    circle_means: np.ndarray   # circle means of r(phi)/|lambda|^2
    levi: float
    slope: float
    intercept: float
    exact: bool                # residuals at rounding level: identity holds exactly

    @property
    def decays(self):
        return self.exact or self.slope >= 0.9

    def intercept_error(self):
        return abs(self.intercept - self.levi) / max(abs(self.levi), 1e-300)

    def rows(self):
        return list(zip(self.radii.tolist(), self.residuals.tolist(), self.circle_means.tolist()))


def taylor_residual(r: DefiningFn, disc: AnalyticDisc, radii, n_angles=64):
    """Check ``r(phi(lambda)) = |lambda|^2 (L(a) + o(1))`` on circles.

    ``r(z)`` is subtracted so that a base point off the boundary by rounding
    does not swamp the ``|lambda|^2`` scale.
    """
    radii = np.asarray(radii, dtype=float)
    L = levi_form(r, disc.base, disc.adjusted)
    r0 = float(r(disc.base))
    th = 2.0 * np.pi * np.arange(n_angles) / n_angles
    res, means = [], []
    for rho in radii:
        lam = rho * np.exp(1j * th)
        q = (r(disc(lam)) - r0) / rho**2
        res.append(np.max(np.abs(q - L)))
        means.append(np.mean(q))
    res, means = np.array(res), np.array(means)
    noise = 1e-9 * max(1.0, abs(L))
    exact = bool(np.all(res <= noise))
    if exact:
        slope = np.inf
    else:
        slope = float(np.polyfit(np.log(radii), np.log(np.maximum(res, 1e-300)), 1)[0])
    # circle means are L + c rho^2 + O(rho^4); fit in rho^2 on the smaller half,
    # where the disc stays closest to the base point
    order = np.argsort(radii)
    small = order[:max(2, (len(radii) + 1) // 2)]
    if len(radii) == 1:
        intercept = float(means[0])
    else:
        intercept = float(np.polyfit(radii[small] ** 2, means[small], 1)[-1])
    return TaylorReport(radii, res, means, L, slope, intercept, exact)


def tangent_frame(g):
    """Orthonormal basis (columns) of ``{a : sum a_j g_j = 0}``."""
    g = np.asarray(g, dtype=complex)
    # the tangent space is the Hermitian orthogonal complement of conj(g)
    _, _, vh = np.linalg.svd(np.conj(g)[None, :])
    return np.conj(vh[1:]).T


def find_concave_direction(r: DefiningFn, z, tol=1e-9):
    """Most negative tangential Levi eigenvalue at ``z``.

    Returns ``(a, eigenvalue)`` with ``|a| = 1`` when the eigenvalue is below
    ``-tol``, else ``None``.
    """
    g = r.dz(z)
    if np.linalg.norm(g) < 1e-12:
        raise DegenerateGradient("gradient vanishes")
    T = tangent_frame(g)
    H, _ = r.hessians(z)
    M = T.T @ H @ np.conj(T)
    M = 0.5 * (M + M.conj().T)
    w, V = np.linalg.eigh(M)
    if w[0] >= -tol:
        return None
    a = T @ np.conj(V[:, 0])
    return a / np.linalg.norm(a), float(w[0])


# ---------------------------------------------------------------------------
# continuity principle

@dataclass
class DiscFamilyReport:
    center_distance: float
    edge_distance: float
    violation: bool
    radius: float
    n_samples: int


def continuity_violation(dom: DomainSpec, disc: Callable, rho, n_angles=64, n_rings=4):
    """Compare boundary distance at a disc's centre with its edge circle.

    ``disc`` maps complex ``zeta`` arrays to points of shape ``(..., dim)``.
    A centre strictly closer to the boundary than every edge sample
    certifies that the domain is not pseudoconvex.
    """
    if not rho > 0:
        raise DomainError("disc radius must be positive")
    th = 2.0 * np.pi * np.arange(n_angles) / n_angles
    rings = np.linspace(0.0, rho, n_rings + 1)[1:]
    zeta = np.concatenate([[0.0], (rings[:, None] * np.exp(1j * th)).ravel()])
    pts = np.asarray(disc(zeta), dtype=complex)
    inside = dom.contains(pts)
    if not np.all(inside):
        bad = zeta[~inside][0]
        raise DiscExits(f"disc leaves {dom.name} at zeta = {bad:.4g}")
    edge_pts = np.asarray(disc(rho * np.exp(1j * th)), dtype=complex)
    centre = dom.boundary_distance(pts[0])
    edge = min(dom.boundary_distance(p) for p in edge_pts)
    return DiscFamilyReport(centre, edge, bool(centre < edge), float(rho), len(zeta))


def slit_side_disc(y1=0.51, rho=1.0):
    """Vertical disc ``zeta -> (1 + i y1, rho zeta)`` just outside ``D1``.

    Its centre is at distance ``y1 - 1/2`` from the slit, while the slit
    recedes as ``|z2|`` grows, so the edge is farther from the boundary.
    """

    def phi(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return np.stack([np.full(zeta.shape, 1.0 + 1j * y1), rho * zeta], axis=-1)

    return phi


def linear_disc(base, direction):
    base = np.asarray(base, dtype=complex)
    direction = np.asarray(direction, dtype=complex)

    def phi(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return base + zeta[..., None] * direction

    return phi

"""Constructive witnesses: local peak functions, their normalized supremum,
and a greedy square-integrable function that is large near a boundary point.
"""
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Optional

import numpy as np

from .bergman import GramKernel
from .domains import DomainSpec
from .errors import (
    DomainError, GrowthTargetUnreachable, NonNegativeWitness, NotStrictlyPseudoconvex,
)
from .levi import DefiningFn, tangent_frame

N_CIRCLE = 64


# ---------------------------------------------------------------------------
# peak functions

@dataclass
class PshWitness:
    """``u(z) = max(Re P(z - a), -s)`` on ``|z - a| < radius``, ``-s`` elsewhere.

    ``P(h) = g.h + h^T Q h / 2`` is the Levi polynomial of the (possibly
    convexified) defining function at ``a``.
    """

    base: np.ndarray
    linear: np.ndarray
    quadratic: np.ndarray
    s: float
    radius: float
    levi_min: float
    convexifier: float = 0.0

    def levi_polynomial(self, Z):
        H = np.atleast_2d(np.asarray(Z, dtype=complex)) - self.base
        return H @ self.linear + 0.5 * np.einsum("ij,jk,ik->i", H, self.quadratic, H)

    def __call__(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        near = np.linalg.norm(Z - self.base, axis=1) < self.radius
        return np.where(near, np.maximum(self.levi_polynomial(Z).real, -self.s), -self.s)

    def inward_point(self, t):
        """``a - t nu`` with ``nu`` the unit outward normal."""
        nu = np.conj(self.linear) / np.linalg.norm(self.linear)
        return self.base - t * nu


def _ball_samples(center, R, n, rng):
    dim = len(center)
    X = rng.standard_normal((n, 2 * dim))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    X *= R * rng.random(n)[:, None] ** (1.0 / (2 * dim))
    return center + X[:, 0::2] + 1j * X[:, 1::2]


def levi_peak_function(r: DefiningFn, a, dom: Optional[DomainSpec] = None, margin=1e-6,
                       radii=(1.0, 0.7, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01), samples=20_000,
                       seed=0, slack=0.45, glue=0.2):
    """Local negative plurisubharmonic function peaking at ``a``.

    Parameters
    ----------
    r : DefiningFn
        Local defining function, ``r(a) = 0``.
    a : array_like
        Boundary point.
    dom : DomainSpec, optional
        Used to sample ``D`` near ``a`` when choosing the radius; without it
        ``{r < 0}`` stands in for the domain.
    margin : float
        Required lower bound for the tangential Levi eigenvalues.
    radii : sequence of float
        Candidate validity radii, tried from largest to smallest.
    slack, glue : float
        The radius must satisfy ``Re P <= -slack c |h|^2`` on sampled domain
        points, where ``c`` is the smallest Levi eigenvalue; the constant is
        ``s = glue c R^2`` with ``glue < slack`` so the glue is interior.

    Raises
    ------
    NotStrictlyPseudoconvex
        If the tangential Levi form is not above ``margin`` or no radius
        passes the sampled test.
    """
    a = np.asarray(a, dtype=complex)
    g = r.dz(a)
    H, Q = r.hessians(a)
    T = tangent_frame(g)
    M = T.T @ H @ np.conj(T)
    tang = float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])
    if tang <= margin:
        raise NotStrictlyPseudoconvex(f"tangential Levi eigenvalue {tang:.3e} <= {margin:.1e}")
    # (e^{A r} - 1)/A has Levi matrix H + A g g^* and holomorphic Hessian Q + A g g^T
    A = 0.0
    gg = np.outer(g, np.conj(g))
    while np.linalg.eigvalsh(0.5 * (H + A * gg + (H + A * gg).conj().T))[0] < 0.5 * tang:
        A = 1.0 if A == 0 else 2.0 * A
        if A > 1e8:
            raise NotStrictlyPseudoconvex("cannot convexify the defining function")
    Hc = H + A * gg
    c = float(np.linalg.eigvalsh(0.5 * (Hc + Hc.conj().T))[0])
    Qc = Q + A * np.outer(g, g)
    inside = dom.contains if dom is not None else (lambda Z: np.asarray(r(Z)) < 0)
    rng = np.random.default_rng(seed)
    for R in sorted(radii, reverse=True):
        w = PshWitness(a, g, Qc, glue * c * R**2, R, c, A)
        Z = _ball_samples(a, R, samples, rng)
        Z = Z[inside(Z)]
        h2 = np.sum(np.abs(Z - a) ** 2, axis=1)
        if len(Z) and np.all(w.levi_polynomial(Z).real <= -slack * c * h2):
            return w
    raise NotStrictlyPseudoconvex("no validity radius passed the sampled test")


# ---------------------------------------------------------------------------
# exhaustion and the normalized supremum

@dataclass
class Exhaustion:
    """``D_j = {dist >= deltas[j], |z| <= radii[j]}``; both sequences monotone."""

    deltas: tuple
    radii: tuple

    def __post_init__(self):
        d, R = np.asarray(self.deltas, float), np.asarray(self.radii, float)
        if len(d) != len(R) or np.any(np.diff(d) >= 0) or np.any(np.diff(R) < 0) or np.any(d <= 0):
            raise DomainError("exhaustion needs strictly decreasing deltas and growing radii")

    @classmethod
    def geometric(cls, n, delta=0.03, ratio=0.95, radius=10.0):
        return cls(tuple(delta * ratio**np.arange(n)), (radius,) * n)

    def __len__(self):
        return len(self.deltas)

    def member(self, j, Z, dist):
        Z = np.atleast_2d(Z)
        return (np.asarray(dist) >= self.deltas[j]) & (np.linalg.norm(Z, axis=1) <= self.radii[j])


@dataclass
class SupRegularized:
    """``u = max_j u_j / m_j`` for finitely many witnesses."""

    witnesses: list
    m: np.ndarray

    def __call__(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        return np.max([w(Z) / mj for w, mj in zip(self.witnesses, self.m)], axis=0)

    def components(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        return np.array([w(Z) / mj for w, mj in zip(self.witnesses, self.m)])


def sup_regularized(witnesses, exh: Exhaustion, samples, dist=None):
    """Normalize each witness by ``m_j = -sup_{D_j} u_j`` and take the maximum.

    ``samples`` are domain points and ``dist`` their boundary distances (a
    lower bound is fine: it only shrinks ``D_j``).  The witness list is
    paired with exhaustion levels in order.
    """
    Z = np.atleast_2d(np.asarray(samples, dtype=complex))
    if len(witnesses) > len(exh):
        raise DomainError("exhaustion has fewer levels than witnesses")
    m = []
    for j, w in enumerate(witnesses):
        u = w(Z)
        if np.any(u >= 0):
            raise NonNegativeWitness(f"witness {j} is >= 0 at {int(np.sum(u >= 0))} samples")
        sel = exh.member(j, Z, dist)
        if not np.any(sel):
            raise DomainError(f"no samples in exhaustion level {j}")
        m.append(-float(u[sel].max()))
    return SupRegularized(list(witnesses), np.array(m))


def neg_log_transform(u):
    """``-log(-u)`` for ``u < 0``."""
    u = np.asarray(u, dtype=float)
    if np.any(u >= 0):
        raise DomainError("neg_log_transform needs u < 0")
    out = -np.log(-u)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# sampled plurisubharmonicity

@dataclass
class PshReport:
    probes: int
    violations: list = field(default_factory=list)
    max_excess: float = -np.inf

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {"probes": self.probes, "violations": len(self.violations),
                "max_excess": self.max_excess}


def psh_check(u: Callable, dom: DomainSpec, probes=1000, seed=0, centers=None,
              max_radius=0.1, n_angles=N_CIRCLE, rtol=1e-6):
    """Sub-mean-value test of ``u`` on random complex circles.

    Each probe has a center in ``dom`` (or from ``centers``), a random unit
    direction ``w`` and radius ``rho`` halved until the closed disc (tested on
    four rings) lies in ``dom``.  A violation is
    ``u(z) > mean(u on circle) + rtol (1 + |u(z)|)``.
    """
    rng = np.random.default_rng(seed)
    if centers is None:
        from .bergman import sample_domain
        centers = sample_domain(dom, probes, rng)
    centers = np.atleast_2d(np.asarray(centers, dtype=complex))[:probes]
    th = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    rep = PshReport(len(centers))
    for z in centers:
        w = rng.standard_normal(dom.dim) + 1j * rng.standard_normal(dom.dim)
        w /= np.linalg.norm(w)
        rho = max_radius * rng.uniform(0.1, 1.0)
        for _ in range(60):
            rings = z + np.outer(np.concatenate([q * th for q in (0.25, 0.5, 0.75, 1.0)]) * rho, w)
            if np.all(dom.contains(rings)):
                break
            rho *= 0.5
        else:
            continue
        circle = z + np.outer(rho * th, w)
        uz = float(u(z[None, :])[0])
        mean = float(np.mean(u(circle)))
        excess = uz - mean
        rep.max_excess = max(rep.max_excess, excess)
        if excess > rtol * (1.0 + abs(uz)):
            rep.violations.append((z, w, rho, uz, mean))
    return rep


# ---------------------------------------------------------------------------
# greedy unbounded function

NORMALIZATIONS = ("sampled", "mean-value", "literal")


@dataclass
class GreedyLevel:
    k: int
    z: np.ndarray
    dist: float
    prev_dist: float
    d: float
    f_at_z: float
    f_norm: float
    g_at_z: float
    target: float
    met: bool
    M: float
    U_radius: float
    h_at_z: float = np.nan
    bound: float = np.nan

    def to_dict(self):
        return {"k": self.k, "z": [[float(c.real), float(c.imag)] for c in self.z],
                "dist": self.dist, "prev_dist": self.prev_dist, "d": self.d,
                "f_at_z": self.f_at_z, "f_norm": self.f_norm, "g_at_z": self.g_at_z,
                "target": self.target, "met": self.met, "M": self.M, "U_radius": self.U_radius,
                "h_at_z": self.h_at_z, "telescoping_bound": self.bound,
                "required": self.k - 1, "sixth_tail_bound": self.k - 1.0 / 6.0}


@dataclass
class GreedyTrace:
    a: np.ndarray
    c: float
    normalization: str
    levels: list
    h_norm: float = np.nan
    g_cross: Optional[np.ndarray] = None

    @property
    def all_met(self):
        return all(lv.met for lv in self.levels)

    def growth_ok(self):
        """``|h(z_k)| >= k - 1`` for every recorded ``k >= 2``."""
        return all(lv.h_at_z >= lv.k - 1 for lv in self.levels if lv.k >= 2)

    def to_dict(self):
        return {"a": [[float(c.real), float(c.imag)] for c in self.a], "c": self.c,
                "normalization": self.normalization, "h_norm": self.h_norm,
                "all_met": self.all_met, "levels": [lv.to_dict() for lv in self.levels]}


@dataclass
class SpanFunction:
    """``sum_i coef_i phi_i / ||phi_i||`` over a Gram kernel's basis."""

    gram: GramKernel
    coef: np.ndarray

    def __call__(self, Z):
        return _design(self.gram, Z) @ self.coef

    def norm(self):
        return _span_norm(self.gram, self.coef)


def _scales(gram):
    return np.sqrt(np.maximum(np.real(np.diag(gram.G)), 1e-300))


def _design(gram, Z):
    return gram.basis(np.atleast_2d(np.asarray(Z, dtype=complex))) / _scales(gram)


def _span_norm(gram, coef):
    d = _scales(gram)
    Gn = gram.G / np.outer(d, d)
    return float(np.sqrt(max(np.real(np.vdot(coef, Gn @ coef)), 0.0)))


def _sample_support(dom, gram, n, rng):
    """Domain points where the basis can be non-zero."""
    box = np.asarray(gram.basis.support_bbox if gram.basis.support_bbox is not None else dom.bbox)
    lo, hi = box[:, 0], box[:, 1]
    keep = (lambda Z: dom.contains(Z) & np.asarray(gram.basis.support(Z), bool)) \
        if gram.basis.support is not None else dom.contains
    out, got = [], 0
    while got < n:
        X = lo + (hi - lo) * rng.random((20000, len(lo)))
        Z = X[:, 0::2] + 1j * X[:, 1::2]
        Z = Z[keep(Z)]
        out.append(Z)
        got += len(Z)
    return np.concatenate(out)[:n]


def default_candidates(dom, a, n=400, rays=30, seed=0, max_radius=1.0, gram=None):
    """Domain points near ``a``: ``n`` random points of ``B(a, max_radius)``
    and geometric approaches ``a + t (p - a)`` from ``rays`` of them."""
    rng = np.random.default_rng(seed)
    a = np.asarray(a, dtype=complex)
    Z = _ball_samples(a, max_radius, 40 * n, rng)
    keep = dom.contains(Z)
    if gram is not None and gram.basis.support is not None:
        keep &= np.asarray(gram.basis.support(Z), bool)
    Z = Z[keep][:n]
    starts = Z[:rays]
    if gram is not None:
        starts = np.vstack([np.asarray(gram.basis.center)[None, :], starts])
    ts = np.logspace(-6, 0, 40, endpoint=False)
    R = (a + ts[None, :, None] * (starts[:, None, :] - a)).reshape(-1, len(a))
    R = R[dom.contains(R)]
    return np.concatenate([Z, R])


def greedy_unbounded_witness(dom: DomainSpec, gram: GramKernel, a, levels=5, delta0=0.25,
                             normalization="sampled", samples=60_000, seed=0, candidates=None,
                             strict=True):
    """Greedy construction of ``h = sum_k g_k / k^2`` large at points ``z_k -> a``.

    Parameters
    ----------
    dom : DomainSpec
        Domain with a distance oracle.
    gram : GramKernel
        Sampled Gram system; ``f_k`` is the unit-norm extremal function of its
        span at ``z_k``.
    a : array_like
        Boundary point.
    levels : int
    delta0 : float
        Distance defining ``K_1 = {dist >= delta0}`` (the unit distance used
        for ``K_1`` is not available in bounded domains of small inradius).
    normalization : {"sampled", "mean-value", "literal"}
        How ``d_k`` bounds ``|f_k|`` on ``K_k``: the sampled supremum over
        ``K_k`` together with all earlier points; the mean-value bound
        ``sqrt(n!/pi^n) dist^{-n}``; or ``pi^n dist^n`` literally.
    samples : int
        Domain points for sampled suprema.
    candidates : array_like, optional
        Pool of points ``z_k`` is chosen from.
    strict : bool
        Raise :class:`GrowthTargetUnreachable` when no candidate meets the
        level target; otherwise keep the best candidate and mark it unmet.

    Notes
    -----
    ``U_k = D cap B(a, 1/(k+1))`` holds every later point, so ``M_k`` is the
    sampled supremum of ``|g_k|`` there.  Among candidates meeting the level
    target the one with the smallest ``M_k`` is kept.

    Returns
    -------
    h : SpanFunction
    trace : GreedyTrace
    """
    if normalization not in NORMALIZATIONS:
        raise DomainError(f"normalization must be one of {NORMALIZATIONS}")
    if levels < 1:
        raise DomainError("levels must be >= 1")
    a = np.asarray(a, dtype=complex)
    n = dom.dim
    c_const = np.pi**n
    rng = np.random.default_rng(seed)
    S = _sample_support(dom, gram, samples, rng)
    S_dist = dom.distances_many(S)
    A_S = _design(gram, S)
    if candidates is None:
        candidates = default_candidates(dom, a, seed=seed, gram=gram)
    C = np.atleast_2d(np.asarray(candidates, dtype=complex))
    C = C[dom.contains(C)]
    C_dist = dom.distances_many(C)
    C_da = np.linalg.norm(C - a, axis=1)

    d_sc = _scales(gram)
    Gn = gram.G / np.outer(d_sc, d_sc)
    Gn = 0.5 * (Gn + Gn.conj().T) + 1e-10 * np.eye(len(d_sc))
    L = np.linalg.cholesky(Gn)

    def extremal(V):
        # unit-norm maximizers of |f(z)| for rows of V; value sqrt(K)
        X = np.linalg.solve(L.conj().T, np.linalg.solve(L, np.conj(V).T))
        K = np.real(np.einsum("ij,ji->i", V, X))
        return X / np.sqrt(K), np.sqrt(K)

    # candidates where every basis function vanishes (off the support) carry no span function
    C_live = np.any(_design(gram, C) != 0, axis=1)

    chosen, coefs, ds, Ms, trace = [], [], [], [], []
    P_all = np.concatenate([S, C])
    A_all = np.concatenate([A_S, _design(gram, C)])
    near_all = np.linalg.norm(P_all - a, axis=1)
    prev_dist, U_rad = delta0, 1.0
    for k in range(1, levels + 1):
        ok = C_live & (C_dist < prev_dist) & (C_da < 1.0 / k) & (C_da < U_rad)
        if chosen:
            ok &= C_dist < min(lv.dist for lv in trace)
        idx = np.nonzero(ok)[0]
        if len(idx) == 0:
            if strict:
                raise GrowthTargetUnreachable(k, 0.0, np.inf, [lv.to_dict() for lv in trace])
            break
        Zc = C[idx]
        X, sk = extremal(_design(gram, Zc))
        target = k**3 + k**2 * sum(Ms)
        if normalization == "sampled":
            inK = S_dist >= prev_dist
            vals = np.abs(A_S[inK] @ X)
            d = vals.max(axis=0) if vals.size else np.zeros(len(idx))
            if chosen:
                d = np.maximum(d, np.abs(_design(gram, np.array(chosen)) @ X).max(axis=0))
        elif normalization == "mean-value":
            d = np.full(len(idx), np.sqrt(factorial(n) / np.pi**n) * prev_dist ** (-n))
        else:
            d = np.full(len(idx), c_const * prev_dist**n)
        with np.errstate(divide="ignore"):
            gval = np.where(d > 0, sk / d, np.inf)
        radius = 1.0 / (k + 1)
        sel = near_all < radius
        with np.errstate(divide="ignore", invalid="ignore"):
            M = np.abs(A_all[sel] @ X).max(axis=0) / d if np.any(sel) else np.zeros(len(idx))
        met = gval >= target
        if np.any(met):
            pool = np.nonzero(met)[0]
            i = pool[np.argmin(M[pool])]
        elif strict:
            best = int(np.argmax(gval))
            raise GrowthTargetUnreachable(k, float(gval[best]), float(target),
                                          [lv.to_dict() for lv in trace])
        else:
            i = int(np.argmax(gval))
        z = Zc[i]
        chosen.append(z)
        coefs.append(X[:, i] / d[i])
        ds.append(float(d[i]))
        Ms.append(float(M[i]))
        trace.append(GreedyLevel(k, z, float(C_dist[idx[i]]), float(prev_dist), float(d[i]),
                                 float(sk[i]), _span_norm(gram, X[:, i]), float(gval[i]),
                                 float(target), bool(met[i]), float(M[i]), radius))
        prev_dist = float(C_dist[idx[i]])
        U_rad = radius

    if not coefs:
        raise GrowthTargetUnreachable(1, 0.0, 1.0, [])
    levels = len(coefs)
    coef = sum(cf / (j + 1) ** 2 for j, cf in enumerate(coefs))
    h = SpanFunction(gram, coef)
    P = _design(gram, np.array(chosen))
    G_abs = np.abs(P @ np.column_stack(coefs))  # |g_j(z_k)|, rows k
    hz = np.abs(P @ coef)
    w = 1.0 / np.arange(1, levels + 1) ** 2
    for kk, lv in enumerate(trace):
        lv.h_at_z = float(hz[kk])
        lv.bound = float(G_abs[kk, kk] * w[kk] - np.dot(Ms[:kk], w[:kk])
                         - np.dot(G_abs[kk, kk + 1:], w[kk + 1:]))
    tr = GreedyTrace(a, float(c_const), normalization, trace, h.norm(), G_abs)
    return h, tr

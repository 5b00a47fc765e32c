"""Cantor-bump boundary function.

A function ``F`` on the real line built as a sum of scaled copies of a
single bump ``b`` placed at the centres of a binary tree of intervals.
``F`` is ``C^{1,1-eps}``, vanishes off ``[-1, 1]``, is uniformly concave
(``F'' <= -C2``) on the dense open union of the plateau intervals and
vanishes on the Cantor-type remainder.

Layer ``n`` of the construction is

    f_n(x) = sum_i a_n * b((x - c_{n,i}) / p_n),   a_n = a0 gamma^n,  p_n = p0 delta^n

and ``F_N = f_0 + ... + f_N``.  Everything here is immutable once built.
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from . import serialization
from .errors import ConstraintViolation, Infeasible, NotOnPlateau

QUADRATIC_RADIUS = 0.25
SUPPORT_RADIUS = 0.75

# shape of b'' inside the transition zone, as fractions of its width:
# -8 is released to 0 over the first NEG_RAMP, then a trapezoid of positive
# curvature with ramps of POS_RAMP brings b' back to 0 at the far end.
NEG_RAMP = 0.2
POS_RAMP = 0.2

_SMOOTHERSTEP = Polynomial([0.0, 0.0, 0.0, 10.0, -15.0, 6.0])


# ---------------------------------------------------------------------------
# base bump
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BumpProfile:
    """Even bump with ``b(x) = 1 - 4x^2`` on ``|x| <= 1/4``.

    ``b`` is stored on ``[0, inf)`` as a list of polynomial pieces, each in
    the local variable ``t = (x - lo) / (hi - lo)``.  ``C3`` and ``C4`` are
    the measured suprema of ``|b'|`` and ``b''``.
    """

    transition_width: float
    breaks: Tuple[float, ...]
    coeffs: Tuple[Tuple[float, ...], ...]
    C3: float
    C4: float
    quadratic_radius: float = QUADRATIC_RADIUS
    support_radius: float = SUPPORT_RADIUS

    @property
    def end(self):
        return self.breaks[-1]

    def _piece_derivs(self, k, nu):
        c = np.asarray(self.coeffs[k])
        length = self.breaks[k + 1] - self.breaks[k]
        if nu:
            c = npoly.polyder(c, nu) / length**nu
        return c

    def __call__(self, x, nu=0):
        """Evaluate ``b^(nu)`` (``nu`` in 0, 1, 2) at an array of points."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.zeros_like(ax)
        idx = np.searchsorted(self.breaks, ax, side="right") - 1
        for k in range(len(self.coeffs)):
            m = idx == k
            if not np.any(m):
                continue
            lo, hi = self.breaks[k], self.breaks[k + 1]
            t = (ax[m] - lo) / (hi - lo)
            out[m] = npoly.polyval(t, self._piece_derivs(k, nu))
        if nu % 2 == 1:
            out = np.where(x < 0, -out, out)
        return out

    def generic(self, x, nu=0):
        """Scalar evaluation with plain arithmetic (works for mpmath numbers)."""
        ax = -x if x < 0 else x
        if ax >= self.breaks[-1]:
            return 0 * x
        k = int(np.searchsorted(self.breaks, float(ax), side="right")) - 1
        # float(ax) can round across a break; settle it exactly
        while k > 0 and ax < self.breaks[k]:
            k -= 1
        while k + 1 < len(self.coeffs) and ax >= self.breaks[k + 1]:
            k += 1
        lo, hi = self.breaks[k], self.breaks[k + 1]
        t = (ax - lo) / (hi - lo)
        c = self._piece_derivs(k, nu)
        acc = 0 * x
        for coef in c[::-1]:
            acc = acc * t + float(coef)
        if nu % 2 == 1 and x < 0:
            acc = -acc
        return acc

    def to_dict(self):
        return {
            "transition_width": self.transition_width,
            "breaks": list(self.breaks),
            "coeffs": [list(c) for c in self.coeffs],
            "C3": self.C3,
            "C4": self.C4,
        }


def _local(poly_s, sa, sb):
    """Re-express a polynomial in ``s`` on ``[sa, sb]`` in ``t`` in ``[0, 1]``."""
    return poly_s(Polynomial([sa, sb - sa]))


def _trapezoid(s0, tau):
    s1 = 1.0 - tau
    up = _SMOOTHERSTEP(Polynomial([-s0 / tau, 1.0 / tau]))
    down = 1.0 - _SMOOTHERSTEP(Polynomial([-s1 / tau, 1.0 / tau]))
    return [(s0, s0 + tau, up), (s0 + tau, s1, Polynomial([1.0])), (s1, 1.0, down)]


def _moments(pieces):
    lin = Polynomial([1.0, -1.0])
    m0 = m1 = 0.0
    for a, b, p in pieces:
        P0, P1 = p.integ(), (lin * p).integ()
        m0 += P0(b) - P0(a)
        m1 += P1(b) - P1(a)
    return m0, m1


def build_base_bump(transition_width=0.5, n_grid=20001):
    """Construct the base bump ``b``.

    The quadratic core ``1 - 4x^2`` on ``[0, 1/4]`` is continued over the
    transition zone ``[1/4, 1/4 + w]`` by integrating a piecewise polynomial
    curvature profile: ``b''`` rises from ``-8`` to ``0`` along a smootherstep
    ramp, then follows a smootherstep trapezoid of positive height ``kappa``.
    The trapezoid position and ``kappa`` are solved so that ``b`` and ``b'``
    reach zero together at ``1/4 + w``.

    Raises
    ------
    ConstraintViolation
        If no admissible trapezoid exists for this width, or if the grid
        check of ``b'' >= -8`` / monotonicity fails.
    """
    w = float(transition_width)
    if not 0.0 < w <= 0.5:
        raise ConstraintViolation(f"transition_width must lie in (0, 1/2], got {w}")
    sigma, tau = NEG_RAMP, POS_RAMP
    neg = [(0.0, sigma, -8.0 * (1.0 - _SMOOTHERSTEP(Polynomial([0.0, 1.0 / sigma]))))]
    n0, n1 = _moments(neg)
    # b'(1/4) = -2 must be cancelled; b(1/4) = 3/4 must be brought to zero
    target0 = 2.0 / w
    target1 = (2.0 * w - 0.75) / w**2

    def kappa_of(s0):
        return (target0 - n0) / _moments(_trapezoid(s0, tau))[0]

    def resid(s0):
        return n1 + kappa_of(s0) * _moments(_trapezoid(s0, tau))[1] - target1

    lo, hi = sigma, 1.0 - 2.0 * tau
    try:
        s0 = brentq(resid, lo, hi, xtol=1e-15, rtol=1e-15)
    except ValueError:
        raise ConstraintViolation(
            f"no smooth transition of width {w} keeps b'' >= -8 with this ramp shape"
        ) from None
    kappa = kappa_of(s0)
    pos = [(a, b, kappa * p) for a, b, p in _trapezoid(s0, tau)]
    s_pieces = neg + [(sigma, s0, Polynomial([0.0]))] + pos

    breaks = [0.0, QUADRATIC_RADIUS]
    coeffs = [(1.0, 0.0, -4.0 * QUADRATIC_RADIUS**2)]  # 1 - 4 (t/4)^2
    d_val, val = -8.0 * QUADRATIC_RADIUS, 1.0 - 4.0 * QUADRATIC_RADIUS**2
    live = [pc for pc in s_pieces if pc[1] - pc[0] > 0]
    for k, (sa, sb, g) in enumerate(live):
        length = w * (sb - sa)
        g_t = _local(g, sa, sb)
        d_t = g_t.integ() * length + d_val
        v_t = d_t.integ() * length + val
        d_val, val = float(d_t(1.0)), float(v_t(1.0))
        if k == len(live) - 1:
            if abs(val) > 1e-9 or abs(d_val) > 1e-9:
                raise ConstraintViolation(
                    f"transition does not close: b={val:.3e}, b'={d_val:.3e}")
            # integrate the last piece backwards from b = b' = 0 so the
            # roundoff lands at the inner junction, not at the support edge
            d_t = d_t - d_val
            v_t = d_t.integ(lbnd=1.0) * length
        x0 = QUADRATIC_RADIUS + w * sa
        breaks.append(QUADRATIC_RADIUS + w * sb)
        coeffs.append(tuple(float(c) for c in v_t.coef))
        assert abs(x0 - breaks[-2]) < 1e-15

    proto = BumpProfile(w, tuple(breaks), tuple(coeffs), C3=np.inf, C4=np.inf)
    xs = np.union1d(np.linspace(0.0, SUPPORT_RADIUS, n_grid), np.array(breaks))
    b0, b1, b2 = proto(xs), proto(xs, 1), proto(xs, 2)
    tol = 1e-10
    if np.any(b2 < -8.0 - tol):
        raise ConstraintViolation("b'' < -8 on the grid")
    if np.any(b1 > tol) or np.any(np.diff(b0) > tol):
        raise ConstraintViolation("b is not decreasing on [0, 3/4]")
    if np.any(b0 < -tol):
        raise ConstraintViolation("b takes negative values")
    return BumpProfile(w, tuple(breaks), tuple(coeffs), C3=float(np.max(np.abs(b1))),
                       C4=float(np.max(b2)))


# ---------------------------------------------------------------------------
# parameter schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamSchedule:
    """Constants of the construction: ``a_n = a0 gamma^n``, ``p_n = p0 delta^n``.

    ``B = C2/4`` and ``a0 = B p0^2`` so that ``a_n / p_n^2 = B A^n`` with
    ``A = gamma / delta^2``.
    """

    eps: float
    C1: float
    C2: float
    C4: float
    gamma: float
    delta: float
    p0: float
    a0: float
    B: float

    @property
    def A(self):
        return self.gamma / self.delta**2

    def a(self, n):
        return self.a0 * self.gamma ** np.asarray(n, dtype=float)

    def p(self, n):
        return self.p0 * self.delta ** np.asarray(n, dtype=float)

    def sup_bound(self):
        return self.a0 / (1.0 - self.gamma)

    def tail_bound(self, depth):
        """Sup-norm bound of ``F - F_depth``."""
        return self.a0 * self.gamma ** (depth + 1) / (1.0 - self.gamma)

    def check(self, n_max=12):
        """Evaluate the five schedule invariants as exact inequalities."""
        n = np.arange(n_max + 1)
        lhs = self.a(n) / self.p(n) ** 2
        rhs = self.B * self.A**n
        return {
            "geom": bool(self.a0 == self.B * self.p0**2
                         and np.allclose(lhs, rhs, rtol=1e-12, atol=0.0)),
            "condA": bool(self.A > 1.0 + self.C4 / 4.0),
            "condc1": bool(self.gamma / self.delta < 1.0),
            "holder": bool(self.gamma * self.delta ** (-2.0 + self.eps) <= 1.0),
            "supnorm": bool(self.a0 / (1.0 - self.gamma) < self.C1),
        }

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("eps", "C1", "C2", "C4", "gamma", "delta", "p0", "a0", "B")}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: serialization.parse_real(v) for k, v in d.items()})


def _log_grid(hi, lo_exp, step=0.01):
    return 10.0 ** np.arange(np.log10(hi), lo_exp, -step)


def solve_parameters(eps, C1, C2, profile, p0_start=0.45, shrink=0.9):
    """Pick ``(gamma, delta, p0)`` meeting every schedule invariant.

    ``delta`` is the largest point of a log-spaced grid (0.01 decades) for
    which some grid ``gamma`` satisfies ``gamma delta^-2 > 1 + C4/4`` and
    ``gamma delta^(eps-2) <= 1``; ``gamma`` is the log-midpoint of the
    feasible grid values.  ``p0`` starts at ``p0_start`` and is shrunk until
    ``a0/(1-gamma) < C1``.
    """
    eps, C1, C2 = float(eps), float(C1), float(C2)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if C1 <= 0 or C2 <= 0:
        raise ValueError("C1 and C2 must be positive")
    C4 = float(profile.C4)
    q = 1.0 + C4 / 4.0
    # the two-sided gamma window is non-empty iff delta < q^(-1/eps)
    lo_exp = min(-12.0, -1.2 * np.log10(q) / eps - 2.0)
    if lo_exp < -300:
        raise Infeasible(f"eps={eps} needs delta below double-precision range")
    for delta in _log_grid(0.49, lo_exp):
        glo, ghi = q * delta**2, delta ** (2.0 - eps)
        if not glo < ghi:
            continue
        gammas = _log_grid(min(ghi, 0.999), np.log10(glo) - 0.01)
        ok = (gammas / delta**2 > q) & (gammas * delta ** (eps - 2.0) <= 1.0) \
            & (gammas / delta < 1.0) & (gammas < 1.0)
        if not np.any(ok):
            continue
        cand = gammas[ok]
        gamma = float(cand[len(cand) // 2])
        break
    else:
        raise Infeasible(f"no (gamma, delta) on the search grid for eps={eps}, C4={C4}")

    B = C2 / 4.0
    p0 = p0_start
    while B * p0**2 / (1.0 - gamma) >= C1:
        p0 *= shrink
        if p0 < 1e-150:
            raise Infeasible("p0 underflow while meeting the sup-norm bound")
    sched = ParamSchedule(eps=eps, C1=C1, C2=C2, C4=C4, gamma=gamma, delta=float(delta),
                          p0=p0, a0=B * p0**2, B=B)
    bad = [k for k, v in sched.check().items() if not v]
    if bad:
        raise Infeasible(f"solved schedule violates {bad}")
    return sched


# ---------------------------------------------------------------------------
# interval tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalTree:
    """Nested open intervals ``I_{n,i}`` with plateaus ``J_{n,i}``.

    ``left[n]``/``right[n]`` hold the ``2^n`` endpoints at level ``n`` in
    increasing order; the plateau of ``I_{n,i}`` is
    ``[c_{n,i} - p_n/4, c_{n,i} + p_n/4]``.
    """

    depth: int
    p: Tuple[float, ...]
    left: Tuple[np.ndarray, ...] = field(repr=False)
    right: Tuple[np.ndarray, ...] = field(repr=False)

    def centers(self, n):
        return 0.5 * (self.left[n] + self.right[n])

    def lengths(self):
        return np.array([self.right[n][0] - self.left[n][0] for n in range(self.depth + 1)])

    def plateau(self, n):
        c = self.centers(n)
        return c - self.p[n] / 4.0, c + self.p[n] / 4.0

    def descend(self, x):
        """Index of the level-``n`` interval on the root-to-leaf path of ``x``.

        Returns an integer array of shape ``(depth+1,) + x.shape``.  For ``x``
        outside every interval of a level the index is that of a neighbour;
        bumps of that level vanish at ``x`` in that case.
        """
        x = np.asarray(x, dtype=float)
        idx = np.zeros((self.depth + 1,) + x.shape, dtype=np.int64)
        cur = np.zeros(x.shape, dtype=np.int64)
        for n in range(self.depth + 1):
            idx[n] = cur
            if n < self.depth:
                c = self.centers(n)[cur]
                cur = 2 * cur + (x > c)
        return idx

    def to_dict(self):
        return {
            "depth": self.depth,
            "p": list(self.p),
            "levels": [{"left": self.left[n], "right": self.right[n]}
                       for n in range(self.depth + 1)],
        }


def build_interval_tree(schedule, depth):
    """Split ``(-1, 1)`` recursively by removing the plateau of each interval.

    The children of ``I_{n,i}`` are the two components of
    ``I_{n,i} \\ J_{n,i}``.

    Raises
    ------
    ConstraintViolation
        If ``p_n < |I_{n,i}|/2`` fails at some level.
    """
    depth = int(depth)
    if depth < 0:
        raise ValueError("depth must be non-negative")
    left, right, ps = [np.array([-1.0])], [np.array([1.0])], []
    for n in range(depth + 1):
        pn = float(schedule.p(n))
        ps.append(pn)
        length = right[n][0] - left[n][0]
        if not pn < length / 2.0:
            raise ConstraintViolation(f"condpn fails at level {n}: p_n={pn}, |I|={length}")
        if n == depth:
            break
        c = 0.5 * (left[n] + right[n])
        lo = np.empty(2 * len(c))
        hi = np.empty(2 * len(c))
        lo[0::2], hi[0::2] = left[n], c - pn / 4.0
        lo[1::2], hi[1::2] = c + pn / 4.0, right[n]
        left.append(lo)
        right.append(hi)
    return IntervalTree(depth, tuple(ps), tuple(left), tuple(right))


# ---------------------------------------------------------------------------
# the function F
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CantorBumpFn:
    profile: BumpProfile
    schedule: ParamSchedule
    tree: IntervalTree

    @property
    def depth(self):
        return self.tree.depth

    def _layers(self, x, nu, depth):
        """Per-level contributions ``f_n^(nu)(x)``, shape ``(depth+1,) + x.shape``."""
        x = np.asarray(x, dtype=float)
        depth = self.depth if depth is None else int(depth)
        if depth > self.depth:
            raise ValueError(f"depth {depth} exceeds the tree depth {self.depth}")
        idx = self.tree.descend(x)
        out = np.zeros((depth + 1,) + x.shape)
        inside = np.abs(x) < 1.0
        for n in range(depth + 1):
            c = self.tree.centers(n)[idx[n]]
            pn = self.tree.p[n]
            an = float(self.schedule.a(n))
            u = (x - c) / pn
            out[n] = np.where(inside, an / pn**nu * self.profile(u, nu), 0.0)
        return out

    def value(self, x, depth=None):
        return self._layers(x, 0, depth).sum(axis=0)

    def derivative(self, x, depth=None):
        """Exact ``F_depth'`` by layerwise differentiation."""
        return self._layers(x, 1, depth).sum(axis=0)

    def second_derivative(self, x, depth=None):
        """``F_depth''``; equals ``F''`` on plateaus of level ``<= depth``."""
        return self._layers(x, 2, depth).sum(axis=0)

    def plateau_level(self, x):
        """First level whose open plateau contains ``x``, else ``-1``."""
        x = np.asarray(x, dtype=float)
        idx = self.tree.descend(x)
        level = np.full(x.shape, -1, dtype=np.int64)
        for n in range(self.depth, -1, -1):
            c = self.tree.centers(n)[idx[n]]
            hit = (np.abs(x - c) < self.tree.p[n] / 4.0) & (np.abs(x) < 1.0)
            level = np.where(hit, n, level)
        return level


def construct_F(eps, C1, C2, depth=10, transition_width=0.5):
    """Build profile, schedule and tree in one call."""
    profile = build_base_bump(transition_width)
    schedule = solve_parameters(eps, C1, C2, profile)
    tree = build_interval_tree(schedule, depth)
    return CantorBumpFn(profile, schedule, tree)


def eval_F(fn, x, depth=None):
    """Return ``(F_depth(x), sup |F - F_depth|)``."""
    depth = fn.depth if depth is None else int(depth)
    val = fn.value(x, depth)
    if np.ndim(val) == 0:
        val = float(val)
    return val, fn.schedule.tail_bound(depth)


def eval_F_second_on_plateau(fn, x):
    """Exact ``F''(x)`` for ``x`` inside some plateau ``J_{n,i}``.

    Layers deeper than ``n`` vanish on ``J_{n,i}``, so the value
    ``F_n''(x)`` is exact.

    Raises
    ------
    NotOnPlateau
        If ``x`` lies in no open plateau up to the tree depth.
    """
    level = int(fn.plateau_level(np.asarray(float(x))))
    if level < 0:
        raise NotOnPlateau(f"x={x!r} lies in no plateau up to depth {fn.depth}")
    return float(fn.second_derivative(np.asarray(float(x)), depth=level))


def sample_pairs(n, seed, multiscale=True):
    """Seeded point pairs in ``[-1, 1]^2``.

    The draw is prefix-stable: the first ``m`` pairs of a size-``n`` sample
    equal a size-``m`` sample with the same seed.  With ``multiscale`` the
    separation ``|x - y|`` is log-uniform over ``[1e-12, 1]`` for odd rows,
    so that small scales are represented.
    """
    rng = np.random.default_rng(seed)
    u = rng.random((int(n), 3))
    x = 2.0 * u[:, 0] - 1.0
    y = 2.0 * u[:, 1] - 1.0
    if multiscale:
        sep = 10.0 ** (-12.0 * u[:, 2])
        odd = np.arange(len(x)) % 2 == 1
        y_ms = np.clip(x + np.where(u[:, 1] < 0.5, -sep, sep), -1.0, 1.0)
        y = np.where(odd, y_ms, y)
    return np.column_stack([x, y])


def holder_seminorm(fn, eps, pairs, depth=None, min_sep=1e-14):
    """Sampled ``max |F'(x) - F'(y)| / |x - y|^(1-eps)``.

    ``pairs`` is an ``(N, 2)`` array; pairs closer than ``min_sep`` are
    skipped.
    """
    pairs = np.asarray(pairs, dtype=float)
    d = np.abs(pairs[:, 0] - pairs[:, 1])
    keep = d >= min_sep
    if not np.any(keep):
        return 0.0
    fx = fn.derivative(pairs[keep, 0], depth)
    fy = fn.derivative(pairs[keep, 1], depth)
    return float(np.max(np.abs(fx - fy) / d[keep] ** (1.0 - eps)))


@dataclass(frozen=True)
class InOpenSetU:
    level: int


@dataclass(frozen=True)
class CantorCandidate:
    depth: int


def cantor_membership(tree, x):
    """Classify ``x`` as lying in a plateau interior or surviving all splits."""
    x = float(x)
    if not -1.0 <= x <= 1.0:
        raise ValueError("x must lie in [-1, 1]")
    idx = tree.descend(np.asarray(x))
    for n in range(tree.depth + 1):
        c = tree.centers(n)[idx[n]]
        if abs(x - c) < tree.p[n] / 4.0 and abs(x) < 1.0:
            return InOpenSetU(n)
    return CantorCandidate(tree.depth)


# ---------------------------------------------------------------------------
# serialisation and tabulation
# ---------------------------------------------------------------------------

def to_json(fn):
    return serialization.dumps({
        "profile": fn.profile.to_dict(),
        "schedule": fn.schedule.to_dict(),
        "tree": fn.tree.to_dict(),
    })


def from_json(text):
    import json

    d = json.loads(text)
    pr = d["profile"]
    profile = BumpProfile(
        transition_width=float(pr["transition_width"]),
        breaks=tuple(float(v) for v in pr["breaks"]),
        coeffs=tuple(tuple(float(v) for v in c) for c in pr["coeffs"]),
        C3=float(pr["C3"]), C4=float(pr["C4"]),
    )
    schedule = ParamSchedule.from_dict(d["schedule"])
    tr = d["tree"]
    tree = IntervalTree(
        depth=int(tr["depth"]),
        p=tuple(float(v) for v in tr["p"]),
        left=tuple(np.array([float(v) for v in lv["left"]]) for lv in tr["levels"]),
        right=tuple(np.array([float(v) for v in lv["right"]]) for lv in tr["levels"]),
    )
    return CantorBumpFn(profile, schedule, tree)


def profile_table(fn, n_points=2001):
    """Rows ``(x, F, F', F'' or nan)`` on a uniform grid of ``[-1, 1]``.

    ``F''`` is reported only on plateau interiors, where it exists.
    """
    x = np.linspace(-1.0, 1.0, n_points)
    F = fn.value(x)
    dF = fn.derivative(x)
    lev = fn.plateau_level(x)
    d2 = np.full_like(x, np.nan)
    for n in np.unique(lev[lev >= 0]):
        m = lev == n
        d2[m] = fn.second_derivative(x[m], depth=int(n))
    return np.column_stack([x, F, dF, d2])


def mp_value(fn, x, dps=50):
    """``F_depth(x)`` in mpmath at ``dps`` digits (scalar ``x``)."""
    import mpmath as mp

    with mp.workdps(dps):
        x = mp.mpf(x)
        xf = float(x)
        total = mp.mpf(0)
        for n in range(fn.depth + 1):
            cs = fn.tree.centers(n)
            j = int(np.searchsorted(cs, xf))
            pn = mp.mpf(fn.tree.p[n])
            an = mp.mpf(fn.schedule.a0) * mp.mpf(fn.schedule.gamma) ** n
            for k in (j - 1, j):
                if 0 <= k < len(cs):
                    u = (x - mp.mpf(float(cs[k]))) / pn
                    if abs(u) < 1:
                        total += an * fn.profile.generic(u)
        return total


def mp_second_difference(fn, x, h, dps=50):
    """Central second difference of :func:`mp_value`, returned as a float."""
    import mpmath as mp

    with mp.workdps(dps):
        x, h = mp.mpf(x), mp.mpf(h)
        d = (mp_value(fn, x + h, dps) - 2 * mp_value(fn, x, dps) + mp_value(fn, x - h, dps)) / h**2
        return float(d)

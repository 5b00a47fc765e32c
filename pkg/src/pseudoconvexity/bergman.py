"""Diagonal Bergman kernels: exact series on model domains, Monte-Carlo Gram elsewhere.

The Monte-Carlo estimate uses the extremal characterisation

    K_D(z) = sup { |f(z)|^2 / ||f||^2 : f in span(basis) },

which over a finite span equals ``v^H G^{-1} v`` with ``G`` the Gram matrix
of the basis in ``L^2(D)`` and ``v`` the conjugated basis values at ``z``.
It is a lower bound for the true kernel, up to sampling error.
"""
import hashlib
import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .domains import DomainSpec
from .errors import OutsideDomain, SingularGram

SERIES_RTOL = 1e-14
N_BATCHES = 10
GRAM_EPS = 1e-10
COND_MAX = 1e12


class Method(str, Enum):
    SERIES = "series"
    MONTE_CARLO = "monte-carlo-gram"


@dataclass(frozen=True)
class KernelEstimate:
    point: tuple
    value: float
    method: Method
    truncation: str
    samples: int = 0
    stderr: float = 0.0

    def to_dict(self):
        return {"point": [complex(p) for p in self.point], "value": self.value,
                "method": self.method.value, "truncation": self.truncation,
                "samples": self.samples, "stderr": self.stderr}


# ---------------------------------------------------------------------------
# series oracles

def _series_sum(terms_fn, start=0, max_terms=10_000_000):
    """Sum positive terms until a geometric bound on the tail is below the tolerance."""
    total = 0.0
    k = start
    prev = None
    while k < start + max_terms:
        t = terms_fn(k)
        total += t
        if prev is not None and prev > 0:
            ratio = t / prev
            if ratio < 1 and t * ratio / (1 - ratio) < SERIES_RTOL * total:
                return total, k - start + 1
        prev = t
        k += 1
    return total, max_terms


def disc_kernel(z, R=1.0, max_degree=None):
    """``sum_k |z|^{2k} (k+1) / (pi R^{2k+2})``.

    With ``max_degree`` the series stops at that power (the kernel of the
    span of ``1, w, ..., w^max_degree``); otherwise at relative tail ``1e-14``.
    """
    a = abs(complex(z))
    if a >= R:
        raise OutsideDomain(f"|z| = {a} outside the disc of radius {R}")
    q = (a / R) ** 2

    def term(k):
        return q**k * (k + 1) / (np.pi * R**2)

    if max_degree is not None:
        return float(sum(term(k) for k in range(max_degree + 1)))
    return float(_series_sum(term)[0])


def annulus_norm2(k, r_in=0.5, r_out=1.5):
    """``||w^k||^2`` on ``r_in < |w| < r_out``."""
    if k == -1:
        return 2.0 * np.pi * np.log(r_out / r_in)
    return np.pi * (r_out ** (2 * k + 2) - r_in ** (2 * k + 2)) / (k + 1)


def annulus_kernel(z, r_in=0.5, r_out=1.5, k_range=None):
    """``sum_{k in Z} |z|^{2k} / ||w^k||^2`` with symmetric truncation."""
    a = abs(complex(z))
    if not r_in < a < r_out:
        raise OutsideDomain(f"|z| = {a} outside the annulus ({r_in}, {r_out})")

    def term(k):
        return a ** (2 * k) / annulus_norm2(k, r_in, r_out)

    if k_range is not None:
        return float(sum(term(k) for k in range(k_range[0], k_range[1] + 1)))
    pos, _ = _series_sum(term, 0)
    neg, _ = _series_sum(lambda j: term(-j), 1)
    return float(pos + neg)


def product_kernel(k_a, k_b):
    return float(k_a) * float(k_b)


# ---------------------------------------------------------------------------
# basis families

@dataclass(frozen=True)
class BasisFamily:
    """Monomials ``prod_j (z_j - c_j)^{k_j}``, optionally cut to a support.

    Parameters
    ----------
    exponents : tuple of tuples
        One exponent tuple per basis function; negative entries allowed.
    center : tuple of complex
        Expansion point ``c``.
    support : callable, optional
        Indicator multiplying every basis function; sampling is then
        restricted to ``support_bbox``.
    """

    exponents: tuple
    center: tuple
    support: Optional[Callable] = None
    support_bbox: Optional[tuple] = None
    label: str = ""

    @classmethod
    def monomials(cls, dim, max_deg, min_deg=None, center=None, support=None,
                  support_bbox=None, label=""):
        max_deg = (max_deg,) * dim if np.isscalar(max_deg) else tuple(max_deg)
        min_deg = (0,) * dim if min_deg is None else tuple(min_deg)
        ranges = [range(lo, hi + 1) for lo, hi in zip(min_deg, max_deg)]
        exps = tuple(itertools.product(*ranges))
        center = (0j,) * dim if center is None else tuple(complex(c) for c in center)
        if support_bbox is not None:
            support_bbox = tuple(map(tuple, np.asarray(support_bbox, float)))
        label = label or f"monomials{min_deg}..{max_deg}@{center}" + ("+support" if support else "")
        return cls(exps, center, support, support_bbox, label)

    @property
    def size(self):
        return len(self.exponents)

    @property
    def dim(self):
        return len(self.center)

    def __call__(self, Z):
        """Values, shape ``(N, size)``."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex)) - np.asarray(self.center)
        E = np.asarray(self.exponents)
        out = np.ones((Z.shape[0], len(E)), dtype=complex)
        for j in range(Z.shape[1]):
            ks = E[:, j]
            kmin, kmax = ks.min(), ks.max()
            powers = {k: Z[:, j] ** k for k in range(kmin, kmax + 1)} if kmin < 0 else None
            if powers is None:
                pw = np.cumprod(np.column_stack([np.ones(len(Z))] + [Z[:, j]] * kmax), axis=1) \
                    if kmax > 0 else np.ones((len(Z), 1), dtype=complex)
                out *= pw[:, ks]
            else:
                out *= np.column_stack([powers[k] for k in ks])
        if self.support is not None:
            out *= np.asarray(self.support(Z + np.asarray(self.center)), dtype=float)[:, None]
        return out

    def cache_key(self):
        return {"label": self.label, "n": self.size, "center": [repr(c) for c in self.center],
                "exponents_sha": hashlib.sha256(repr(self.exponents).encode()).hexdigest()[:16],
                "support_bbox": self.support_bbox,
                "support": None if self.support is None else
                f"{getattr(self.support, '__module__', '')}.{getattr(self.support, '__qualname__', repr(self.support))}"}


def disc_norms(basis: BasisFamily, R=1.0):
    """Closed-form ``||w^k||^2`` on the disc of radius ``R`` (centred basis only)."""
    return np.array([np.pi * R ** (2 * k[0] + 2) / (k[0] + 1) for k in basis.exponents])


# ---------------------------------------------------------------------------
# Monte-Carlo Gram

@dataclass
class GramData:
    """Per-batch sums ``A^H A`` with acceptance counts.

    ``G = (volume / accepted) * sum_b grams[b]`` where ``volume`` is the
    sampling box volume times the acceptance ratio.
    """

    grams: np.ndarray        # (batches, m, m)
    accepted: np.ndarray     # (batches,)
    drawn: np.ndarray        # (batches,)
    box_volume: float

    def gram(self, batches=None):
        sel = slice(None) if batches is None else batches
        acc = self.accepted[sel].sum()
        vol = self.box_volume * acc / self.drawn[sel].sum()
        return self.grams[sel].sum(axis=0) * (vol / acc), vol


def _sampling_box(dom: DomainSpec, basis: BasisFamily):
    if basis.support_bbox is not None:
        return np.asarray(basis.support_bbox, dtype=float)
    return dom.bbox


def _indicator(dom, basis):
    if basis.support is None:
        return dom.contains
    return lambda Z: dom.contains(Z) & np.asarray(basis.support(Z), dtype=bool)


def mc_gram(dom: DomainSpec, basis: BasisFamily, samples, seed, n_batches=N_BATCHES,
            chunk=20000):
    """Assemble the batched Monte-Carlo Gram data.

    Each batch draws uniform points from the sampling box until it has
    ``samples // n_batches`` accepted points; batch seeds are spawned from
    ``seed`` so results do not depend on evaluation order.
    """
    if samples < 1000:
        raise ValueError("at least 10^3 samples are required")
    box = _sampling_box(dom, basis)
    lo, hi = box[:, 0], box[:, 1]
    inside = _indicator(dom, basis)
    per = samples // n_batches
    m = basis.size
    grams = np.zeros((n_batches, m, m), dtype=complex)
    acc = np.zeros(n_batches, dtype=np.int64)
    drawn = np.zeros(n_batches, dtype=np.int64)
    for b, ss in enumerate(np.random.SeedSequence(seed).spawn(n_batches)):
        rng = np.random.default_rng(ss)
        need = per
        while need > 0:
            X = lo + (hi - lo) * rng.random((chunk, len(lo)))
            Z = X[:, 0::2] + 1j * X[:, 1::2]
            ok = inside(Z)
            idx = np.nonzero(ok)[0]
            if len(idx) > need:
                # count draws only up to the last accepted point kept
                idx = idx[:need]
                drawn[b] += idx[-1] + 1
            else:
                drawn[b] += chunk
            if len(idx):
                A = basis(Z[idx])
                grams[b] += A.conj().T @ A
            need -= len(idx)
            acc[b] += len(idx)
    return GramData(grams, acc, drawn, float(np.prod(hi - lo)))


def _kernel_from_gram(G, v, eps=GRAM_EPS, cond_max=COND_MAX):
    d = np.sqrt(np.maximum(np.real(np.diag(G)), 1e-300))
    Gn = G / np.outer(d, d)
    Gn = 0.5 * (Gn + Gn.conj().T) + eps * np.eye(len(d))
    w = np.linalg.eigvalsh(Gn)
    if w[0] <= 0 or w[-1] / w[0] > cond_max:
        raise SingularGram(f"Gram condition number {w[-1] / max(w[0], 1e-300):.3e} exceeds {cond_max:.1e}")
    u = np.conj(v) / d
    c = cho_factor(Gn, lower=True)
    return float(np.real(np.vdot(u, cho_solve(c, u))))


class GramKernel:
    """Kernel estimates at many points from one sampled Gram matrix."""

    def __init__(self, dom, basis, samples, seed, gram_data=None):
        self.dom, self.basis, self.samples, self.seed = dom, basis, int(samples), seed
        self.data = gram_data if gram_data is not None else mc_gram(dom, basis, samples, seed)
        self.G, self.volume = self.data.gram()
        nb = len(self.data.accepted)
        self._batch = [self.data.gram([b]) for b in range(nb)]

    def __call__(self, point):
        point = np.asarray(point, dtype=complex).reshape(self.dom.dim)
        if not self.dom.member(point):
            raise OutsideDomain(f"{point} is not in {self.dom.name}")
        v = self.basis(point[None, :])[0]
        value = _kernel_from_gram(self.G, v)
        subs = np.array([_kernel_from_gram(Gb, v) for Gb, _ in self._batch])
        stderr = float(subs.std(ddof=1) / np.sqrt(len(subs)))
        return KernelEstimate(tuple(point.tolist()), value, Method.MONTE_CARLO,
                              self.basis.label, self.samples, stderr)


def mc_gram_kernel(dom: DomainSpec, basis: BasisFamily, point, samples=100_000, seed=0):
    """One-point Monte-Carlo Gram estimate of the diagonal kernel."""
    return GramKernel(dom, basis, samples, seed)(point)


def series_estimate(point, value, truncation="tail<1e-14"):
    return KernelEstimate(tuple(np.atleast_1d(np.asarray(point, complex)).tolist()),
                          float(value), Method.SERIES, truncation)


# ---------------------------------------------------------------------------
# blow-up scans

class Verdict(str, Enum):
    BLOWUP = "Blowup"
    BOUNDED = "Bounded"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ScanReport:
    t: np.ndarray
    estimates: list
    verdict: Verdict

    @property
    def values(self):
        return np.array([e.value for e in self.estimates])

    @property
    def stderrs(self):
        return np.array([e.stderr for e in self.estimates])

    def rows(self):
        return [(float(t), e.value, e.stderr, e.method.value) for t, e in zip(self.t, self.estimates)]


def scan_verdict(values):
    v = np.asarray(values, dtype=float)
    if len(v) >= 3 and v[-1] > v[-2] > v[-3] and v[-1] > 10.0 * v[0]:
        return Verdict.BLOWUP
    if np.all(v <= 2.0 * v[0]) and np.all(v >= 0.5 * v[0]):
        return Verdict.BOUNDED
    return Verdict.INCONCLUSIVE


def ray(start, end):
    start = np.asarray(start, dtype=complex)
    end = np.asarray(end, dtype=complex)
    return lambda t: start + t * (end - start)


def blowup_scan(path, estimator, steps=8):
    """Estimate the kernel at ``path(1 - 2^-j)``, ``j = 1..steps``.

    ``estimator`` maps a point to a :class:`KernelEstimate` (for instance a
    :class:`GramKernel` or a series oracle wrapper).
    """
    t = 1.0 - 2.0 ** -np.arange(1, steps + 1)
    ests = [estimator(path(ti)) for ti in t]
    return ScanReport(t, ests, scan_verdict([e.value for e in ests]))


# ---------------------------------------------------------------------------
# convexity

@dataclass
class ConvexityResult:
    passed: bool
    pairs: int
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.passed


def sample_domain(dom: DomainSpec, n, rng, chunk=20000):
    lo, hi = dom.bbox[:, 0], dom.bbox[:, 1]
    out = []
    got = 0
    while got < n:
        X = lo + (hi - lo) * rng.random((chunk, len(lo)))
        Z = X[:, 0::2] + 1j * X[:, 1::2]
        Z = Z[dom.contains(Z)]
        out.append(Z)
        got += len(Z)
    return np.concatenate(out)[:n]


def convexity_check(region: DomainSpec, pairs=10_000, seed=0, ts=(0.25, 0.5, 0.75)):
    """Test sampled segments: every ``p + t (q - p)`` must stay in the region."""
    rng = np.random.default_rng(seed)
    P = sample_domain(region, pairs, rng)
    Q = sample_domain(region, pairs, rng)
    for t in ts:
        M = P + t * (Q - P)
        ok = region.contains(M)
        if not np.all(ok):
            i = int(np.argmin(ok))
            return ConvexityResult(False, pairs, (P[i], Q[i], t))
    return ConvexityResult(True, pairs)

"""Config-driven pipelines and their on-disk artifacts.

Each pipeline runs its stages in order, writes its tables and JSON files
into ``config.out_dir`` and returns a :class:`VerificationReport` holding
the acceptance claims that the pipeline exercises.

Written files
-------------
construct-f
    ``F.json`` (profile, schedule and interval tree) and ``F_profile.csv``
    with columns ``x,F,dF,d2F`` (``d2F`` empty off plateaus).
classify-boundary
    ``map.csv`` with columns ``x,y,laplacian,class`` and ``map_summary.json``.
bergman-scan
    ``scan_inside.csv`` and ``scan_outside.csv`` with columns
    ``t,estimate,stderr,method`` plus ``scan_verdict.json``.
witness
    ``trace.json`` (per-level greedy trace).
verify-all
    ``report.json`` and ``report.txt``.
"""
import csv
import json
from pathlib import Path

import numpy as np

from . import serialization, verification as V
from .bergman import (
    BasisFamily, annulus_kernel, blowup_scan, disc_kernel, ray, series_estimate,
)
from .cache import cached_gram
from .cantor_bump import construct_F, profile_table, to_json as f_to_json
from .config import PipelineConfig
from .domains import annulus, ball, build_slit_domain, disc, from_hartogs, in_d1, product
from .errors import ConfigError, DomainError
from .hartogs import build_hartogs_domains, scan_boundary
from .levi import ball_defining, hartogs_defining, quadric_defining
from .witness import greedy_unbounded_witness

PIPELINES = ("construct-f", "classify-boundary", "bergman-scan", "witness", "verify-all")

# claims exercised by each pipeline
_CLAIMS = {
    "construct-f": (1, 2, 3),
    "classify-boundary": (4,),
    "bergman-scan": (6, 7, 8),
    "witness": (9, 10),
}


# ---------------------------------------------------------------------------
# domain specs

def parse_complex_list(text):
    """``"1+0.5j, 0"`` -> complex array.  ``i`` is accepted for ``j``."""
    try:
        return np.array([complex(s.strip().replace(" ", "").replace("i", "j"))
                         for s in text.split(",")], dtype=complex)
    except ValueError as exc:
        raise DomainError(f"cannot parse complex vector {text!r}") from exc


def domain_from_spec(spec):
    """Build a :class:`DomainSpec` from a name or a JSON-like mapping.

    Recognised kinds: ``disc`` (``R``), ``annulus`` (``r_in``, ``r_out``),
    ``ball`` (``n``, ``R``), ``product`` (``factors``: list of specs),
    ``slit`` and ``hartogs`` (``r0``, ``eps``, ``depth``, ``variant`` D or D0).
    """
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    if kind == "disc":
        return disc(float(spec.get("R", 1.0)))
    if kind == "annulus":
        return annulus(float(spec.get("r_in", 0.5)), float(spec.get("r_out", 1.5)))
    if kind == "ball":
        return ball(int(spec.get("n", 2)), float(spec.get("R", 1.0)))
    if kind == "product":
        factors = spec.get("factors", [{"kind": "annulus"}, {"kind": "disc"}])
        return product(*[domain_from_spec(f) for f in factors])
    if kind == "slit":
        return build_slit_domain()
    if kind == "hartogs":
        return from_hartogs(_hartogs(spec))
    raise DomainError(f"unknown domain kind {kind!r}")


def _hartogs(spec):
    d0, d = build_hartogs_domains(float(spec.get("r0", 0.3)), float(spec.get("eps", 0.5)),
                                int(spec.get("depth", 10)))
    variant = spec.get("variant", "D")
    if variant not in ("D", "D0"):
        raise DomainError(f"hartogs variant must be D or D0, got {variant!r}")
    return d if variant == "D" else d0


def defining_from_spec(spec):
    """Defining function for ``ball`` (unit radius), ``quadric`` or ``hartogs`` specs."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    if kind == "ball":
        if float(spec.get("R", 1.0)) != 1.0:
            raise DomainError("levi probes support the unit ball only")
        return ball_defining(int(spec.get("n", 2)))
    if kind == "quadric":
        H = np.array(spec["H"], dtype=complex)
        Q = np.array(spec.get("Q", np.zeros_like(H)), dtype=complex)
        return quadric_defining(H, Q, float(spec.get("c", -1.0)))
    if kind == "hartogs":
        return hartogs_defining(_hartogs(spec).field)
    raise DomainError(f"no defining function for domain kind {kind!r}")


def load_spec(text):
    """A domain name or the path of a JSON spec file."""
    p = Path(text)
    if p.suffix == ".json" or p.exists():
        return json.loads(p.read_text())
    return {"kind": text}


# ---------------------------------------------------------------------------
# writers (single writer per output directory)

def _out(cfg):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if isinstance(v, float) and np.isnan(v) else
                        (serialization.fmt_real(v) if isinstance(v, float) else v) for v in row])


def write_json(path, obj):
    Path(path).write_text(serialization.dumps(obj) + "\n")


def write_report(report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "report.txt").write_text(report.to_text())


# ---------------------------------------------------------------------------
# stages

def construct_f_stage(cfg, out):
    fn = construct_F(cfg.eps, cfg.C1, cfg.C2, cfg.depth)
    (out / "F.json").write_text(f_to_json(fn) + "\n")
    table = profile_table(fn)
    write_csv(out / "F_profile.csv", ("x", "F", "dF", "d2F"),
              ([float(v) for v in row] for row in table))
    return fn


def classify_stage(cfg, out):
    _, d = build_hartogs_domains(cfg.r0, cfg.eps, cfg.depth)
    cmap = scan_boundary(d.field, n=cfg.grid)
    write_csv(out / "map.csv", ("x", "y", "laplacian", "class"), cmap.rows())
    write_json(out / "map_summary.json", {**cmap.summary(), "r0": cfg.r0})
    return cmap


def bergman_stage(cfg, out):
    inside, outside = V.slit_scans(cfg)
    header = ("t", "estimate", "stderr", "method")
    write_csv(out / "scan_inside.csv", header, inside.rows())
    write_csv(out / "scan_outside.csv", header, outside.rows())
    write_json(out / "scan_verdict.json", {"inside": inside.verdict.value,
                                           "outside": outside.verdict.value,
                                           "target": list(V.SLIT_POINT)})
    return inside, outside


def witness_stage(cfg, out):
    seed = V.sub_seed(cfg.seed, 10)
    D = build_slit_domain()
    B = BasisFamily.monomials(2, (cfg.greedy_degree, cfg.greedy_degree), center=V.INSIDE_CENTER,
                              support=in_d1, support_bbox=V.D1_BOX)
    gk = cached_gram(D, B, cfg.mc_samples, seed, cfg.cache_dir)
    _, trace = greedy_unbounded_witness(D, gk, np.array(V.SLIT_POINT), cfg.greedy_levels,
                                        seed=seed, strict=False)
    write_json(out / "trace.json", trace.to_dict())
    return trace


def run_pipeline(config: PipelineConfig, pipeline: str):
    """Run one pipeline; artifacts go to ``config.out_dir``.

    Raises
    ------
    ConfigError
        For an unknown pipeline name.
    """
    if pipeline not in PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}; choose from {PIPELINES}")
    out = _out(config)
    if pipeline == "verify-all":
        report = V.verify_all(config)
        write_report(report, out)
        return report
    stage = {"construct-f": construct_f_stage, "classify-boundary": classify_stage,
             "bergman-scan": bergman_stage, "witness": witness_stage}[pipeline]
    stage(config, out)
    report = V.VerificationReport(config, V.run_criteria(config, set(_CLAIMS[pipeline])))
    write_report(report, out)
    return report


# ---------------------------------------------------------------------------
# ad hoc scans for the CLI

def generic_scan(dom_spec, start, end, basis_deg, samples, seed, steps=8, cache_dir=None):
    """Kernel scan along the segment ``start -> end``.

    Model domains (disc, annulus, annulus x disc) are answered by their
    series oracles; everything else by a Monte-Carlo Gram kernel over
    monomials of total bidegree ``basis_deg``.
    """
    kind = dom_spec.get("kind")
    path = ray(start, end)
    if kind == "disc" and len(start) == 1:
        R = float(dom_spec.get("R", 1.0))
        est = lambda z: series_estimate(z, disc_kernel(z[0], R))  # noqa: E731
    elif kind == "annulus" and len(start) == 1:
        ri, ro = float(dom_spec.get("r_in", 0.5)), float(dom_spec.get("r_out", 1.5))
        est = lambda z: series_estimate(z, annulus_kernel(z[0], ri, ro))  # noqa: E731
    else:
        dom = domain_from_spec(dom_spec)
        if len(start) != dom.dim:
            raise DomainError(f"path lives in C^{len(start)} but the domain in C^{dom.dim}")
        # an annulus factor (first coordinate) needs negative powers
        lo = None
        if kind in ("annulus", "product"):
            lo = (-basis_deg[0],) + (0,) * (len(basis_deg) - 1)
        B = BasisFamily.monomials(dom.dim, tuple(basis_deg), lo)
        est = cached_gram(dom, B, samples, seed, cache_dir)
    return blowup_scan(path, est, steps=steps)


__all__ = ["PIPELINES", "run_pipeline", "domain_from_spec", "defining_from_spec", "load_spec",
           "parse_complex_list", "generic_scan", "write_csv", "write_json", "write_report"]

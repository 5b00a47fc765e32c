"""Command line interface: ``python3 -m pseudoconvexity <subcommand> ...``.

Every subcommand accepts ``--config``, ``--seed``, ``--out`` and ``--cache``.
A seed must come from ``--seed`` or the config file.  The cache directory
may also be set through ``PSCX_CACHE_DIR``, which takes precedence.

Exit status is 0 on success, 1 when ``--strict`` is given and a claim
fails, and 2 on invalid input.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from . import pipeline as P
from . import serialization
from .bergman import BasisFamily
from .cache import cached_gram
from .config import PipelineConfig
from .domains import build_slit_domain, in_d1
from .errors import ConfigError, PseudoconvexityError
from .levi import levi_disc, taylor_residual
from .verification import D1_BOX, INSIDE_CENTER, SLIT_POINT, sub_seed
from .witness import greedy_unbounded_witness


def _common(p):
    p.add_argument("--config", help="JSON config file (versioned schema)")
    p.add_argument("--seed", type=int, help="master seed (u64); overrides the config")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cache", help="Gram cache directory (PSCX_CACHE_DIR wins)")
    p.add_argument("--strict", action="store_true", help="exit 1 if any claim fails")


def build_parser():
    ap = argparse.ArgumentParser(prog="pseudoconvexity",
                                 description="Numerical checks for pseudoconvexity constructions.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct-f", help="solve the bump schedule and tabulate F")
    _common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--depth", type=int)

    p = sub.add_parser("classify-boundary", help="Levi sign map of the Hartogs domain")
    _common(p)
    p.add_argument("--r0", type=float)
    p.add_argument("--grid", type=int)

    p = sub.add_parser("levi-probe", help="Levi value, disc and residual table at a point")
    _common(p)
    p.add_argument("--domain", required=True, help="ball, hartogs or a JSON spec path")
    p.add_argument("--point", required=True, help="comma separated complex coordinates")
    p.add_argument("--direction", required=True, help="comma separated complex coordinates")
    p.add_argument("--radii", default="1e-3,1e-1,9", help="lo,hi,count (log spaced)")

    p = sub.add_parser("bergman-scan", help="kernel scan toward a boundary point")
    _common(p)
    p.add_argument("--domain", default="slit", help="disc, annulus, product, slit or spec.json")
    p.add_argument("--path", help="START:END, each a comma separated complex vector")
    p.add_argument("--basis-deg", help="comma separated degrees per coordinate")
    p.add_argument("--samples", type=int)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("witness", help="greedy square-integrable witness on the slit domain")
    _common(p)
    p.add_argument("--domain", default="slit", choices=["slit"])
    p.add_argument("--boundary-point", default="1+0.5j,0")
    p.add_argument("--levels", type=int)

    p = sub.add_parser("verify-all", help="run every acceptance claim and write the report")
    _common(p)
    return ap


def make_config(args, **overrides):
    """Config from ``--config`` and the command line; command line wins."""
    if args.config:
        cfg = PipelineConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
    elif args.seed is None:
        raise ConfigError("a seed is required: pass --seed or a config file")
    else:
        cfg = PipelineConfig(seed=args.seed)
    kw = {k: v for k, v in overrides.items() if v is not None}
    if args.out:
        kw["out_dir"] = args.out
    if args.cache:
        kw["cache_dir"] = args.cache
    return cfg.replace(**kw) if kw else cfg


def _file_target(args, suffix):
    """``--out name.suffix`` names the main output file; anything else is a directory.

    Returns the requested file path (or ``None``) and rewrites ``args.out`` to
    the directory that the pipeline should write into.
    """
    if args.out and args.out.endswith(suffix):
        target = Path(args.out)
        args.out = str(target.parent)
        return target
    return None


def _rename(cfg, produced, target, extra=()):
    """Move ``produced`` (and ``extra`` companions) to the name requested by ``--out``."""
    if target is None:
        return
    out = Path(cfg.out_dir)
    (out / produced).replace(target)
    for name, new_suffix in extra:
        (out / name).replace(target.with_name(target.stem + new_suffix))


def _finish(report, args):
    sys.stdout.write(report.to_text())
    return 1 if args.strict and not report.all_passed else 0


def cmd_construct_f(args):
    cfg = make_config(args, eps=args.eps, C1=args.c1, C2=args.c2, depth=args.depth)
    return _finish(P.run_pipeline(cfg, "construct-f"), args)


def cmd_classify(args):
    target = _file_target(args, ".csv")
    cfg = make_config(args, r0=args.r0, grid=args.grid)
    report = P.run_pipeline(cfg, "classify-boundary")
    _rename(cfg, "map.csv", target, [("map_summary.json", "_summary.json")])
    return _finish(report, args)


def cmd_levi_probe(args):
    make_config(args)  # enforces the seed contract; the probe itself is deterministic
    r = P.defining_from_spec(P.load_spec(args.domain))
    z = P.parse_complex_list(args.point)
    a = P.parse_complex_list(args.direction)
    lo, hi, n = args.radii.split(",")
    radii = np.logspace(np.log10(float(lo)), np.log10(float(hi)), int(n))
    disc = levi_disc(r, z, a)
    rep = taylor_residual(r, disc, radii)
    f = serialization.fmt_real
    out = sys.stdout
    out.write(f"# levi_form={f(rep.levi)}\n# pivot={disc.pivot}\n")
    out.write("# adjusted_direction=" + ";".join(f"{f(c.real)},{f(c.imag)}"
                                                  for c in disc.adjusted) + "\n")
    out.write(f"# b1={f(disc.b1.real)},{f(disc.b1.imag)}\n")
    out.write(f"# slope={'exact' if rep.exact else f(rep.slope)} intercept={f(rep.intercept)}\n")
    out.write("rho,residual,circle_mean\n")
    for rho, res, mean in rep.rows():
        out.write(f"{f(rho)},{f(res)},{f(np.real(mean))}\n")
    return 0


def cmd_bergman_scan(args):
    cfg = make_config(args, mc_samples=args.samples, scan_steps=args.steps)
    spec = P.load_spec(args.domain)
    if spec.get("kind") == "slit" and not args.path and not args.basis_deg:
        return _finish(P.run_pipeline(cfg, "bergman-scan"), args)
    if not args.path:
        raise ConfigError("--path START:END is required for this domain")
    start, end = (P.parse_complex_list(s) for s in args.path.split(":"))
    deg = tuple(int(d) for d in (args.basis_deg or "8").split(","))
    if len(deg) == 1:
        deg = deg * len(start)
    scan = P.generic_scan(spec, start, end, deg, cfg.mc_samples, cfg.seed, cfg.scan_steps,
                          cfg.cache_dir)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    P.write_csv(out / "scan.csv", ("t", "estimate", "stderr", "method"), scan.rows())
    P.write_json(out / "scan_verdict.json", {"domain": spec, "verdict": scan.verdict.value,
                                             "start": start, "end": end, "basis_deg": list(deg)})
    sys.stdout.write(f"verdict: {scan.verdict.value}\n")
    return 0


def cmd_witness(args):
    target = _file_target(args, ".json")
    cfg = make_config(args, greedy_levels=args.levels)
    a = P.parse_complex_list(args.boundary_point)
    if np.allclose(a, SLIT_POINT):
        report = P.run_pipeline(cfg, "witness")
        _rename(cfg, "trace.json", target)
        return _finish(report, args)
    seed = sub_seed(cfg.seed, 10)
    D = build_slit_domain()
    B = BasisFamily.monomials(2, (cfg.greedy_degree,) * 2, center=INSIDE_CENTER,
                              support=in_d1, support_bbox=D1_BOX)
    gk = cached_gram(D, B, cfg.mc_samples, seed, cfg.cache_dir)
    _, trace = greedy_unbounded_witness(D, gk, a, cfg.greedy_levels, seed=seed, strict=False)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    P.write_json(out / "trace.json", trace.to_dict())
    _rename(cfg, "trace.json", target)
    met = sum(lv.met for lv in trace.levels)
    sys.stdout.write(f"levels met: {met}/{cfg.greedy_levels}\n")
    return 1 if args.strict and not trace.all_met else 0


def cmd_verify_all(args):
    return _finish(P.run_pipeline(make_config(args), "verify-all"), args)


COMMANDS = {"construct-f": cmd_construct_f, "classify-boundary": cmd_classify,
            "levi-probe": cmd_levi_probe, "bergman-scan": cmd_bergman_scan,
            "witness": cmd_witness, "verify-all": cmd_verify_all}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except PseudoconvexityError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

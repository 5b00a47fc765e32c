"""Levi sign counts of the Hartogs domains with and without the Cantor cap."""
from pseudoconvexity.hartogs import build_hartogs_domains, scan_boundary

d0, d = build_hartogs_domains(r0=0.3, eps=0.5, depth=10)
for name, dom in (("without cap", d0), ("with cap", d)):
    m = scan_boundary(dom.field, n=256)
    print(f"{name:12s} counts={m.counts()} dense_at_coarse={m.dense_at_coarse()}")

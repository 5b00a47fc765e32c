"""Greedy witness levels on the slit domain, met or not."""
import numpy as np

from pseudoconvexity.bergman import BasisFamily, GramKernel
from pseudoconvexity.domains import build_slit_domain, in_d1
from pseudoconvexity.verification import D1_BOX, INSIDE_CENTER, SLIT_POINT
from pseudoconvexity.witness import greedy_unbounded_witness

D = build_slit_domain()
B = BasisFamily.monomials(2, (10, 10), center=INSIDE_CENTER, support=in_d1, support_bbox=D1_BOX)
gk = GramKernel(D, B, 100_000, 0)
_, tr = greedy_unbounded_witness(D, gk, np.array(SLIT_POINT), levels=5, strict=False)
print(" k  dist        |g_k(z_k)|   target      |h(z_k)|   met")
for lv in tr.levels:
    print(f"{lv.k:2d}  {lv.dist:.3e}  {lv.g_at_z:10.4g}  {lv.target:10.4g}  {lv.h_at_z:9.4g}  {lv.met}")
print(f"MC norm of h: {tr.h_norm:.4g}")

"""Build F for a few eps values and report the schedule and plateau concavity."""
import numpy as np

from pseudoconvexity.cantor_bump import construct_F, eval_F_second_on_plateau

for eps in (0.1, 0.5, 0.9):
    fn = construct_F(eps, 1.0, 1.0, depth=10)
    s = fn.schedule
    x = np.linspace(-1, 1, 200_001)
    lo, hi = fn.tree.plateau(3)
    mid = 0.5 * (lo[0] + hi[0])
    print(f"eps={eps}: gamma={s.gamma:.4g} delta={s.delta:.4g} p0={s.p0:.4g} "
          f"sup|F|={np.abs(fn.value(x)).max():.4g} F''(level-3 plateau)={eval_F_second_on_plateau(fn, mid):.4g}")

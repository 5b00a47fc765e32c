"""Kernel estimates approaching a slit point from both sides."""
from pseudoconvexity.config import PipelineConfig
from pseudoconvexity.verification import slit_scans

inside, outside = slit_scans(PipelineConfig(seed=0))
print("t         inside      outside")
for (t, vi, _, _), (_, vo, _, _) in zip(inside.rows(), outside.rows()):
    print(f"{t:.6f}  {vi:10.4f}  {vo:10.4f}")
print("verdicts:", inside.verdict.value, "/", outside.verdict.value)

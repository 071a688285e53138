"""Shared fixtures: the benchmark parameter points of the study.

All five points share beta0 = 2.5, n = 2, k = 1.01 and differ in
(delta, r).  P1 and P1' sit on the stable-focus side of the Hopf curve,
P2 and P2' on the unstable side (one stable cycle), and P3 in the narrow
bistable wedge where an unstable cycle separates the equilibrium's basin
from a large stable cycle.
"""

import sys
from pathlib import Path

from bautin_dde.model import ModelParams

sys.path.insert(0, str(Path(__file__).parent))

DELTA_STAR = 0.0023073665
R_STAR = 5.301432998

BASE = ModelParams(beta0=2.5, n=2.0, delta=DELTA_STAR, k=1.01, r=R_STAR)

P1 = BASE.replace(delta=0.002, r=5.93)
P1_PRIME = BASE.replace(delta=0.0024, r=5.14)
P2 = BASE.replace(delta=0.0024, r=5.2)
P2_PRIME = BASE.replace(delta=0.0015, r=7.56)
P3 = BASE.replace(delta=0.0015, r=7.55)

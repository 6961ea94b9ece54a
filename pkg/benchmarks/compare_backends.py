"""Time the greedy Bowen kernel on both backends (numba vs pure numpy).

Each backend runs in a subprocess because the backend is fixed at import time
by PSEUDOSUSP_BACKEND.  Usage: python benchmarks/compare_backends.py
"""

from __future__ import annotations

import os
import subprocess
import sys

WORKLOAD = r"""
import time
import numpy as np
from pseudosusp import kernels
from pseudosusp.annulus import LiftedAnnulusMap, RigidRotation
from pseudosusp.cantor import FullShift
from pseudosusp.suspension import SuspensionSystem, _bowen_count

sys_ = SuspensionSystem(LiftedAnnulusMap((RigidRotation(1.0),)), FullShift(2), 32)
# warm-up (includes jit compilation on the numba path)
_bowen_count(sys_, 1/16, 12, 2000, 42)
best = float("inf")
for _ in range(3):
    t0 = time.perf_counter()
    count = _bowen_count(sys_, 1/16, 12, 20000, 42)
    best = min(best, time.perf_counter() - t0)
print(f"{kernels.backend_name()}: count={count} best={best:.3f}s")
"""


def run(backend: str) -> str:
    env = dict(os.environ)
    env["PSEUDOSUSP_BACKEND"] = backend
    out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env,
                         capture_output=True, text=True)
    if out.returncode != 0:
        return f"{backend}: FAILED\n{out.stderr}"
    return out.stdout.strip()


def main() -> None:
    print("greedy Bowen-separation kernel, budget 20000, n = 12, unit rotation")
    for backend in ("numba", "numpy"):
        print(run(backend))


if __name__ == "__main__":
    main()

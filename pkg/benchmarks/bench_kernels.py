"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time from ``EQUIVARIANT_INS_NO_JIT``. The numba timings exclude
compilation (one warm-up run is made first).

    python benchmarks/bench_kernels.py [--repeat N] [--json PATH]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CASES = {
    "euler_paper_40s": dict(integrator="euler", dt=0.01, duration=40.0),
    "rk4_dt1e-3_5s": dict(integrator="rk4", dt=1e-3, duration=5.0),
}

WORKER = r"""
import json, sys, time
import numpy as np
from equivariant_ins import BACKEND
from equivariant_ins.sim import paper_config, run

cases, repeat = json.loads(sys.argv[1]), int(sys.argv[2])
run(paper_config(duration=0.05, integrator="euler"))
run(paper_config(duration=0.05, integrator="rk4", dt=1e-3))
out = {"backend": BACKEND, "cases": {}}
for name, kw in cases.items():
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        tr = run(paper_config(**kw))
        best = min(best, time.perf_counter() - t0)
    out["cases"][name] = {"seconds": best, "steps": len(tr) - 1, "final": tr.states[-1].tolist()}
print(json.dumps(out))
"""


def run_backend(no_jit: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("EQUIVARIANT_INS_NO_JIT", None)
    if no_jit:
        env["EQUIVARIANT_INS_NO_JIT"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKER, json.dumps(CASES), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="best-of repetitions per case")
    ap.add_argument("--json", metavar="PATH", help="also write the raw results here")
    args = ap.parse_args(argv)

    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    print(f"{'case':<18} {'steps':>7} {fast['backend'] + ' [s]':>12} {slow['backend'] + ' [s]':>12} "
          f"{'speedup':>8} {'max |diff|':>11}")
    for name in CASES:
        a, b = fast["cases"][name], slow["cases"][name]
        diff = max(abs(x - y) for x, y in zip(a["final"], b["final"]))
        print(f"{name:<18} {a['steps']:>7} {a['seconds']:>12.4f} {b['seconds']:>12.4f} "
              f"{b['seconds'] / a['seconds']:>7.1f}x {diff:>11.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"jit": fast, "nojit": slow}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark the compiled interval kernels against the pure-Python lane.

The kernel lane is chosen at import time, so each lane runs in a fresh
subprocess with STLMON_PURE_KERNELS set accordingly.  Two workloads:

* raw kernel micro-benchmark (tight add/mul/div loops on floats), and
* an end-to-end verification of the timer worked example, which mixes
  kernel calls with interpreter-bound work and shows the realistic gain.

Run:  python benchmarks/bench_kernels.py [--ops N] [--repeats K]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, time
from stlmon._kernels import BACKEND, kadd, kmul, kdiv

ops = %(ops)d

def bench(fn, a, b, c, d):
    t0 = time.perf_counter()
    for _ in range(ops):
        fn(a, b, c, d)
    return time.perf_counter() - t0

out = {"backend": BACKEND}
out["kadd"] = bench(kadd, 1.25, 2.5, -0.75, 3.5)
out["kmul"] = bench(kmul, 1.25, 2.5, -0.75, 3.5)
out["kdiv"] = bench(kdiv, 1.25, 2.5, 0.75, 3.5)

from stlmon.system import load_builtin
from stlmon.stl import parse_formula
from stlmon.monitor import monitor_stl

sys_ = load_builtin("timer")
phi = parse_formula(
    "F[0,6.284]((cos(x) < 0) & (sin(x) < 0))",
    sys_.resolver(allow_params=False),
)
t0 = time.perf_counter()
for _ in range(%(repeats)d):
    v = monitor_stl(sys_, phi)
    assert v.outcome == "Valid"
out["verify"] = time.perf_counter() - t0
print(json.dumps(out))
"""


def run_lane(pure: bool, ops: int, repeats: int) -> dict:
    env = dict(os.environ)
    env["STLMON_PURE_KERNELS"] = "1" if pure else "0"
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER % {"ops": ops, "repeats": repeats}],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ops", type=int, default=2_000_000,
                    help="kernel calls per micro-benchmark")
    ap.add_argument("--repeats", type=int, default=20,
                    help="end-to-end verification repeats")
    args = ap.parse_args()

    fast = run_lane(False, args.ops, args.repeats)
    pure = run_lane(True, args.ops, args.repeats)
    if fast["backend"] == pure["backend"]:
        print("compiled extension unavailable; both lanes ran pure Python")

    print(f"{'workload':<10} {'compiled':>12} {'pure':>12} {'speedup':>9}")
    for key, label in (
        ("kadd", "kadd"),
        ("kmul", "kmul"),
        ("kdiv", "kdiv"),
        ("verify", "verify"),
    ):
        f, p = fast[key], pure[key]
        print(f"{label:<10} {f:>10.3f}s {p:>10.3f}s {p / f:>8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

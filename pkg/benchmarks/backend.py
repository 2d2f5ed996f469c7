"""Compare the two coefficient backends on a few fixed workloads.

Usage: python benchmarks/backend.py [--repeat R] [--backends flint,python]

The backend is chosen at import time, so every workload runs in a fresh
interpreter with QKDV_BACKEND set.
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOADS = {
    "root N=2 M=1 K=4": "from qkdv import suites; suites.check_root_identity(2, 1, 4, 0)",
    "flow N=2 n=3 M=2": (
        "from qkdv.hierarchy_kdv import KdVState, qkdv_flow; from qkdv.modering import WindowConfig;"
        "qkdv_flow(KdVState(2, WindowConfig(2, 2, 8)), 3)"
    ),
    "heredity N=2 n=1 M=2": (
        "from qkdv.hierarchy_kdv import KdVState, check_heredity; from qkdv.modering import WindowConfig;"
        "check_heredity(KdVState(2, WindowConfig(2, 2, 8)), 1)"
    ),
    "bracket axioms N=2": (
        "from qkdv import suites; suites.check_bracket_axioms(2, 12, suites.RunConfig(N=2), 0)"
    ),
}

TIMER = """
import time
t0 = time.perf_counter()
{body}
print(time.perf_counter() - t0)
"""


def run(backend, body):
    env = dict(os.environ, QKDV_BACKEND=backend)
    p = subprocess.run([sys.executable, "-c", TIMER.format(body=body)], env=env,
                       capture_output=True, text=True, check=True)
    return float(p.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=1)
    ap.add_argument("--backends", default="flint,python")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    backends = args.backends.split(",")
    rows = []
    for name, body in WORKLOADS.items():
        row = {"workload": name}
        for b in backends:
            row[b] = min(run(b, body) for _ in range(args.repeat))
        rows.append(row)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print("%-24s" % "workload" + "".join("%12s" % b for b in backends))
    for row in rows:
        print("%-24s" % row["workload"] + "".join("%11.2fs" % row[b] for b in backends))


if __name__ == "__main__":
    main()

"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Kernel calls are timed in-process against both modules. The end-to-end
``decide`` and simulation rows run in a subprocess per backend because the
backend is picked once at import.
"""
import argparse
import json
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from lloydflock import _pykernels

try:
    from lloydflock import _ckernels
except ImportError:
    _ckernels = None


def _polygon(rng, k=12, r=4.0):
    th = np.sort(rng.uniform(0, 2 * math.pi, k))
    rad = r * rng.uniform(0.7, 1.0, k)
    return np.column_stack([rad * np.cos(th), rad * np.sin(th)])


def _kernel_cases(mod, rng):
    V = _polygon(rng)
    th = rng.uniform(0, 2 * math.pi, 6)
    N = np.column_stack([np.cos(th), np.sin(th)])
    off = rng.uniform(1.0, 3.0, 6)
    S = np.column_stack([5 * np.cos(np.linspace(0, 2 * math.pi, 64, endpoint=False)),
                         5 * np.sin(np.linspace(0, 2 * math.pi, 64, endpoint=False))])
    return {
        "clip_many (64-gon, 6 planes)": lambda: mod.clip_many(S, N, off),
        "weighted_centroid (beta=0.5)": lambda: mod.weighted_centroid(V, 6.0, 2.0, 0.5),
        "weighted_centroid (beta=20)": lambda: mod.weighted_centroid(V, 6.0, 2.0, 20.0),
        "beta_min (d_u=0.8)": lambda: mod.beta_min(V, 6.0, 2.0, 0.8),
    }


_E2E = r"""
import json, time, numpy as np
from lloydflock import decide, AdaptiveState, AgentConfig, Measurement, run
from lloydflock.simulator import margin_scenario
cfg = AgentConfig(delta=0.2, goal=(20, 5), d_u_fixed=0.8)
rng = np.random.default_rng(0)
ms = [Measurement(k, rng.uniform(-4, 4, 2), radius=0.2) for k in range(6)]
ms = [m for m in ms if np.linalg.norm(m.position) > 1.0]
st = AdaptiveState(0.5, cfg.goal)
best = 1e9
for _ in range(%d):
    t = time.perf_counter()
    for _ in range(20):
        decide((0, 0), st, ms, cfg)
    best = min(best, (time.perf_counter() - t) / 20)
t = time.perf_counter()
run(margin_scenario(4, 1))
print(json.dumps({"decide": best, "run N=4": time.perf_counter() - t}))
"""


def _e2e(pure, repeat):
    env = dict(os.environ, LLOYDFLOCK_PURE="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", _E2E % repeat], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        sys.exit("compiled kernels not built; run `python setup.py build_ext --inplace`")

    rows = []
    py = _kernel_cases(_pykernels, np.random.default_rng(0))
    cy = _kernel_cases(_ckernels, np.random.default_rng(0))
    for name in py:
        n = 3 if "beta_min" in name else 20
        tp = min(timeit.repeat(py[name], number=n, repeat=args.repeat)) / n
        tc = min(timeit.repeat(cy[name], number=n, repeat=args.repeat)) / n
        rows.append((name, tp, tc))
    ep, ec = _e2e(True, args.repeat), _e2e(False, args.repeat)
    for name in ep:
        rows.append((name, ep[name], ec[name]))

    print(f"{'case':34s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, tp, tc in rows:
        print(f"{name:34s} {tp * 1e3:10.3f}ms {tc * 1e3:10.3f}ms {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()

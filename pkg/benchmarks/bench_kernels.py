#!/usr/bin/env python3
"""Benchmark the compiled geometry kernels against the pure-Python fallback.

Times the three hot primitives (polygon clipping area, minimum distance,
overlap test) on pre-generated random convex pairs, plus one end-to-end
rule-vector evaluation. Run:

    python benchmarks/bench_kernels.py [--pairs N]
"""

from __future__ import annotations

import argparse
import math
import random
import time
from array import array


def random_convex_packed(rng: random.Random, cx: float, cy: float,
                         radius: float = 1.5) -> tuple[array, int]:
    n = rng.randint(4, 8)
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
    packed = array("d")
    for a in angles:
        r = radius * rng.uniform(0.6, 1.0)
        packed.append(cx + r * math.cos(a))
        packed.append(cy + r * math.sin(a))
    return packed, n


def bench_kernels(module, pairs) -> dict[str, float]:
    out = {}
    t0 = time.perf_counter()
    acc = 0.0
    for (pa, na), (pb, nb) in pairs:
        acc += module.clip_area(pa, na, pb, nb)
    out["clip_area"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    for (pa, na), (pb, nb) in pairs:
        acc += module.min_distance(pa, na, pb, nb)
    out["min_distance"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    hits = 0
    for (pa, na), (pb, nb) in pairs:
        hits += bool(module.polygons_overlap(pa, na, pb, nb))
    out["polygons_overlap"] = time.perf_counter() - t0
    out["_sink"] = acc + hits
    return out


def bench_rule_vector(backend_env: str) -> float:
    """End-to-end evaluate_all on a synthetic crossing trace."""
    import os
    import subprocess
    import sys

    code = (
        "import time, sys\n"
        "sys.path.insert(0, 'tests')\n"
        "from conftest import random_trace, straight_map\n"
        "import random\n"
        "from rulebench.rules import evaluate_all, RuleParams\n"
        "from rulebench.geometry import active_backend\n"
        "rng = random.Random(7)\n"
        "m = straight_map()\n"
        "traces = [random_trace(rng, n=20) for _ in range(30)]\n"
        "t0 = time.perf_counter()\n"
        "for tr in traces:\n"
        "    evaluate_all(tr, m, RuleParams())\n"
        "dt = time.perf_counter() - t0\n"
        "print(f'{active_backend()} {dt:.4f}')\n"
    )
    env = dict(os.environ, RULEBENCH_KERNELS=backend_env)
    res = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env, check=True)
    backend, dt = res.stdout.split()
    assert backend == backend_env, f"wanted {backend_env}, got {backend}"
    return float(dt)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=20000)
    args = parser.parse_args()

    from rulebench.geometry import _pykernels

    try:
        from rulebench.geometry import _ckernels
    except ImportError:
        _ckernels = None

    rng = random.Random(42)
    pairs = []
    for _ in range(args.pairs):
        a = random_convex_packed(rng, rng.uniform(-1, 1), rng.uniform(-1, 1))
        b = random_convex_packed(rng, rng.uniform(-1, 1), rng.uniform(-1, 1))
        pairs.append((a, b))

    print(f"{args.pairs} random convex pairs per kernel\n")
    print(f"{'kernel':<18} {'python':>10} {'compiled':>10} {'speedup':>9}")
    py = bench_kernels(_pykernels, pairs)
    if _ckernels is not None:
        cy = bench_kernels(_ckernels, pairs)
        for name in ("clip_area", "min_distance", "polygons_overlap"):
            print(f"{name:<18} {py[name]:>9.3f}s {cy[name]:>9.3f}s "
                  f"{py[name] / cy[name]:>8.1f}x")
    else:
        for name in ("clip_area", "min_distance", "polygons_overlap"):
            print(f"{name:<18} {py[name]:>9.3f}s {'(not built)':>10}")

    print("\nend-to-end rule-vector evaluation (30 random traces):")
    t_py = bench_rule_vector("python")
    print(f"{'evaluate_all':<18} {t_py:>9.3f}s", end="")
    if _ckernels is not None:
        t_c = bench_rule_vector("c")
        print(f" {t_c:>9.3f}s {t_py / t_c:>8.1f}x")
    else:
        print(f" {'(not built)':>10}")


if __name__ == "__main__":
    main()

"""Compare the compiled and numpy kernels on planted grid instances.

    python3 benchmarks/bench_kernels.py --size 64 --repeat 5
"""
import argparse
import time

import numpy as np

from cyclecrf import enumerate_triangles
from cyclecrf._backend import get_kernels
from cyclecrf.synth import planted_instance


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--dist", type=int, nargs=2, default=[2, 4], metavar=("MIN", "MAX"))
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    backends = {"python": get_kernels("python")}
    try:
        backends["compiled"] = get_kernels("compiled")
    except ImportError:
        print("compiled kernels unavailable; timing the fallback only")

    print(f"{'size':>5} {'edges':>8} {'triangles':>10} {'kernel':<14} "
          + " ".join(f"{name:>10}" for name in backends) + "   speedup")
    for size in args.size:
        g = planted_instance(size, size, min_distance=args.dist[0], max_distance=args.dist[1], seed=0).graph
        tris = enumerate_triangles(g)
        q = np.ascontiguousarray(g.probs)
        rows = {"triangles": {}, "clique_terms": {}}
        for name, k in backends.items():
            threads = 1 if name == "python" else args.threads
            rows["triangles"][name] = best_of(lambda: k.enumerate_triangles(g.num_nodes, g.edges), args.repeat)
            rows["clique_terms"][name] = best_of(
                lambda: k.clique_terms(1.0 - q, q, tris.edges, tris.inc_edge, tris.inc_tri, tris.inc_slot,
                                       0.0, 0.0, 0.0, 10.0, threads),
                args.repeat,
            )
        for kernel, timings in rows.items():
            speed = f"{timings['python'] / timings['compiled']:8.1f}x" if "compiled" in timings else ""
            print(f"{size:>5} {g.num_edges:>8} {len(tris):>10} {kernel:<14} "
                  + " ".join(f"{timings[name] * 1e3:>8.2f}ms" for name in backends) + f" {speed}")


if __name__ == "__main__":
    main()

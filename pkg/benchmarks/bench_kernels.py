"""Time the numba kernels against the pure-numpy fallback.

Runs each hot kernel on a fixed workload under both backends by reimporting
the package with PHASEGRID_NUMBA toggled in a subprocess, then prints a
small table. Usage:

    python3 benchmarks/bench_kernels.py [--samples N] [--repeat R]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

_WORKER = textwrap.dedent("""
    import json, sys, time
    import numpy as np
    from phasegrid import _kernels
    from phasegrid.potentials import morse, kernel_args

    n_samples = int(sys.argv[1])
    repeat = int(sys.argv[2])

    spec = morse()
    kind, par, tab_x, tab_v = kernel_args(spec)
    rng = np.random.default_rng(42)
    xs = rng.uniform(-1.6, 20.1, size=(n_samples, 2))
    ps = rng.uniform(-12.0, 12.0, size=(n_samples, 2))

    levels = np.arange(70, dtype=float) + 0.5

    results = {"backend": _kernels.active_backend()}

    # warm-up triggers numba compilation so it is not timed below
    _kernels.mc_count_hits(xs[:100], ps[:100], kind, par, tab_x, tab_v,
                           spec.mass, 8.0)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        hits = _kernels.mc_count_hits(xs, ps, kind, par, tab_x, tab_v,
                                      spec.mass, 8.0)
        best = min(best, time.perf_counter() - t0)
    results["mc_count_hits"] = {"seconds": best, "hits": int(hits)}

    _kernels.count_tuples_below(levels, 5, 60.5)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        count, _nodes, _exceeded = _kernels.count_tuples_below(levels, 5, 60.5)
        best = min(best, time.perf_counter() - t0)
    results["count_tuples_below"] = {"seconds": best, "count": int(count)}

    print(json.dumps(results))
""")


def run_backend(use_numba: bool, n_samples: int, repeat: int) -> dict:
    env = dict(os.environ)
    env["PHASEGRID_NUMBA"] = "1" if use_numba else "0"
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, str(n_samples), str(repeat)],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=2_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rows = []
    for use_numba in (False, True):
        res = run_backend(use_numba, args.samples, args.repeat)
        rows.append(res)

    kernels = ("mc_count_hits", "count_tuples_below")
    print(f"workload: {args.samples} MC samples (D=2), best of {args.repeat}")
    print(f"{'kernel':22s} {'numpy [s]':>12s} {'numba [s]':>12s} {'speedup':>9s}")
    for kernel in kernels:
        t_np = rows[0][kernel]["seconds"]
        t_nb = rows[1][kernel]["seconds"]
        check_np = {k: v for k, v in rows[0][kernel].items() if k != "seconds"}
        check_nb = {k: v for k, v in rows[1][kernel].items() if k != "seconds"}
        agree = "" if check_np == check_nb else "  RESULTS DIFFER"
        print(f"{kernel:22s} {t_np:12.4f} {t_nb:12.4f} {t_np / t_nb:8.1f}x"
              f"{agree}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

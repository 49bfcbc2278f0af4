"""Time the compiled shot kernel against the numpy fallback.

Runs the same benchmarking workload through both kernels (identical random
streams, so identical physics) and reports wall time and speedup.

    python3 benchmarks/bench_kernels.py --shots 2000 --length 100 --repeat 3
"""

import argparse
import math
import time

from rbsim import _kernels, rb
from rbsim.noise import NoiseParams


def run_once(kernel, params, lengths, sequences, shots, seed):
    t0 = time.perf_counter()
    ds = rb.run_rb(params, lengths, sequences, shots, seed=seed, kernel=kernel)
    dt = time.perf_counter() - t0
    return dt, ds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=2000)
    ap.add_argument("--length", type=int, default=100, help="longest sequence")
    ap.add_argument("--sequences", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1234)
    args = ap.parse_args()

    params = NoiseParams(omega=2.0 * math.pi * 4.74e3)
    lengths = sorted({1, args.length // 2, args.length})
    names = _kernels.available_kernels()
    print(f"kernels: {names}; lengths {lengths}, "
          f"{args.sequences} sequences x {args.shots} shots, best of {args.repeat}")

    best = {}
    reference_rows = None
    for name in names:
        times = []
        for _ in range(args.repeat):
            dt, ds = run_once(
                name, params, lengths, args.sequences, args.shots, args.seed
            )
            times.append(dt)
        best[name] = min(times)
        if reference_rows is None:
            reference_rows = ds.rows
        elif ds.rows != reference_rows:
            raise SystemExit(f"kernel {name!r} disagreed with reference counts")

    width = max(len(n) for n in names)
    for name in names:
        line = f"{name:<{width}}  {best[name] * 1e3:9.1f} ms"
        if name != "python" and "python" in best:
            line += f"  ({best['python'] / best[name]:5.1f}x vs python)"
        print(line)


if __name__ == "__main__":
    main()

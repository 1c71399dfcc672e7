"""Time the numba kernels against the pure-numpy fallback.

Runs the three hot paths (correlated shock sampling, direct batch
clearing, iterative batch clearing) on the five-bank system and prints a
small table.  The numba path gets one untimed warmup call so compilation
is excluded.

Usage:
    python3 benchmarks/compare_backends.py [--scenarios N] [--repeat R]
"""

import argparse
import importlib
import time

import numpy as np

from gringotts import ShockModel, build_split_network, derive_gdp
from gringotts.clearing import ClearingParams, default_detection_slack


def best_of(repeat, fn, *args):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scenarios", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = {}
    for name in ("numba", "numpy"):
        try:
            backends[name] = importlib.import_module(
                f"gringotts._kernels_{name}")
        except ImportError as exc:
            print(f"skipping {name} backend: {exc}")
    if len(backends) < 2:
        raise SystemExit("need both backends installed to compare")

    net = build_split_network(derive_gdp())
    model = ShockModel()
    pbar, pi = net.relative_liabilities()
    pi_ib = np.ascontiguousarray(pi[:, : net.n_banks])
    params = ClearingParams.from_bankruptcy_cost(0.10)
    dtol = default_detection_slack(pbar)

    mult = backends["numpy"].sample_multipliers(
        1337, args.scenarios, net.n_banks, model.correlation,
        model.beta_a, model.beta_b)
    assets = net.external_assets[None, :] * mult

    tasks = {
        "sample_multipliers": lambda k: k.sample_multipliers(
            1337, args.scenarios, net.n_banks, model.correlation,
            model.beta_a, model.beta_b),
        "fd_clear_batch": lambda k: k.fd_clear_batch(
            assets, pbar, pi_ib, params.alpha, params.beta, dtol),
        "picard_clear_batch": lambda k: k.picard_clear_batch(
            assets, pbar, pi_ib, params.alpha, params.beta,
            params.tolerance, params.max_iterations),
    }

    if "numba" in backends:
        for run in tasks.values():   # warmup: trigger compilation/cache load
            run(backends["numba"])

    print(f"{args.scenarios} scenarios x {net.n_banks} banks, "
          f"best of {args.repeat}")
    header = f"{'task':<22}" + "".join(f"{n:>12}" for n in backends)
    print(header)
    print("-" * len(header))
    for label, run in tasks.items():
        times = {n: best_of(args.repeat, run, k)
                 for n, k in backends.items()}
        row = f"{label:<22}" + "".join(f"{times[n] * 1e3:>10.1f}ms"
                                       for n in backends)
        if "numba" in times and "numpy" in times:
            row += f"   ({times['numpy'] / times['numba']:.1f}x)"
        print(row)


if __name__ == "__main__":
    main()

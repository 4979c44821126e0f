"""Compare the compiled and portable detector kernels.

Runs the two hot loops (branch profile evaluation and the dithered
time-series sweep) against both backends on identical inputs, checks
that they agree, and reports wall times with the speedup factor.

Usage:
    python3 benchmarks/bench_kernels.py [--samples N] [--grid-points N]
                                        [--repeats N]
"""

import argparse
import time

import numpy as np

from nestedmz._config import DEFAULT_FREQUENCIES
from nestedmz._kernels import _ref, _speedups, quadrature_weights
from nestedmz.interferometer import PORT_BRIGHT, NetworkConfig, path_table
from nestedmz.weakmeas import simulation_grid


def build_inputs(n_samples: int, grid_points: int):
    paths = path_table(NetworkConfig())[PORT_BRIGHT]
    mirrors = sorted(DEFAULT_FREQUENCIES)
    coeffs = np.array([amp for amp, _ in paths], dtype=np.complex128)
    member = np.zeros((len(paths), len(mirrors)))
    for b, (_, visited) in enumerate(paths):
        for m, name in enumerate(mirrors):
            member[b, m] = visited.count(name)
    amps = np.full(len(mirrors), 1e-3)
    freqs = np.array([float(DEFAULT_FREQUENCIES[m]) for m in mirrors])
    phases = np.zeros(len(mirrors))
    grid = simulation_grid(1.0, float(np.max(member @ amps)), grid_points)
    w = quadrature_weights(grid.points)
    return {
        "coeffs": coeffs,
        "member": member,
        "amps": amps,
        "freqs": freqs,
        "phases": phases,
        "grid": grid.points,
        "weights": w,
        "n_samples": n_samples,
        "dt": 1.0 / 8192.0,
    }


def time_call(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=16384)
    parser.add_argument("--grid-points", type=int, default=4096)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    inp = build_inputs(args.samples, args.grid_points)
    shifts = inp["member"] @ inp["amps"]

    results = []
    outputs = {}
    for backend in (_speedups, _ref):
        name = backend.BACKEND_NAME

        def run_profile():
            return backend.profile(inp["coeffs"], shifts, 1.0, inp["grid"])

        def run_series():
            return backend.dither_series(
                inp["coeffs"],
                inp["member"],
                inp["amps"],
                inp["freqs"],
                inp["phases"],
                1.0,
                inp["grid"],
                inp["weights"].w_prob,
                inp["weights"].w_first,
                inp["weights"].w_signed,
                inp["n_samples"],
                inp["dt"],
                0,
            )

        outputs[name] = (run_profile(), run_series())
        results.append(
            (
                name,
                time_call(run_profile, args.repeats * 20),
                time_call(run_series, args.repeats),
            )
        )

    prof_diff = float(
        np.max(np.abs(outputs["compiled"][0] - outputs["portable"][0]))
    )
    series_diff = float(
        np.max(np.abs(outputs["compiled"][1] - outputs["portable"][1]))
    )

    print(f"inputs: {args.samples} samples, {args.grid_points} grid points")
    print(f"agreement: profile {prof_diff:.2e}, series {series_diff:.2e}")
    print()
    print(f"{'backend':<10} {'profile':>12} {'dither series':>15}")
    for name, t_prof, t_series in results:
        print(f"{name:<10} {t_prof * 1e6:>10.1f}us {t_series * 1e3:>13.1f}ms")
    base = {name: (tp, ts) for name, tp, ts in results}
    print()
    print(
        f"speedup: profile {base['portable'][0] / base['compiled'][0]:.1f}x, "
        f"series {base['portable'][1] / base['compiled'][1]:.1f}x"
    )


if __name__ == "__main__":
    main()

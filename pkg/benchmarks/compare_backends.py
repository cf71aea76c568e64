#!/usr/bin/env python3
"""Benchmark the compiled trial kernels against the pure-Python fallback.

Runs both backends on the same (scheme, M, m, q) cells and reports trials
per second and the speedup.  The fallback gets a scaled-down trial count so
the whole run stays quick; both sides are checked to produce identical round
counts on the shared prefix before timing is trusted.

Usage:
    python benchmarks/compare_backends.py [--trials 20000] [--seed 42]
"""

from __future__ import annotations

import argparse
import time

from platoondl.analytic import ProblemSpec
from platoondl.sim import available_backends, batch_rounds

CELLS = (
    ("feedback", 20, 1, 8),
    ("feedback", 50, 5, 8),
    ("nc", 20, 1, 8),
    ("nc", 50, 2, 8),
    ("nc", 20, 1, 1),
)

PY_SCALE = 100  # fallback runs trials/PY_SCALE


def _time_batch(scheme, spec, trials, seed, backend):
    t0 = time.perf_counter()
    rounds = batch_rounds(scheme, spec, trials, seed, backend=backend)
    return time.perf_counter() - t0, rounds


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000,
                    help="compiled-backend trials per cell (fallback runs 1/%d)" % PY_SCALE)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    if "compiled" not in available_backends():
        print("compiled kernels not built; nothing to compare")
        return 1

    py_trials = max(args.trials // PY_SCALE, 50)
    print(f"{'cell':<24} {'backend':<9} {'trials':>8} {'seconds':>9} {'trials/s':>12} {'speedup':>8}")
    for scheme, M, m, q in CELLS:
        spec = ProblemSpec(M, m, q)
        label = f"{scheme} M={M} m={m} q={q}"

        dt_c, rounds_c = _time_batch(scheme, spec, args.trials, args.seed, "compiled")
        dt_p, rounds_p = _time_batch(scheme, spec, py_trials, args.seed, "python")
        if (rounds_c[:py_trials] != rounds_p).any():
            raise AssertionError(f"backend outputs diverge on {label}")

        rate_c = args.trials / dt_c
        rate_p = py_trials / dt_p
        print(f"{label:<24} {'compiled':<9} {args.trials:>8} {dt_c:>9.3f} {rate_c:>12.0f} {'':>8}")
        print(f"{label:<24} {'python':<9} {py_trials:>8} {dt_p:>9.3f} {rate_p:>12.0f} {rate_c / rate_p:>7.0f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line experiment driver.

Four modes over a sweep grid of (M, m) cells:

* ``analytic``  - closed-form pmfs and means only (optionally cross-checked
  against the enumeration oracle with ``--oracle``).
* ``simulate``  - seeded Monte Carlo only.
* ``compare``   - both, side by side; reproduces the mean-vs-M comparison of
  the two schemes at a chosen field exponent.
* ``rankprob``  - print the full-rank probability of a t x n random matrix.

Writes one ``summary.csv`` plus one pmf CSV per (M, m, scheme) cell into
``--out``; identical invocations produce byte-identical files.  Exit status:
0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

from . import __version__, analytic, sim
from .analytic import ProblemSpec

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

MODES = ("analytic", "simulate", "compare", "rankprob")
SCHEME_CHOICES = ("feedback", "nc", "both")

_CONFIG_KEYS = ("mode", "M", "m", "q", "trials", "seed", "scheme", "out",
                "workers", "oracle", "t", "n")


class UsageError(ValueError):
    """Bad flags or config; maps to exit status 2."""


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str
    M_values: tuple[int, ...] = ()
    m_values: tuple[int, ...] = ()
    q: int = 8
    trials: int = 100_000
    seed: int = 42
    scheme: str = "both"
    out: str | None = None
    workers: int = 1
    with_oracle: bool = False
    rank_rows: int | None = None
    rank_cols: int | None = None


@dataclass(frozen=True)
class SummaryRow:
    M: int
    m: int
    scheme: str
    analytic_mean: float | None
    empirical_mean: float | None
    stderr: float | None
    bound: float | None
    t_min: int
    t_max: int


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="platoondl",
        description="Stopping-time experiments for two-vehicle collaborative "
                    "downloading (feedback scheme vs random linear network coding).",
    )
    p.add_argument("--mode", choices=MODES, help="experiment mode")
    p.add_argument("--M", dest="M", help="total packets: single value, 'a,b,c' list, "
                   "or 'start:stop:step' sweep (stop inclusive)")
    p.add_argument("--m", dest="m", help="packets per vehicle per round; same sweep syntax")
    p.add_argument("--q", type=int, help="field exponent (field size 2^q), default 8")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per cell, default 100000")
    p.add_argument("--seed", type=int, help="master seed; default $PLATOON_SEED or 42")
    p.add_argument("--scheme", choices=SCHEME_CHOICES, help="scheme(s) to run, default both")
    p.add_argument("--out", help="output directory for CSV files")
    p.add_argument("--workers", type=int, help="parallel simulation workers, default 1")
    p.add_argument("--oracle", action="store_true", default=None,
                   help="analytic mode: also run the enumeration oracle and report deviations")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--t", type=int, dest="t", help="rankprob mode: matrix rows")
    p.add_argument("--n", type=int, dest="n", help="rankprob mode: matrix columns")
    return p


def _parse_sweep(value, key: str) -> tuple[int, ...]:
    if isinstance(value, bool):
        raise UsageError(f"{key} must be an integer sweep, got a boolean")
    if isinstance(value, int):
        values = [value]
    elif isinstance(value, list):
        try:
            values = [int(v) for v in value]
        except (TypeError, ValueError):
            raise UsageError(f"{key} list must contain integers") from None
    elif isinstance(value, str):
        try:
            if ":" in value:
                parts = [int(v) for v in value.split(":")]
                if len(parts) == 2:
                    start, stop, step = parts[0], parts[1], 1
                elif len(parts) == 3:
                    start, stop, step = parts
                else:
                    raise ValueError
                if step < 1:
                    raise ValueError
                values = list(range(start, stop + 1, step))
            else:
                values = [int(v) for v in value.split(",")]
        except ValueError:
            raise UsageError(f"{key} sweep {value!r} is not a value, list or start:stop:step") from None
    else:
        raise UsageError(f"{key} has unsupported type {type(value).__name__}")
    if not values:
        raise UsageError(f"{key} sweep is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise UsageError(f"{key} values must be strictly increasing")
    return tuple(values)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def parse_config(args: list[str], config_file: str | None = None) -> ExperimentSpec:
    """Resolve flags over config-file values over defaults."""
    ns = _build_parser().parse_args(args)
    cfg = {}
    path = ns.config if ns.config is not None else config_file
    if path:
        cfg = _load_config_file(path)

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        if key in cfg:
            return cfg[key]
        return default

    mode = pick(ns.mode, "mode", None)
    if mode is None:
        raise UsageError("mode is required (--mode analytic|simulate|compare|rankprob)")
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}, got {mode!r}")

    seed = pick(ns.seed, "seed", None)
    if seed is None:
        env = os.environ.get("PLATOON_SEED")
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise UsageError(f"PLATOON_SEED must be an integer, got {env!r}") from None
        else:
            seed = 42
    seed = int(seed)

    q = int(pick(ns.q, "q", 8))
    if not 1 <= q <= 16:
        raise UsageError(f"q must be in [1, 16], got {q}")

    trials = int(pick(ns.trials, "trials", 100_000))
    workers = int(pick(ns.workers, "workers", 1))
    if workers < 1:
        raise UsageError(f"workers must be >= 1, got {workers}")
    scheme = pick(ns.scheme, "scheme", "both")
    if scheme not in SCHEME_CHOICES:
        raise UsageError(f"scheme must be one of {SCHEME_CHOICES}, got {scheme!r}")
    out = pick(ns.out, "out", None)
    with_oracle = bool(pick(ns.oracle, "oracle", False))

    if mode == "rankprob":
        rank_rows = pick(ns.t, "t", None)
        rank_cols = pick(ns.n, "n", None)
        if rank_rows is None or rank_cols is None:
            raise UsageError("rankprob mode requires --t and --n")
        rank_rows, rank_cols = int(rank_rows), int(rank_cols)
        if rank_rows < 1 or rank_cols < 1:
            raise UsageError("t and n must be >= 1")
        return ExperimentSpec(mode=mode, q=q, trials=trials, seed=seed, scheme=scheme,
                              out=out, workers=workers, with_oracle=with_oracle,
                              rank_rows=rank_rows, rank_cols=rank_cols)

    m_raw = pick(ns.M, "M", None)
    if m_raw is None:
        raise UsageError("M is required for this mode (--M)")
    M_values = _parse_sweep(m_raw, "M")
    mm_raw = pick(ns.m, "m", None)
    if mm_raw is None:
        raise UsageError("m is required for this mode (--m)")
    m_values = _parse_sweep(mm_raw, "m")

    if min(m_values) < 1:
        raise UsageError("m must be >= 1")
    if min(M_values) < 1:
        raise UsageError("M must be >= 1")
    for mv in m_values:
        for Mv in M_values:
            if mv > Mv:
                raise UsageError(f"m must be <= M for every grid cell (m={mv} > M={Mv})")
    if mode in ("simulate", "compare") and trials < 1:
        raise UsageError(f"trials must be >= 1, got {trials}")
    if out is None:
        raise UsageError("out is required for this mode (--out DIRECTORY)")

    return ExperimentSpec(mode=mode, M_values=M_values, m_values=m_values, q=q,
                          trials=trials, seed=seed, scheme=scheme, out=out,
                          workers=workers, with_oracle=with_oracle)


# ---------------------------------------------------------------------------
# experiment execution and serialization
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _meta_line(espec: ExperimentSpec) -> str:
    return (f"# platoondl {__version__} mode={espec.mode} seed={espec.seed} "
            f"trials={espec.trials} q={espec.q} scheme={espec.scheme}")


@dataclass(frozen=True)
class _CellResult:
    row: SummaryRow
    pmf_name: str
    pmf_rows: list[tuple]


def _cell_results(espec: ExperimentSpec) -> list[_CellResult]:
    schemes = ("feedback", "nc") if espec.scheme == "both" else (espec.scheme,)
    want_analytic = espec.mode in ("analytic", "compare")
    want_empirical = espec.mode in ("simulate", "compare")
    out = []
    for M in espec.M_values:
        for m in espec.m_values:
            cell = ProblemSpec(total_packets=M, per_round=m, field_exponent=espec.q)
            empirical = None
            if want_empirical:
                empirical = sim.run_experiment(cell, espec.trials, espec.seed,
                                               scheme=espec.scheme, workers=espec.workers)
            for scheme in schemes:
                apmf = bound_pmf = None
                bound_value = None
                if want_analytic:
                    if scheme == "feedback":
                        apmf = analytic.feedback_stopping_pmf(cell)
                    else:
                        apmf = analytic.nc_exact_pmf(cell)
                        bound_pmf = analytic.nc_stopping_pmf_bound(cell)
                        bound_value = analytic.nc_expected_bound(cell)
                elif scheme == "nc":
                    bound_value = analytic.nc_expected_bound(cell)
                esummary = empirical.results[scheme] if empirical else None
                if apmf is not None:
                    t_min, t_max = apmf.t_min, apmf.t_max
                else:
                    t_min, t_max = esummary.t_min, esummary.t_max
                row = SummaryRow(
                    M=M, m=m, scheme=scheme,
                    analytic_mean=apmf.mean if apmf else None,
                    empirical_mean=esummary.mean if esummary else None,
                    stderr=esummary.stderr if esummary else None,
                    bound=bound_value,
                    t_min=t_min, t_max=t_max,
                )
                lo, hi = t_min, t_max
                if esummary:
                    lo, hi = min(lo, esummary.t_min), max(hi, esummary.t_max)
                if bound_pmf is not None:
                    hi = max(hi, bound_pmf.t_max)
                epmf = esummary.pmf() if esummary else None
                pmf_rows = []
                for t in range(lo, hi + 1):
                    pmf_rows.append((
                        t,
                        apmf.prob(t) if apmf is not None else None,
                        epmf.get(t, 0.0) if epmf is not None else None,
                        bound_pmf.prob(t) if bound_pmf is not None else None,
                    ))
                out.append(_CellResult(row=row,
                                       pmf_name=f"pmf_M{M}_m{m}_{scheme}.csv",
                                       pmf_rows=pmf_rows))
    return out


def _write_outputs(espec: ExperimentSpec, cells: list[_CellResult]) -> None:
    os.makedirs(espec.out, exist_ok=True)
    meta = _meta_line(espec)
    summary_path = os.path.join(espec.out, "summary.csv")
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(meta + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["M", "m", "scheme", "analytic_mean", "empirical_mean",
                    "stderr", "bound", "t_min", "t_max"])
        for c in cells:
            r = c.row
            w.writerow([r.M, r.m, r.scheme, _fmt(r.analytic_mean),
                        _fmt(r.empirical_mean), _fmt(r.stderr), _fmt(r.bound),
                        r.t_min, r.t_max])
    for c in cells:
        with open(os.path.join(espec.out, c.pmf_name), "w", encoding="utf-8", newline="") as fh:
            fh.write(meta + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "analytic_p", "empirical_p", "bound_p"])
            for t, ap, ep, bp in c.pmf_rows:
                w.writerow([t, _fmt(ap), _fmt(ep), _fmt(bp)])


def _print_table(cells: list[_CellResult]) -> None:
    header = f"{'M':>5} {'m':>3} {'scheme':>8} {'analytic_mean':>14} {'empirical_mean':>15} {'stderr':>10} {'bound':>10}"
    print(header)
    print("-" * len(header))
    for c in cells:
        r = c.row

        def g(v, width):
            return f"{v:>{width}.6g}" if v is not None else " " * width

        print(f"{r.M:>5} {r.m:>3} {r.scheme:>8} {g(r.analytic_mean, 14)} "
              f"{g(r.empirical_mean, 15)} {g(r.stderr, 10)} {g(r.bound, 10)}")


def _oracle_report(espec: ExperimentSpec) -> None:
    print("enumeration-oracle cross-check (max pointwise pmf deviation):")
    for M in espec.M_values:
        for m in espec.m_values:
            cell = ProblemSpec(total_packets=M, per_round=m, field_exponent=espec.q)
            closed = analytic.feedback_stopping_pmf(cell)
            oracle = analytic.exact_markov_oracle(cell)
            support = set(closed.as_dict()) | set(oracle.as_dict())
            dev = max(abs(closed.prob(t) - oracle.prob(t)) for t in support)
            print(f"  M={M} m={m}: {dev:.3e}")


def run(espec: ExperimentSpec) -> int:
    """Execute a parsed experiment; returns the process exit status."""
    try:
        if espec.mode == "rankprob":
            p = analytic.rank_full_probability(espec.rank_rows, espec.rank_cols, espec.q)
            print(f"full-rank probability ({espec.rank_rows} x {espec.rank_cols}, "
                  f"field size 2^{espec.q}): {p:.12g}")
            return EXIT_OK
        cells = _cell_results(espec)
        _write_outputs(espec, cells)
        _print_table(cells)
        if espec.with_oracle and espec.mode == "analytic":
            _oracle_report(espec)
        return EXIT_OK
    except analytic.OracleGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main(argv: list[str] | None = None) -> int:
    try:
        espec = parse_config(list(argv) if argv is not None else sys.argv[1:])
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(espec)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line scenario runner.

``chaindiff run <config>`` writes one CSV and one plot-data file per
trajectory plus ``summary.txt`` into the output directory. Exit codes:
0 success, 2 parse error, 3 validation error, 4 integration failure.
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import SCENARIO_KINDS, ConfigParseError, Scenario, load_scenario
from .control import closed_loop_simulate, compare_estimators, loop_metrics
from .diffcore import Variant
from .equivalence import verify_equivalence
from .errors import IntegrationError, ValidationError
from .homogeneity import convergence_race, settling_time, simulate_error_system
from .metrics import STEADY_FRACTION, epsilon_sweep, steady_max_error
from .odesim import TimeSeries, simulate_estimator

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_INTEGRATION = 0, 2, 3, 4


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if value is None:
        return "none"
    return str(value)


def emit_plotdata(series: TimeSeries, columns: Optional[Sequence[str]] = None, path=None) -> str:
    """Whitespace-separated columns under a ``#`` header naming each column.

    ``columns`` defaults to all columns; ``t`` is always first.
    """
    if columns is None:
        columns = series.columns
    columns = list(columns)
    if not columns:
        raise ValidationError("empty column selection")
    unknown = [c for c in columns if c not in series]
    if unknown:
        raise ValidationError(f"unknown columns {unknown}; have {series.columns}")
    if columns[0] != series.columns[0]:
        columns = [series.columns[0]] + [c for c in columns if c != series.columns[0]]
    lines = ["# " + " ".join(columns)]
    data = np.column_stack([series[c] for c in columns])
    lines.extend(" ".join("%.17g" % v for v in row) for row in data)
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def bundled_scenarios() -> dict:
    """``{name: path}`` for the configs shipped with the package."""
    root = resources.files("chaindiff") / "scenarios"
    return {Path(p.name).stem: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".ini")}


def resolve_config(ref: str) -> Path:
    """A filesystem path, or the name of a bundled scenario."""
    path = Path(ref)
    if path.exists():
        return path
    bundled = bundled_scenarios()
    stem = path.stem if path.suffix == ".ini" else ref
    if stem in bundled:
        return bundled[stem]
    raise ConfigParseError(f"{ref}: no such file or bundled scenario "
                           f"(bundled: {', '.join(bundled)})")


class _Output:
    def __init__(self, out_dir: Path):
        self.dir = out_dir
        self.summary: list[tuple[str, object]] = []
        self.files: list[str] = []

    def trajectory(self, name: str, series: TimeSeries):
        series.to_csv(self.dir / f"{name}.csv")
        emit_plotdata(series, path=self.dir / f"{name}.dat")
        self.files += [f"{name}.csv", f"{name}.dat"]

    def put(self, key: str, value):
        self.summary.append((key, value))

    def write_summary(self) -> str:
        text = "".join(f"{k} = {_fmt(v)}\n" for k, v in self.summary)
        (self.dir / "summary.txt").write_text(text)
        return text


def _run_estimate(sc: Scenario, out: _Output):
    spec = sc.differentiator
    ts = simulate_estimator(spec, sc.signal, sc.noise, sc.init, sc.sim)
    out.trajectory("trajectory", ts)
    out.put("variant", spec.variant.value)
    for i in range(1, spec.n + 1):
        out.put(f"steady_max_err{i}", steady_max_error(ts, f"err{i}", STEADY_FRACTION))
    out.put("settling_time_err1", settling_time(ts, "err1", sc.threshold))


def _run_equivalence(sc: Scenario, out: _Output):
    eq = sc.equivalence
    rep = verify_equivalence(eq["gains"], eq["epsilon"], sc.signal, sc.sim, eq["init_w"],
                             eq["tolerance"], keep_series=True)
    out.trajectory("equivalence", rep.series)
    out.put("pass", rep.passed)
    out.put("max_discrepancy", rep.max_discrepancy)
    out.put("constraint_residual", rep.constraint_residual)
    out.put("tolerance", rep.tolerance)
    out.put("hurwitz", rep.hurwitz)


def _run_sweep(sc: Scenario, out: _Output):
    spec = sc.differentiator
    sweep = epsilon_sweep(spec, sc.sweep, sc.signal, sc.sim, sc.init)
    n = spec.n
    cols = ["epsilon"] + [f"err{i}" for i in range(1, n + 1)] + ["horizon"]
    # decreasing epsilon, so tabulate against log(1/epsilon) for a rising abscissa
    order = np.argsort(sweep.epsilons)[::-1]
    table = TimeSeries(["log_inv_epsilon"] + cols,
                       np.column_stack([-np.log(sweep.epsilons[order]), sweep.epsilons[order],
                                        sweep.errors[order], sweep.horizons[order]]))
    out.trajectory("sweep", table)
    rows = ["component,slope,intercept,residual"]
    for i in range(1, n + 1):
        fit = sweep.fit(i)
        rows.append(f"x{i},{fit.csv_row()}")
        out.put(f"slope_x{i}", fit.slope)
        out.put(f"monotone_x{i}", bool(np.all(np.diff(fit.errors) < 0)))
    (out.dir / "fits.csv").write_text("\n".join(rows) + "\n")
    out.files.append("fits.csv")


def _run_race(sc: Scenario, out: _Output):
    r = sc.race
    res = convergence_race(r["gains"], r["alpha1"], r["hybrid_gains"], r["offsets"],
                           r["threshold"], sc.sim)
    out.trajectory("race", res.to_series())
    for variant in (Variant.CHAIN_LINEAR, Variant.CHAIN_NONLINEAR, Variant.HYBRID):
        ts = simulate_error_system(variant, r["gains"], r["trace_offset"], sc.sim, r["alpha1"],
                                   r["hybrid_gains"])
        out.trajectory(f"trace_{variant.value}", ts)
    out.put("threshold", r["threshold"])
    out.put("offsets", len(res.offsets))
    out.put("hybrid_win_fraction", res.hybrid_win_fraction())
    out.put("nonlinear_win_fraction", res.nonlinear_win_fraction())
    for label, times in (("linear", res.linear), ("nonlinear", res.nonlinear),
                         ("hybrid", res.hybrid)):
        out.put(f"median_settling_{label}", float(np.median(times)))


def _put_loop(out: _Output, prefix: str, ts: TimeSeries):
    for key, value in loop_metrics(ts).items():
        out.put(f"{prefix}{key}", value)


def _run_closed_loop(sc: Scenario, out: _Output):
    cfg = sc.closed_loop
    if sc.kind == "closed-loop":
        ts = closed_loop_simulate(cfg)
        out.trajectory("closed_loop", ts)
        out.put("mode", cfg.controller.mode)
        _put_loop(out, "", ts)
        return
    runs = compare_estimators(cfg)
    (first, a), (second, b) = runs.items()
    for variant, ts in runs.items():
        out.trajectory(f"closed_loop_{variant}", ts)
        _put_loop(out, f"{variant}.", ts)
    ma, mb = loop_metrics(a), loop_metrics(b)
    out.put("primary", first)
    out.put("comparison", second)
    out.put("primary_better_omega", ma["rms_omega_err"] < mb["rms_omega_err"])
    out.put("primary_better_f", ma["rms_f_err"] < mb["rms_f_err"])


_RUNNERS = {
    "estimate": _run_estimate,
    "equivalence": _run_equivalence,
    "epsilon-sweep": _run_sweep,
    "convergence-race": _run_race,
    "closed-loop": _run_closed_loop,
    "closed-loop-compare": _run_closed_loop,
}


def run_scenario(config, out_dir=None, seed: Optional[int] = None) -> tuple[Scenario, _Output]:
    """Load, validate and run a scenario, writing outputs to ``out_dir``.

    Raises :class:`ConfigParseError`, :class:`ValidationError` or
    :class:`IntegrationError`; :func:`main` maps these to exit codes.
    """
    path = resolve_config(str(config))
    sc = load_scenario(path, seed)
    out_dir = Path(out_dir) if out_dir is not None else Path("out") / sc.name
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"output directory {out_dir} is not writable: {exc.strerror}") from None
    out = _Output(out_dir)
    out.put("scenario", sc.name)
    out.put("kind", sc.kind)
    out.put("seed", sc.noise.seed)
    _RUNNERS[sc.kind](sc, out)
    out.write_summary()
    out.files.append("summary.txt")
    return sc, out


def _cmd_run(args) -> int:
    _, out = run_scenario(args.config, args.out, args.seed)
    if not args.quiet:
        sys.stdout.write((out.dir / "summary.txt").read_text())
        print(f"wrote {len(out.files)} files to {out.dir}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    sc = load_scenario(resolve_config(args.config), args.seed)
    if not args.quiet:
        print(f"ok: {sc.path} ({sc.kind}, {sc.sim.nsteps} steps)")
    return EXIT_OK


def _cmd_list(args) -> int:
    for name, path in bundled_scenarios().items():
        try:
            sc = load_scenario(path)
            print(f"{name:<24} {sc.kind:<20} {SCENARIO_KINDS[sc.kind]}")
        except (ConfigParseError, ValidationError) as exc:
            print(f"{name:<24} invalid: {exc}")
    return EXIT_OK


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaindiff", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None, help="override the noise seed")
    common.add_argument("-q", "--quiet", action="store_true", help="suppress normal output")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run a scenario config")
    run.add_argument("config", help="config path or bundled scenario name")
    run.add_argument("--out", type=Path, default=None,
                     help="output directory (default: out/<scenario name>)")
    run.set_defaults(func=_cmd_run)
    val = sub.add_parser("validate", parents=[common], help="parse and validate a config")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)
    ls = sub.add_parser("list-scenarios", help="list bundled scenario configs")
    ls.set_defaults(func=_cmd_list)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IntegrationError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())

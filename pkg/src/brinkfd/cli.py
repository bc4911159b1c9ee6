"""
Command-line front end.

    brinkfd run    [--config FILE] [--epsilon E] [--beta B] [--n N] [--dt DT] [--preset paper]
    brinkfd sweep  [--epsilon LIST] [--beta LIST] [--out FILE.csv] [--svg] [--threads K]
    brinkfd check  [--inject-fault]
    brinkfd rates  FILE.csv [--floor-factor F]

Exit codes: 0 success, 1 usage or configuration error, 2 solver failure in
``run``, 3 failed self-check.
"""
import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

from . import analysis, timeloop
from .checks import run_checks
from .svgplot import loglog_chart
from .timeloop import REFERENCE_PRESET, RunConfig, SweepRecord

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3

HEADER = "beta,epsilon,h,dt,mu,err_l2_final,err_l2h1,max_div,max_energy,cond_estimate,wall_seconds,status"
DEFAULT_EPSILONS = [10.0**-k for k in range(8)]
DEFAULT_BETAS = [0.0, 0.2, 0.4, 0.6]

CONFIG_KEYS = {
    "n": int,
    "dt": float,
    "T": float,
    "epsilon": float,
    "beta": float,
    "mu": float,
    "delta_reg": float,
    "cut_depth": int,
    "solver_tol": float,
}


class ConfigError(ValueError):
    pass


def _check_value(key, value):
    """Validate one key in isolation; returns an error message or None."""
    try:
        replace(RunConfig(), **{key: value})
    except ValueError as exc:
        return str(exc)
    return None


def parse_config(text, base=None):
    """Parse flat ``key=value`` text into a :class:`RunConfig`.

    Blank lines and ``#`` comments are ignored. Errors name the line.
    """
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            parsed = CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigError(f"line {lineno}: cannot parse {value!r} for {key}") from None
        if CONFIG_KEYS[key] is float and not math.isfinite(parsed):
            raise ConfigError(f"line {lineno}: {key} must be finite")
        message = _check_value(key, parsed)
        if message:
            raise ConfigError(f"line {lineno}: {message}")
        values[key] = parsed
        lines[key] = lineno
    try:
        return replace(base or RunConfig(), **values)
    except ValueError as exc:
        raise ConfigError(f"line {max(lines.values(), default=0)}: {exc}") from None


def _fmt(value):
    if isinstance(value, str):
        return value
    if value is None:
        return "nan"
    return format(float(value), ".17g")


def record_row(record):
    return ",".join(_fmt(getattr(record, f.name)) for f in fields(SweepRecord))


def write_csv(records, stream):
    stream.write(HEADER + "\n")
    for r in records:
        stream.write(record_row(r) + "\n")


def read_csv(path):
    """Read a sweep CSV back into :class:`SweepRecord` objects."""
    text = Path(path).read_text()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError(f"{path}: empty file") from None
    if ",".join(h.strip() for h in header) != HEADER:
        raise ConfigError(f"{path}: unexpected header {','.join(header)!r}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ConfigError(f"{path}: line {lineno}: expected {len(header)} fields")
        try:
            vals = [float(v) for v in row[:-1]]
        except ValueError:
            raise ConfigError(f"{path}: line {lineno}: non-numeric field") from None
        out.append(SweepRecord(*vals, row[-1].strip()))
    return out


def _parse_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def _base_config(args):
    config = RunConfig()
    if getattr(args, "preset", None) == "paper":
        config = replace(config, **REFERENCE_PRESET)
    if getattr(args, "config", None):
        config = parse_config(Path(args.config).read_text(), base=config)
    over = {}
    if getattr(args, "n", None) is not None:
        over["n"] = args.n
    if getattr(args, "dt", None) is not None:
        over["dt"] = args.dt
    if getattr(args, "zero_forcing", False):
        over["zero_forcing"] = True
    if getattr(args, "cond", False):
        over["estimate_condition"] = True
    try:
        return replace(config, **over)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_run(config, stream=None):
    """Run one simulation and print the CSV header and its row."""
    stream = stream or sys.stdout
    _, record = timeloop.run(config)
    write_csv([record], stream)
    return record


def _run_point(config):
    return timeloop.run(config)[1]


def cmd_sweep(base, epsilons, betas, out=None, svg=False, threads=1, stream=None):
    """Run every (epsilon, beta) pair; rows come out in (epsilon, beta) order."""
    if not epsilons or not betas:
        raise ConfigError("epsilon and beta lists must be nonempty")
    configs = [replace(base, epsilon=e, beta=b) for e in epsilons for b in betas]
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_point, configs))
    else:
        records = []
        for c in configs:
            records.append(_run_point(c))
            log.info("eps=%g beta=%g -> %s", c.epsilon, c.beta, records[-1].status)
    if out is not None:
        out = Path(out)
        with out.open("w") as fh:
            write_csv(records, fh)
        if svg:
            for path in write_svgs(records, out):
                log.info("wrote %s", path)
    if stream is not None:
        write_csv(records, stream)
    return records


def write_svgs(records, csv_path):
    csv_path = Path(csv_path)
    paths = []
    for column, label in (("err_l2_final", "L2(Omega) error at t = T"),
                          ("err_l2h1", "L2(0,T;H1(Omega)) error")):
        series = {}
        for r in records:
            if r.status == "ok":
                series.setdefault(f"beta = {r.beta:g}", []).append((r.epsilon, getattr(r, column)))
        path = csv_path.with_name(f"{csv_path.stem}_{column}.svg")
        path.write_text(loglog_chart(series, label, "epsilon", column))
        paths.append(path)
    return paths


def rates_from_records(records, floor_factor=analysis.DEFAULT_FLOOR_FACTOR):
    """Per-beta fits of err_l2h1 against epsilon; returns ``{beta: RateFit}``."""
    by_beta = {}
    for r in records:
        if r.status == "ok" and math.isfinite(r.err_l2h1):
            by_beta.setdefault(r.beta, []).append((r.epsilon, r.err_l2h1))
    fits = {}
    for beta, pts in sorted(by_beta.items()):
        if len(pts) < 3:
            fits[beta] = analysis.RateFit(pts, float("nan"), (float("nan"),) * 2, False)
        else:
            fits[beta] = analysis.fit_rate(pts, floor_factor)
    return fits


def cmd_rates(path, floor_factor=analysis.DEFAULT_FLOOR_FACTOR, stream=None):
    stream = stream or sys.stdout
    fits = rates_from_records(read_csv(path), floor_factor)
    for beta, fit in fits.items():
        ref = analysis.rate_exponent(0, beta) / 2
        stream.write(f"beta={beta:g}: {fit.describe()} (theory A(0,beta)/2 = {ref:.4g})\n")
    return fits


def cmd_check(inject_fault=False, stream=None):
    stream = stream or sys.stdout
    results = run_checks(inject_fault=inject_fault)
    for r in results:
        stream.write(f"[{'PASS' if r.passed else 'FAIL'}] {r.name} ({r.seconds:.2f} s): {r.detail}\n")
    ok = all(r.passed for r in results)
    stream.write(f"{sum(r.passed for r in results)}/{len(results)} checks passed\n")
    return ok, results


def build_parser():
    parser = argparse.ArgumentParser(prog="brinkfd", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--n", type=int, help="background cells per side")
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--preset", choices=["paper"],
                       help="reference resolution n=160, dt=0.025 (slow: hours on one core)")
        p.add_argument("--zero-forcing", action="store_true", help="debug: set f = 0")
        p.add_argument("--cond", action="store_true", help="estimate condition numbers")

    p = sub.add_parser("run", help="run one simulation, print a CSV row")
    common(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--beta", type=float)

    p = sub.add_parser("sweep", help="run an epsilon x beta sweep")
    common(p)
    p.add_argument("--epsilon", default=",".join(f"{e:g}" for e in DEFAULT_EPSILONS))
    p.add_argument("--beta", default=",".join(f"{b:g}" for b in DEFAULT_BETAS))
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--svg", action="store_true", help="also write log-log SVG charts")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("check", help="run the invariant suite")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("rates", help="fit convergence rates from a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--floor-factor", type=float, default=analysis.DEFAULT_FLOOR_FACTOR)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            config = _base_config(args)
            over = {k: getattr(args, k) for k in ("epsilon", "beta") if getattr(args, k) is not None}
            try:
                config = replace(config, **over)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            record = cmd_run(config)
            return EXIT_OK if record.status == "ok" else EXIT_SOLVER
        if args.command == "sweep":
            config = _base_config(args)
            cmd_sweep(config, _parse_list(args.epsilon), _parse_list(args.beta), out=args.out,
                      svg=args.svg, threads=args.threads)
            return EXIT_OK
        if args.command == "check":
            ok, _ = cmd_check(inject_fault=args.inject_fault)
            return EXIT_OK if ok else EXIT_CHECK
        if args.command == "rates":
            cmd_rates(args.csv, args.floor_factor)
            return EXIT_OK
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

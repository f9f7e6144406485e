"""Command line entry point: ``ecmkdv {run,sweep,converge,verify,table1}``.

Exit codes: 0 success, 1 numerical failure, 2 configuration error,
3 symbolic verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import experiment as ex
from .conservation import ErrorReport
from .scheme import ConfigError
from .symbolic import verify_all

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_SYMBOLIC = 3


def _parse_lambdas(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad lambda list {text!r}") from exc
    if not vals:
        raise ConfigError("lambda list is empty")
    return vals


def _write(path: Path | None, name: str, text: str) -> None:
    if path is None:
        return
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)


def cmd_run(args) -> int:
    cfg = ex.load_config(args.config)
    result = ex.run(cfg)
    sys.stdout.write(ex.reports_to_csv([result.report]))
    if cfg.output_path:
        result.write(cfg.output_path)
    return EXIT_OK


def _sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ErrorReport.csv_header() + ["error"])
    n = len(ErrorReport.csv_header())
    for row in rows:
        if row.report is not None:
            w.writerow(row.report.csv_row() + [""])
        else:
            w.writerow(["EC", repr(row.lam)] + [""] * (n - 2) + [row.error])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    cfg = ex.load_config(args.config)
    rows = ex.sweep_lambda(cfg, _parse_lambdas(args.lambdas), jobs=args.jobs)
    text = _sweep_csv(rows)
    sys.stdout.write(text)
    _write(Path(cfg.output_path) if cfg.output_path else None, "sweep.csv", text)
    return EXIT_NUMERICAL if any(r.report is None for r in rows) else EXIT_OK


def cmd_converge(args) -> int:
    cfg = ex.load_config(args.config)
    rows = ex.convergence_study(cfg, args.levels)
    text = ex.rows_to_csv(rows)
    sys.stdout.write(text)
    _write(Path(cfg.output_path) if cfg.output_path else None, "convergence.csv", text)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify_all()
    ok = True
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}")
        if not c.passed:
            ok = False
            sys.stdout.write(c.witness.to_text())
    return EXIT_OK if ok else EXIT_SYMBOLIC


def cmd_table1(args) -> int:
    results = ex.table1()
    header = f"{'Method':<12}{'Err1':>11}{'Err2':>11}{'Err3':>11}{'sol_err':>10}   reference (Err1, Err2, Err3, sol_err)"
    print(header)
    print("-" * len(header))
    for res in results:
        r = res.report
        ref = ex.REFERENCE_ROWS[res.config.lam]
        print(
            f"{r.method:<12}{r.err1:>11.2e}{r.err2:>11.2e}{r.err3:>11.2e}{r.sol_err:>10.4f}"
            f"   {ref['err1']:.2e}, {ref['err2']:.2e}, {ref['err3']:.2e}, {ref['sol_err']:.4f}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecmkdv", description="Mass/energy conserving mKdV schemes: runs, sweeps, checks."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single soliton run from a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="one EC run per lambda")
    p.add_argument("config")
    p.add_argument("--lambdas", required=True, help="comma-separated list, e.g. 0.023,-0.07")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("converge", help="refinement study halving dx and dt per level")
    p.add_argument("config")
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("verify", help="exact Euler-operator certification of the scheme")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table1", help="EC(0.023) and EC(-0.07) at the benchmark settings")
    p.set_defaults(func=cmd_table1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ex.RunFailure as exc:
        print(
            f"numerical failure at step {exc.step_index}: {exc.cause} "
            f"(residual {exc.residual_norm:.3e})",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 optimizer non-convergence, 2 usage, 3 domain
(including a Brillouin violation or a degenerate distribution in ``eval``),
4 I/O or malformed CSV, 5 oracle verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import bounds, extremals, functionals, oracle
from .errors import (
    BrillouinViolationError,
    ConvergenceError,
    DegenerateDistributionError,
    DomainError,
    InvalidDistributionError,
)

EXIT_OK = 0
EXIT_CONVERGENCE = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4
EXIT_VERIFY = 5

TABLE_C_L = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, bounds.C_L_MAX)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    fmt: str = "pretty"
    out: Path | None = None
    tol: float | None = None
    n: int | None = None
    q: float | None = None
    branch: str | None = None
    samples: int = 2001
    descriptor: Path | None = None
    csv_in: Path | None = None
    u1: Path | None = None
    epsilon: float = 0.0
    restarts: int = 20
    seed: int = 0
    q_points: int = 10
    workers: int = 1

    def __post_init__(self):
        if self.tol is not None and not (self.tol > 0 and math.isfinite(self.tol)):
            raise DomainError(f"--tol must be positive, got {self.tol!r}")
        if self.workers < 1:
            raise DomainError(f"--workers must be >= 1, got {self.workers}")

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        fields = {k: v for k, v in vars(ns).items() if k in cls.__dataclass_fields__ and v is not None}
        for key in ("out", "descriptor", "csv_in", "u1"):
            if key in fields:
                fields[key] = Path(fields[key])
        return cls(**fields)


def _emit(cfg: RunConfig, text: str):
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text, encoding="utf-8", newline="\n")


def _csv_rows(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _c_l_label(c_l):
    if c_l == bounds.C_L_MAX:
        return "2/e"
    return f"{c_l:g}"


def cmd_table(cfg: RunConfig) -> int:
    rows = [(0.0, math.inf, 0.0)]
    for p in bounds.bound_points(TABLE_C_L[1:], workers=cfg.workers):
        rows.append((p.c_l, p.kappa_max, p.kappa_min))
    if cfg.fmt == "csv":
        text = _csv_rows(
            ("c_l", "kappa_max", "kappa_min"),
            ((functionals.format_number(c), functionals.format_number(a), functionals.format_number(b)) for c, a, b in rows),
        )
    else:
        lines = [f"{'C_L':>6}  {'kappa_max':>10}  {'kappa_min':>10}"]
        for c, a, b in rows:
            a_txt = "inf" if math.isinf(a) else f"{a:.6g}"
            lines.append(f"{_c_l_label(c):>6}  {a_txt:>10}  {b:>10.6g}")
        text = "\n".join(lines) + "\n"
    _emit(cfg, text)
    return EXIT_OK


def cmd_curves(cfg: RunConfig) -> int:
    points = bounds.bound_curve(cfg.n if cfg.n is not None else 50, workers=cfg.workers)
    _emit(cfg, bounds.bounds_csv_text(points))
    return EXIT_OK


def cmd_flatplate(cfg: RunConfig) -> int:
    _emit(cfg, bounds.flat_plate_csv_text(bounds.flat_plate_curve(cfg.n if cfg.n is not None else 50)))
    return EXIT_OK


def cmd_extremal(cfg: RunConfig) -> int:
    if cfg.q is None:
        raise DomainError("extremal needs --q")
    if cfg.samples < 2:
        raise DomainError(f"--samples must be >= 2, got {cfg.samples}")
    build = extremals.build_min_extremal if cfg.branch == "min" else extremals.build_max_extremal
    desc, _ = build(cfg.q)
    sigma, u = desc.sample(cfg.samples)
    _emit(cfg, functionals.distribution_csv_text(sigma, u))
    text = desc.to_text()
    if cfg.descriptor is not None:
        cfg.descriptor.write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_eval(cfg: RunConfig) -> int:
    qc = functionals.DEFAULT_CONFIG
    if cfg.tol is not None:
        qc = functionals.QuadratureConfig(tol_I=cfg.tol, tol_J=cfg.tol)
    u2 = functionals.read_distribution_csv(cfg.csv_in)
    u1 = functionals.read_distribution_csv(cfg.u1) if cfg.u1 is not None else None
    if cfg.epsilon > 0 and u1 is None:
        raise DomainError("--epsilon > 0 requires --u1")
    arcs = [("u2", u2)] + ([("u1", u1)] if u1 is not None else [])
    reports = {name: functionals.validate_brillouin(d, qc) for name, d in arcs}
    admissible = all(r.admissible for r in reports.values())
    coeffs = functionals.assemble_coefficients(cfg.epsilon, u1, u2, qc, check_brillouin=False)
    kappa = coeffs.kappa
    if cfg.fmt == "csv":
        f = functionals.format_number
        text = _csv_rows(("c_l", "c_d", "kappa", "admissible"), [(f(coeffs.c_l), f(coeffs.c_d), f(kappa), str(admissible).lower())])
    else:
        lines = [
            f"C_L   = {functionals.format_number(coeffs.c_l)}",
            f"C_D   = {functionals.format_number(coeffs.c_d)}",
            f"kappa = {functionals.format_number(kappa)}",
            f"Brillouin admissible: {'yes' if admissible else 'no'}",
        ]
        for name, r in reports.items():
            if not r.admissible:
                lines.append(f"  {name}: max u = {r.max_u:.10g} at sigma = {r.sigma_at_max:.6g}")
        text = "\n".join(lines) + "\n"
    _emit(cfg, text)
    if not admissible:
        bad = next(r for r in reports.values() if not r.admissible)
        raise BrillouinViolationError("distribution exceeds u = 1", bad)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.q_points < 0:
        raise DomainError(f"--q-points must be >= 0, got {cfg.q_points}")
    report = oracle.compare_report(
        oracle.default_q_grid(cfg.q_points),
        N=cfg.n if cfg.n is not None else 50,
        restarts=cfg.restarts,
        seed=cfg.seed,
        tol=cfg.tol,
    )
    _emit(cfg, report.csv_text() if cfg.fmt == "csv" else report.summary() + "\n")
    if cfg.out is not None and cfg.fmt == "csv":
        sys.stdout.write(report.summary() + "\n")
    return EXIT_OK if report.ok else EXIT_VERIFY


COMMANDS = {
    "table": cmd_table,
    "curves": cmd_curves,
    "extremal": cmd_extremal,
    "eval": cmd_eval,
    "flatplate": cmd_flatplate,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _global_flags(default):
    """Parent parser for the global flags; usable before or after the subcommand."""
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", dest="fmt", choices=("pretty", "csv"), default=default)
    p.add_argument("--out", metavar="PATH", default=default, help="write the main output here instead of stdout")
    p.add_argument("--tol", type=float, default=default, help="quadrature tolerance (eval) or oracle tolerance (verify)")
    p.add_argument("--workers", type=int, default=default, help="worker processes for curve rows")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitybounds",
        description="Drag and lift-to-drag bounds for infinite-cavity flow past a curved obstacle.",
        parents=[_global_flags(None)],
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="COMMAND")
    flags = _global_flags(argparse.SUPPRESS)

    sub.add_parser("table", parents=[flags], help="kappa_max and kappa_min at the tabulated lift coefficients")

    p = sub.add_parser("curves", parents=[flags], help="C_Dmin, C_Dmax curves as CSV")
    p.add_argument("--n", type=int, default=50, help="number of C_L points in (0, 2/e]")

    p = sub.add_parser("flatplate", parents=[flags], help="Rayleigh flat-plate reference curve as CSV")
    p.add_argument("--n", type=int, default=50, help="number of incidence angles in (0, pi/2]")

    p = sub.add_parser("extremal", parents=[flags], help="export an extremal distribution as sigma,u CSV")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--branch", choices=("min", "max"), required=True)
    p.add_argument("--samples", type=int, default=2001, help="uniform grid points (the junction is added)")
    p.add_argument("--descriptor", metavar="PATH", help="write the descriptor here instead of stderr")

    p = sub.add_parser("eval", parents=[flags], help="C_L, C_D and kappa of a user distribution")
    p.add_argument("csv_in", metavar="CSV", help="sigma,u samples of the u2 arc")
    p.add_argument("--u1", metavar="CSV", help="sigma,u samples of the u1 arc")
    p.add_argument("--epsilon", type=float, default=0.0)

    p = sub.add_parser("verify", parents=[flags], help="oracle check of the extremal curves")
    p.add_argument("--n", type=int, default=50, help="oracle grid size N")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--q-points", dest="q_points", type=int, default=10)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.from_namespace(ns)
        return COMMANDS[cfg.subcommand](cfg)
    except BrillouinViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DegenerateDistributionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except InvalidDistributionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``bellspec {spectrum,verify,sweep,bounds,table1}``.

Exit codes: 0 success, 1 bad input (malformed file, unknown suite,
unsupported request), 2 when a verification (``spectrum --verify`` or a
``verify`` suite) fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as bio
from .errors import BellSpecError, InvalidInputError
from .spectral import full_spectrum
from .tensor_core import N_MAX, cluster_projectors, hermitian_eig
from .verification import run_suite, suite_names
from .violation import (
    BUILTIN_STATES,
    OptimizerConfig,
    bounds_row,
    builtin_state,
    default_grid,
    sweep_phi,
    table1_states,
)

log = logging.getLogger("bellspec")

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    restarts: int | None = None
    tolerance: float = 1e-9
    n_max: int = N_MAX
    fmt: str = "csv"
    out: str | None = None

    def __post_init__(self):
        if self.seed < 0:
            raise InvalidInputError("--seed must be a non-negative integer")
        if self.restarts is not None and self.restarts < 1:
            raise InvalidInputError("--restarts must be >= 1")
        if not self.tolerance > 0:
            raise InvalidInputError("--tol must be positive")
        if not 1 <= self.n_max <= N_MAX:
            raise InvalidInputError(f"--n-max must be in 1..{N_MAX}")
        if self.fmt not in ("csv", "json"):
            raise InvalidInputError("--format must be csv or json")

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(restarts=self.restarts, seed=self.seed)


def _config(args, default_fmt="csv") -> RunConfig:
    return RunConfig(
        seed=args.seed,
        restarts=args.restarts,
        tolerance=args.tol,
        n_max=args.n_max,
        fmt=args.format or default_fmt,
        out=args.out,
    )


# -- spectrum ----------------------------------------------------------------


def _spectrum_check(op, spec, gap=1e-7) -> tuple[float, float, float]:
    """Eigenvalue, eigenvector-residual and projector deviations from ``eigh``."""
    m = op.matrix
    lam_num, vec_num = hermitian_eig(m)
    lam_cf = spec.eigenvalues()
    d_lam = float(np.max(np.abs(lam_num - lam_cf)))
    d_res = float(np.max(spec.residuals()))
    num = cluster_projectors(lam_num, vec_num, gap)
    cf = spec.projectors(gap)
    if len(num) != len(cf):
        return d_lam, d_res, float("inf")
    d_proj = max(float(np.max(np.abs(a[1] - b[1]))) for a, b in zip(num, cf))
    return d_lam, d_res, d_proj


def cmd_spectrum(args) -> int:
    cfg = _config(args)
    op = bio.parse_operator_spec(bio.load_json(args.spec), cfg.n_max)
    spec = full_spectrum(op)
    pairs = sorted(spec.pairs, key=lambda p: p.bits)
    rows = [(p.bits, p.theta, p.lam, p.f.real, p.f.imag) for p in pairs]
    header = ["omega_bits", "theta", "lambda", "f_re", "f_im"]
    status = EXIT_OK
    report = None
    if args.verify:
        d_lam, d_res, d_proj = _spectrum_check(op, spec)
        ok = max(d_lam, d_res) <= cfg.tolerance and d_proj <= max(cfg.tolerance, 1e-7)
        report = {"eigenvalue_deviation": d_lam, "max_residual": d_res, "projector_deviation": d_proj,
                  "verdict": "pass" if ok else "fail"}
        print(
            f"verify: eigenvalue deviation {bio.fmt(d_lam)}, residual {bio.fmt(d_res)}, "
            f"projector deviation {bio.fmt(d_proj)}: {report['verdict']}",
            file=sys.stderr,
        )
        status = EXIT_OK if ok else EXIT_VERIFY
    if cfg.fmt == "json":
        obj = {"n": op.n, "rows": [dict(zip(header, r)) for r in rows]}
        if report:
            obj["verify"] = report
        bio.emit(bio.json_text(obj), cfg.out)
    else:
        bio.emit(bio.csv_text(header, rows), cfg.out)
    return status


# -- verify ------------------------------------------------------------------


def _n_range(text: str) -> list[int]:
    try:
        if "-" in text:
            lo, hi = (int(x) for x in text.split("-", 1))
        elif ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError as exc:
        raise InvalidInputError(f"--n: expected N or A-B, got {text!r}") from exc
    if lo > hi:
        raise InvalidInputError(f"--n: empty range {text!r}")
    return list(range(lo, hi + 1))


def cmd_verify(args) -> int:
    if args.suite not in suite_names():
        print(f"bellspec: unknown suite {args.suite!r}; available suites:", file=sys.stderr)
        for name in suite_names():
            print(f"  {name}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _config(args, default_fmt="json")
    ns = [3] if args.suite == "mermin3-constraint" else _n_range(args.n)
    if max(ns) > cfg.n_max:
        raise InvalidInputError(f"--n exceeds the cap {cfg.n_max}")
    tol = args.tol if args.tol_given else None
    reports = [run_suite(args.suite, n, args.trials, cfg.seed, tol) for n in ns]
    if cfg.fmt == "json":
        bio.emit(bio.json_text([r.to_dict() for r in reports]), cfg.out)
    else:
        header = ["identity_name", "n", "trials", "max_residual", "skipped", "verdict"]
        rows = [[getattr(r, h) for h in header] for r in reports]
        bio.emit(bio.csv_text(header, rows), cfg.out)
    return EXIT_OK if all(r.verdict == "pass" for r in reports) else EXIT_VERIFY


# -- sweep -------------------------------------------------------------------


def cmd_sweep(args) -> int:
    cfg = _config(args)
    n = args.n
    if n < 3:
        raise InvalidInputError("sweep needs n >= 3; the two-qubit curve has the closed form sqrt(1 + sin^2 2phi)")
    if n > 5 and not args.conjecture:
        raise InvalidInputError("n > 5 is outside the verified range; pass --conjecture to run it anyway")
    if n > cfg.n_max:
        raise InvalidInputError(f"n={n} exceeds the cap {cfg.n_max}")
    result = sweep_phi(n, default_grid(args.grid), cfg.optimizer())
    threshold = "none" if result.threshold is None else bio.fmt(result.threshold)
    summary = (
        f"n={n} status={result.status} phi_N={threshold} "
        f"max_deviation={bio.fmt(result.max_deviation)} at_phi={bio.fmt(result.phi_max_deviation)}"
    )
    header = ["phi", "s_n", "s_guess", "converged"]
    if cfg.fmt == "json":
        obj = {
            "n": n,
            "status": result.status,
            "phi_N": result.threshold,
            "max_deviation": result.max_deviation,
            "phi_max_deviation": result.phi_max_deviation,
            "rows": [dict(zip(header, r)) for r in result.rows()],
        }
        bio.emit(bio.json_text(obj), cfg.out)
    else:
        bio.emit(bio.csv_text(header, result.rows(), footer=[summary]), cfg.out)
    unconverged = sum(not p.converged for p in result.points)
    if unconverged:
        log.info("%d of %d grid points hit the iteration limit", unconverged, len(result.points))
    return EXIT_OK


# -- bounds / table1 ---------------------------------------------------------

BOUNDS_HEADER = ["state_name", "s_minus", "s_rho", "s_plus"]


def _emit_bounds(rows, cfg: RunConfig) -> None:
    data = [(r.state_name, r.s_minus, r.s_rho, r.s_plus) for r in rows]
    if cfg.fmt == "json":
        bio.emit(bio.json_text([dict(zip(BOUNDS_HEADER, d)) for d in data]), cfg.out)
    else:
        bio.emit(bio.csv_text(BOUNDS_HEADER, data), cfg.out)


def cmd_bounds(args) -> int:
    cfg = _config(args)
    if args.state in BUILTIN_STATES:
        name, state = args.state, builtin_state(args.state)
    elif Path(args.state).exists():
        name, state = Path(args.state).stem, bio.parse_state_spec(bio.load_json(args.state), cfg.n_max)
    else:
        raise InvalidInputError(f"{args.state!r} is neither a file nor a builtin state ({', '.join(BUILTIN_STATES)})")
    if state.n != 3:
        raise InvalidInputError(f"bounds need a three-qubit state, {name} has {state.n} qubits")
    _emit_bounds([bounds_row(name, state, cfg.optimizer())], cfg)
    return EXIT_OK


def cmd_table1(args) -> int:
    cfg = _config(args)
    rows = [bounds_row(name, st, cfg.optimizer(), task=i) for i, (name, st) in enumerate(table1_states().items())]
    _emit_bounds(rows, cfg)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


class _TolAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.tol_given = True


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    common.add_argument("--restarts", type=int, default=None, help="random restarts per optimization")
    common.add_argument("--tol", type=float, default=1e-9, action=_TolAction, help="verification tolerance")
    common.add_argument("--n-max", type=int, default=N_MAX, help=f"qubit cap (default {N_MAX})")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")
    common.set_defaults(tol_given=False)

    p = argparse.ArgumentParser(prog="bellspec", description="Spectra and violations of two-setting Bell operators.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="closed-form GHZ spectrum of an operator spec")
    s.add_argument("spec", help="operator JSON file")
    s.add_argument("--verify", action="store_true", help="cross-check against a numeric eigensolver")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("verify", parents=[common], help="run an identity suite")
    s.add_argument("suite", help=", ".join(suite_names()))
    s.add_argument("--n", default="2-6", help="qubit count or range A-B (default 2-6)")
    s.add_argument("--trials", type=int, default=100)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="optimized S_n(phi) over a phi grid")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--grid", type=int, default=200, help="grid points on [0, pi/4]")
    s.add_argument("--conjecture", action="store_true", help="allow n > 5")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("bounds", parents=[common], help="S-, S and S+ for a three-qubit state")
    s.add_argument("state", help=f"state JSON file or one of: {', '.join(BUILTIN_STATES)}")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("table1", parents=[common], help="bounds for the four reference states")
    s.set_defaults(func=cmd_table1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="bellspec: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except BellSpecError as exc:
        print(f"bellspec: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

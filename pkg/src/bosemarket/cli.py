"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import __version__
from .enumeration import DEFAULT_MAX_CONFIGS, weighted_configs
from .equilibrium import (
    SolverConfig,
    condensation_report,
    excited_capacity,
    solve_equilibrium,
    sweep_condensation,
)
from .errors import (
    BadFlag,
    MarketError,
    NoConvergence,
    NumericalError,
    UnknownCommand,
)
from .indicators import (
    DEFAULT_TAU_OMEGA,
    DEFAULT_TAU_RETURN,
    DEFAULT_WINDOW,
    assess_crisis,
    marginal_returns,
    omega_exact,
)
from .io import RunReport, inputs_digest, load_grid, load_panel, load_series, render
from .model import Kind, MarketConstraints, to_fraction
from .sampler import run_chain

COMMANDS = (
    "solve", "capacity", "sweep", "enumerate", "mostprobable",
    "sample", "omega", "marginal", "assess",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "invalid choice" in message and "command" in message:
            raise UnknownCommand(f"{message}; commands: {', '.join(COMMANDS)}")
        raise BadFlag(f"{self.prog}: {message}")

    def exit(self, status=0, message=None):
        if status:
            raise BadFlag(message or "bad arguments")
        if message:
            sys.stderr.write(message)
        raise SystemExit(0)


def _number(text: str):
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None


def _kind(text: str) -> Kind:
    try:
        return Kind.parse(text)
    except MarketError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    # SUPPRESS lets these flags appear before or after the subcommand
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="output path, '-' for standard output")

    parser = _Parser(prog="bosemarket", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default="-")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    def solver_flags(p):
        p.add_argument("--threshold", type=float, default=0.10,
                       help="condensate fraction above which the market counts as condensed")
        p.add_argument("--max-outer", type=int, default=200)
        p.add_argument("--max-inner", type=int, default=200)

    p = add("solve", "most-probable continuous occupancies")
    p.add_argument("--grid", required=True)
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--return", dest="total_return", type=_number, required=True)
    p.add_argument("--kind", type=_kind, default=Kind.BOSE_EINSTEIN)
    p.add_argument("--condensation", action="store_true",
                   help="add the condensation report to the results")
    solver_flags(p)

    p = add("capacity", "excited-level capacity at a given beta")
    p.add_argument("--grid", required=True)
    p.add_argument("--beta", type=float, required=True)

    p = add("sweep", "condensate fraction over a range of agent counts")
    p.add_argument("--grid", required=True)
    p.add_argument("--return", dest="total_return", type=_number, required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--kind", type=_kind, default=Kind.BOSE_EINSTEIN)
    solver_flags(p)

    for name, help_ in (("enumerate", "all integer configurations with weights"),
                        ("mostprobable", "maximum-weight integer configurations")):
        p = add(name, help_)
        p.add_argument("--grid", required=True)
        p.add_argument("--agents", type=int, required=True)
        p.add_argument("--return", dest="total_return", type=_number, required=True)
        p.add_argument("--kind", type=_kind, default=Kind.BOSE_EINSTEIN)
        p.add_argument("--max-configs", type=int, default=DEFAULT_MAX_CONFIGS)

    p = add("sample", "Metropolis-Hastings chain over integer configurations")
    p.add_argument("--grid", required=True)
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--return", dest="total_return", type=_number, required=True)
    p.add_argument("--kind", type=_kind, default=Kind.BOSE_EINSTEIN)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--trace", default=None, help="write a per-step CSV trace to this path")

    p = add("omega", "resolving index of investment")
    p.add_argument("--panel", required=True)
    p.add_argument("--total-stocks", type=int, required=True)

    p = add("marginal", "marginal labor return from a production series")
    p.add_argument("--series", required=True)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)

    p = add("assess", "combined crisis alert")
    p.add_argument("--omega", dest="omega_value", type=float, default=None)
    p.add_argument("--panel", default=None)
    p.add_argument("--total-stocks", type=int, default=None)
    p.add_argument("--marginal", dest="marginal_value", type=float, default=None)
    p.add_argument("--series", default=None)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--tau-omega", type=float, default=DEFAULT_TAU_OMEGA)
    p.add_argument("--tau-return", type=float, default=DEFAULT_TAU_RETURN)
    return parser


def _solver_config(args) -> SolverConfig:
    return SolverConfig(max_outer=args.max_outer, max_inner=args.max_inner,
                        condensate_threshold=args.threshold)


def _weighted_rows(wcs) -> list[dict]:
    rows = []
    for wc in wcs:
        row = {f"n_{i}": c for i, c in enumerate(wc.config.counts)}
        row["weight_log"] = wc.log_weight
        row["weight_exact_decimal"] = str(wc.exact_weight)
        rows.append(row)
    return rows


def _run(args) -> tuple[dict, dict, Optional[int], int]:
    """Execute a parsed command: ``(results, input files, seed, exit code)``."""
    cmd = args.command
    code = 0
    seed = None
    if cmd == "solve":
        files = {"grid": args.grid}
        grid = load_grid(args.grid)
        cfg = _solver_config(args)
        sol = solve_equilibrium(grid, MarketConstraints(args.agents, args.total_return, args.kind), cfg)
        results = sol.to_dict()
        if args.condensation:
            results = {"solution": results,
                       "condensation": condensation_report(sol, grid, cfg).to_dict()}
    elif cmd == "capacity":
        files = {"grid": args.grid}
        grid = load_grid(args.grid)
        results = {"beta": args.beta, "excited_capacity": excited_capacity(grid, args.beta)}
    elif cmd == "sweep":
        files = {"grid": args.grid}
        grid = load_grid(args.grid)
        rows = sweep_condensation(grid, args.total_return, range(args.n_min, args.n_max + 1),
                                  args.kind, _solver_config(args))
        results = {"rows": [r.to_dict() for r in rows]}
        if any(not r.converged for r in rows):
            code = 2
    elif cmd in ("enumerate", "mostprobable"):
        files = {"grid": args.grid}
        grid = load_grid(args.grid)
        wcs = weighted_configs(grid, args.agents, args.total_return, args.kind, args.max_configs)
        if cmd == "mostprobable":
            best = max(wc.exact_weight for wc in wcs)
            wcs = [wc for wc in wcs if wc.exact_weight == best]
        results = {"rows": _weighted_rows(wcs)}
    elif cmd == "sample":
        files = {"grid": args.grid}
        grid = load_grid(args.grid)
        seed = 0 if args.seed is None else args.seed
        if args.trace:
            with open(args.trace, "w", encoding="utf-8", newline="") as fh:
                summary = run_chain(grid, args.agents, args.total_return, args.kind,
                                    args.steps, args.burn_in, seed, trace=fh)
        else:
            summary = run_chain(grid, args.agents, args.total_return, args.kind,
                                args.steps, args.burn_in, seed)
        results = summary.to_dict()
    elif cmd == "omega":
        files = {"panel": args.panel}
        panel = load_panel(args.panel, args.total_stocks)
        w = omega_exact(panel)
        results = {"omega": float(w), "omega_exact": str(w),
                   "investors": panel.n_investors, "total_stocks": panel.total_stocks}
    elif cmd == "marginal":
        files = {"series": args.series}
        labor, capital = marginal_returns(load_series(args.series), args.window)
        results = {"marginal_return": labor, "capital_return": capital, "window": args.window}
    elif cmd == "assess":
        files = {"panel": args.panel, "series": args.series}
        if (args.omega_value is None) == (args.panel is None):
            raise BadFlag("assess: give exactly one of --omega or --panel")
        if (args.marginal_value is None) == (args.series is None):
            raise BadFlag("assess: give exactly one of --marginal or --series")
        if args.panel is not None:
            if args.total_stocks is None:
                raise BadFlag("assess: --panel needs --total-stocks")
            w = float(omega_exact(load_panel(args.panel, args.total_stocks)))
        else:
            w = args.omega_value
        if args.series is not None:
            mr = marginal_returns(load_series(args.series), args.window)[0]
        else:
            mr = args.marginal_value
        results = assess_crisis(w, mr, args.tau_omega, args.tau_return).to_dict()
    else:  # pragma: no cover - argparse restricts choices
        raise UnknownCommand(cmd)
    return results, files, seed, code


def _flags(args) -> dict:
    flags = {}
    for k, v in sorted(vars(args).items()):
        if k == "out":
            continue
        if isinstance(v, Kind):
            v = v.value
        flags[k] = str(v) if not isinstance(v, (int, float, bool, type(None), str)) else v
    return flags


def dispatch(
    argv: Optional[Sequence[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Run one command and write its report; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        results, files, seed, code = _run(args)
        digest = inputs_digest({k: v for k, v in files.items()}, _flags(args))
        report = RunReport(args.command, digest, results, __version__, seed)
        text = render(report, args.format)
        if args.out == "-":
            stdout.write(text)
        else:
            Path(args.out).write_text(text, encoding="utf-8")
        return code
    except NoConvergence as exc:
        stderr.write(f"error: NoConvergence: {exc}\n")
        return 2
    except NumericalError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    except MarketError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    return dispatch(argv)


def run_capture(argv: Sequence[str]) -> tuple[int, str, str]:
    """Run ``dispatch`` and return ``(code, stdout, stderr)`` as strings."""
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(argv, out, err)
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

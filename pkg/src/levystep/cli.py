"""Command-line front end.

Subcommands
-----------
scale     W^(q) and Z^(q) on a grid of x in [0, --x]
density   joint density y -> v(x, y) of the occupation transform
price     step-option price curve over --maturities
simulate  Monte Carlo estimates with standard errors
check     built-in identity suite

Interval flags for ``density`` and ``simulate --functional joint``:
``--b`` alone selects the half-line (-inf, b); ``--a`` alone selects (0, a);
both select (a, b).

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalError
from .identities import run_identity_suite
from .levy_model import HyperExpModel
from .mc_oracle import SimConfig, estimate_exit, estimate_joint, estimate_option_curve
from .occupation import Finite, HalfLineBelow, TransformQuery, default_grid, density_slice
from .pricing import StepOptionContract, price_step_option
from .scale_fn import ScaleEvaluator

COMMANDS = ("scale", "density", "price", "simulate", "check")


class UsageError(ValueError):
    """Invalid command-line input (exit code 1)."""


@dataclass
class RunSpec:
    """A parsed invocation: command, model file, parameters and output target."""

    command: str
    model_path: str
    params: dict = field(default_factory=dict)
    output_path: Optional[str] = None


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _finite_floats(params: dict):
    for k, v in params.items():
        if isinstance(v, float) and not math.isfinite(v):
            raise UsageError(f"--{k} must be finite, got {v}")
        if isinstance(v, tuple) and any(not math.isfinite(t) for t in v):
            raise UsageError(f"--{k} values must be finite")


def _need(params: dict, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + n for n in missing))
    return [params[n] for n in names]


def _interval(params: dict):
    a, b = params.get("a"), params.get("b")
    if a is not None and b is not None:
        return Finite(a, b)
    if b is not None:
        return HalfLineBelow(b)
    if a is not None:
        return Finite(0.0, a)
    raise UsageError("an interval needs --a and/or --b")


def _contract(params: dict) -> StepOptionContract:
    spot, strike, barrier = _need(params, "spot", "strike", "barrier")
    return StepOptionContract(spot, strike, barrier, knock_out_rate=params.get("rho") or 0.0,
                              rate=params.get("rate") or 0.0)


def _maturities(params: dict):
    return params.get("maturities") or (1.0,)


def _sim_config(params: dict) -> SimConfig:
    return SimConfig(n_paths=params.get("paths") or 100_000, dt=params.get("dt") or 1e-3,
                     seed=params.get("seed") or 0)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_scale(model: HyperExpModel, params: dict) -> str:
    (q,) = _need(params, "q")
    top = params.get("x") if params.get("x") is not None else 5.0
    if not top > 0:
        raise UsageError("--x must be > 0 for the scale grid")
    n = params.get("grid") or 101
    xs = np.linspace(0.0, top, n)
    ev = ScaleEvaluator(model, q)
    w, z = np.atleast_1d(ev.w(xs)), np.atleast_1d(ev.z(xs))
    buf = io.StringIO()
    buf.write(f"# q={q!r}\n# model={model.fingerprint()}\nx,W,Z\n")
    for row in zip(xs, w, z):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _cmd_density(model: HyperExpModel, params: dict) -> str:
    p, x = _need(params, "p", "x")
    q = params.get("q") or 0.0
    query = TransformQuery(p, q, _interval(params), x)
    return density_slice(model, query, n=params.get("grid") or 513).to_csv()


def _cmd_price(model: HyperExpModel, params: dict) -> str:
    curve = price_step_option(model, _contract(params), _maturities(params),
                              method=params.get("method") or "talbot", force=bool(params.get("force")))
    return curve.to_csv()


def _cmd_simulate(model: HyperExpModel, params: dict) -> str:
    cfg = _sim_config(params)
    kind = params.get("functional") or "option"
    buf = io.StringIO()
    if kind == "option":
        Ts = sorted(_maturities(params))
        ests = estimate_option_curve(model, _contract(params), Ts, cfg)
        buf.write("T,price,std_error,n_effective\n")
        for T, e in zip(Ts, ests):
            buf.write(f"{_fmt(T)},{_fmt(e.mean)},{_fmt(e.std_error)},{e.n_effective}\n")
    elif kind == "exit":
        a, b, x = _need(params, "a", "b", "x")
        ex = estimate_exit(model, x, a, b, params.get("q") or 0.0, cfg)
        buf.write("side,estimate,std_error,n_effective\n")
        for side, e in (("up", ex.up), ("down", ex.down)):
            buf.write(f"{side},{_fmt(e.mean)},{_fmt(e.std_error)},{e.n_effective}\n")
    else:
        p, x = _need(params, "p", "x")
        q = params.get("q") or 0.0
        edges = default_grid(model, p, x, (params.get("grid") or 40) + 1)
        h = estimate_joint(model, x, p, q, _interval(params), edges, cfg)
        buf.write(f"# total_mass={_fmt(h.total_mass.mean)} se={_fmt(h.total_mass.std_error)}\n")
        buf.write("y_lo,y_hi,density,std_error\n")
        for lo, hi, e in zip(edges[:-1], edges[1:], h.bins):
            buf.write(f"{_fmt(lo)},{_fmt(hi)},{_fmt(e.mean)},{_fmt(e.std_error)}\n")
    return buf.getvalue()


def _cmd_check(model: HyperExpModel, params: dict) -> tuple:
    results = run_identity_suite(model, seed=params.get("seed") or 0)
    text = "".join(r.line() + "\n" for r in results)
    return text, all(r.passed for r in results)


def run(spec: RunSpec) -> int:
    """Execute one command; returns the process exit code."""
    try:
        if spec.command not in COMMANDS:
            raise UsageError(f"unknown command {spec.command!r}")
        _finite_floats(spec.params)
        try:
            model = HyperExpModel.load(spec.model_path)
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read model {spec.model_path!r}: {exc}") from exc
        ok = True
        if spec.command == "check":
            text, ok = _cmd_check(model, spec.params)
        else:
            text = globals()[f"_cmd_{spec.command}"](model, spec.params)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if spec.output_path:
        with open(spec.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> tuple:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="levystep", description=__doc__.split("\n")[0],
                 epilog="Exit codes: 0 success, 1 invalid input, 2 numerical failure.")
    ap.add_argument("command", choices=COMMANDS, help="what to compute")
    ap.add_argument("--model", required=True, metavar="FILE", help="JSON model file")
    ap.add_argument("--p", type=float, help="exponential-time rate p > 0")
    ap.add_argument("--q", type=float, help="occupation discount q >= 0 (scale: the level q)")
    ap.add_argument("--rho", type=float, help="knock-out rate per unit of time at or below the barrier")
    ap.add_argument("--a", type=float, help="interval lower end (alone: interval (0, a))")
    ap.add_argument("--b", type=float, help="interval upper end (alone: half-line (-inf, b))")
    ap.add_argument("--x", type=float, help="start point (scale: grid upper end, default 5)")
    ap.add_argument("--spot", type=float, help="spot price S0")
    ap.add_argument("--strike", type=float, help="strike K")
    ap.add_argument("--barrier", type=float, help="barrier L")
    ap.add_argument("--rate", type=float, help="risk-free rate r (default 0)")
    ap.add_argument("--maturities", type=_float_list, metavar="T1,T2,...", help="maturities (default 1)")
    ap.add_argument("--grid", type=_positive_int, metavar="N",
                    help="grid points (scale 101, density 513) or histogram bins (simulate 40)")
    ap.add_argument("--paths", type=_positive_int, metavar="N", help="Monte Carlo paths (default 100000)")
    ap.add_argument("--dt", type=float, help="Monte Carlo time step (default 1e-3)")
    ap.add_argument("--seed", type=int, help="random seed (default 0)")
    ap.add_argument("--method", choices=("talbot", "gs"), help="Laplace inversion method (default talbot)")
    ap.add_argument("--functional", choices=("option", "exit", "joint"),
                    help="simulate: step-option price, two-sided exit, or joint histogram (default option)")
    ap.add_argument("--force", action="store_true", help="price: keep points with a large inversion error")
    ap.add_argument("--out", metavar="FILE", help="output file (default stdout)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("command", "model", "out")}
    return run(RunSpec(args.command, args.model, params, args.out))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

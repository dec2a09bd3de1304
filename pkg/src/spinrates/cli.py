"""Command-line front end: parameter sweeps written as manifest-headed CSV files.

Every data file records the command and its fully resolved parameters, so
``spinrates rerun FILE`` regenerates it byte for byte.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__, datafile
from .chain import ChainSpec, amplitude, diagonalize
from .errors import NumericalError
from .plotting import plot_script
from .protocols import (
    dual_rail_series,
    dual_rail_tilted_rate,
    entanglement_assisted_rate,
    multi_excitation_rate,
    plain_rate,
)
from .simulator import simulate_dual_rail, simulate_multi_excitation

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(ValueError):
    pass


@dataclass
class Table:
    columns: list
    rows: list
    seed: int | None = None
    extra: dict = field(default_factory=dict)


# -- flag parsing ---------------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` -> [a, a+step, ..., <= b]; a single number is a one-point grid."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected a:b:step") from None
    if len(values) == 1:
        return values
    if len(values) != 3:
        raise UsageError(f"bad grid {text!r}; expected a:b:step")
    a, b, step = values
    if not step > 0 or b < a:
        raise UsageError(f"grid {text!r} is empty or has a nonpositive step")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [a + step * i for i in range(count)]


def parse_list(text: str, kind=float) -> list:
    try:
        out = [kind(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad list {text!r}") from None
    if not out:
        raise UsageError("empty list")
    return out


def parse_encodings(text: str) -> list[list[int]]:
    out = []
    for item in text.split(","):
        e, sep, n = item.partition(":")
        try:
            out.append([int(e), int(n)])
        except ValueError:
            raise UsageError(f"bad encoding {item!r}; expected E:M") from None
        if not sep:
            raise UsageError(f"bad encoding {item!r}; expected E:M")
        if not 1 <= out[-1][0] <= out[-1][1] - 1:
            raise UsageError(f"encoding {item!r} needs 1 <= E <= M - 1")
    return out


def _chain(params) -> ChainSpec:
    if params["chain"] == "xy-pair":
        return ChainSpec.pair(params["j"], params["delta"])
    return ChainSpec.heisenberg(params["n"], params["j"])


# -- commands -------------------------------------------------------------------


def run_amplitudes(p) -> Table:
    table = diagonalize(_chain(p))
    t = np.array(parse_grid(p["t"]))
    n = table.n_spins
    g1n = np.abs(amplitude(table, 1, n, t)) ** 2
    gnn = np.abs(amplitude(table, n, n, t)) ** 2
    return Table(["t", "g1N_abs2", "gNN_abs2"], list(zip(t, g1n, gnn)))


def run_fig2(p) -> Table:
    table = diagonalize(ChainSpec.pair(p["j"], p["delta"]))
    taus = parse_grid(p["tau"])
    cols = ["tau"] + [f"plain_n{n}" for n in p["n_swaps"]]
    if p["encoding"]:
        cols.append("two_spin_encoding")
    if p["entanglement_assisted"]:
        cols.append("entanglement_assisted")
    rows = []
    for tau in taus:
        row = [tau] + [plain_rate(table, tau, n) for n in p["n_swaps"]]
        if p["encoding"]:
            row.append(_quiet(multi_excitation_rate, table, tau, 1, 2))
        if p["entanglement_assisted"]:
            row.append(entanglement_assisted_rate(table, tau))
        rows.append(row)
    return Table(cols, rows)


def _quiet(fn, *args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*args)


def run_fig3(p) -> Table:
    table = diagonalize(ChainSpec.pair(p["j"], p["delta"]))
    cols = ["tau", "standard"] + [f"enc_{e}_{m}" for e, m in p["encodings"]]
    rows = []
    for tau in parse_grid(p["tau"]):
        row = [tau, plain_rate(table, tau)]
        row += [_quiet(multi_excitation_rate, table, tau, e, m) for e, m in p["encodings"]]
        rows.append(row)
    return Table(cols, rows)


def run_fig4(p) -> Table:
    table = diagonalize(_chain(p))
    rows, missed = [], 0
    for tau in parse_grid(p["tau"]):
        series = dual_rail_series(table, tau * np.arange(1, p["kmax"] + 1, dtype=float))
        rate = math.nan
        if series.converged():
            rate = 1.0 / series.mean_time / (2.0 if p["feedback"] == "quantum" else 1.0)
        else:
            missed += 1
        rows.append([tau, rate, series.mass])
    return Table(["tau", "rate", "mass"], rows, extra={"unconverged": missed})


def run_fig5(p) -> Table:
    tau = p["tau"]
    duration = p["duration"] * tau
    rows = []
    if p["protocol"] == "multi-excitation":
        table = diagonalize(ChainSpec.pair(p["j"], p["delta"]))
        for e, m in p["encodings"]:
            trace = simulate_multi_excitation(table, tau, e, m, duration, p["seed"])
            analytic = _quiet(multi_excitation_rate, table, tau, e, m)
            rows += _trace_rows(f"{e}:{m}", trace, tau, analytic)
    else:
        table = diagonalize(_chain(p))
        for mode in p["feedback"]:
            trace = simulate_dual_rail(table, tau, p["kmax"], mode, duration, p["seed"])
            analytic = 1.0 / trace.metadata["mean_transfer_time"]
            if mode == "quantum":
                analytic /= 2.0
            rows += _trace_rows(mode, trace, tau, analytic)
    return Table(["series", "t_over_tau", "rate_instantaneous", "analytic_rate"], rows, seed=p["seed"])


def _trace_rows(label, trace, tau, analytic):
    rates = trace.rate(trace.event_times)
    return [[label, t / tau, r, analytic] for t, r in zip(trace.event_times, rates)]


def run_fig6(p) -> Table:
    table = diagonalize(_chain(p))
    cols = ["tau"]
    for eps in p["epsilon"]:
        cols += [f"rate_eps{eps:g}", f"stderr_eps{eps:g}"]
    rows, missed = [], 0
    for tau in parse_grid(p["tau"]):
        row = [tau]
        for eps in p["epsilon"]:
            if eps >= tau:
                row += [math.nan, math.nan]
                continue
            try:
                res = dual_rail_tilted_rate(table, tau, eps, p["kmax"], p["realizations"], p["seed"])
                row += [res.mean, res.stderr]
                missed += len(res.unconverged)
            except NumericalError:
                row += [math.nan, math.nan]
                missed += p["realizations"]
        rows.append(row)
    return Table(cols, rows, seed=p["seed"], extra={"unconverged": missed})


RUNNERS = {
    "amplitudes": run_amplitudes,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "fig6": run_fig6,
}


def execute(command, params, output, timestamp=None) -> str:
    """Run ``command`` and return the complete file text."""
    result = RUNNERS[command](params)
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    manifest = datafile.Manifest(command, params, result.seed, __version__, timestamp, output, result.extra)
    return datafile.render(manifest, result.columns, result.rows)


def _write(text, out):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# -- argument parser --------------------------------------------------------------


def _chain_flags(sp, chain="heisenberg", n=8):
    sp.add_argument("--chain", choices=["xy-pair", "heisenberg"], default=chain)
    sp.add_argument("--n", type=int, default=n, help="number of spins (heisenberg)")
    _pair_flags(sp)


def _pair_flags(sp):
    sp.add_argument("--j", type=float, default=0.25, help="coupling J")
    sp.add_argument("--delta", type=float, default=0.0, help="ZZ anisotropy (xy-pair)")


def build_parser():
    parser = argparse.ArgumentParser(prog="spinrates", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("amplitudes", help="|gamma_1N(t)|^2 and |gamma_NN(t)|^2 on a time grid")
    _chain_flags(sp)
    sp.add_argument("--t", default="0:20:0.01", help="time grid a:b:step")

    sp = sub.add_parser("fig2", help="two-spin plain-scheme rates vs tau")
    _pair_flags(sp)
    sp.add_argument("--tau", default="0.02:6.28:0.02")
    sp.add_argument("--n-swaps", default="0,1,2,3", help="comma list of extra receiver swaps")
    sp.add_argument("--no-encoding", action="store_true", help="omit the two-spin encoding curve")
    sp.add_argument("--no-entanglement-assisted", action="store_true", help="omit the r_E curve")

    sp = sub.add_parser("fig3", help="multi-excitation encoding rates vs tau")
    _pair_flags(sp)
    sp.add_argument("--tau", default="0.02:6.28:0.02")
    sp.add_argument("--encoding", default="1:2,2:3,3:4", help="comma list of E:M")

    sp = sub.add_parser("fig4", help="dual-rail rate vs tau")
    _chain_flags(sp)
    sp.add_argument("--tau", default="1:20:0.05")
    sp.add_argument("--kmax", type=int, default=100_000)
    sp.add_argument("--feedback", choices=["classical", "quantum"], default="classical")

    sp = sub.add_parser("fig5", help="Monte Carlo instantaneous-rate traces")
    _chain_flags(sp)
    sp.add_argument("--protocol", choices=["dual-rail", "multi-excitation"], default="dual-rail")
    sp.add_argument("--tau", type=float, default=None, help="default 8.5 (dual-rail) or 2 (multi-excitation)")
    sp.add_argument("--kmax", type=int, default=100_000)
    sp.add_argument("--feedback", default="classical,quantum", help="comma list of feedback modes")
    sp.add_argument("--encoding", default="1:2,2:3,3:4", help="E:M list (multi-excitation)")
    sp.add_argument("--duration", type=float, default=5000.0, help="simulated time in units of tau")
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("fig6", help="dual-rail rate with randomly tilted measurement times")
    _chain_flags(sp)
    sp.add_argument("--tau", default="0.5:40:0.5")
    sp.add_argument("--epsilon", default="0,0.01,0.02,0.04", help="comma list of tilt half-widths")
    sp.add_argument("--kmax", type=int, default=5000)
    sp.add_argument("--realizations", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)

    for sp in sub.choices.values():
        sp.add_argument("--out", default="-", help="output file (default stdout)")

    sp = sub.add_parser("plot", help="write a matplotlib script for a data file")
    sp.add_argument("data")
    sp.add_argument("--style", choices=["auto", "line", "step"], default="auto")
    sp.add_argument("--out", default="-")

    sp = sub.add_parser("rerun", help="regenerate a data file from its manifest")
    sp.add_argument("data")
    sp.add_argument("--out", default="-")
    return parser


def resolve_params(args) -> dict:
    """Turn parsed flags into the JSON-serializable parameter set stored in manifests."""
    c = args.command
    p = {}
    if hasattr(args, "j"):
        p.update(j=args.j, delta=args.delta)
    if hasattr(args, "chain"):
        p.update(chain=args.chain, n=2 if args.chain == "xy-pair" else args.n)
    if c == "amplitudes":
        parse_grid(args.t)
        p["t"] = args.t
    elif c == "fig2":
        p.update(
            tau=args.tau,
            n_swaps=parse_list(args.n_swaps, int),
            encoding=not args.no_encoding,
            entanglement_assisted=not args.no_entanglement_assisted,
        )
    elif c == "fig3":
        p.update(tau=args.tau, encodings=parse_encodings(args.encoding))
    elif c == "fig4":
        p.update(tau=args.tau, kmax=args.kmax, feedback=args.feedback)
    elif c == "fig5":
        modes = parse_list(args.feedback, str)
        if any(m not in ("classical", "quantum") for m in modes):
            raise UsageError(f"bad feedback list {args.feedback!r}")
        default_tau = 8.5 if args.protocol == "dual-rail" else 2.0
        p.update(
            protocol=args.protocol,
            tau=default_tau if args.tau is None else args.tau,
            kmax=args.kmax,
            feedback=modes,
            encodings=parse_encodings(args.encoding),
            duration=args.duration,
            seed=args.seed,
        )
    elif c == "fig6":
        p.update(
            tau=args.tau,
            epsilon=parse_list(args.epsilon),
            kmax=args.kmax,
            realizations=args.realizations,
            seed=args.seed,
        )
    if "tau" in p and isinstance(p["tau"], str):
        parse_grid(p["tau"])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plot":
            text = plot_script(args.data, args.style)
        elif args.command == "rerun":
            manifest, _, _ = datafile.read(args.data)
            if manifest is None or manifest.command not in RUNNERS:
                raise UsageError(f"{args.data} carries no rerunnable manifest")
            if manifest.version != __version__:
                print(f"warning: file written by version {manifest.version}, running {__version__}", file=sys.stderr)
            text = execute(manifest.command, manifest.params, manifest.output, manifest.timestamp)
        else:
            text = execute(args.command, resolve_params(args), args.out)
    except (UsageError, ValueError, OSError) as exc:
        print(f"spinrates {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"spinrates {args.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _write(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

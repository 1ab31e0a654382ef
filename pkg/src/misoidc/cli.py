"""
Command-line front end.

Every subcommand writes CSV (or channel JSON for `gen`) to --out or stdout. The
first line of every CSV is a `#` comment recording the tool version and the full
flag set, so an output file says how to reproduce itself.
"""
from __future__ import annotations
import argparse
import contextlib
import csv
import math
import sys
from enum import Enum
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, TextIO

from . import __version__
from .channel import Channel, ChannelKind, channel_to_json, gen_iid, gen_symmetric, load_channel
from .config import (DEFAULT_N, DEFAULT_SEED, DEFAULT_TRIALS, ORACLE_N_LAMBDA, ORACLE_N_PHASE,
                     ORACLE_N_POWER, SPHERE_RESOLUTION, Grids, configure_logging, snr_db_to_pmax)
from .errors import MisoError
from .experiments import montecarlo
from .heuristic import simple_select
from .mrt import dd_mrt_check, dn_mrt_check, nd_mrt_check
from .oracle import GridScope, GridSpec, oracle_max
from .pareto import iter_region_blocks, power_region_table
from .rates import STRUCTURES, DecodingStructure, tdma_sum_rate
from .sumrate import max_sum_rate

Rows = Iterable[Sequence[object]]


# ---- argument types ----

def _int_at_least(lo: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v
    return parse


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _positive(text: str) -> float:
    v = _finite(text)
    if v <= 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _unit_interval(text: str) -> float:
    v = _finite(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _theta(text: str) -> float:
    v = _finite(text)
    if not 0.0 <= v <= math.pi / 2:
        raise argparse.ArgumentTypeError(f"must lie in [0, pi/2], got {v}")
    return v


def _list_of(item: Callable[[str], float]) -> Callable[[str], List[float]]:
    def parse(text: str) -> List[float]:
        parts = [p for p in text.split(",") if p.strip()]
        if not parts:
            raise argparse.ArgumentTypeError("expected a comma-separated list")
        return [item(p.strip()) for p in parts]
    return parse


def _structure(text: str) -> DecodingStructure:
    try:
        return DecodingStructure(text.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(f"structure must be one of nn, nd, dn, dd, got {text!r}")


# ---- output ----

def _fmt(v: object) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Enum):
        return str(v.value)
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _stamp(args: argparse.Namespace) -> str:
    flags = " ".join(f"{k}={_fmt(v) if not isinstance(v, list) else ','.join(_fmt(x) for x in v)}"
                     for k, v in sorted(vars(args).items())
                     if k not in ("func", "verbose") and v is not None)
    return f"# misoidc {__version__} {flags}"


@contextlib.contextmanager
def _output(args: argparse.Namespace) -> Iterator[TextIO]:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            yield f
    else:
        yield sys.stdout


def _write_csv(args: argparse.Namespace, header: Sequence[str], rows: Rows) -> None:
    with _output(args) as f:
        f.write(_stamp(args) + "\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


# ---- channel source ----

def _channel(args: argparse.Namespace) -> Channel:
    if args.channel:
        return load_channel(args.channel)
    if ChannelKind(args.kind) == ChannelKind.SYMMETRIC:
        return gen_symmetric(args.n, args.theta, args.sir, args.seed)
    return gen_iid(args.n, args.seed)


def _grids(args: argparse.Namespace) -> Grids:
    return Grids(args.grid_lambda or Grids().n_lambda, args.grid_power or Grids().n_power)


def _structures(args: argparse.Namespace) -> Sequence[DecodingStructure]:
    return (args.structure,) if args.structure else STRUCTURES


# ---- subcommands ----

def _source(args: argparse.Namespace) -> dict:
    if args.channel:
        return {"tool": f"misoidc {__version__}", "file": args.channel}
    src = {"tool": f"misoidc {__version__}", "kind": args.kind, "n": args.n, "seed": args.seed}
    if ChannelKind(args.kind) == ChannelKind.SYMMETRIC:
        src.update(theta=args.theta, sir=args.sir)
    return src


def cmd_gen(args: argparse.Namespace) -> None:
    text = channel_to_json(_channel(args), source=_source(args))
    with _output(args) as f:
        f.write(text)


def cmd_region(args: argparse.Namespace) -> None:
    ch = _channel(args)
    p = snr_db_to_pmax(args.snr_db)

    def rows():
        for s in _structures(args):
            for block in iter_region_blocks(s, ch, p, _grids(args)):
                for k in range(len(block)):
                    yield (s.value, float(block.lambda1[k]), float(block.lambda2[k]), float(block.p1[k]),
                           float(block.p2[k]), float(block.r1[k]), float(block.r2[k]))

    _write_csv(args, ("structure", "lambda1", "lambda2", "p1", "p2", "r1", "r2"), rows())


def cmd_powerregion(args: argparse.Namespace) -> None:
    ch = _channel(args)
    p = snr_db_to_pmax(args.snr_db)
    g = _grids(args)
    rows = []
    for user in (1, 2):
        t = power_region_table(ch, user, p, g.n_lambda, g.n_power)
        rows.extend((user, float(a), float(b), float(c), float(d))
                    for a, b, c, d in zip(t.lam, t.power, t.desired, t.interference))
    _write_csv(args, ("user", "lambda", "power", "desired", "interference"), rows)


def cmd_sumrate(args: argparse.Namespace) -> None:
    ch = _channel(args)
    p = snr_db_to_pmax(args.snr_db)
    res = max_sum_rate(ch, p, _grids(args), _structures(args))
    rows = []
    for s in STRUCTURES:
        if s in res.per_structure:
            t = res.per_structure_best[s]
            rows.append((s.value, res.per_structure[s], t.lambda1, t.lambda2))
    rows.append(("tdma", tdma_sum_rate(ch, p, args.share), None, None))
    rows.append(("max", res.rate, res.best.lambda1, res.best.lambda2))
    _write_csv(args, ("structure", "rate", "lambda1", "lambda2"), rows)


def cmd_mrt(args: argparse.Namespace) -> None:
    ch = _channel(args)
    p = snr_db_to_pmax(args.snr_db)
    seed = None if args.channel else args.seed
    sp, ip, per_user = dd_mrt_check(ch, p)
    verdicts = list(nd_mrt_check(ch, p)) + list(dn_mrt_check(ch, p)) + [sp, ip] + list(per_user)
    rows = [(seed, v.structure.value, v.strategy.value, v.user, v.holds, v.boundary, v.lhs, v.mid, v.rhs)
            for v in verdicts]
    _write_csv(args, ("channel_seed", "structure", "strategy", "user", "holds", "boundary", "lhs", "mid", "rhs"),
               rows)


def _grid_spec(args: argparse.Namespace) -> GridSpec:
    scope = GridScope(args.scope)
    if scope == GridScope.FULL_SPHERE:
        a, b = SPHERE_RESOLUTION
    else:
        a, b = ORACLE_N_LAMBDA, ORACLE_N_PHASE
    return GridSpec(args.grid_lambda or a, args.grid_phase or b, args.grid_power or ORACLE_N_POWER, scope)


def cmd_oracle(args: argparse.Namespace) -> None:
    ch = _channel(args)
    p = snr_db_to_pmax(args.snr_db)
    spec = _grid_spec(args)
    rows = []
    for s in _structures(args):
        r = oracle_max(ch, s, spec, p, threads=args.threads)
        rows.append((s.value, r.rate, r.best.p1, r.best.p2,
                     r.index1[0] * spec.n_power + r.index1[1], r.index2[0] * spec.n_power + r.index2[1]))
    _write_csv(args, ("structure", "rate", "p1", "p2", "index1", "index2"), rows)


def cmd_heuristic(args: argparse.Namespace) -> None:
    ch = _channel(args)
    res = simple_select(ch, snr_db_to_pmax(args.snr_db), args.share)
    rows = [(e.label, e.structure.value if e.structure else "tdma", e.rate, e is res.choice) for e in res.table]
    _write_csv(args, ("entry", "structure", "rate", "chosen"), rows)


def _snr_list(args: argparse.Namespace) -> List[float]:
    return args.snr_list if args.snr_list else [args.snr_db]


def _emit(args: argparse.Namespace, table: montecarlo.Table) -> None:
    _write_csv(args, table.columns, table.rows)


def cmd_mc_freq(args: argparse.Namespace) -> None:
    _emit(args, montecarlo.mrt_frequency_vs_snr(args.n, _snr_list(args), args.trials, args.seed,
                                                _grids(args), args.threads))


def cmd_mc_loss(args: argparse.Namespace) -> None:
    _emit(args, montecarlo.rate_loss_vs_snr(args.structure or DecodingStructure.ND, args.n, _snr_list(args),
                                            args.trials, args.seed, _grids(args), args.threads))


def cmd_mc_cdf(args: argparse.Namespace) -> None:
    _emit(args, montecarlo.mrt_loss_cdf(args.structure or DecodingStructure.DD, args.n, args.snr_db,
                                        args.thresholds, args.trials, args.seed, _grids(args), args.threads))


def cmd_sweep_sir(args: argparse.Namespace) -> None:
    sirs = args.sir_list if args.sir_list else [args.sir]
    _emit(args, montecarlo.sweep_sir(args.n, args.theta, sirs, args.snr_db, args.trials, args.seed,
                                     _grids(args), args.share, args.threads))


def cmd_sweep_snr(args: argparse.Namespace) -> None:
    _emit(args, montecarlo.sweep_snr(args.n, args.theta, args.sir, _snr_list(args), args.trials, args.seed,
                                     _grids(args), args.share, args.threads))


# ---- parser ----

def _common() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--n", type=_int_at_least(2), default=DEFAULT_N, help="transmit antennas")
    c.add_argument("--snr-db", type=_finite, default=0.0, help="P_max in dB over unit noise")
    c.add_argument("--seed", type=_int_at_least(0), default=DEFAULT_SEED)
    c.add_argument("--trials", type=_int_at_least(1), default=DEFAULT_TRIALS)
    c.add_argument("--grid-lambda", type=_int_at_least(2), default=None)
    c.add_argument("--grid-phase", type=_int_at_least(2), default=None)
    c.add_argument("--grid-power", type=_int_at_least(2), default=None)
    c.add_argument("--channel", default=None, help="channel JSON file; generated from --seed when absent")
    c.add_argument("--out", default=None, help="output file; stdout when absent")
    c.add_argument("--structure", type=_structure, default=None, help="nn, nd, dn or dd")
    c.add_argument("--threads", type=_int_at_least(1), default=1, help="worker cap")
    c.add_argument("--kind", choices=[k.value for k in ChannelKind], default=ChannelKind.IID.value)
    c.add_argument("--theta", type=_theta, default=0.0, help="cross-link angle in radians (symmetric model)")
    c.add_argument("--sir", type=_positive, default=1.0)
    c.add_argument("--sir-list", type=_list_of(_positive), default=None)
    c.add_argument("--snr-list", type=_list_of(_finite), default=None)
    c.add_argument("--thresholds", type=_list_of(_finite), default=[0.8, 0.9])
    c.add_argument("--share", type=_unit_interval, default=0.5, help="user 1's TDMA time share")
    c.add_argument("--scope", choices=[s.value for s in GridScope], default=GridScope.SUBSPACE.value)
    c.add_argument("-v", "--verbose", action="count", default=0)
    return c


COMMANDS = {
    "gen": (cmd_gen, "emit a channel as JSON"),
    "region": (cmd_region, "rate-region sweep over the lambda families"),
    "powerregion": (cmd_powerregion, "received power region of each transmitter"),
    "sumrate": (cmd_sumrate, "maximum sum rate per decoding structure"),
    "mrt": (cmd_mrt, "closed-form MRT optimality verdicts"),
    "oracle": (cmd_oracle, "brute-force grid maximum"),
    "heuristic": (cmd_heuristic, "low-complexity structure selection"),
    "mc-freq": (cmd_mc_freq, "MRT optimality frequency vs SNR"),
    "mc-loss": (cmd_mc_loss, "MRT rate loss vs SNR"),
    "mc-cdf": (cmd_mc_cdf, "distribution of the MRT rate ratio"),
    "sweep-sir": (cmd_sweep_sir, "mean sum rates vs SIR"),
    "sweep-snr": (cmd_sweep_snr, "mean sum rates vs SNR"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="misoidc", description="Two-user MISO interference channel with "
                                                                 "interference decoding")
    parser.add_argument("--version", action="version", version=f"misoidc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    for name, (func, text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        p.set_defaults(func=func)
    return parser


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2
    configure_logging(args.verbose)
    try:
        args.func(args)
    except (MisoError, ValueError, OSError) as e:
        print(f"misoidc {args.command}: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))

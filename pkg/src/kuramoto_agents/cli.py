"""Command line: ``kuramoto-agents {gen-network,simulate,sweep}``.

Exit codes: 0 success, 1 runtime failure (divergence, I/O), 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import config as cfgmod
from .dynamics import ModelParams
from .errors import ConfigError, DivergenceError
from .experiments import (
    curve_summary,
    initial_state,
    run_sweep,
    sample_frequencies,
    write_table,
    write_trajectory,
)
from .integrate import simulate
from .observables import order_series, tail_mean
from .rng import MASK64
from .topology import all_to_all, deterministic_scale_free, save_adjacency

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v <= MASK64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _list_presets() -> None:
    for name in sorted(cfgmod.PRESETS):
        print(f"{name:16s} {cfgmod.PRESETS[name][0]}")


def _run_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="INI run configuration")
    src.add_argument("--preset", metavar="NAME", help="embedded preset (see --list-presets)")
    p.add_argument("--out", metavar="PATH", help="output CSV (overrides the config)")
    p.add_argument("--seed", type=_u64, metavar="U64", help="seed (overrides the config)")
    p.add_argument("--threads", type=_positive_int, default=1, metavar="N", help="worker processes")
    p.add_argument("--dump-config", metavar="PATH", help="write the effective configuration")
    p.add_argument("--list-presets", action="store_true", help="list embedded presets and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kuramoto-agents",
        description="Amplitude-phase Kuramoto simulations of heterogeneous agent networks.",
    )
    parser.add_argument("--list-presets", action="store_true", help="list embedded presets and exit")
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("gen-network", help="write a network as an edge list")
    g.add_argument("kind", choices=("all-to-all", "scale-free"))
    g.add_argument("--n", type=_positive_int, help="node count (all-to-all)")
    g.add_argument("--iterations", type=int, help="construction iterations (scale-free)")
    g.add_argument("--out", metavar="PATH", help="edge-list file (default <kind>.edges)")

    s = sub.add_parser("simulate", help="integrate one trajectory and write its CSV")
    _run_options(s)
    w = sub.add_parser("sweep", help="run the (sigma, epsilon) sweep and write its CSV")
    _run_options(w)
    return parser


def _load(args) -> cfgmod.RunConfig:
    if args.config:
        cfg = cfgmod.load_config(args.config)
    elif args.preset:
        cfg = cfgmod.preset(args.preset)
    else:
        cfg = cfgmod.RunConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.dump_config:
        with open(args.dump_config, "w", encoding="utf-8") as fh:
            fh.write(cfg.to_ini())
    return cfg


def cmd_gen_network(args, parser) -> int:
    if args.kind == "all-to-all":
        if args.n is None:
            parser.error("all-to-all needs --n")
        adj = all_to_all(args.n)
    else:
        if args.iterations is None or args.iterations < 0:
            parser.error("scale-free needs --iterations >= 0")
        adj = deterministic_scale_free(args.iterations)
    out = args.out or f"{args.kind}.edges"
    save_adjacency(adj, out)
    print(f"nodes: {adj.n}")
    print(f"edges: {adj.edge_count}")
    print(f"max degree: {int(adj.degrees.max())}")
    print(f"written: {out}")
    return EXIT_OK


def _settling_time(times, values, target, tol=0.02) -> float:
    outside = np.flatnonzero(np.abs(values - target) > tol)
    if outside.size == 0:
        return float(times[0])
    if outside[-1] == len(times) - 1:
        return float("nan")
    return float(times[outside[-1] + 1])


def cmd_simulate(args) -> int:
    cfg = _load(args)
    adj = cfg.topology.build()
    n = adj.n
    seed = cfg.simulate_seed
    params = ModelParams(cfg.lam, cfg.simulate_epsilon, sample_frequencies(cfg.mu, cfg.simulate_sigma, n, seed))
    traj = simulate(initial_state(n, seed), params, adj, cfg.integration, seed=seed)
    out = args.out or cfg.trajectory_out
    write_trajectory(traj, out)

    series = order_series(traj)
    tail_raw = tail_mean(series.times, series.raw, cfg.transient_fraction)
    tail_norm = tail_mean(series.times, series.normalized, cfg.transient_fraction)
    print(f"network: {adj.describe()}")
    print(f"lambda={cfg.lam} epsilon={cfg.simulate_epsilon} sigma={cfg.simulate_sigma} seed={seed}")
    print(f"final R_raw={series.raw[-1]:.6f} R_normalized={series.normalized[-1]:.6f}")
    print(f"<R_raw>={tail_raw:.6f} <R_normalized>={tail_norm:.6f} (t >= {cfg.transient_fraction} t_end)")
    print(f"R_normalized settles within 0.02 of its mean by t={_settling_time(series.times, series.normalized, tail_norm):g}")
    amps = traj.amplitudes[-1]
    print(f"final amplitudes: min={amps.min():.4f} mean={amps.mean():.4f} max={amps.max():.4f}")
    if traj.metadata["negative_amplitude"]:
        print("note: some amplitude crossed below zero during the run")
    print(f"written: {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    spec = cfg.experiment_spec()
    records = run_sweep(spec, workers=args.threads)
    out = args.out or cfg.sweep_out
    write_table(records, out)

    for sigma, rows in curve_summary(records).items():
        lo, hi = rows[0], rows[-1]
        print(
            f"sigma={sigma:g}: <R_norm> {lo[1]:.4f} at eps={lo[0]:g} -> {hi[1]:.4f} at eps={hi[0]:g}"
            f"  (<R_raw> {lo[2]:.4f} -> {hi[2]:.4f})"
        )
    failed = sum(not r.ok for r in records)
    print(f"{len(records)} runs, {failed} failed; written: {out}")
    return EXIT_RUNTIME if failed else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_presets:
        _list_presets()
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "gen-network":
            return cmd_gen_network(args, parser)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_sweep(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if args.command != "gen-network" else EXIT_RUNTIME
    except DivergenceError as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: `potlab <subcommand>`.

Global flags (--seed, --cache, --out-dir, --config, --jobs) apply to all
subcommands. A JSON config file supplies defaults for any flag; values
given on the command line win.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bayesian import FIG8_ACTION_GRID, bayesian_potentialness_sweep
from .dynamics import OMDConfig, random_init, run_omd, uniform_init
from .econ import EconGameSpec, EconKind, build_econ_game
from .games import (
    GameError,
    GameShape,
    game_from_json,
    game_to_json,
    parse_setting,
    pure_equilibria,
)
from .harness import (
    ALPHA_SWEEP_OMD,
    DEFAULT_ALPHA_ACTIONS,
    ExperimentConfig,
    run_alpha_sweep,
    run_convergence_experiment,
    run_distribution_experiment,
    run_econ_sweep,
    run_runtime_benchmark,
    run_spne_experiment,
    run_standard_games,
    write_csv,
)
from .hodge import decompose_payoffs, potentialness
from .opcache import OperatorCache

ALL_KINDS = [k.value for k in EconKind]


def _add_global_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--cache", default=None, help="operator cache directory")
    p.add_argument("--out-dir", default=None, help="directory for CSV outputs (default .)")
    p.add_argument("--config", default=None, help="JSON file with defaults for any flag")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default 1)")


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        for key, value in doc.items():
            attr = key.replace("-", "_")
            if getattr(args, attr, None) is None and hasattr(args, attr):
                setattr(args, attr, value)
    if args.seed is None:
        args.seed = 0
    if args.out_dir is None:
        args.out_dir = "."
    if args.jobs is None:
        args.jobs = 1
    return args


def _cache(args) -> OperatorCache:
    return OperatorCache(args.cache)


def _load_game(path: str):
    return game_from_json(Path(path).read_text())


def _parse_settings(text: str) -> list[GameShape]:
    return [parse_setting(tok) for tok in text.split(",") if tok.strip()]


def _parse_values(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _parse_actions_range(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(m) for m in text.split(",")]


def cmd_decompose(args) -> int:
    game = _load_game(args.game)
    ops = _cache(args).get(game.shape)
    if args.components:
        dec = decompose_payoffs(ops, game, components=True)
        doc = {
            "potentialness": dec.potentialness,
            "non_strategic": dec.potentialness is None,
            "components": {
                "uP": [list(map(float, row)) for row in dec.uP.payoffs],
                "uH": [list(map(float, row)) for row in dec.uH.payoffs],
                "uN": [list(map(float, row)) for row in dec.uN.payoffs],
            },
        }
    else:
        p = potentialness(ops, game)
        doc = {"potentialness": p, "non_strategic": p is None}
    print(json.dumps(doc))
    return 0


def cmd_learn(args) -> int:
    game = _load_game(args.game)
    cfg = OMDConfig(eta0=args.eta0, beta=args.beta, max_iters=args.iters, tolerance=args.tol)
    if args.init == "uniform":
        init = uniform_init(game.shape)
    else:
        init = random_init(game.shape, args.seed)
    traj = run_omd(game, init, cfg)
    if args.trace:
        write_csv(
            Path(args.trace),
            ["iteration", "max_relative_loss"],
            [(t + 1, float(l)) for t, l in enumerate(traj.loss_history)],
            {"potlab": __version__, "seed": args.seed, "config": "learn"},
        )
    print(
        json.dumps(
            {
                "converged": traj.converged,
                "iterations_used": traj.iterations_used,
                "final_loss": traj.final_loss,
                "final_profile": [list(map(float, s)) for s in traj.final_profile.strategies],
            }
        )
    )
    return 0


def cmd_econ(args) -> int:
    values = _parse_values(args.values)
    spec = EconGameSpec(
        EconKind(args.kind),
        num_players=args.players,
        valuations=values,
        actions_per_player=(args.actions,) * args.players,
    )
    game = build_econ_game(spec)
    if args.emit_game:
        Path(args.emit_game).write_text(game_to_json(game))
    ops = _cache(args).get(game.shape)
    report = pure_equilibria(game)
    print(
        json.dumps(
            {
                "kind": args.kind,
                "actions": args.actions,
                "valuations": list(values),
                "potentialness": potentialness(ops, game),
                "n_pure_ne": len(report.pure_ne),
                "n_strict_ne": len(report.strict_pure_ne),
            }
        )
    )
    return 0


def cmd_econ_sweep(args) -> int:
    kinds = [EconKind(k) for k in args.kinds.split(",")]
    value_settings = [_parse_values(v) for v in args.values]
    actions = _parse_actions_range(args.actions)
    rows = run_econ_sweep(
        kinds, value_settings, actions, _cache(args), Path(args.out_dir),
        master_seed=args.seed,
    )
    print(f"wrote {len(rows)} rows to {Path(args.out_dir) / 'econ_sweep.csv'}")
    return 0


def cmd_bayesian(args) -> int:
    grid = tuple(float(b) for b in args.grid.split(",")) if args.grid else FIG8_ACTION_GRID
    if args.actions and len(grid) != args.actions:
        raise GameError(f"--actions {args.actions} disagrees with grid of {len(grid)} bids")
    kinds = [EconKind(k) for k in args.kind.split(",")]
    types = [int(v) for v in args.types.split(",")]
    rows = []
    for kind in kinds:
        for r in bayesian_potentialness_sweep(kind, grid, types, _cache(args)):
            rows.append((r.kind.value, r.n_types, r.n_strategies, r.potentialness, r.has_pure_bne))
    out = Path(args.out) if args.out else Path(args.out_dir) / "bayesian.csv"
    meta = {"potlab": __version__, "seed": args.seed, "config": "bayesian",
            "tullock_prize": "own-type"}
    write_csv(out, ["kind", "n_types", "n_strategies", "potentialness", "has_pure_bne"], rows, meta)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _experiment_config(args) -> ExperimentConfig:
    return ExperimentConfig(
        settings=_parse_settings(args.settings),
        samples_per_setting=args.samples,
        bins=args.bins,
        omd=OMDConfig(eta0=args.eta0, beta=args.beta, max_iters=args.iters, tolerance=args.tol),
        master_seed=args.seed,
        num_random_inits=args.inits,
        jobs=args.jobs,
    )


def cmd_dist(args) -> int:
    records, _ = run_distribution_experiment(_experiment_config(args), _cache(args), Path(args.out_dir))
    print(f"wrote {len(records)} game rows to {Path(args.out_dir) / 'dist_games.csv'}")
    return 0


def cmd_spne(args) -> int:
    stats = run_spne_experiment(_experiment_config(args), _cache(args), Path(args.out_dir))
    print(f"wrote {len(stats)} bins to {Path(args.out_dir) / 'spne_bins.csv'}")
    return 0


def cmd_converge(args) -> int:
    stats = run_convergence_experiment(_experiment_config(args), _cache(args), Path(args.out_dir))
    print(f"wrote {len(stats)} bins to {Path(args.out_dir) / 'converge_bins.csv'}")
    return 0


def cmd_alpha_sweep(args) -> int:
    kinds = [EconKind(k) for k in args.kinds.split(",")]
    alphas = np.round(np.arange(0.0, 1.0 + 1e-9, args.alpha_step), 10).tolist()
    omd = OMDConfig(eta0=args.eta0, beta=args.beta, max_iters=args.iters, tolerance=args.tol)
    rows = run_alpha_sweep(
        kinds, alphas, args.inits, _cache(args), Path(args.out_dir),
        actions=args.actions, master_seed=args.seed, omd=omd, jobs=args.jobs,
    )
    print(f"wrote {len(rows)} rows to {Path(args.out_dir) / 'alpha.csv'}")
    return 0


def cmd_standard(args) -> int:
    rows = run_standard_games(_cache(args), Path(args.out_dir), master_seed=args.seed)
    named = [r for r in rows if not r[0].startswith("jordan")]
    jordan = [r[2] for r in rows if r[0].startswith("jordan")]
    print(f"{'game':20s} {'actions':8s} {'potentialness':14s} {'pure':5s} {'strict':7s} {'omd'}")
    for name, shape, p, n_pure, n_strict, conv in named:
        print(f"{name:20s} {shape:8s} {p:<14.4f} {n_pure:<5d} {n_strict:<7d} "
              f"{'converged' if conv else 'no'}")
    if jordan:
        print(f"{'jordan (sampled)':20s} {'2x2':8s} [{min(jordan):.4f}, {max(jordan):.4f}]  "
              f"n={len(jordan)}")
    return 0


def cmd_bench(args) -> int:
    settings = _parse_settings(args.settings)
    rows, backend_rows = run_runtime_benchmark(
        settings, _cache(args), Path(args.out_dir), n_runs=args.runs, master_seed=args.seed
    )
    for setting, n, buildt, per in rows:
        print(f"{setting}: construction {buildt:.3f}s, potentialness {per * 1e3:.3f} ms/game")
    for setting, backend, n, per in backend_rows:
        print(f"omd {setting} [{backend}]: {per * 1e3:.3f} ms/run")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="potlab", description=__doc__)
    p.add_argument("--version", action="version", version=f"potlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        _add_global_flags(sp)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("decompose", cmd_decompose, "potentialness and payoff components of a game")
    sp.add_argument("--game", required=True, help="path to a game JSON file")
    sp.add_argument("--components", action="store_true", help="also emit uP/uH/uN")

    sp = add("learn", cmd_learn, "run online mirror descent on a game")
    sp.add_argument("--game", required=True)
    sp.add_argument("--eta0", type=float, default=2.0**3)
    sp.add_argument("--beta", type=float, default=1 / 20)
    sp.add_argument("--iters", type=int, default=2000)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--init", choices=["uniform", "random"], default="uniform")
    sp.add_argument("--trace", default=None, help="CSV path for per-iteration losses")

    sp = add("econ", cmd_econ, "build one discretized economic game")
    sp.add_argument("--kind", required=True, choices=ALL_KINDS)
    sp.add_argument("--players", type=int, default=2)
    sp.add_argument("--actions", type=int, default=11)
    sp.add_argument("--values", default="1.0,1.0")
    sp.add_argument("--emit-game", default=None, help="write the game JSON here")

    sp = add("econ-sweep", cmd_econ_sweep, "discretization sweep across grid sizes")
    sp.add_argument("--kinds", default=",".join(ALL_KINDS))
    sp.add_argument("--values", action="append", default=None,
                    help="repeatable valuation setting, e.g. --values 0.75,1.0")
    sp.add_argument("--actions", default="5:25", help="range lo:hi or comma list")
    sp.set_defaults(values_default=["1.0,1.0", "0.75,1.0"])

    sp = add("bayesian", cmd_bayesian, "type-count sweep for Bayesian economic games")
    sp.add_argument("--kind", default=",".join(ALL_KINDS), help="comma-separated kinds")
    sp.add_argument("--actions", type=int, default=None)
    sp.add_argument("--grid", default=None, help="comma-separated bid grid")
    sp.add_argument("--types", default="1,2,4")
    sp.add_argument("--out", default=None, help="CSV path (default <out-dir>/bayesian.csv)")

    for name, fn, help_ in [
        ("dist", cmd_dist, "potentialness distribution of random games"),
        ("spne", cmd_spne, "strict-NE existence binned by potentialness"),
        ("converge", cmd_converge, "mirror-descent convergence binned by potentialness"),
    ]:
        sp = add(name, fn, help_)
        sp.add_argument("--settings", default="2x2,2x10,3x2")
        sp.add_argument("--samples", type=int, default=1000)
        sp.add_argument("--bins", type=int, default=20)
        sp.add_argument("--inits", type=int, default=1)
        sp.add_argument("--eta0", type=float, default=2.0**3)
        sp.add_argument("--beta", type=float, default=1 / 20)
        sp.add_argument("--iters", type=int, default=2000)
        sp.add_argument("--tol", type=float, default=1e-8)

    sp = add("alpha-sweep", cmd_alpha_sweep, "convergence across potential/harmonic blends")
    sp.add_argument("--kinds", default=",".join(ALL_KINDS))
    sp.add_argument("--alpha-step", type=float, default=0.05)
    sp.add_argument("--inits", type=int, default=100)
    sp.add_argument("--actions", type=int, default=DEFAULT_ALPHA_ACTIONS)
    sp.add_argument("--eta0", type=float, default=ALPHA_SWEEP_OMD.eta0)
    sp.add_argument("--beta", type=float, default=ALPHA_SWEEP_OMD.beta)
    sp.add_argument("--iters", type=int, default=2000)
    sp.add_argument("--tol", type=float, default=1e-8)

    add("standard", cmd_standard, "reference matrix games table")

    sp = add("bench", cmd_bench, "operator construction and potentialness timings")
    sp.add_argument("--settings", default="2x5,3x5")
    sp.add_argument("--runs", type=int, default=100)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args = _merge_config(args)
    if getattr(args, "values", "__missing__") is None:
        args.values = args.values_default
    try:
        return args.fn(args)
    except (GameError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Experiment orchestration: sampling, binning, convergence statistics, CSV output.

Every experiment is a pure function of (config, master seed): per-task
seeds are derived from the master seed and stable stream tags, results
are collected in task order, and floats are written with 17 significant
digits, so repeated runs produce byte-identical CSVs regardless of the
worker schedule. Each CSV starts with one comment line carrying the
package version, the seed, and a hash of the configuration, followed by
the header row.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .catalog import battle_of_sexes, jordan_game, matching_pennies, prisoners_dilemma, shapley_game
from .dynamics import OMDConfig, run_omd, uniform_init, random_init
from .econ import EconGameSpec, EconKind, build_econ_game, discretization_sweep
from .games import (
    GameShape,
    NormalFormGame,
    derive_seed,
    pure_equilibria,
    sample_random_game,
)
from .hodge import alpha_blend, build_operators, decompose_payoffs, potentialness
from .opcache import OperatorCache

__all__ = [
    "ExperimentConfig",
    "GameRecord",
    "BinStatistics",
    "bin_index",
    "run_distribution_experiment",
    "run_spne_experiment",
    "run_convergence_experiment",
    "run_alpha_sweep",
    "run_standard_games",
    "run_runtime_benchmark",
    "write_csv",
]

# Stream tags keep seed derivations for different purposes disjoint.
_STREAM_GAME = 1
_STREAM_INIT = 2
_STREAM_JORDAN = 3
_STREAM_ALPHA = 4

DEFAULT_ALPHA_ACTIONS = 12
ALPHA_SWEEP_OMD = OMDConfig(eta0=2.0**8, beta=1.0 / 20.0)


@dataclass
class ExperimentConfig:
    """Shared knobs for the random-game experiments."""

    settings: list[GameShape]
    samples_per_setting: int
    bins: int = 20
    omd: OMDConfig = field(default_factory=OMDConfig)
    master_seed: int = 0
    num_random_inits: int = 1
    jobs: int = 1
    min_bin_population: int = 50

    def digest(self) -> str:
        doc = {
            "settings": [list(s.actions) for s in self.settings],
            "samples": self.samples_per_setting,
            "bins": self.bins,
            "omd": [self.omd.eta0, self.omd.beta, self.omd.max_iters, self.omd.tolerance],
            "inits": self.num_random_inits,
        }
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:12]


@dataclass
class GameRecord:
    setting: str
    index: int
    seed: int
    potentialness: float | None
    has_pure_ne: bool
    has_spne: bool


@dataclass
class BinStatistics:
    """Per-bin aggregate; fraction fields are None for empty bins, never dropped."""

    setting: str
    bin: int
    lo: float
    hi: float
    n_games: int
    spne_fraction: float | None = None
    n_runs: int = 0
    convergence_fraction: float | None = None
    convergence_stddev: float | None = None


def bin_index(p: float, bins: int = 20) -> int:
    """Half-open bins ((k-1)/bins, k/bins]; an exact zero lands in bin 1."""
    if p <= 0.0:
        return 1
    return min(bins, max(1, math.ceil(p * bins - 1e-12)))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], meta: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# " + " ".join(f"{k}={v}" for k, v in meta.items())]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _meta(cfg_hash: str, seed: int) -> dict:
    return {"potlab": __version__, "seed": seed, "config": cfg_hash}


def sample_setting_records(
    shape: GameShape, n: int, master_seed: int, cache: OperatorCache
) -> list[GameRecord]:
    """Sample n uniform random games and score each one."""
    ops = cache.get(shape)
    label = shape.setting_label()
    out = []
    for idx in range(n):
        seed = derive_seed(master_seed, _STREAM_GAME, shape.num_players, *shape.actions, idx)
        game = sample_random_game(shape, seed)
        report = pure_equilibria(game)
        out.append(
            GameRecord(
                label,
                idx,
                seed,
                potentialness(ops, game),
                report.has_pure_ne,
                report.has_strict_ne,
            )
        )
    return out


def run_distribution_experiment(
    cfg: ExperimentConfig, cache: OperatorCache, out_dir: Path | None = None
) -> tuple[list[GameRecord], list[tuple]]:
    """Per-game potentialness plus per-setting location/spread summaries."""
    records: list[GameRecord] = []
    summary = []
    for shape in cfg.settings:
        recs = sample_setting_records(shape, cfg.samples_per_setting, cfg.master_seed, cache)
        records.extend(recs)
        pots = np.array([r.potentialness for r in recs if r.potentialness is not None])
        summary.append(
            (
                shape.setting_label(),
                len(recs),
                float(pots.mean()),
                float(pots.var()),
                float(pots.min()),
                float(pots.max()),
                float(np.mean([r.has_pure_ne for r in recs])),
                float(np.mean([r.has_spne for r in recs])),
            )
        )
    if out_dir is not None:
        meta = _meta(cfg.digest(), cfg.master_seed)
        write_csv(
            Path(out_dir) / "dist_games.csv",
            ["setting", "game_index", "seed", "potentialness", "has_pure_ne", "has_spne"],
            [
                (r.setting, r.index, r.seed, r.potentialness, r.has_pure_ne, r.has_spne)
                for r in records
            ],
            meta,
        )
        write_csv(
            Path(out_dir) / "dist_summary.csv",
            [
                "setting",
                "n_games",
                "mean_potentialness",
                "var_potentialness",
                "min_potentialness",
                "max_potentialness",
                "pure_ne_fraction",
                "spne_fraction",
            ],
            summary,
            meta,
        )
    return records, summary


def run_spne_experiment(
    cfg: ExperimentConfig, cache: OperatorCache, out_dir: Path | None = None
) -> list[BinStatistics]:
    """Fraction of games with a strict pure equilibrium, binned by potentialness."""
    stats: list[BinStatistics] = []
    for shape in cfg.settings:
        recs = sample_setting_records(shape, cfg.samples_per_setting, cfg.master_seed, cache)
        grouped: dict[int, list[GameRecord]] = {}
        for r in recs:
            if r.potentialness is None:
                continue
            grouped.setdefault(bin_index(r.potentialness, cfg.bins), []).append(r)
        for k in range(1, cfg.bins + 1):
            members = grouped.get(k, [])
            stats.append(
                BinStatistics(
                    shape.setting_label(),
                    k,
                    (k - 1) / cfg.bins,
                    k / cfg.bins,
                    len(members),
                    float(np.mean([r.has_spne for r in members])) if members else None,
                )
            )
    if out_dir is not None:
        write_csv(
            Path(out_dir) / "spne_bins.csv",
            ["setting", "bin", "lo", "hi", "n_games", "spne_fraction"],
            [(s.setting, s.bin, s.lo, s.hi, s.n_games, s.spne_fraction) for s in stats],
            _meta(cfg.digest(), cfg.master_seed),
        )
    return stats


def _omd_task(args) -> tuple[int, bool]:
    task_id, actions, payoffs, init_seed, omd = args
    shape = GameShape.of(actions)
    game = NormalFormGame(shape, payoffs)
    init = uniform_init(shape) if init_seed is None else random_init(shape, init_seed)
    cfg = OMDConfig(*omd)
    return task_id, run_omd(game, init, cfg).converged


def _run_omd_tasks(tasks: list[tuple], jobs: int) -> list[bool]:
    """Execute (game, init) tasks, preserving task order regardless of schedule."""
    results = [False] * len(tasks)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for task_id, converged in pool.map(_omd_task, tasks, chunksize=32):
                results[task_id] = converged
    else:
        for task in tasks:
            task_id, converged = _omd_task(task)
            results[task_id] = converged
    return results


def run_convergence_experiment(
    cfg: ExperimentConfig, cache: OperatorCache, out_dir: Path | None = None
) -> list[BinStatistics]:
    """Mirror-descent convergence fraction over games with a strict equilibrium.

    With num_random_inits == 1 each game runs once from the uniform
    profile; otherwise from that many random interior points, and the
    per-bin standard deviation is taken across games' own convergence
    frequencies (the basin-size spread).
    """
    omd_fields = (cfg.omd.eta0, cfg.omd.beta, cfg.omd.max_iters, cfg.omd.tolerance)
    stats: list[BinStatistics] = []
    for shape in cfg.settings:
        recs = sample_setting_records(shape, cfg.samples_per_setting, cfg.master_seed, cache)
        spne_recs = [r for r in recs if r.has_spne and r.potentialness is not None]
        tasks = []
        for g_pos, rec in enumerate(spne_recs):
            game = sample_random_game(shape, rec.seed)
            for j in range(cfg.num_random_inits):
                init_seed = (
                    None
                    if cfg.num_random_inits == 1
                    else derive_seed(
                        cfg.master_seed, _STREAM_INIT, shape.num_players, *shape.actions,
                        rec.index, j,
                    )
                )
                tasks.append((len(tasks), tuple(shape.actions), game.payoffs, init_seed, omd_fields))
        flat = _run_omd_tasks(tasks, cfg.jobs)
        per_game = np.array(
            [
                np.mean(flat[g * cfg.num_random_inits : (g + 1) * cfg.num_random_inits])
                for g in range(len(spne_recs))
            ]
        )
        grouped: dict[int, list[float]] = {}
        for rec, frac in zip(spne_recs, per_game):
            grouped.setdefault(bin_index(rec.potentialness, cfg.bins), []).append(float(frac))
        for k in range(1, cfg.bins + 1):
            fracs = grouped.get(k, [])
            stats.append(
                BinStatistics(
                    shape.setting_label(),
                    k,
                    (k - 1) / cfg.bins,
                    k / cfg.bins,
                    len(fracs),
                    None,
                    len(fracs) * cfg.num_random_inits,
                    float(np.mean(fracs)) if fracs else None,
                    float(np.std(fracs)) if fracs else None,
                )
            )
    if out_dir is not None:
        write_csv(
            Path(out_dir) / "converge_bins.csv",
            [
                "setting",
                "bin",
                "lo",
                "hi",
                "n_games",
                "n_runs",
                "convergence_fraction",
                "convergence_stddev",
            ],
            [
                (s.setting, s.bin, s.lo, s.hi, s.n_games, s.n_runs,
                 s.convergence_fraction, s.convergence_stddev)
                for s in stats
            ],
            _meta(cfg.digest(), cfg.master_seed),
        )
    return stats


def run_alpha_sweep(
    kinds: Sequence[EconKind],
    alphas: Sequence[float],
    num_inits: int,
    cache: OperatorCache,
    out_dir: Path | None = None,
    *,
    actions: int = DEFAULT_ALPHA_ACTIONS,
    master_seed: int = 0,
    omd: OMDConfig = ALPHA_SWEEP_OMD,
    jobs: int = 1,
) -> list[tuple]:
    """Convergence of mirror descent across potential/harmonic blends.

    For each economic kind the game is decomposed once; each blend
    alpha*uP + (1-alpha)*uH is scored for potentialness and strict-NE
    existence and attacked from ``num_inits`` random starts.
    """
    omd_fields = (omd.eta0, omd.beta, omd.max_iters, omd.tolerance)
    rows = []
    for kind_pos, kind in enumerate(kinds):
        spec = EconGameSpec.symmetric(EconKind(kind), actions=actions)
        game = build_econ_game(spec)
        ops = cache.get(game.shape)
        dec = decompose_payoffs(ops, game, components=True)
        original_p = dec.potentialness
        for a_pos, alpha in enumerate(alphas):
            blend = alpha_blend(dec, float(alpha))
            p = potentialness(ops, blend)
            report = pure_equilibria(blend)
            tasks = [
                (
                    j,
                    tuple(game.shape.actions),
                    blend.payoffs,
                    derive_seed(master_seed, _STREAM_ALPHA, kind_pos, a_pos, j),
                    omd_fields,
                )
                for j in range(num_inits)
            ]
            conv = _run_omd_tasks(tasks, jobs)
            rows.append(
                (
                    EconKind(kind).value,
                    float(alpha),
                    p,
                    report.has_strict_ne,
                    float(np.mean(conv)),
                    original_p,
                )
            )
    if out_dir is not None:
        digest = hashlib.sha256(
            json.dumps([list(map(str, kinds)), list(map(float, alphas)), num_inits]).encode()
        ).hexdigest()[:12]
        write_csv(
            Path(out_dir) / "alpha.csv",
            ["kind", "alpha", "potentialness", "has_spne", "convergence_fraction",
             "original_potentialness"],
            rows,
            _meta(digest, master_seed),
        )
    return rows


def run_standard_games(
    cache: OperatorCache,
    out_dir: Path | None = None,
    *,
    omd: OMDConfig | None = None,
    n_jordan: int = 100,
    master_seed: int = 0,
) -> list[tuple]:
    """Potentialness and mirror-descent verdicts for the reference matrix games."""
    omd = omd or OMDConfig()
    named = [
        ("matching_pennies", matching_pennies()),
        ("battle_of_sexes", battle_of_sexes()),
        ("prisoners_dilemma", prisoners_dilemma()),
        ("shapley", shapley_game()),
    ]
    rng_draws = [
        np.random.default_rng(derive_seed(master_seed, _STREAM_JORDAN, i)).random(2)
        for i in range(n_jordan)
    ]
    for i, (a, b) in enumerate(rng_draws):
        # keep parameters strictly interior
        a = min(max(a, 1e-9), 1 - 1e-9)
        b = min(max(b, 1e-9), 1 - 1e-9)
        named.append((f"jordan_{i:03d}", jordan_game(a, b)))
    rows = []
    for name, game in named:
        ops = cache.get(game.shape)
        report = pure_equilibria(game)
        traj = run_omd(game, uniform_init(game.shape), omd)
        rows.append(
            (
                name,
                str(game.shape),
                potentialness(ops, game),
                len(report.pure_ne),
                len(report.strict_pure_ne),
                traj.converged,
            )
        )
    if out_dir is not None:
        write_csv(
            Path(out_dir) / "standard.csv",
            ["game", "actions", "potentialness", "n_pure_ne", "n_strict_ne", "omd_converged"],
            rows,
            _meta("standard", master_seed),
        )
    return rows


def run_econ_sweep(
    kinds: Sequence[EconKind],
    valuation_settings: Sequence[Sequence[float]],
    action_counts: Sequence[int],
    cache: OperatorCache,
    out_dir: Path | None = None,
    *,
    master_seed: int = 0,
) -> list[tuple]:
    """Discretization sweep rows across kinds and valuation settings."""
    rows = []
    for kind in kinds:
        for vals in valuation_settings:
            for r in discretization_sweep(EconKind(kind), vals, action_counts, cache):
                rows.append(
                    (
                        r.kind.value,
                        r.n_actions,
                        ";".join(format(v, "g") for v in r.valuations),
                        r.potentialness,
                        r.n_pure_ne,
                        r.n_strict_ne,
                    )
                )
    if out_dir is not None:
        digest = hashlib.sha256(
            json.dumps(
                [list(map(str, kinds)), [list(map(float, v)) for v in valuation_settings],
                 list(map(int, action_counts))]
            ).encode()
        ).hexdigest()[:12]
        write_csv(
            Path(out_dir) / "econ_sweep.csv",
            ["kind", "n_actions", "valuations", "potentialness", "n_pure_ne", "n_strict_ne"],
            rows,
            _meta(digest, master_seed),
        )
    return rows


def run_runtime_benchmark(
    settings: Sequence[GameShape],
    cache: OperatorCache,
    out_dir: Path | None = None,
    *,
    n_runs: int = 100,
    master_seed: int = 0,
    omd_backend_setting: GameShape | None = None,
) -> tuple[list[tuple], list[tuple]]:
    """Wall-time of warm-cache potentialness, with construction reported separately.

    Also times one mirror-descent workload on every available backend so
    the compiled kernel can be compared against the NumPy fallback.
    """
    from . import dynamics

    rows = []
    for shape in settings:
        t0 = time.perf_counter()
        build_operators(shape, ceiling=cache.ceiling, factor_budget=cache.factor_budget)
        construction = time.perf_counter() - t0
        ops = cache.get(shape)
        games = [
            sample_random_game(shape, derive_seed(master_seed, _STREAM_GAME, 99, *shape.actions, i))
            for i in range(n_runs)
        ]
        t0 = time.perf_counter()
        for g in games:
            potentialness(ops, g)
        per_game = (time.perf_counter() - t0) / n_runs
        rows.append((shape.setting_label(), n_runs, construction, per_game))

    backend_rows = []
    backends = ["python"] + (["compiled"] if dynamics.COMPILED_KERNEL_AVAILABLE else [])
    bench_shape = omd_backend_setting or GameShape.of((5, 5))
    bench_games = [
        sample_random_game(
            bench_shape, derive_seed(master_seed, _STREAM_GAME, 98, *bench_shape.actions, i)
        )
        for i in range(10)
    ]
    cfg = OMDConfig()
    for backend in backends:
        t0 = time.perf_counter()
        for g in bench_games:
            run_omd(g, uniform_init(bench_shape), cfg, backend=backend)
        backend_rows.append((bench_shape.setting_label(), backend, len(bench_games),
                             (time.perf_counter() - t0) / len(bench_games)))

    if out_dir is not None:
        meta = _meta("bench", master_seed)
        write_csv(
            Path(out_dir) / "bench.csv",
            ["setting", "n_runs", "construction_seconds", "mean_potentialness_seconds"],
            rows,
            meta,
        )
        write_csv(
            Path(out_dir) / "bench_omd.csv",
            ["setting", "backend", "n_runs", "mean_run_seconds"],
            backend_rows,
            meta,
        )
    return rows, backend_rows

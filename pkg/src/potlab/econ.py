"""Discretized auction and contest games on a bid grid.

Five payoff rules over bids in [0, 1]: first-price, second-price, and
all-pay auctions, the war of attrition, and the Tullock contest. Ties are
resolved in expectation: the winning probability 1/n_max enters the
payoff formula directly, matching the random tie-breaking rule.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .games import GameError, GameShape, NormalFormGame
from .hodge import DecompositionOperators, potentialness
from .games import pure_equilibria

__all__ = [
    "EconKind",
    "EconGameSpec",
    "allocation",
    "default_grid",
    "build_econ_game",
    "expost_utility",
    "discretization_sweep",
    "SweepRow",
]


class EconKind(str, Enum):
    FPSB = "fpsb"
    SPSB = "spsb"
    ALLPAY = "allpay"
    WOA = "woa"
    TULLOCK = "tullock"


def default_grid(m: int) -> tuple[float, ...]:
    """m equidistant bids covering [0, 1]; includes both endpoints."""
    if m < 2:
        raise GameError("need at least two grid points")
    return tuple(k / (m - 1) for k in range(m))


@dataclass(frozen=True)
class EconGameSpec:
    """Which auction, how many bidders, their values, and the bid grids.

    For the Tullock contest the prize is valued per player at the
    player's own valuation, which coincides with the common-prize form
    in the symmetric case.
    """

    kind: EconKind
    num_players: int = 2
    valuations: tuple[float, ...] = (1.0, 1.0)
    actions_per_player: tuple[int, ...] = (11, 11)
    bid_grids: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", EconKind(self.kind))
        object.__setattr__(self, "valuations", tuple(float(v) for v in self.valuations))
        object.__setattr__(
            self, "actions_per_player", tuple(int(m) for m in self.actions_per_player)
        )
        if len(self.valuations) != self.num_players:
            raise GameError("need one valuation per player")
        if any(not 0.0 < v <= 1.0 for v in self.valuations):
            raise GameError(f"valuations must lie in (0, 1], got {self.valuations}")
        if len(self.actions_per_player) != self.num_players:
            raise GameError("need one action count per player")
        grids = self.bid_grids
        if grids is None:
            grids = tuple(default_grid(m) for m in self.actions_per_player)
        else:
            grids = tuple(tuple(float(b) for b in g) for g in grids)
        for g, m in zip(grids, self.actions_per_player):
            if len(g) != m:
                raise GameError("grid length disagrees with the action count")
            if g[0] != 0.0 or any(b >= c for b, c in zip(g, g[1:])):
                raise GameError("bid grids must start at 0 and strictly increase")
        object.__setattr__(self, "bid_grids", grids)

    @property
    def shape(self) -> GameShape:
        return GameShape.of(self.actions_per_player)

    @classmethod
    def symmetric(cls, kind, num_players=2, value=1.0, actions=11) -> "EconGameSpec":
        return cls(kind, num_players, (value,) * num_players, (actions,) * num_players)


def allocation(bids: Sequence[float]) -> np.ndarray:
    """Winning shares: 1/n_max for each maximal bid, 0 otherwise; sums to 1."""
    b = np.asarray(bids, dtype=np.float64)
    if not np.all(np.isfinite(b)):
        raise GameError("bids must be finite")
    top = b == b.max()
    return top / top.sum()


def expost_utility(
    kind: EconKind, bids: np.ndarray, x: np.ndarray, valuation: float, player: int
) -> float:
    """Payoff of one player at a pure bid profile with allocation shares x."""
    b_i = bids[player]
    x_i = x[player]
    others_max = np.max(np.delete(bids, player)) if len(bids) > 1 else 0.0
    if kind == EconKind.FPSB:
        return x_i * (valuation - b_i)
    if kind == EconKind.SPSB:
        return x_i * (valuation - others_max)
    if kind == EconKind.ALLPAY:
        return x_i * valuation - b_i
    if kind == EconKind.WOA:
        return x_i * (valuation - others_max) - (1.0 - x_i) * b_i
    if kind == EconKind.TULLOCK:
        total = bids.sum()
        if total > 0.0:
            return valuation * b_i / total - b_i
        return valuation / len(bids)
    raise GameError(f"unknown kind {kind}")


def _utility_tensors(spec: EconGameSpec, valuations: Sequence[float]) -> list[np.ndarray]:
    """Vectorized evaluation of all players' payoffs over the full bid grid."""
    n = spec.num_players
    grids = [np.asarray(g) for g in spec.bid_grids]
    bids = np.meshgrid(*grids, indexing="ij")  # per-player bid tensors
    stacked = np.stack(bids)
    top = stacked.max(axis=0)
    is_top = stacked == top
    x = is_top / is_top.sum(axis=0)

    out = []
    for i in range(n):
        v = float(valuations[i])
        b_i, x_i = bids[i], x[i]
        if spec.kind == EconKind.FPSB:
            u = x_i * (v - b_i)
        elif spec.kind == EconKind.SPSB:
            others = np.max(np.delete(stacked, i, axis=0), axis=0)
            u = x_i * (v - others)
        elif spec.kind == EconKind.ALLPAY:
            u = x_i * v - b_i
        elif spec.kind == EconKind.WOA:
            others = np.max(np.delete(stacked, i, axis=0), axis=0)
            u = x_i * (v - others) - (1.0 - x_i) * b_i
        elif spec.kind == EconKind.TULLOCK:
            total = stacked.sum(axis=0)
            with np.errstate(invalid="ignore", divide="ignore"):
                u = np.where(total > 0.0, v * np.divide(b_i, total, where=total > 0.0) - b_i, v / n)
        else:
            raise GameError(f"unknown kind {spec.kind}")
        out.append(u)
    return out


def build_econ_game(spec: EconGameSpec) -> NormalFormGame:
    """Evaluate the payoff rule exactly at every pure bid profile."""
    return NormalFormGame.from_payoff_matrices(_utility_tensors(spec, spec.valuations))


@dataclass
class SweepRow:
    kind: EconKind
    n_actions: int
    valuations: tuple[float, ...]
    potentialness: float | None
    n_pure_ne: int
    n_strict_ne: int


def discretization_sweep(
    kind: EconKind,
    valuations: Sequence[float],
    action_counts: Sequence[int],
    cache,
) -> list[SweepRow]:
    """Potentialness and equilibrium counts for each grid size.

    ``cache`` is an OperatorCache (or anything with a ``get(shape)``);
    operators are shared across kinds and valuation settings.
    """
    rows = []
    valuations = tuple(float(v) for v in valuations)
    for m in action_counts:
        spec = EconGameSpec(
            kind, len(valuations), valuations, (int(m),) * len(valuations)
        )
        game = build_econ_game(spec)
        ops: DecompositionOperators = cache.get(game.shape)
        report = pure_equilibria(game)
        rows.append(
            SweepRow(
                EconKind(kind),
                int(m),
                valuations,
                potentialness(ops, game),
                len(report.pure_ne),
                len(report.strict_pure_ne),
            )
        )
    return rows

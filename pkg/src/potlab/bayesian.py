"""Finite Bayesian games with independent uniform types, reduced to normal form.

Each player privately draws a type (their valuation) from the uniform
grid {k/V : k = 1..V}, then bids. Restricting to non-decreasing
type-to-action maps keeps the induced normal form tractable:
C(V + A - 1, A - 1) strategies per player instead of A^V. Pure Nash
equilibria of the induced game are exactly the pure Bayes-Nash
equilibria of the Bayesian game.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement, product
from typing import Sequence

import numpy as np

from .econ import EconKind, expost_utility
from .games import GameError, GameShape, NormalFormGame, pure_equilibria
from .hodge import potentialness

__all__ = [
    "FIG8_ACTION_GRID",
    "BayesianGame",
    "enumerate_monotone_strategies",
    "monotone_strategy_count",
    "induced_normal_form",
    "bayesian_potentialness_sweep",
    "BayesianSweepRow",
]

# Action grid used by the reference type-count sweep (four bids, endpoint 0.9).
FIG8_ACTION_GRID = (0.0, 0.3, 0.6, 0.9)

# Upper bound on induced strategy counts; anything larger would blow the
# operator budget long before this guard fires.
MAX_STRATEGIES = 100_000


@dataclass(frozen=True)
class BayesianGame:
    """Type grids, uniform independent prior, and an ex-post payoff rule.

    Player i's types are {k/V_i : k = 1..V_i}, each with prior weight
    1/V_i. The ex-post rule is one of the auction/contest kinds; the
    Tullock prize is read as the observing player's own type.
    """

    kind: EconKind
    num_players: int
    num_types: tuple[int, ...]
    action_grids: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", EconKind(self.kind))
        object.__setattr__(self, "num_types", tuple(int(v) for v in self.num_types))
        object.__setattr__(
            self,
            "action_grids",
            tuple(tuple(float(b) for b in g) for g in self.action_grids),
        )
        if len(self.num_types) != self.num_players or len(self.action_grids) != self.num_players:
            raise GameError("need type counts and action grids for every player")
        if any(v < 1 for v in self.num_types):
            raise GameError("every player needs at least one type")
        for g in self.action_grids:
            if len(g) < 2 or any(b >= c for b, c in zip(g, g[1:])):
                raise GameError("action grids must be strictly increasing with >= 2 bids")

    @classmethod
    def uniform(cls, kind, num_types: int, action_grid=FIG8_ACTION_GRID, num_players=2):
        return cls(kind, num_players, (num_types,) * num_players, (tuple(action_grid),) * num_players)

    def type_values(self, player: int) -> tuple[float, ...]:
        v = self.num_types[player]
        return tuple((k + 1) / v for k in range(v))


def monotone_strategy_count(num_types: int, num_actions: int) -> int:
    return math.comb(num_types + num_actions - 1, num_actions - 1)


def enumerate_monotone_strategies(num_types: int, num_actions: int) -> list[tuple[int, ...]]:
    """All non-decreasing maps from type index to action index, in lexicographic order."""
    if num_types < 1 or num_actions < 1:
        raise GameError("need at least one type and one action")
    count = monotone_strategy_count(num_types, num_actions)
    if count > MAX_STRATEGIES:
        raise GameError(f"{count} monotone strategies exceeds the supported maximum")
    return list(combinations_with_replacement(range(num_actions), num_types))


def induced_normal_form(game: BayesianGame) -> tuple[NormalFormGame, list[list[tuple[int, ...]]]]:
    """Normal form over monotone strategies with exact expected payoffs.

    One action per monotone strategy, ordered as enumerated. Payoffs are
    the expectation of the ex-post utility over the full type-profile
    grid; terms are accumulated with compensated summation so equal-weight
    rational averages come out exact to the last bit achievable in doubles.
    """
    n = game.num_players
    strategies = [
        enumerate_monotone_strategies(game.num_types[i], len(game.action_grids[i]))
        for i in range(n)
    ]
    counts = [len(s) for s in strategies]
    shape = GameShape.of(counts)

    type_values = [game.type_values(i) for i in range(n)]
    type_profiles = list(product(*[range(v) for v in game.num_types]))
    weight = 1.0 / math.prod(game.num_types)
    grids = [np.asarray(g) for g in game.action_grids]

    payoffs = np.empty((n, shape.total_profiles))
    for flat, strat_profile in enumerate(product(*strategies)):
        for i in range(n):
            terms = []
            for tau in type_profiles:
                bids = np.array(
                    [grids[j][strat_profile[j][tau[j]]] for j in range(n)]
                )
                top = bids == bids.max()
                x = top / top.sum()
                terms.append(
                    expost_utility(game.kind, bids, x, type_values[i][tau[i]], i)
                )
            payoffs[i, flat] = weight * math.fsum(terms)
    return NormalFormGame(shape, payoffs), strategies


@dataclass
class BayesianSweepRow:
    kind: EconKind
    n_types: int
    n_strategies: int
    potentialness: float | None
    has_pure_bne: bool


def bayesian_potentialness_sweep(
    kind: EconKind,
    action_grid: Sequence[float],
    type_counts: Sequence[int],
    cache,
) -> list[BayesianSweepRow]:
    """Potentialness and pure-BNE existence as the number of types grows."""
    rows = []
    for v in type_counts:
        bgame = BayesianGame.uniform(kind, int(v), tuple(action_grid))
        induced, strategies = induced_normal_form(bgame)
        ops = cache.get(induced.shape)
        rows.append(
            BayesianSweepRow(
                EconKind(kind),
                int(v),
                len(strategies[0]),
                potentialness(ops, induced),
                pure_equilibria(induced).has_pure_ne,
            )
        )
    return rows

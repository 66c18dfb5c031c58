"""Finite normal-form games: shapes, profile indexing, equilibria, gradients, sampling.

Payoffs are stored as one flat float64 vector per player, indexed by the
mixed-radix profile index with player 1's action as the most significant
digit. All operations are pure; games are immutable after construction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GameError",
    "GameShape",
    "NormalFormGame",
    "MixedProfile",
    "EquilibriumReport",
    "pure_equilibria",
    "payoff_gradient",
    "expected_utility",
    "best_response",
    "relative_utility_loss",
    "sample_random_game",
    "derive_seed",
    "game_to_json",
    "game_from_json",
]

# Below this magnitude a best-response value is treated as zero and the
# relative utility loss falls back to the absolute loss.
BR_VALUE_EPS = 1e-12

SIMPLEX_SUM_TOL = 1e-12


class GameError(ValueError):
    """Invalid game data (bad shape, out-of-range profile, malformed payoffs)."""


@dataclass(frozen=True)
class GameShape:
    """Player count and per-player action counts.

    Rejects degenerate games: at least two players, each with at least
    two actions.
    """

    num_players: int
    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(m) for m in self.actions))
        if self.num_players != len(self.actions):
            raise GameError(
                f"num_players={self.num_players} does not match "
                f"{len(self.actions)} action counts"
            )
        if self.num_players < 2:
            raise GameError("need at least two players")
        if any(m < 2 for m in self.actions):
            raise GameError(f"every player needs at least two actions, got {self.actions}")

    @classmethod
    def of(cls, actions: Iterable[int]) -> "GameShape":
        actions = tuple(int(m) for m in actions)
        return cls(len(actions), actions)

    @property
    def total_profiles(self) -> int:
        out = 1
        for m in self.actions:
            out *= m
        return out

    @property
    def total_edges(self) -> int:
        """Number of unilateral deviations: (A/2) * sum_i (m_i - 1), computed exactly."""
        a = self.total_profiles
        return sum((a // m) * (m * (m - 1) // 2) for m in self.actions)

    @property
    def strides(self) -> tuple[int, ...]:
        """Mixed-radix strides; player 1 most significant."""
        out = [1] * self.num_players
        for i in range(self.num_players - 2, -1, -1):
            out[i] = out[i + 1] * self.actions[i + 1]
        return tuple(out)

    def profile_index(self, profile: Sequence[int]) -> int:
        if len(profile) != self.num_players:
            raise GameError(f"profile {profile!r} has wrong length for {self}")
        idx = 0
        for a, m, s in zip(profile, self.actions, self.strides):
            a = int(a)
            if not 0 <= a < m:
                raise GameError(f"action {a} out of range [0, {m}) in profile {profile!r}")
            idx += a * s
        return idx

    def profile_from_index(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total_profiles:
            raise GameError(f"profile index {index} out of range")
        out = []
        for s in self.strides:
            out.append(index // s)
            index %= s
        return tuple(out)

    def all_profiles(self) -> np.ndarray:
        """All pure profiles as an (A, N) int array, in profile-index order."""
        grids = np.meshgrid(*[np.arange(m) for m in self.actions], indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

    def label(self) -> str:
        return f"{self.num_players}x{'-'.join(str(m) for m in self.actions)}"

    def setting_label(self) -> str:
        """Experiment-facing name: '2x10' for two symmetric 10-action players."""
        if len(set(self.actions)) == 1:
            return f"{self.num_players}x{self.actions[0]}"
        return self.label()

    def __str__(self) -> str:
        return "x".join(str(m) for m in self.actions)


class NormalFormGame:
    """A finite game: a GameShape plus one flat payoff vector per player.

    ``payoffs[i]`` has length ``shape.total_profiles`` and is indexed by
    the profile index. The payoff array is made read-only so games can be
    shared freely across workers.
    """

    __slots__ = ("shape", "payoffs")

    def __init__(self, shape: GameShape, payoffs: np.ndarray):
        payoffs = np.ascontiguousarray(payoffs, dtype=np.float64)
        if payoffs.shape != (shape.num_players, shape.total_profiles):
            raise GameError(
                f"payoffs must have shape {(shape.num_players, shape.total_profiles)}, "
                f"got {payoffs.shape}"
            )
        if not np.all(np.isfinite(payoffs)):
            raise GameError("payoffs must be finite")
        payoffs.setflags(write=False)
        self.shape = shape
        self.payoffs = payoffs

    @classmethod
    def from_payoff_matrices(cls, matrices: Sequence[np.ndarray]) -> "NormalFormGame":
        """Build from one N-dimensional payoff tensor per player.

        Axis j of every tensor is player j's action. For two players this
        is the usual bimatrix convention (rows = player 1).
        """
        tensors = [np.asarray(m, dtype=np.float64) for m in matrices]
        shape = GameShape.of(tensors[0].shape)
        if len(tensors) != shape.num_players:
            raise GameError("need one payoff tensor per player")
        for t in tensors:
            if t.shape != tensors[0].shape:
                raise GameError("payoff tensors must share one shape")
        flat = np.stack([t.reshape(-1) for t in tensors])
        return cls(shape, flat)

    def payoff_tensor(self, player: int) -> np.ndarray:
        """Player's payoffs reshaped to the action grid (read-only view)."""
        return self.payoffs[player].reshape(self.shape.actions)

    def payoff(self, player: int, profile: Sequence[int]) -> float:
        return float(self.payoffs[player, self.shape.profile_index(profile)])

    def __repr__(self) -> str:
        return f"NormalFormGame({self.shape})"


@dataclass(frozen=True)
class MixedProfile:
    """One probability vector per player; each sums to 1 within 1e-12."""

    strategies: tuple[np.ndarray, ...]

    def __post_init__(self):
        strategies = tuple(np.asarray(s, dtype=np.float64) for s in self.strategies)
        for s in strategies:
            if s.ndim != 1 or s.size < 2:
                raise GameError("each strategy must be a vector of length >= 2")
            if np.any(s < 0) or not np.all(np.isfinite(s)):
                raise GameError("strategy entries must be finite and nonnegative")
            if abs(s.sum() - 1.0) > SIMPLEX_SUM_TOL:
                raise GameError(f"strategy sums to {s.sum()!r}, not 1")
        object.__setattr__(self, "strategies", strategies)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.strategies[i]

    def __len__(self) -> int:
        return len(self.strategies)


@dataclass
class EquilibriumReport:
    """Pure Nash equilibria of a game; ``strict_pure_ne`` is a subset of ``pure_ne``."""

    pure_ne: list[tuple[int, ...]] = field(default_factory=list)
    strict_pure_ne: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def has_pure_ne(self) -> bool:
        return bool(self.pure_ne)

    @property
    def has_strict_ne(self) -> bool:
        return bool(self.strict_pure_ne)


def pure_equilibria(game: NormalFormGame) -> EquilibriumReport:
    """Exhaustively scan all profiles for pure and strict pure Nash equilibria.

    A profile is a pure NE iff no player has a strictly improving
    unilateral deviation; strict iff every deviation strictly lowers the
    deviator's payoff. Comparisons are exact (no tolerance), so results
    match a naive enumeration oracle bit for bit.
    """
    shape = game.shape
    ne = np.ones(shape.actions, dtype=bool)
    strict = np.ones(shape.actions, dtype=bool)
    for i in range(shape.num_players):
        t = game.payoff_tensor(i)
        best = t.max(axis=i, keepdims=True)
        at_best = t == best
        ne &= at_best
        strict &= at_best & (at_best.sum(axis=i, keepdims=True) == 1)
    report = EquilibriumReport()
    for prof in np.argwhere(ne):
        p = tuple(int(a) for a in prof)
        report.pure_ne.append(p)
        if strict[tuple(prof)]:
            report.strict_pure_ne.append(p)
    return report


def payoff_gradient(game: NormalFormGame, profile: MixedProfile, player: int) -> np.ndarray:
    """Expected payoff of each pure action against the opponents' mixed strategies.

    Entry k is E_{a_-i ~ s_-i}[u_i(k, a_-i)], computed by exact tensor
    contraction over all opponent profiles.
    """
    g = game.payoff_tensor(player)
    for j in range(game.shape.num_players - 1, -1, -1):
        if j != player:
            g = np.tensordot(g, profile[j], axes=([j], [0]))
    return g


def expected_utility(game: NormalFormGame, profile: MixedProfile, player: int) -> float:
    return float(profile[player] @ payoff_gradient(game, profile, player))


def best_response(game: NormalFormGame, profile: MixedProfile, player: int) -> int:
    """Index of the best pure response; ties break to the lowest action index."""
    return int(np.argmax(payoff_gradient(game, profile, player)))


def relative_utility_loss(game: NormalFormGame, profile: MixedProfile, player: int) -> float:
    """Per-player convergence residual: shortfall against the best response.

    Returns (b - c) / |b| where b is the best-response value and c the
    current expected payoff; this equals 1 - c/b for positive b and stays
    a nonnegative residual for negative payoffs. When |b| <= 1e-12 the
    ratio is undefined (zero-value best responses occur in auction
    profiles) and the absolute loss b - c is returned instead.
    """
    v = payoff_gradient(game, profile, player)
    b = float(v.max())
    c = float(profile[player] @ v)
    if abs(b) > BR_VALUE_EPS:
        return (b - c) / abs(b)
    return b - c


def sample_random_game(shape: GameShape, seed) -> NormalFormGame:
    """Game with all payoffs iid uniform on [0, 1]; deterministic per seed."""
    rng = np.random.default_rng(seed)
    payoffs = rng.random((shape.num_players, shape.total_profiles))
    return NormalFormGame(shape, payoffs)


def derive_seed(master_seed: int, *stream: int) -> int:
    """Stable per-task seed: hash of (master_seed, stream identifiers).

    Experiments derive one seed per (setting, game index, ...) so results
    are identical across runs and across any parallel schedule.
    """
    ss = np.random.SeedSequence((int(master_seed),) + tuple(int(x) for x in stream))
    return int(ss.generate_state(1, np.uint64)[0])


def parse_setting(text: str) -> GameShape:
    """Parse '2x10' (2 players, 10 actions each) or '2x3-4' (asymmetric)."""
    try:
        players, rest = text.strip().split("x", 1)
        counts = [int(m) for m in rest.split("-")]
        n = int(players)
    except ValueError as exc:
        raise GameError(f"cannot parse setting {text!r}: {exc}") from exc
    if len(counts) == 1:
        counts = counts * n
    return GameShape(n, tuple(counts))


def game_to_json(game: NormalFormGame) -> str:
    """Serialize to the interchange JSON object; floats round-trip exactly."""
    doc = {
        "players": game.shape.num_players,
        "actions": list(game.shape.actions),
        "payoffs": [[float(x) for x in row] for row in game.payoffs],
    }
    return json.dumps(doc)


def game_from_json(text: str) -> NormalFormGame:
    doc = json.loads(text)
    try:
        shape = GameShape(int(doc["players"]), tuple(int(m) for m in doc["actions"]))
        payoffs = np.array(doc["payoffs"], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise GameError(f"malformed game document: {exc}") from exc
    return NormalFormGame(shape, payoffs)

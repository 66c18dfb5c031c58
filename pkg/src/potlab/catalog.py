"""Standard 2x2 and 3x3 matrix games used as reference points."""
from __future__ import annotations

import numpy as np

from .games import NormalFormGame

__all__ = [
    "matching_pennies",
    "prisoners_dilemma",
    "battle_of_sexes",
    "shapley_game",
    "jordan_game",
]


def matching_pennies() -> NormalFormGame:
    """Zero-sum matcher/mismatcher game with payoffs +-1; purely harmonic."""
    u1 = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return NormalFormGame.from_payoff_matrices([u1, -u1])


def prisoners_dilemma() -> NormalFormGame:
    """Cooperate/defect dilemma; defection dominant, an exact potential game."""
    u1 = np.array([[-1.0, -3.0], [0.0, -2.0]])
    return NormalFormGame.from_payoff_matrices([u1, u1.T])


def battle_of_sexes() -> NormalFormGame:
    """Coordination game with opposed favorite outcomes.

    Payoffs (5,3) at the first player's favorite and (2,5) at the second's.
    The usual symmetric textbook constants (2,1)/(1,2) make the game an
    exact potential game; this variant keeps the story but breaks that
    symmetry so the game sits near, not at, the potential subspace and
    simultaneous learning can actually pick one of the two strict
    equilibria from a uniform start.
    """
    u1 = np.array([[5.0, 0.0], [0.0, 2.0]])
    u2 = np.array([[3.0, 0.0], [0.0, 5.0]])
    return NormalFormGame.from_payoff_matrices([u1, u2])


def shapley_game() -> NormalFormGame:
    """3x3 cyclic-best-response game: matcher vs. shift-by-one matcher."""
    u1 = np.eye(3)
    u2 = np.roll(np.eye(3), 1, axis=1)
    return NormalFormGame.from_payoff_matrices([u1, u2])


def jordan_game(alpha: float, beta: float) -> NormalFormGame:
    """Parameterized matching-pennies family with the mixed equilibrium at (alpha, beta).

    Player 1 wants to match, player 2 to mismatch; the winning payoffs are
    scaled so the unique Nash equilibrium mixes ((alpha, 1-alpha),
    (beta, 1-beta)). Requires alpha, beta in (0, 1).
    """
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise ValueError("jordan_game parameters must lie strictly inside (0, 1)")
    u1 = np.array([[1.0 - beta, 0.0], [0.0, beta]])
    u2 = np.array([[0.0, 1.0 - alpha], [alpha, 0.0]])
    return NormalFormGame.from_payoff_matrices([u1, u2])

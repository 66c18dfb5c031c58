"""Online mirror descent with entropic regularization on mixed strategies.

Every player simultaneously observes their full-information payoff
gradient and applies the multiplicative-weights prox update with step
size eta0 * t^(-beta). A run counts as converged once the worst
relative utility loss falls below the tolerance at an approximately pure
profile; sitting at a mixed equilibrium (loss zero, nowhere near a
vertex) is deliberately not convergence, since the dynamics can only
stabilize at strict pure equilibria.

The iteration loop has two interchangeable backends: a compiled kernel
(potlab._omdcore, built from Cython) and a NumPy fallback selected at
import when the extension is unavailable.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _omdpy
from .games import GameError, GameShape, MixedProfile, NormalFormGame

try:
    from . import _omdcore
except ImportError:  # extension not built; fallback only
    _omdcore = None

__all__ = [
    "COMPILED_KERNEL_AVAILABLE",
    "DEFAULT_BACKEND",
    "OMDConfig",
    "Trajectory",
    "prox_map",
    "uniform_init",
    "random_init",
    "run_omd",
]

COMPILED_KERNEL_AVAILABLE = _omdcore is not None
DEFAULT_BACKEND = "compiled" if COMPILED_KERNEL_AVAILABLE else "python"

# Zero init coordinates are lifted to this floor (the entropic prox is
# undefined at the boundary), then the vector is renormalized.
INTERIOR_EPS = 1e-12

# "Approximately pure": every player puts at least 1 - PURITY_TOL on one action.
PURITY_TOL = 1e-3


@dataclass
class OMDConfig:
    """Step schedule and stopping rule. eta_t = eta0 * t^(-beta), t from 1."""

    eta0: float = 2.0**3
    beta: float = 1.0 / 20.0
    max_iters: int = 2000
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class Trajectory:
    """Outcome of one run; loss_history has one entry per executed iteration."""

    converged: bool
    iterations_used: int
    final_profile: MixedProfile
    loss_history: np.ndarray = field(repr=False)

    @property
    def final_loss(self) -> float:
        return float(self.loss_history[-1]) if len(self.loss_history) else float("nan")


def prox_map(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Entropic prox: x_j * exp(y_j), renormalized to the simplex.

    The max of y is subtracted before exponentiation, which leaves the
    result unchanged mathematically and prevents overflow.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = x * np.exp(y - y.max())
    return w / w.sum()


def uniform_init(shape: GameShape) -> MixedProfile:
    return MixedProfile(tuple(np.full(m, 1.0 / m) for m in shape.actions))


def random_init(shape: GameShape, seed) -> MixedProfile:
    """Uniform sample from each player's simplex via normalized exponentials."""
    rng = np.random.default_rng(seed)
    out = []
    for m in shape.actions:
        e = rng.standard_exponential(m)
        out.append(e / e.sum())
    return MixedProfile(tuple(out))


def _select_kernel(backend: str):
    if backend == "auto":
        backend = DEFAULT_BACKEND
    if backend == "compiled":
        if _omdcore is None:
            raise GameError("compiled kernel requested but the extension is not built")
        return _omdcore
    if backend == "python":
        return _omdpy
    raise ValueError(f"unknown backend {backend!r}")


def run_omd(
    game: NormalFormGame,
    init: MixedProfile,
    cfg: OMDConfig | None = None,
    backend: str = "auto",
) -> Trajectory:
    """Run mirror descent from ``init``; deterministic given its inputs.

    Boundary initial points are perturbed into the interior. Raises
    GameError if a gradient turns non-finite (which only huge payoff
    scales can cause).
    """
    cfg = cfg or OMDConfig()
    shape = game.shape
    if len(init) != shape.num_players or any(
        init[i].shape[0] != m for i, m in enumerate(shape.actions)
    ):
        raise GameError(f"initial profile does not match shape {shape}")

    kernel = _select_kernel(backend)
    dims = np.asarray(shape.actions, dtype=np.int64)
    offsets = np.zeros(shape.num_players + 1, dtype=np.int64)
    np.cumsum(dims, out=offsets[1:])
    strat = np.empty(int(offsets[-1]), dtype=np.float64)
    for i in range(shape.num_players):
        s = np.maximum(init[i], INTERIOR_EPS)
        strat[offsets[i] : offsets[i + 1]] = s / s.sum()

    loss_out = np.empty(cfg.max_iters, dtype=np.float64)
    status, iters = kernel.run(
        game.payoffs,
        dims,
        offsets,
        strat,
        float(cfg.eta0),
        float(cfg.beta),
        float(cfg.tolerance),
        PURITY_TOL,
        int(cfg.max_iters),
        loss_out,
    )
    if status < 0:
        raise GameError(
            f"non-finite gradient at iteration {iters} (payoff scale too large "
            f"for the step size eta0={cfg.eta0})"
        )
    final = MixedProfile(
        tuple(strat[offsets[i] : offsets[i + 1]].copy() for i in range(shape.num_players))
    )
    return Trajectory(
        converged=bool(status == 1),
        iterations_used=int(iters),
        final_profile=final,
        loss_history=loss_out[:iters].copy(),
    )

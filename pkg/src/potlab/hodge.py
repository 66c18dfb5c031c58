"""Response graphs, flow decomposition, and the potentialness metric.

A game's unilateral payoff differences form a flow on its response graph.
That flow splits orthogonally into a gradient part (the image of the node
potential map) and a circulation part; potentialness is the relative
2-norm weight of the gradient part. The expensive objects, the incidence
operators and the projection onto gradient flows, depend only on the game
shape and are built once per shape.

The projection is kept in factored form ``Pi = U @ U.T`` with ``U``
orthonormal (E x rank); that is what all computations use. The dense
E x E matrix is materialized on demand and only below a memory budget,
since it grows like the square of the edge count.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .games import GameError, GameShape, NormalFormGame

__all__ = [
    "ShapeBudgetError",
    "NonStrategicGame",
    "ResponseGraph",
    "DecompositionOperators",
    "DecompositionResult",
    "build_response_graph",
    "build_operators",
    "deviation_flow",
    "potentialness",
    "potentialness_of_flow",
    "decompose_payoffs",
    "alpha_blend",
    "random_potential_game",
    "random_nonstrategic_game",
]

# Relative singular-value cutoff for rank decisions; the node-potential map
# always has the constants in its kernel, so a tolerance is mandatory.
RANK_RTOL = 1e-10

# Largest per-player action counts built without an explicit override.
DEFAULT_SHAPE_CEILING = {2: 40, 3: 12, 4: 7}

DEFAULT_FACTOR_BUDGET = 2 * 1024**3     # bytes for the E x rank projection factor
DEFAULT_DENSE_PI_BUDGET = 512 * 1024**2  # bytes for a dense E x E projection


class ShapeBudgetError(GameError):
    """Shape exceeds the configured ceiling or operator memory budget."""


class NonStrategicGame(Exception):
    """Raised where a numeric potentialness is required but undefined."""


def guard_shape(
    shape: GameShape,
    *,
    ceiling: dict[int, int] | None = None,
    factor_budget: int = DEFAULT_FACTOR_BUDGET,
) -> None:
    """Reject shapes whose operators would not fit the configured budget."""
    if ceiling is not None:
        if shape.num_players not in ceiling:
            raise ShapeBudgetError(
                f"{shape.num_players} players unsupported (ceiling covers "
                f"{sorted(ceiling)} players); pass ceiling=None to override"
            )
        cap = ceiling[shape.num_players]
        if max(shape.actions) > cap:
            raise ShapeBudgetError(
                f"shape {shape} exceeds the default ceiling of {cap} actions for "
                f"{shape.num_players} players; pass ceiling=None to override"
            )
    need = 8 * shape.total_edges * max(shape.total_profiles - 1, 1)
    if need > factor_budget:
        raise ShapeBudgetError(
            f"projection factor for {shape} needs ~{need / 1e9:.1f} GB, over the "
            f"{factor_budget / 1e9:.1f} GB budget"
        )


@dataclass(frozen=True)
class ResponseGraph:
    """Canonical edge enumeration of all unilateral deviations.

    One node per pure profile, one edge per deviation. Edges are ordered
    player-major, then by opponent profile index, then by action pair
    (k, l) with k < l; each edge points from the lower action index to the
    higher. Cached operator files depend on this order being stable.
    """

    shape: GameShape
    players: np.ndarray  # (E,) deviating player per edge
    sources: np.ndarray  # (E,) profile index of the low-action endpoint
    targets: np.ndarray  # (E,) profile index of the high-action endpoint

    @property
    def num_edges(self) -> int:
        return self.players.shape[0]


def build_response_graph(shape: GameShape, **guard_kwargs) -> ResponseGraph:
    guard_shape(shape, **guard_kwargs)
    idx = np.arange(shape.total_profiles, dtype=np.int64).reshape(shape.actions)
    players, sources, targets = [], [], []
    for i in range(shape.num_players):
        m = shape.actions[i]
        fibers = np.moveaxis(idx, i, -1).reshape(-1, m)  # rows: opponent profiles in index order
        k, l = np.triu_indices(m, k=1)  # lexicographic (k, l) pairs
        sources.append(fibers[:, k].reshape(-1))
        targets.append(fibers[:, l].reshape(-1))
        players.append(np.full(sources[-1].shape[0], i, dtype=np.int32))
    graph = ResponseGraph(
        shape,
        np.concatenate(players),
        np.concatenate(sources),
        np.concatenate(targets),
    )
    assert graph.num_edges == shape.total_edges
    return graph


@dataclass
class DecompositionOperators:
    """Per-shape linear operators: deviation map, node gradient, projections.

    ``deviation`` maps stacked payoff vectors (N*A,) to edge flows (E,);
    ``grad`` maps node potentials (A,) to edge flows. ``pi_factor`` holds
    orthonormal columns spanning the gradient flows, so the projection is
    ``flow -> pi_factor @ (pi_factor.T @ flow)``. ``Pi`` and ``D_pinv``
    are materialized lazily.
    """

    graph: ResponseGraph
    deviation: sp.csr_matrix
    grad: sp.csr_matrix
    pi_factor: np.ndarray
    dense_pi_budget: int = DEFAULT_DENSE_PI_BUDGET
    _pi: np.ndarray | None = field(default=None, repr=False)
    _d_pinv: np.ndarray | None = field(default=None, repr=False)

    @property
    def shape(self) -> GameShape:
        return self.graph.shape

    @property
    def num_edges(self) -> int:
        return self.graph.num_edges

    @property
    def D(self) -> sp.csr_matrix:
        return self.deviation

    @property
    def Pi(self) -> np.ndarray:
        """Dense projection onto gradient flows (symmetric, idempotent)."""
        if self._pi is None:
            need = 8 * self.num_edges**2
            if need > self.dense_pi_budget:
                raise ShapeBudgetError(
                    f"dense projection for {self.shape} needs {need / 1e9:.1f} GB, "
                    f"over the {self.dense_pi_budget / 1e9:.1f} GB budget; use "
                    "project_potential() instead"
                )
            self._pi = self.pi_factor @ self.pi_factor.T
        return self._pi

    @property
    def D_pinv(self) -> np.ndarray:
        """Dense Moore-Penrose pseudo-inverse of the deviation map, (N*A, E)."""
        if self._d_pinv is None:
            self._d_pinv = self._build_d_pinv()
        return self._d_pinv

    def project_potential(self, flow: np.ndarray) -> np.ndarray:
        return self.pi_factor @ (self.pi_factor.T @ flow)

    def apply_d_pinv(self, flow: np.ndarray) -> np.ndarray:
        """D_pinv @ flow without materializing the dense matrix.

        D^T D is block diagonal per player; block i is the Laplacian of the
        player's deviation cliques, m_i*I - J on each own-action fiber, whose
        pseudo-inverse is (x - fiber_mean(x)) / m_i. This closed form is the
        exact Moore-Penrose action.
        """
        shape = self.shape
        flow = np.asarray(flow, dtype=np.float64)
        acc = (self.deviation.T @ flow).reshape(shape.num_players, shape.total_profiles)
        out = np.empty_like(acc)
        for i in range(shape.num_players):
            t = acc[i].reshape(shape.actions)
            out[i] = ((t - t.mean(axis=i, keepdims=True)) / shape.actions[i]).reshape(-1)
        return out.reshape(-1)

    def _build_d_pinv(self) -> np.ndarray:
        n, a, e = self.shape.num_players, self.shape.total_profiles, self.num_edges
        need = 8 * n * a * e
        if need > self.dense_pi_budget:
            raise ShapeBudgetError(
                f"dense D_pinv for {self.shape} needs {need / 1e9:.1f} GB; "
                "use apply_d_pinv() instead"
            )
        dt = np.asarray(self.deviation.T.todense()).reshape(n, a, e)
        out = np.empty_like(dt)
        for i in range(n):
            t = dt[i].reshape(self.shape.actions + (e,))
            out[i] = ((t - t.mean(axis=i, keepdims=True)) / self.shape.actions[i]).reshape(a, e)
        return out.reshape(n * a, e)


def build_operators(
    shape: GameShape,
    *,
    ceiling: dict[int, int] | None = None,
    factor_budget: int = DEFAULT_FACTOR_BUDGET,
    dense_pi_budget: int = DEFAULT_DENSE_PI_BUDGET,
) -> DecompositionOperators:
    """Construct the per-shape operators from scratch.

    The projection factor comes from the eigendecomposition of the node
    Laplacian grad.T @ grad (A x A, small), not from a dense SVD of grad:
    with V, w its eigenpairs above the rank cutoff, U = grad @ V / sqrt(w)
    has orthonormal columns spanning the gradient flows.
    """
    if ceiling is None:
        ceiling = DEFAULT_SHAPE_CEILING
    graph = build_response_graph(shape, ceiling=ceiling, factor_budget=factor_budget)
    e = graph.num_edges
    a = shape.total_profiles
    rows = np.arange(e, dtype=np.int64)

    grad = sp.csr_matrix(
        (
            np.concatenate([np.ones(e), -np.ones(e)]),
            (np.concatenate([rows, rows]), np.concatenate([graph.targets, graph.sources])),
        ),
        shape=(e, a),
    )
    pcol = graph.players.astype(np.int64) * a
    deviation = sp.csr_matrix(
        (
            np.concatenate([np.ones(e), -np.ones(e)]),
            (
                np.concatenate([rows, rows]),
                np.concatenate([pcol + graph.targets, pcol + graph.sources]),
            ),
        ),
        shape=(e, shape.num_players * a),
    )

    lap = np.asarray((grad.T @ grad).todense())
    w, v = np.linalg.eigh(lap)
    keep = w > (RANK_RTOL**2) * w[-1]
    factor = grad @ (v[:, keep] / np.sqrt(w[keep]))
    return DecompositionOperators(
        graph, deviation, grad, np.ascontiguousarray(factor), dense_pi_budget
    )


def deviation_flow(ops: DecompositionOperators | ResponseGraph, game: NormalFormGame) -> np.ndarray:
    """Edge flow of the deviating player's payoff differences, target minus source."""
    graph = ops.graph if isinstance(ops, DecompositionOperators) else ops
    if game.shape != graph.shape:
        raise GameError(f"game shape {game.shape} does not match operators for {graph.shape}")
    u = game.payoffs
    return u[graph.players, graph.targets] - u[graph.players, graph.sources]


def potentialness_of_flow(ops: DecompositionOperators, flow: np.ndarray) -> float | None:
    """Potentialness of a deviation flow; None when the flow is identically zero."""
    if not np.any(flow):
        return None
    fp = ops.project_potential(flow)
    fh = flow - fp
    np_, nh = float(np.linalg.norm(fp)), float(np.linalg.norm(fh))
    return np_ / (np_ + nh)


def potentialness(ops: DecompositionOperators, game: NormalFormGame) -> float | None:
    """Relative 2-norm weight of the gradient part of the game's deviation flow.

    Returns a value in [0, 1]: 1 for exact potential games, 0 for purely
    harmonic ones. Returns None for non-strategic games (zero deviation
    flow), where the ratio is undefined.
    """
    return potentialness_of_flow(ops, deviation_flow(ops, game))


@dataclass
class DecompositionResult:
    """Flow split plus, optionally, the payoff-space components.

    potential_flow + harmonic_flow equals the deviation flow, and the two
    parts are orthogonal. When components are present, uP + uH + uN
    re-sums to the input payoffs; uN is non-strategic and uP, uH are
    normalized (each player's payoffs sum to zero over own actions).
    """

    shape: GameShape
    deviation_flow: np.ndarray
    potential_flow: np.ndarray
    harmonic_flow: np.ndarray
    potentialness: float | None
    uP: NormalFormGame | None = None
    uH: NormalFormGame | None = None
    uN: NormalFormGame | None = None

    @property
    def has_components(self) -> bool:
        return self.uP is not None


def decompose_payoffs(
    ops: DecompositionOperators, game: NormalFormGame, components: bool = True
) -> DecompositionResult:
    """Split a game into potential, harmonic, and non-strategic parts.

    The non-strategic part is each player's payoff averaged over their own
    action (the orthogonal projection onto the deviation map's kernel);
    the potential part is D_pinv applied to the projected flow; the
    harmonic part is the remainder.
    """
    du = deviation_flow(ops, game)
    fp = ops.project_potential(du)
    fh = du - fp
    result = DecompositionResult(
        game.shape, du, fp, fh, potentialness_of_flow(ops, du)
    )
    if not components:
        return result
    shape = game.shape
    if not np.all(np.isfinite(ops.pi_factor)):
        raise GameError(f"projection factor for {shape} is not finite; rebuild the operators")
    u = game.payoffs
    un = np.stack(
        [
            np.broadcast_to(
                game.payoff_tensor(i).mean(axis=i, keepdims=True), shape.actions
            ).reshape(-1)
            for i in range(shape.num_players)
        ]
    )
    up = ops.apply_d_pinv(fp).reshape(shape.num_players, shape.total_profiles)
    uh = u - un - up
    result.uP = NormalFormGame(shape, up)
    result.uH = NormalFormGame(shape, uh)
    result.uN = NormalFormGame(shape, un)
    return result


def alpha_blend(dec: DecompositionResult, alpha: float) -> NormalFormGame:
    """Convex combination alpha*uP + (1-alpha)*uH of a game's components.

    The blend's potentialness is nondecreasing in alpha, hitting 0 at
    alpha=0 and 1 at alpha=1.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if not dec.has_components:
        raise GameError("decomposition was computed without payoff components")
    payoffs = alpha * dec.uP.payoffs + (1.0 - alpha) * dec.uH.payoffs
    return NormalFormGame(dec.shape, payoffs)


def random_potential_game(shape: GameShape, seed) -> tuple[NormalFormGame, np.ndarray]:
    """Exact potential game u_i = phi + c_i(a_-i) with random phi and offsets."""
    rng = np.random.default_rng(seed)
    phi = rng.standard_normal(shape.actions)
    payoffs = []
    for i in range(shape.num_players):
        opp_shape = list(shape.actions)
        opp_shape[i] = 1
        offset = rng.standard_normal(opp_shape)
        payoffs.append((phi + offset).reshape(-1))
    return NormalFormGame(shape, np.stack(payoffs)), phi.reshape(-1)


def random_nonstrategic_game(shape: GameShape, seed) -> NormalFormGame:
    """Game where each player's payoff ignores their own action (zero flow)."""
    rng = np.random.default_rng(seed)
    payoffs = []
    for i in range(shape.num_players):
        opp_shape = list(shape.actions)
        opp_shape[i] = 1
        offset = rng.standard_normal(opp_shape)
        payoffs.append(np.broadcast_to(offset, shape.actions).reshape(-1))
    return NormalFormGame(shape, np.stack(payoffs))

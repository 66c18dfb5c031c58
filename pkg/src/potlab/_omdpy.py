"""Pure-NumPy trajectory loop; semantic twin of the compiled kernel."""
from __future__ import annotations

import numpy as np

BR_VALUE_EPS = 1e-12
PROX_FLOOR = 1e-300


def run(payoffs, dims, offsets, strat, eta0, beta, tol, purity_tol, max_iters, loss_out):
    """Same contract as potlab._omdcore.run; see that module's docstring."""
    n_players = payoffs.shape[0]
    tensors = [payoffs[i].reshape(tuple(dims)) for i in range(n_players)]
    views = [strat[offsets[i] : offsets[i + 1]] for i in range(n_players)]

    def gradient():
        out = []
        for i in range(n_players):
            g = tensors[i]
            for j in range(n_players - 1, -1, -1):
                if j != i:
                    g = np.tensordot(g, views[j], axes=([j], [0]))
            out.append(g)
        return out

    def finite(v):
        return all(np.isfinite(g).all() for g in v)

    v = gradient()
    if not finite(v):
        return -1, 0
    for t in range(1, max_iters + 1):
        eta = eta0 * float(t) ** (-beta)
        for i in range(n_players):
            y = eta * (v[i] - v[i].max())
            w = views[i] * np.exp(y)
            w = np.maximum(w / w.sum(), PROX_FLOOR)
            views[i][:] = w / w.sum()
        v = gradient()
        if not finite(v):
            return -1, t
        worst = 0.0
        pure = True
        for i in range(n_players):
            b = float(v[i].max())
            c = float(views[i] @ v[i])
            loss = (b - c) / abs(b) if abs(b) > BR_VALUE_EPS else b - c
            worst = max(worst, loss)
            if float(views[i].max()) < 1.0 - purity_tol:
                pure = False
        loss_out[t - 1] = worst
        if worst < tol and pure:
            return 1, t
    return 0, max_iters

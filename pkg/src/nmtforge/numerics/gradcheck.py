"""Finite-difference gradient checking at double precision."""

import numpy as np

from nmtforge.numerics.autodiff import Graph, backward


def grad_check(build_loss, params, h=1e-5, max_coords=6, seed=0):
    """Compare analytic gradients against central finite differences.

    ``build_loss(graph, tensors)`` must deterministically build a scalar
    loss from the named leaf tensors; ``params`` maps names to numpy
    arrays. For each parameter up to ``max_coords`` coordinates are
    sampled and the relative error

        |analytic - central| / max(|analytic|, |central|, 1e-8)

    is computed with step ``h``. Returns the max over all sampled
    coordinates.
    """
    params64 = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}

    g = Graph(dtype=np.float64)
    tensors = {k: g.leaf(v, name=k) for k, v in params64.items()}
    loss = build_loss(g, tensors)
    grads = backward(g, loss)

    def eval_loss(current):
        fg = Graph(dtype=np.float64, grad=False)
        ts = {k: fg.leaf(v) for k, v in current.items()}
        return float(build_loss(fg, ts).data)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, arr in params64.items():
        n = arr.size
        if n <= max_coords:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=max_coords, replace=False)
        flat = arr.reshape(-1)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + h
            up = eval_loss(params64)
            flat[c] = orig - h
            down = eval_loss(params64)
            flat[c] = orig
            central = (up - down) / (2.0 * h)
            analytic = float(grads[name].reshape(-1)[c])
            denom = max(abs(analytic), abs(central), 1e-8)
            err = abs(analytic - central) / denom
            if err > worst:
                worst = err
    return worst

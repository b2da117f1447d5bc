"""Hot numeric kernels with optional numba acceleration.

Every kernel exists twice: a pure-numpy reference (``*_np``) and a numba
``@njit`` version compiled lazily on first call. Which family is exported
under the public name is decided once at import time by the environment
flag ``NMTFORGE_NUMBA``:

    NMTFORGE_NUMBA=1      force numba (ImportError if numba is missing)
    NMTFORGE_NUMBA=0      force the numpy fallback
    unset / auto          use numba when importable, else numpy

Both families compute the same formulas; they agree to floating-point
rounding (summation order differs). Within one process the selected path
is fixed, so repeated runs are bit-identical.

``benchmarks/bench_kernels.py`` times the two families side by side.
"""

import os

import numpy as np

__all__ = [
    "USING_NUMBA",
    "softmax_fwd",
    "softmax_bwd",
    "layer_norm_fwd",
    "layer_norm_bwd",
    "cross_entropy_fwd",
    "cross_entropy_bwd",
    "adam_update",
    "scatter_add_rows",
    "cumulative_mean_fwd",
    "cumulative_mean_bwd",
]


def _resolve_flag() -> bool:
    flag = os.environ.get("NMTFORGE_NUMBA", "auto").strip().lower()
    if flag in ("1", "true", "on", "yes"):
        import numba  # noqa: F401  (raise if forced but unavailable)

        return True
    if flag in ("0", "false", "off", "no"):
        return False
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


USING_NUMBA = _resolve_flag()


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def softmax_fwd_np(x):
    """Row-wise softmax of a 2D array, numerically stable."""
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_bwd_np(y, gy):
    """Gradient of row softmax given its output y and upstream gy."""
    dot = (gy * y).sum(axis=1, keepdims=True)
    return y * (gy - dot)


def layer_norm_fwd_np(x, eps):
    """Normalize rows to zero mean / unit variance. Returns (y, rstd)."""
    mean = x.mean(axis=1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    return centered * rstd, rstd[:, 0]


def layer_norm_bwd_np(y, rstd, gy):
    """Gradient of row normalization given normalized output y."""
    mean_gy = gy.mean(axis=1, keepdims=True)
    mean_gy_y = (gy * y).mean(axis=1, keepdims=True)
    return rstd[:, None] * (gy - mean_gy - y * mean_gy_y)


def cross_entropy_fwd_np(logits, targets, smoothing):
    """Label-smoothed cross entropy per row. Returns (loss, probs)."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    z = e.sum(axis=1, keepdims=True)
    logp = shifted - np.log(z)
    probs = e / z
    rows = np.arange(logits.shape[0])
    nll = -logp[rows, targets]
    if smoothing > 0.0:
        uniform = -logp.mean(axis=1)
        return (1.0 - smoothing) * nll + smoothing * uniform, probs
    return nll, probs


def cross_entropy_bwd_np(probs, targets, smoothing, gloss):
    """Gradient of cross_entropy_fwd w.r.t. the logits."""
    vocab = probs.shape[1]
    g = probs * gloss[:, None]
    if smoothing > 0.0:
        g -= (smoothing / vocab) * gloss[:, None]
        rows = np.arange(probs.shape[0])
        g[rows, targets] -= (1.0 - smoothing) * gloss
    else:
        rows = np.arange(probs.shape[0])
        g[rows, targets] -= gloss
    return g


def adam_update_np(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    """One fused Adam step, in place on flattened views."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    mhat = m / bc1
    vhat = v / bc2
    param -= lr * mhat / (np.sqrt(vhat) + eps)


def scatter_add_rows_np(out, ids, rows):
    """out[ids[i]] += rows[i], with repeated ids accumulated."""
    np.add.at(out, ids, rows)


def cumulative_mean_fwd_np(x):
    """Running mean over axis 1 of a (batch, time, feat) array."""
    counts = np.arange(1, x.shape[1] + 1, dtype=x.dtype)
    return np.cumsum(x, axis=1) / counts[None, :, None]


def cumulative_mean_bwd_np(gy):
    """Gradient of the running mean: reversed cumsum of gy[t]/(t+1)."""
    counts = np.arange(1, gy.shape[1] + 1, dtype=gy.dtype)
    scaled = gy / counts[None, :, None]
    return np.cumsum(scaled[:, ::-1, :], axis=1)[:, ::-1, :]


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if USING_NUMBA:
    from numba import njit

    _JIT = {"cache": True, "nogil": True}

    @njit(**_JIT)
    def _softmax_fwd(x):
        n, d = x.shape
        out = np.empty_like(x)
        for i in range(n):
            hi = x[i, 0]
            for j in range(1, d):
                if x[i, j] > hi:
                    hi = x[i, j]
            total = 0.0
            for j in range(d):
                e = np.exp(x[i, j] - hi)
                out[i, j] = e
                total += e
            for j in range(d):
                out[i, j] /= total
        return out

    @njit(**_JIT)
    def _softmax_bwd(y, gy):
        n, d = y.shape
        gx = np.empty_like(y)
        for i in range(n):
            dot = 0.0
            for j in range(d):
                dot += gy[i, j] * y[i, j]
            for j in range(d):
                gx[i, j] = y[i, j] * (gy[i, j] - dot)
        return gx

    @njit(**_JIT)
    def _layer_norm_fwd(x, eps):
        n, d = x.shape
        y = np.empty_like(x)
        rstd = np.empty(n, dtype=x.dtype)
        for i in range(n):
            mean = 0.0
            for j in range(d):
                mean += x[i, j]
            mean /= d
            var = 0.0
            for j in range(d):
                c = x[i, j] - mean
                var += c * c
            var /= d
            r = 1.0 / np.sqrt(var + eps)
            rstd[i] = r
            for j in range(d):
                y[i, j] = (x[i, j] - mean) * r
        return y, rstd

    @njit(**_JIT)
    def _layer_norm_bwd(y, rstd, gy):
        n, d = y.shape
        gx = np.empty_like(y)
        for i in range(n):
            mean_gy = 0.0
            mean_gy_y = 0.0
            for j in range(d):
                mean_gy += gy[i, j]
                mean_gy_y += gy[i, j] * y[i, j]
            mean_gy /= d
            mean_gy_y /= d
            for j in range(d):
                gx[i, j] = rstd[i] * (gy[i, j] - mean_gy - y[i, j] * mean_gy_y)
        return gx

    @njit(**_JIT)
    def _cross_entropy_fwd(logits, targets, smoothing):
        n, d = logits.shape
        loss = np.empty(n, dtype=logits.dtype)
        probs = np.empty_like(logits)
        for i in range(n):
            hi = logits[i, 0]
            for j in range(1, d):
                if logits[i, j] > hi:
                    hi = logits[i, j]
            total = 0.0
            for j in range(d):
                e = np.exp(logits[i, j] - hi)
                probs[i, j] = e
                total += e
            logz = np.log(total)
            nll = -(logits[i, targets[i]] - hi - logz)
            if smoothing > 0.0:
                acc = 0.0
                for j in range(d):
                    acc += logits[i, j] - hi - logz
                loss[i] = (1.0 - smoothing) * nll + smoothing * (-acc / d)
            else:
                loss[i] = nll
            for j in range(d):
                probs[i, j] /= total
        return loss, probs

    @njit(**_JIT)
    def _cross_entropy_bwd(probs, targets, smoothing, gloss):
        n, d = probs.shape
        g = np.empty_like(probs)
        for i in range(n):
            gl = gloss[i]
            for j in range(d):
                g[i, j] = probs[i, j] * gl
            if smoothing > 0.0:
                corr = (smoothing / d) * gl
                for j in range(d):
                    g[i, j] -= corr
                g[i, targets[i]] -= (1.0 - smoothing) * gl
            else:
                g[i, targets[i]] -= gl
        return g

    @njit(**_JIT)
    def _adam_update(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
        n = param.shape[0]
        for i in range(n):
            g = grad[i]
            m[i] = beta1 * m[i] + (1.0 - beta1) * g
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
            mhat = m[i] / bc1
            vhat = v[i] / bc2
            param[i] -= lr * mhat / (np.sqrt(vhat) + eps)

    @njit(**_JIT)
    def _scatter_add_rows(out, ids, rows):
        n, d = rows.shape
        for i in range(n):
            r = ids[i]
            for j in range(d):
                out[r, j] += rows[i, j]

    @njit(**_JIT)
    def _cumulative_mean_fwd(x):
        b, t, d = x.shape
        y = np.empty_like(x)
        for i in range(b):
            for j in range(d):
                acc = 0.0
                for s in range(t):
                    acc += x[i, s, j]
                    y[i, s, j] = acc / (s + 1)
        return y

    @njit(**_JIT)
    def _cumulative_mean_bwd(gy):
        b, t, d = gy.shape
        gx = np.empty_like(gy)
        for i in range(b):
            for j in range(d):
                acc = 0.0
                for s in range(t - 1, -1, -1):
                    acc += gy[i, s, j] / (s + 1)
                    gx[i, s, j] = acc
        return gx

    softmax_fwd = _softmax_fwd
    softmax_bwd = _softmax_bwd
    layer_norm_fwd = _layer_norm_fwd
    layer_norm_bwd = _layer_norm_bwd
    cross_entropy_fwd = _cross_entropy_fwd
    cross_entropy_bwd = _cross_entropy_bwd
    adam_update = _adam_update
    scatter_add_rows = _scatter_add_rows
    cumulative_mean_fwd = _cumulative_mean_fwd
    cumulative_mean_bwd = _cumulative_mean_bwd
else:
    softmax_fwd = softmax_fwd_np
    softmax_bwd = softmax_bwd_np
    layer_norm_fwd = layer_norm_fwd_np
    layer_norm_bwd = layer_norm_bwd_np
    cross_entropy_fwd = cross_entropy_fwd_np
    cross_entropy_bwd = cross_entropy_bwd_np
    adam_update = adam_update_np
    scatter_add_rows = scatter_add_rows_np
    cumulative_mean_fwd = cumulative_mean_fwd_np
    cumulative_mean_bwd = cumulative_mean_bwd_np

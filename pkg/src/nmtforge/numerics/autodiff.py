"""Reverse-mode autodiff over dense numpy arrays.

A ``Graph`` is a tape: every op appends its output node in creation order,
which is already a topological order, so the backward pass is a single
reverse sweep that touches each node exactly once. Leaf tensors are created
with :meth:`Graph.leaf`; named parameter leaves are what ``backward``
reports gradients for.

Graphs are built per forward pass and thrown away. They are single-threaded;
the underlying parameter arrays are never mutated by ops, so the same
arrays can be shared by concurrent read-only (``grad=False``) graphs.
"""

import numpy as np

from nmtforge import kernels


class ShapeError(ValueError):
    """Operands have incompatible shapes for the requested op."""


class NumericError(ArithmeticError):
    """An op produced NaN or Inf."""


class Tensor:
    __slots__ = ("graph", "data", "grad", "op", "parents", "rule", "name", "_gown")

    def __init__(self, graph, data, op, parents=(), rule=None, name=None):
        self.graph = graph
        self.data = data
        self.grad = None
        self.op = op
        self.parents = parents
        self.rule = rule
        self.name = name
        self._gown = False

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self):
        return float(self.data)

    def __repr__(self):
        return f"Tensor(op={self.op}, shape={self.data.shape})"

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return slice_(self, key)


class Graph:
    """Op tape. ``grad=False`` skips recording for forward-only passes."""

    def __init__(self, dtype=np.float32, check_finite=True, grad=True):
        self.dtype = np.dtype(dtype)
        self.check_finite = check_finite
        self.grad_enabled = grad
        self.nodes = []
        self.params = {}
        self._swept = False

    def leaf(self, data, name=None):
        """Wrap an array as a leaf. Named leaves are parameters."""
        arr = np.asarray(data, dtype=self.dtype)
        t = Tensor(self, arr, op="leaf", name=name)
        if name is not None:
            if name in self.params:
                raise ValueError(f"duplicate parameter name: {name}")
            self.params[name] = t
        return t

    def constant(self, data):
        return self.leaf(data)


def _record(graph, data, op, parents, rule):
    if graph.check_finite and not np.isfinite(data).all():
        raise NumericError(f"op '{op}' produced non-finite values")
    if not graph.grad_enabled:
        return Tensor(graph, data, op)
    t = Tensor(graph, data, op, parents=parents, rule=rule)
    graph.nodes.append(t)
    return t


def _accum(t, g):
    # First write aliases g (rules never mutate what they hand out); the
    # second accumulation switches to an owned array before any in-place +=.
    if t.grad is None:
        t.grad = g
    elif t._gown:
        t.grad += g
    else:
        t.grad = t.grad + g
        t._gown = True


def _unbroadcast(g, shape):
    """Reduce gradient g of a broadcast result back to an operand shape."""
    if g.shape == tuple(shape):
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def backward(graph, loss):
    """Reverse sweep from a scalar loss. Returns {param name: gradient}."""
    if loss.data.ndim != 0:
        raise ShapeError(f"loss must be scalar, got shape {loss.data.shape}")
    if loss.graph is not graph:
        raise ValueError("loss does not belong to this graph")
    if not graph.grad_enabled:
        raise RuntimeError("graph was built with grad=False")
    if graph._swept:
        raise RuntimeError("backward already ran on this graph")
    graph._swept = True

    loss.grad = np.ones((), dtype=graph.dtype)
    for node in reversed(graph.nodes):
        if node.grad is None or node.rule is None:
            continue
        node.rule(node.grad)

    out = {}
    for name, p in graph.params.items():
        if p.grad is None:
            out[name] = np.zeros_like(p.data)
        else:
            out[name] = p.grad
    return out


# ---------------------------------------------------------------------------
# ops
# ---------------------------------------------------------------------------

def add(a, b):
    try:
        data = a.data + b.data
    except ValueError as e:
        raise ShapeError(f"add: {a.data.shape} vs {b.data.shape}") from e

    def rule(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))

    return _record(a.graph, data, "add", (a, b), rule)


def mul(a, b):
    try:
        data = a.data * b.data
    except ValueError as e:
        raise ShapeError(f"mul: {a.data.shape} vs {b.data.shape}") from e

    def rule(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return _record(a.graph, data, "mul", (a, b), rule)


def scale(a, c):
    c = float(c)
    data = a.data * c

    def rule(g):
        _accum(a, g * c)

    return _record(a.graph, data, "scale", (a,), rule)


def matmul(a, b):
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError("matmul requires ndim >= 2 on both operands")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ShapeError(f"matmul: {a.data.shape} @ {b.data.shape}")
    try:
        data = np.matmul(a.data, b.data)
    except ValueError as e:
        raise ShapeError(f"matmul: {a.data.shape} @ {b.data.shape}") from e

    def rule(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        _accum(a, _unbroadcast(ga, a.data.shape))
        _accum(b, _unbroadcast(gb, b.data.shape))

    return _record(a.graph, data, "matmul", (a, b), rule)


def concat(tensors, axis=0):
    if not tensors:
        raise ShapeError("concat of zero tensors")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def rule(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            _accum(t, g[tuple(idx)])

    return _record(tensors[0].graph, data, "concat", tuple(tensors), rule)


def slice_(a, key):
    """Basic slicing (ints/slices); gradient scatters back into zeros."""
    data = a.data[key]

    def rule(g):
        full = np.zeros_like(a.data)
        full[key] += g
        _accum(a, full)

    return _record(a.graph, data, "slice", (a,), rule)


def reshape(a, shape):
    data = a.data.reshape(shape)

    def rule(g):
        _accum(a, g.reshape(a.data.shape))

    return _record(a.graph, data, "reshape", (a,), rule)


def transpose(a, axes):
    data = np.transpose(a.data, axes)
    inverse = np.argsort(axes)

    def rule(g):
        _accum(a, np.transpose(g, inverse))

    return _record(a.graph, data, "transpose", (a,), rule)


def sum_(a, axis=None, keepdims=False):
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def rule(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, a.data.shape).copy())
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.data.shape).copy())

    return _record(a.graph, data, "sum", (a,), rule)


def sigmoid(a):
    data = 1.0 / (1.0 + np.exp(-a.data))

    def rule(g):
        _accum(a, g * data * (1.0 - data))

    return _record(a.graph, data, "sigmoid", (a,), rule)


def tanh(a):
    data = np.tanh(a.data)

    def rule(g):
        _accum(a, g * (1.0 - data * data))

    return _record(a.graph, data, "tanh", (a,), rule)


def relu(a):
    data = np.maximum(a.data, 0.0)

    def rule(g):
        _accum(a, g * (a.data > 0.0))

    return _record(a.graph, data, "relu", (a,), rule)


def softmax(a):
    """Softmax over the last axis."""
    flat = np.ascontiguousarray(a.data.reshape(-1, a.data.shape[-1]))
    y = kernels.softmax_fwd(flat)
    data = y.reshape(a.data.shape)

    def rule(g):
        gflat = np.ascontiguousarray(g.reshape(-1, g.shape[-1]))
        gx = kernels.softmax_bwd(y, gflat)
        _accum(a, gx.reshape(a.data.shape))

    return _record(a.graph, data, "softmax", (a,), rule)


def layer_norm(a, eps=1e-6):
    """Normalize the last axis to zero mean, unit variance (no affine)."""
    flat = np.ascontiguousarray(a.data.reshape(-1, a.data.shape[-1]))
    y, rstd = kernels.layer_norm_fwd(flat, eps)
    data = y.reshape(a.data.shape)

    def rule(g):
        gflat = np.ascontiguousarray(g.reshape(-1, g.shape[-1]))
        gx = kernels.layer_norm_bwd(y, rstd, gflat)
        _accum(a, gx.reshape(a.data.shape))

    return _record(a.graph, data, "layer_norm", (a,), rule)


def embedding_lookup(table, ids):
    """Gather rows of a (vocab, dim) table by an integer id array."""
    ids = np.asarray(ids)
    if table.data.ndim != 2:
        raise ShapeError("embedding table must be 2D")
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise ShapeError("embedding id out of range")
    data = table.data[ids]
    flat_ids = np.ascontiguousarray(ids.reshape(-1))

    def rule(g):
        gt = np.zeros_like(table.data)
        rows = np.ascontiguousarray(g.reshape(-1, table.data.shape[1]))
        kernels.scatter_add_rows(gt, flat_ids, rows)
        _accum(table, gt)

    return _record(table.graph, data, "embedding_lookup", (table,), rule)


def cross_entropy(logits, targets, label_smoothing=0.0):
    """Per-row cross entropy of logits (..., vocab) against integer targets.

    Fused with log-softmax; the gradient w.r.t. the logits is
    probs - smoothed_onehot.
    """
    targets = np.asarray(targets)
    if logits.data.shape[:-1] != targets.shape:
        raise ShapeError(
            f"cross_entropy: logits {logits.data.shape} vs targets {targets.shape}"
        )
    vocab = logits.data.shape[-1]
    flat = np.ascontiguousarray(logits.data.reshape(-1, vocab))
    tflat = np.ascontiguousarray(targets.reshape(-1).astype(np.int64))
    if tflat.size and (tflat.min() < 0 or tflat.max() >= vocab):
        raise ShapeError("cross_entropy target id out of range")
    loss, probs = kernels.cross_entropy_fwd(flat, tflat, float(label_smoothing))
    data = loss.reshape(targets.shape)

    def rule(g):
        gflat = np.ascontiguousarray(g.reshape(-1))
        gx = kernels.cross_entropy_bwd(probs, tflat, float(label_smoothing), gflat)
        _accum(logits, gx.reshape(logits.data.shape))

    return _record(logits.graph, data, "cross_entropy", (logits,), rule)


def cumulative_mean(a):
    """Running mean over the time axis: axis 1 of (batch, time, feat),
    or axis 0 of a 2D (time, feat) input."""
    squeeze = a.data.ndim == 2
    x = a.data[None] if squeeze else a.data
    if x.ndim != 3:
        raise ShapeError("cumulative_mean expects 2D or 3D input")
    y = kernels.cumulative_mean_fwd(np.ascontiguousarray(x))
    data = y[0] if squeeze else y

    def rule(g):
        gg = g[None] if squeeze else g
        gx = kernels.cumulative_mean_bwd(np.ascontiguousarray(gg))
        _accum(a, gx[0] if squeeze else gx)

    return _record(a.graph, data, "cumulative_mean", (a,), rule)


# Dispatch surface for the core op set; extras (reshape, transpose, sum,
# scale) are the minimal closure the models need on top of it.
OPS = {
    "matmul": matmul,
    "add": add,
    "mul": mul,
    "concat": concat,
    "slice": slice_,
    "softmax": softmax,
    "layer_norm": layer_norm,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "relu": relu,
    "embedding_lookup": embedding_lookup,
    "cross_entropy": cross_entropy,
    "cumulative_mean": cumulative_mean,
}


def forward_op(op, *args, **kwargs):
    """Apply one of the named core ops, recording it on the inputs' graph."""
    if op not in OPS:
        raise KeyError(f"unknown op kind: {op}")
    return OPS[op](*args, **kwargs)

"""Tape-based reverse-mode differentiation over numpy arrays.

Each op builds a :class:`Var` holding its value and a closure that pushes
the upstream gradient to its parents. Models in ``attention`` and
``train`` are written against these ops, and ``attention.gradcheck``
verifies each op's backward pass against central differences.
"""

from __future__ import annotations

import numpy as np

from . import numkit


class Var:
    __slots__ = ("data", "grad", "parents", "backward_fn", "requires_grad")

    def __init__(self, data, parents=(), backward_fn=None, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Var(shape={self.data.shape})"

    def backward(self, grad=None):
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed gradient needs a scalar output")
            grad = np.ones_like(self.data)
        order, seen = [], set()

        def visit(v):
            stack = [(v, False)]
            while stack:
                node, done = stack.pop()
                if done:
                    order.append(node)
                    continue
                if id(node) in seen:
                    continue
                seen.add(id(node))
                stack.append((node, True))
                for p in node.parents:
                    if p.requires_grad and id(p) not in seen:
                        stack.append((p, False))

        visit(self)
        grads = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.backward_fn is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node.parents, node.backward_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg

    __add__ = lambda a, b: add(a, b)
    __radd__ = lambda a, b: add(b, a)
    __sub__ = lambda a, b: sub(a, b)
    __rsub__ = lambda a, b: sub(b, a)
    __mul__ = lambda a, b: mul(a, b)
    __rmul__ = lambda a, b: mul(b, a)
    __truediv__ = lambda a, b: div(a, b)
    __matmul__ = lambda a, b: matmul(a, b)
    __neg__ = lambda a: mul(a, -1.0)


def param(data) -> Var:
    """Leaf that collects a gradient."""
    return Var(np.array(data, dtype=np.float64), requires_grad=True)


def const(x) -> Var:
    return x if isinstance(x, Var) else Var(x)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def add(a, b) -> Var:
    a, b = const(a), const(b)
    return Var(a.data + b.data, (a, b),
               lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Var:
    a, b = const(a), const(b)
    return Var(a.data - b.data, (a, b),
               lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b) -> Var:
    a, b = const(a), const(b)
    return Var(a.data * b.data, (a, b),
               lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))


def div(a, b) -> Var:
    a, b = const(a), const(b)
    out = a.data / b.data
    return Var(out, (a, b),
               lambda g: (_unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)))


def matmul(a, b) -> Var:
    """Batched matmul with numpy broadcasting; rank >= 2 on both sides."""
    a, b = const(a), const(b)

    def back(g):
        ga = _unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.shape) if a.requires_grad else None
        gb = _unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape) if b.requires_grad else None
        return ga, gb

    return Var(a.data @ b.data, (a, b), back)


def relu(x) -> Var:
    x = const(x)
    mask = x.data > 0
    return Var(x.data * mask, (x,), lambda g: (g * mask,))


def sigmoid(x) -> Var:
    x = const(x)
    s = np.asarray(numkit.sigmoid(x.data))
    return Var(s, (x,), lambda g: (g * s * (1 - s),))


def exp(x) -> Var:
    x = const(x)
    e = np.exp(x.data)
    return Var(e, (x,), lambda g: (g * e,))


def log(x) -> Var:
    x = const(x)
    return Var(np.log(x.data), (x,), lambda g: (g / x.data,))


def softmax(x, axis: int = -1) -> Var:
    x = const(x)
    s = numkit.softmax(x.data, axis=axis)

    def back(g):
        return (s * (g - np.sum(g * s, axis=axis, keepdims=True)),)

    return Var(s, (x,), back)


def log_softmax(x, axis: int = -1) -> Var:
    x = const(x)
    ls = numkit.log_softmax(x.data, axis=axis)
    s = np.exp(ls)
    return Var(ls, (x,), lambda g: (g - s * np.sum(g, axis=axis, keepdims=True),))


def sum_(x, axis=None, keepdims=False) -> Var:
    x = const(x)

    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return Var(np.sum(x.data, axis=axis, keepdims=keepdims), (x,), back)


def mean(x, axis=None, keepdims=False) -> Var:
    x = const(x)
    n = x.data.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    return mul(sum_(x, axis, keepdims), 1.0 / n)


def reshape(x, shape) -> Var:
    x = const(x)
    return Var(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),))


def transpose(x, axes) -> Var:
    x = const(x)
    inv = np.argsort(axes)
    return Var(np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inv),))


def swapaxes(x, a1: int, a2: int) -> Var:
    x = const(x)
    return Var(np.swapaxes(x.data, a1, a2), (x,), lambda g: (np.swapaxes(g, a1, a2),))


def take(x, index, axis: int) -> Var:
    """Gather along ``axis``; repeated indices accumulate in backward."""
    x = const(x)
    index = np.asarray(index)

    def back(g):
        gx = np.zeros_like(x.data)
        moved = np.moveaxis(gx, axis, 0)
        np.add.at(moved, index, np.moveaxis(g, axis, 0))
        return (gx,)

    return Var(np.take(x.data, index, axis=axis), (x,), back)


def concat(xs, axis: int) -> Var:
    xs = [const(x) for x in xs]
    sizes = np.cumsum([x.shape[axis] for x in xs])[:-1]
    return Var(np.concatenate([x.data for x in xs], axis=axis), tuple(xs),
               lambda g: tuple(np.split(g, sizes, axis=axis)))


def conv1d(x, w, b=None, padding: int = 0, stride: int = 1) -> Var:
    """``x[B, C_in, T]`` cross-correlated with ``w[C_out, C_in, K]`` (+ bias)."""
    x, w = const(x), const(w)
    bsz, c_in, t = x.shape
    c_out, _, k = w.shape
    cols = numkit.im2col(x.data, k, padding, stride)  # [B, C_in*K, T']
    wm = w.data.reshape(c_out, c_in * k)
    out = np.matmul(wm, cols)
    parents = (x, w)
    if b is not None:
        b = const(b)
        out = out + b.data[None, :, None]
        parents = (x, w, b)

    def back(g):
        gw = np.tensordot(g, cols, axes=([0, 2], [0, 2])).reshape(w.shape)
        gx = None
        if x.requires_grad:  # raw inputs need no gradient
            gx = numkit.col2im(np.matmul(wm.T, g), c_in, k, t, padding, stride)
        if b is None:
            return gx, gw
        return gx, gw, g.sum(axis=(0, 2))

    return Var(out, parents, back)


def avg_pool_last(x, k: int) -> Var:
    """Non-overlapping mean pooling of the last axis by factor ``k``."""
    x = const(x)
    t = x.shape[-1]
    if t % k:
        raise ValueError(f"pool factor {k} does not divide length {t}")
    return mean(reshape(x, x.shape[:-1] + (t // k, k)), axis=-1)


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> Var:
    """Normalize over the last axis, then scale and shift."""
    x, gamma, beta = const(x), const(gamma), const(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    inv = 1.0 / np.sqrt((xc**2).mean(axis=-1, keepdims=True) + eps)
    xhat = xc * inv

    def back(g):
        gh = g * gamma.data
        gx = inv * (gh - gh.mean(axis=-1, keepdims=True) - xhat * (gh * xhat).mean(axis=-1, keepdims=True))
        return (gx, _unbroadcast(g * xhat, gamma.shape), _unbroadcast(g, beta.shape))

    return Var(xhat * gamma.data + beta.data, (x, gamma, beta), back)


def batch_norm(x, gamma, beta, eps: float = 1e-5):
    """Batch statistics normalization of ``x[B, F]``.

    Returns ``(out, batch_mean, batch_var)``; the variance is the biased
    batch estimate used for normalization.
    """
    x, gamma, beta = const(x), const(gamma), const(beta)
    mu = x.data.mean(axis=0)
    xc = x.data - mu
    var = (xc**2).mean(axis=0)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv

    def back(g):
        gh = g * gamma.data
        gx = inv * (gh - gh.mean(axis=0) - xhat * (gh * xhat).mean(axis=0))
        return gx, (g * xhat).sum(axis=0), g.sum(axis=0)

    return Var(xhat * gamma.data + beta.data, (x, gamma, beta), back), mu, var


def scaled_dot_attention(q, k, v, weight_fn=None, return_weights: bool = False):
    """``softmax(q k^T / sqrt(d_k)) v`` over the last two axes.

    ``weight_fn`` may post-process the attention matrix (it receives and
    returns a :class:`Var`), e.g. to re-weight and renormalize columns.
    """
    q, k, v = const(q), const(k), const(v)
    if q.shape[-1] != k.shape[-1] or k.shape[-2] != v.shape[-2]:
        raise ValueError(f"attention shape mismatch q{q.shape} k{k.shape} v{v.shape}")
    scores = mul(matmul(q, swapaxes(k, -1, -2)), 1.0 / np.sqrt(q.shape[-1]))
    attn = softmax(scores, axis=-1)
    if weight_fn is not None:
        attn = weight_fn(attn)
    out = matmul(attn, v)
    return (out, attn) if return_weights else out

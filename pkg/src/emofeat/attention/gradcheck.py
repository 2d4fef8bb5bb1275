"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from collections import OrderedDict
from typing import Callable

import numpy as np

from .. import autograd as ag
from ..numkit import Rng


def grad_check(f: Callable, params, probe: Rng, n_probe: int = 20, step: float = 1e-5) -> float:
    """Max relative error between analytic and numeric partial derivatives.

    ``f(theta) -> (value, grad)`` for a flat float64 vector ``theta``.
    ``n_probe`` coordinates are drawn without replacement (all of them if
    there are fewer); the error of each is ``|a - n| / max(1, |n|)``.
    """
    theta = np.array(params, dtype=np.float64).ravel()
    value, grad = f(theta.copy())
    grad = np.asarray(grad, dtype=np.float64).ravel()
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite value or gradient")
    idx = probe.choice(theta.size, size=min(n_probe, theta.size), replace=False)
    worst = 0.0
    for i in np.atleast_1d(idx):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += step
        tm[i] -= step
        fp, fm = f(tp)[0], f(tm)[0]
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError(f"non-finite value while probing coordinate {i}")
        num = (fp - fm) / (2 * step)
        worst = max(worst, abs(grad[i] - num) / max(1.0, abs(num)))
    return worst


def objective(build: Callable, inputs: dict, weights: np.ndarray | None = None, rng: Rng | None = None):
    """Wrap ``build(**vars) -> Var`` as a flat-vector objective over all ``inputs``.

    The scalar is ``sum(out * R)`` for a fixed random ``R`` so every output
    entry contributes a distinct upstream gradient.
    """
    names = list(inputs)
    shapes = [np.shape(inputs[n]) for n in names]
    sizes = [int(np.prod(s)) for s in shapes]
    state = {"R": weights}

    def f(theta):
        parts = np.split(theta, np.cumsum(sizes)[:-1])
        leaves = {n: ag.param(p.reshape(s)) for n, p, s in zip(names, parts, shapes)}
        out = build(**leaves)
        if state["R"] is None:
            state["R"] = (rng or Rng(0)).normal(size=out.shape)
        loss = ag.sum_(ag.mul(out, state["R"]))
        loss.backward()
        grad = np.concatenate([
            (leaves[n].grad if leaves[n].grad is not None else np.zeros(s)).ravel() for n, s in zip(names, shapes)
        ])
        return float(loss.data), grad

    theta0 = np.concatenate([np.asarray(inputs[n], dtype=np.float64).ravel() for n in names])
    return f, theta0


def module_objective(module, forward: Callable, rng: Rng | None = None):
    """Objective over every parameter of ``module``; ``forward()`` returns a Var."""
    params = module.parameters()
    shapes = [p.data.shape for p in params.values()]
    sizes = [p.data.size for p in params.values()]
    state = {"R": None}

    def f(theta):
        for p, part, s in zip(params.values(), np.split(theta, np.cumsum(sizes)[:-1]), shapes):
            p.data = part.reshape(s).copy()
            p.grad = None
        out = forward()
        if state["R"] is None:
            state["R"] = (rng or Rng(0)).normal(size=out.shape)
        loss = ag.sum_(ag.mul(out, state["R"]))
        loss.backward()
        grad = np.concatenate([
            (p.grad if p.grad is not None else np.zeros(s)).ravel() for p, s in zip(params.values(), shapes)
        ])
        return float(loss.data), grad

    theta0 = np.concatenate([p.data.ravel() for p in params.values()])
    return f, theta0


def _registry(rng: Rng) -> "OrderedDict[str, tuple]":
    """Toy-shaped objectives for every differentiable op and model."""
    from ..train.losses import cross_entropy_var, double_softmax_var
    from ..train.mlp import MlpClassifier
    from . import layers, models

    n = lambda *s: rng.normal(size=s)  # noqa: E731
    reg = OrderedDict()
    reg["add"] = objective(lambda a, b: ag.add(a, b), {"a": n(3, 4), "b": n(4)})
    reg["mul"] = objective(lambda a, b: ag.mul(a, b), {"a": n(3, 4), "b": n(3, 1)})
    reg["div"] = objective(lambda a, b: ag.div(a, b), {"a": n(3, 4), "b": 2.0 + rng.uniform(size=(4,))})
    reg["matmul"] = objective(lambda a, b: ag.matmul(a, b), {"a": n(2, 3, 4), "b": n(4, 5)})
    reg["linear"] = objective(lambda x, w, b: ag.add(ag.matmul(x, w), b), {"x": n(3, 4), "w": n(4, 2), "b": n(2)})
    reg["relu"] = objective(lambda x: ag.relu(x), {"x": n(5, 4)})
    reg["sigmoid"] = objective(lambda x: ag.sigmoid(x), {"x": n(5, 4)})
    reg["exp"] = objective(lambda x: ag.exp(x), {"x": n(5)})
    reg["log"] = objective(lambda x: ag.log(x), {"x": 0.5 + rng.uniform(size=(5,))})
    reg["softmax"] = objective(lambda x: ag.softmax(x, axis=-1), {"x": n(3, 5)})
    reg["log_softmax"] = objective(lambda x: ag.log_softmax(x, axis=-1), {"x": n(3, 5)})
    reg["mean"] = objective(lambda x: ag.mean(x, axis=(0, 2)), {"x": n(2, 3, 4)})
    reg["transpose"] = objective(lambda x: ag.transpose(x, (2, 0, 1)), {"x": n(2, 3, 4)})
    reg["take"] = objective(lambda x: ag.take(x, [0, 2, 2], 1), {"x": n(2, 3, 4)})
    reg["concat"] = objective(lambda a, b: ag.concat([a, b], 1), {"a": n(2, 3), "b": n(2, 2)})
    reg["conv1d"] = objective(lambda x, w, b: ag.conv1d(x, w, b, padding=2),
                              {"x": n(2, 3, 9), "w": n(4, 3, 5), "b": n(4)})
    reg["conv1d_strided"] = objective(lambda x, w: ag.conv1d(x, w, padding=2, stride=3),
                                      {"x": n(2, 2, 10), "w": n(3, 2, 5)})
    reg["avg_pool"] = objective(lambda x: ag.avg_pool_last(x, 3), {"x": n(2, 3, 9)})
    reg["layer_norm"] = objective(lambda x, g, b: ag.layer_norm(x, g, b), {"x": n(3, 6), "g": n(6), "b": n(6)})
    reg["batch_norm"] = objective(lambda x, g, b: ag.batch_norm(x, g, b)[0], {"x": n(6, 4), "g": n(4), "b": n(4)})
    reg["scaled_dot_attention"] = objective(lambda q, k, v: ag.scaled_dot_attention(q, k, v),
                                            {"q": n(3, 4), "k": n(3, 4), "v": n(3, 4)})
    reg["column_reweight"] = objective(
        lambda q, k, v: ag.scaled_dot_attention(q, k, v, weight_fn=layers.column_reweight(1, 1.2)),
        {"q": n(6, 4), "k": n(6, 4), "v": n(6, 4)})
    reg["skip_gate"] = objective(
        lambda w, pre, att: ag.add(ag.mul(ag.sub(1.0, ag.sigmoid(w)), pre), ag.mul(ag.sigmoid(w), att)),
        {"w": np.array(-2.0), "pre": n(5), "att": n(5)})
    reg["cross_entropy"] = objective(lambda z: cross_entropy_var(z, np.array([0, 3, 4]), 0.1),
                                     {"z": n(3, 5)})
    reg["double_softmax_ce"] = objective(lambda z: double_softmax_var(z, np.array([1, 2, 0])),
                                         {"z": n(3, 5)})

    mha = layers.MultiHeadAttention(4, 2, rng)
    x_mha = n(2, 3, 4)
    reg["multi_head_attention"] = module_objective(mha, lambda: mha(x_mha), rng)
    se = layers.SeBlock(8, 4, rng)
    x_se = n(2, 8, 5)
    reg["se_block"] = module_objective(se, lambda: se(x_se), rng)

    tri = models.TriStreamModel(models.TriStreamConfig(feat_dim=4, heads=2, stride=5, pool=2, hidden=6, seed=1))
    x_tri = n(2, 30, 50)
    reg["tri_stream"] = module_objective(tri, lambda: tri(x_tri), rng)
    dual = models.DualAttention(d_model=4, heads=2, n_time=3, n_freq=2, blocks=2, seed=1)
    g_dual, c_dual = n(3, 2, 4), n(4)
    reg["dual_attention"] = module_objective(dual, lambda: dual(g_dual, c_dual), rng)
    st = models.SpaceTimeAttention(d_model=4, heads=2, n_frames=2, n_patches=3, blocks=2, seed=1)
    g_st = n(2, 3, 4)
    reg["space_time"] = module_objective(st, lambda: st(g_st), rng)
    m1 = models.EegTransformerBaseline(seed=1, channels=3, d_model=4, heads=2, layers=1, d_ff=6)
    x_m1 = n(1, 3, 12)
    reg["eeg_transformer"] = module_objective(m1, lambda: m1(x_m1), rng)
    mlp = MlpClassifier(6, (5, 4), n_classes=3, dropout=0.0, seed=1)
    x_mlp = n(7, 6)
    reg["mlp_batchnorm"] = module_objective(mlp, lambda: mlp(x_mlp, train=True), rng)
    return reg


def run_suite(seed: int = 1, n_probe: int = 20) -> "OrderedDict[str, float]":
    """Max relative finite-difference error of every registered op."""
    rng = Rng(seed)
    results = OrderedDict()
    for name, (f, theta) in _registry(rng).items():
        results[name] = grad_check(f, theta, rng.child(len(results)), n_probe=n_probe)
    return results

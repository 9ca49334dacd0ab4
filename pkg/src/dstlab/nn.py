"""Minimal feed-forward network engine in numpy.

Dense layers with per-layer activations, exact analytic gradients,
plain SGD / Adam, and soft target updates.  Everything the two agent
kinds need and nothing more.
"""

import json
import zipfile

import numpy as np

CHECKPOINT_VERSION = 1

_ACTIVATIONS = {
    "relu": (lambda z: np.maximum(z, 0.0), lambda z, a: (z > 0).astype(float)),
    "tanh": (np.tanh, lambda z, a: 1.0 - a * a),
    "sigmoid": (lambda z: 1.0 / (1.0 + np.exp(-z)), lambda z, a: a * (1.0 - a)),
    "identity": (lambda z: z, lambda z, a: np.ones_like(z)),
}


class Mlp:
    """Fully-connected network; weights[i] has shape (fan_in, fan_out)."""

    def __init__(self, layer_sizes, activations, rng=None):
        if len(activations) != len(layer_sizes) - 1:
            raise ValueError("need one activation per layer")
        for a in activations:
            if a not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        self.layer_sizes = list(layer_sizes)
        self.activations = list(activations)
        rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.weights, self.biases = [], []
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)  # uniform fan-in scaling
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out))

    @property
    def in_dim(self):
        return self.layer_sizes[0]

    @property
    def out_dim(self):
        return self.layer_sizes[-1]

    def parameters(self):
        return self.weights + self.biases

    def copy(self):
        net = Mlp.__new__(Mlp)
        net.layer_sizes = list(self.layer_sizes)
        net.activations = list(self.activations)
        net.weights = [w.copy() for w in self.weights]
        net.biases = [b.copy() for b in self.biases]
        return net

    def same_architecture(self, other):
        return (self.layer_sizes == other.layer_sizes
                and self.activations == other.activations)


def forward(net, x):
    """Forward pass; x is (d,) or (batch, d).  Returns (output, cache)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != net.in_dim:
        raise ValueError(f"input dim {x.shape[1]}, expected {net.in_dim}")
    pre, post = [], [x]
    a = x
    for w, b, act in zip(net.weights, net.biases, net.activations):
        z = a @ w + b
        a = _ACTIVATIONS[act][0](z)
        pre.append(z)
        post.append(a)
    return a, (pre, post)


def backward(net, cache, grad_out):
    """Exact gradients of the forward map.

    grad_out is dL/d(output) with the same shape as the output.  Returns
    (grads, grad_in) where grads mirrors (weights, biases).
    """
    pre, post = cache
    g = np.atleast_2d(np.asarray(grad_out, dtype=float))
    if g.shape != post[-1].shape:
        raise ValueError("output gradient shape mismatch")
    grad_w = [None] * len(net.weights)
    grad_b = [None] * len(net.biases)
    for i in range(len(net.weights) - 1, -1, -1):
        dz = g * _ACTIVATIONS[net.activations[i]][1](pre[i], post[i + 1])
        grad_w[i] = post[i].T @ dz
        grad_b[i] = dz.sum(axis=0)
        g = dz @ net.weights[i].T
    return (grad_w, grad_b), g


class OptimizerState:
    """Plain SGD or Adam over one Mlp's parameters."""

    def __init__(self, net, algorithm="adam", lr=1e-3, beta1=0.9, beta2=0.999,
                 eps=1e-8, weight_decay=0.0):
        if algorithm not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {algorithm!r}")
        if weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        self.algorithm = algorithm
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.weight_decay = weight_decay
        self.step = 0
        if algorithm == "adam":
            self.m = [np.zeros_like(p) for p in net.parameters()]
            self.v = [np.zeros_like(p) for p in net.parameters()]
        else:
            self.m = self.v = None


def apply_gradients(net, grads, opt):
    """One descent step in place; raises on non-finite gradients."""
    grad_w, grad_b = grads
    flat = grad_w + grad_b
    params = net.parameters()
    if len(flat) != len(params):
        raise ValueError("gradient/parameter count mismatch")
    for g in flat:
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient")
    opt.step += 1
    if opt.weight_decay:
        # decoupled decay: shrink parameters directly, independent of the
        # gradient-based step (AdamW-style)
        for p in params:
            p -= opt.lr * opt.weight_decay * p
    if opt.algorithm == "sgd":
        for p, g in zip(params, flat):
            p -= opt.lr * g
        return
    b1c = 1.0 - opt.beta1 ** opt.step
    b2c = 1.0 - opt.beta2 ** opt.step
    for p, g, m, v in zip(params, flat, opt.m, opt.v):
        m *= opt.beta1
        m += (1 - opt.beta1) * g
        v *= opt.beta2
        v += (1 - opt.beta2) * g * g
        p -= opt.lr * (m / b1c) / (np.sqrt(v / b2c) + opt.eps)


def clip_grad_norm(grads, max_norm):
    """Scale gradients in place so their global L2 norm is at most max_norm.

    Returns the pre-clip norm.
    """
    grad_w, grad_b = grads
    flat = grad_w + grad_b
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in flat)))
    if max_norm is not None and norm > max_norm > 0:
        scale = max_norm / norm
        for g in flat:
            g *= scale
    return norm


def soft_update(target, source, tau):
    """Blend target parameters toward the source: w_t <- tau*w_s + (1-tau)*w_t."""
    if not target.same_architecture(source):
        raise ValueError("architecture mismatch")
    for pt, ps in zip(target.parameters(), source.parameters()):
        pt *= 1.0 - tau
        pt += tau * ps


def save_net(net, path, opt=None):
    """Versioned checkpoint: shapes + parameters (+ optimizer state), bit-exact."""
    arrays = {}
    for i, w in enumerate(net.weights):
        arrays[f"w{i}"] = w
    for i, b in enumerate(net.biases):
        arrays[f"b{i}"] = b
    meta = {
        "version": CHECKPOINT_VERSION,
        "layer_sizes": net.layer_sizes,
        "activations": net.activations,
    }
    if opt is not None:
        meta["opt"] = {"algorithm": opt.algorithm, "lr": opt.lr, "beta1": opt.beta1,
                       "beta2": opt.beta2, "eps": opt.eps, "step": opt.step,
                       "weight_decay": opt.weight_decay}
        if opt.m is not None:
            for i, (m, v) in enumerate(zip(opt.m, opt.v)):
                arrays[f"opt_m{i}"] = m
                arrays[f"opt_v{i}"] = v
    np.savez(path, **arrays)
    with zipfile.ZipFile(path if str(path).endswith(".npz") else f"{path}.npz", "a") as z:
        z.writestr("meta.json", json.dumps(meta))


def load_net(path):
    """Inverse of save_net; returns (net, opt-or-None)."""
    path = path if str(path).endswith(".npz") else f"{path}.npz"
    with zipfile.ZipFile(path) as z:
        meta = json.loads(z.read("meta.json"))
    if meta["version"] != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {meta['version']}")
    data = np.load(path)
    net = Mlp.__new__(Mlp)
    net.layer_sizes = list(meta["layer_sizes"])
    net.activations = list(meta["activations"])
    n = len(net.layer_sizes) - 1
    net.weights = [data[f"w{i}"] for i in range(n)]
    net.biases = [data[f"b{i}"] for i in range(n)]
    opt = None
    if "opt" in meta:
        o = meta["opt"]
        opt = OptimizerState(net, o["algorithm"], o["lr"], o["beta1"], o["beta2"],
                             o["eps"], o.get("weight_decay", 0.0))
        opt.step = o["step"]
        if opt.m is not None:
            opt.m = [data[f"opt_m{i}"] for i in range(2 * n)]
            opt.v = [data[f"opt_v{i}"] for i in range(2 * n)]
    return net, opt

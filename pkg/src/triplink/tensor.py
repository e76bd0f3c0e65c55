"""Dense float64 tensors with reverse-mode differentiation and Adam.

Every operation records its inputs and a local derivative closure on the
output tensor; the resulting DAG is the tape, topologically ordered by
construction. backward() walks it once in reverse. Sized for desk-scale
graphs; no broadcasting beyond what the model needs.
"""

import json

import numpy as np

CHECKPOINT_FORMAT = "triplink-checkpoint-v1"


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _result(data, parents, backward_fn):
    out = Tensor(data)
    grad_parents = tuple(p for p in parents if p.requires_grad)
    if grad_parents:
        out.requires_grad = True
        out._parents = grad_parents
        out._backward = backward_fn
    return out


def _accumulate(tensor, grad):
    if tensor.requires_grad:
        if tensor.grad is None:
            tensor.grad = np.zeros_like(tensor.data)
        tensor.grad += grad


def matmul(a, b):
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul: incompatible shapes {a.data.shape} and {b.data.shape}")
    data = a.data @ b.data

    def backward_fn(g):
        _accumulate(a, g @ b.data.T)
        _accumulate(b, a.data.T @ g)

    return _result(data, (a, b), backward_fn)


def add(a, b):
    sa, sb = a.data.shape, b.data.shape
    if sa == sb:
        def backward_fn(g):
            _accumulate(a, g)
            _accumulate(b, g)
    elif len(sa) == 2 and sb == (1, sa[1]):
        # row-bias broadcast
        def backward_fn(g):
            _accumulate(a, g)
            _accumulate(b, g.sum(axis=0, keepdims=True))
    else:
        raise ValueError(f"add: incompatible shapes {sa} and {sb}")
    return _result(a.data + b.data, (a, b), backward_fn)


def multiply_scalar(a, scalar):
    scalar = float(scalar)

    def backward_fn(g):
        _accumulate(a, scalar * g)

    return _result(a.data * scalar, (a,), backward_fn)


def multiply(a, b):
    if a.data.shape != b.data.shape:
        raise ValueError(f"multiply: incompatible shapes {a.data.shape} and {b.data.shape}")

    def backward_fn(g):
        _accumulate(a, b.data * g)
        _accumulate(b, a.data * g)

    return _result(a.data * b.data, (a, b), backward_fn)


def transpose(a):
    def backward_fn(g):
        _accumulate(a, g.T)

    return _result(a.data.T, (a,), backward_fn)


def concat_columns(*tensors):
    if not tensors:
        raise ValueError("concat_columns: needs at least one input")
    rows = tensors[0].data.shape[0]
    for t in tensors:
        if t.data.ndim != 2 or t.data.shape[0] != rows:
            raise ValueError(
                f"concat_columns: row mismatch, shapes {[t.data.shape for t in tensors]}"
            )
    widths = [t.data.shape[1] for t in tensors]
    offsets = np.cumsum([0] + widths)

    def backward_fn(g):
        for t, start, stop in zip(tensors, offsets[:-1], offsets[1:]):
            _accumulate(t, g[:, start:stop])

    return _result(np.concatenate([t.data for t in tensors], axis=1), tensors, backward_fn)


def row_mean(a):
    """Mean across rows; result has shape (1, columns)."""
    if a.data.ndim != 2:
        raise ValueError(f"row_mean: expected a matrix, got shape {a.data.shape}")
    n = a.data.shape[0]

    def backward_fn(g):
        _accumulate(a, np.repeat(g, n, axis=0) / n)

    return _result(a.data.mean(axis=0, keepdims=True), (a,), backward_fn)


def softmax_rows(a):
    if a.data.ndim != 2:
        raise ValueError(f"softmax_rows: expected a matrix, got shape {a.data.shape}")
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)

    def backward_fn(g):
        inner = (g * probs).sum(axis=1, keepdims=True)
        _accumulate(a, probs * (g - inner))

    return _result(probs, (a,), backward_fn)


def relu(a):
    mask = a.data > 0

    def backward_fn(g):
        _accumulate(a, mask * g)

    return _result(np.where(mask, a.data, 0.0), (a,), backward_fn)


def sigmoid(a):
    out_data = 1.0 / (1.0 + np.exp(-a.data))

    def backward_fn(g):
        _accumulate(a, out_data * (1.0 - out_data) * g)

    return _result(out_data, (a,), backward_fn)


def log(a):
    def backward_fn(g):
        _accumulate(a, g / a.data)

    return _result(np.log(a.data), (a,), backward_fn)


def clamp_min(a, floor):
    floor = float(floor)
    mask = a.data > floor

    def backward_fn(g):
        _accumulate(a, mask * g)

    return _result(np.maximum(a.data, floor), (a,), backward_fn)


def sum_all(a):
    """Sum of every entry; result is a scalar (0-d) tensor."""

    def backward_fn(g):
        _accumulate(a, np.full_like(a.data, float(g)))

    return _result(a.data.sum(), (a,), backward_fn)


def slice_rows(a, indices):
    indices = np.asarray(indices, dtype=np.int64)
    if a.data.ndim != 2:
        raise ValueError(f"slice_rows: expected a matrix, got shape {a.data.shape}")
    if indices.size and (indices.min() < 0 or indices.max() >= a.data.shape[0]):
        raise ValueError(f"slice_rows: index outside [0, {a.data.shape[0]})")

    def backward_fn(g):
        buffer = np.zeros_like(a.data)
        np.add.at(buffer, indices, g)
        _accumulate(a, buffer)

    return _result(a.data[indices], (a,), backward_fn)


def tile_rows(a, count):
    """Repeat a (1, d) row ``count`` times."""
    if a.data.ndim != 2 or a.data.shape[0] != 1:
        raise ValueError(f"tile_rows: expected shape (1, d), got {a.data.shape}")

    def backward_fn(g):
        _accumulate(a, g.sum(axis=0, keepdims=True))

    return _result(np.repeat(a.data, count, axis=0), (a,), backward_fn)


def layer_norm_rows(x, gain, bias, eps=1e-5):
    """Per-row normalization with learned gain and bias (both shaped (1, d))."""
    if x.data.ndim != 2:
        raise ValueError(f"layer_norm_rows: expected a matrix, got {x.data.shape}")
    d = x.data.shape[1]
    if gain.data.shape != (1, d) or bias.data.shape != (1, d):
        raise ValueError("layer_norm_rows: gain and bias must have shape (1, d)")
    mean = x.data.mean(axis=1, keepdims=True)
    var = x.data.var(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    x_hat = (x.data - mean) * inv

    def backward_fn(g):
        _accumulate(gain, (g * x_hat).sum(axis=0, keepdims=True))
        _accumulate(bias, g.sum(axis=0, keepdims=True))
        d_hat = g * gain.data
        term = d_hat - d_hat.mean(axis=1, keepdims=True) \
            - x_hat * (d_hat * x_hat).mean(axis=1, keepdims=True)
        _accumulate(x, inv * term)

    return _result(x_hat * gain.data + bias.data, (x, gain, bias), backward_fn)


def backward(loss):
    """Populate .grad on every reachable requires_grad tensor.

    Gradients accumulate additively across uses; call zero_grad (or the
    optimizer's) between steps.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward: loss must be scalar, got shape {loss.data.shape}")
    topo = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def zero_grad(tensors):
    for t in tensors:
        t.grad = None


class Adam:
    """Standard Adam with bias correction; moment state persists per parameter."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]
        self._t = 0

    def step(self):
        self._t += 1
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            self._m[i] = self.beta1 * self._m[i] + (1.0 - self.beta1) * p.grad
            self._v[i] = self.beta2 * self._v[i] + (1.0 - self.beta2) * p.grad**2
            m_hat = self._m[i] / (1.0 - self.beta1**self._t)
            v_hat = self._v[i] / (1.0 - self.beta2**self._t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self):
        zero_grad(self.params)


def save_checkpoint(path, named_tensors, meta=None):
    """JSON checkpoint: parameter name -> {shape, flat data}, plus a format tag."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "meta": meta or {},
        "params": {
            name: {"shape": list(t.data.shape), "data": t.data.reshape(-1).tolist()}
            for name, t in named_tensors.items()
        },
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True)
        handle.write("\n")


def load_checkpoint(path):
    """Returns (name -> ndarray, meta dict). Rejects unknown format tags."""
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(
            f"{path}: unsupported checkpoint format {payload.get('format')!r}"
        )
    params = {
        name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in payload["params"].items()
    }
    return params, payload.get("meta", {})

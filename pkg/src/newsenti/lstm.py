"""Stacked LSTM regressor in numpy, trained with exact BPTT and Adam.

Gate order in every stacked parameter array is (input, forget, output,
candidate). Gates use the logistic sigmoid; the candidate and the hidden
output use relu, so a cell step is::

    i, f, o = sigmoid(z_i), sigmoid(z_f), sigmoid(z_o)
    g = relu(z_g)
    c = f * c_prev + i * g
    h = o * relu(c)

with ``z_* = W_* x + U_* h_prev + b_*``. All arithmetic is float64.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

GATES = ("input", "forget", "output", "candidate")
LAYER_UNITS = (10, 5, 5)
CHECKPOINT_VERSION = 1


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class LstmLayerParams:
    W: np.ndarray   # 4 x units x in_dim
    U: np.ndarray   # 4 x units x units
    b: np.ndarray   # 4 x units

    @property
    def units(self) -> int:
        return self.W.shape[1]

    @property
    def in_dim(self) -> int:
        return self.W.shape[2]

    def gate(self, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        k = GATES.index(name)
        return self.W[k], self.U[k], self.b[k]


@dataclass
class LstmModel:
    layers: list[LstmLayerParams]
    head_w: np.ndarray  # 1 x last_units
    head_b: np.ndarray  # 1
    seed: int = 0
    activation: str = "relu"

    @property
    def feature_count(self) -> int:
        return self.layers[0].in_dim

    def params(self) -> list[tuple[str, np.ndarray]]:
        """Named parameter arrays (live references, not copies)."""
        out = []
        for k, layer in enumerate(self.layers):
            out += [(f"layer{k}.W", layer.W), (f"layer{k}.U", layer.U), (f"layer{k}.b", layer.b)]
        out += [("head.w", self.head_w), ("head.b", self.head_b)]
        return out

    def copy(self) -> "LstmModel":
        return LstmModel(
            [LstmLayerParams(l.W.copy(), l.U.copy(), l.b.copy()) for l in self.layers],
            self.head_w.copy(), self.head_b.copy(), self.seed, self.activation,
        )


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 5
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float | None = 5.0
    optimizer: str = "adam"
    loss: str = "mse"
    seed: int = 0

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer != "adam" or self.loss != "mse":
            raise ValueError("only the adam optimizer with mse loss is supported")


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_model(feature_count: int, seed: int = 0, units: Sequence[int] = LAYER_UNITS) -> LstmModel:
    """Glorot-uniform weights per gate matrix, zero biases, forget bias 1."""
    if feature_count < 1:
        raise ValueError("feature_count must be >= 1")
    rng = np.random.default_rng(seed)
    layers = []
    in_dim = feature_count
    for u in units:
        W = np.stack([_glorot(rng, (u, in_dim), in_dim, u) for _ in GATES])
        U = np.stack([_glorot(rng, (u, u), u, u) for _ in GATES])
        b = np.zeros((4, u))
        b[GATES.index("forget")] = 1.0
        layers.append(LstmLayerParams(W, U, b))
        in_dim = u
    head_w = _glorot(rng, (1, in_dim), in_dim, 1)
    return LstmModel(layers, head_w, np.zeros(1), seed)


def _sigmoid(x):
    # tanh form cannot overflow
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _layer_forward(layer: LstmLayerParams, xs: np.ndarray):
    """Run one layer over ``xs`` (T x B x in_dim); return hidden seq and cache."""
    T, B, _ = xs.shape
    u = layer.units
    W2 = layer.W.reshape(4 * u, -1)
    U2 = layer.U.reshape(4 * u, u)
    b2 = layer.b.reshape(4 * u)
    # input projections for all timesteps in one matmul
    zx = xs @ W2.T + b2
    h = np.zeros((B, u))
    c = np.zeros((B, u))
    hs = np.empty((T, B, u))
    cache = []
    for t in range(T):
        z = zx[t] + h @ U2.T
        gates = _sigmoid(z[:, :3 * u])
        i, f, o = gates[:, :u], gates[:, u:2 * u], gates[:, 2 * u:]
        zg = z[:, 3 * u:]
        g = np.maximum(zg, 0.0)
        c_prev = c
        c = f * c_prev + i * g
        rc = np.maximum(c, 0.0)
        h = o * rc
        hs[t] = h
        cache.append((i, f, o, g, zg, c_prev, c, rc))
    return hs, cache


def forward_batch(model: LstmModel, X: np.ndarray, return_cache: bool = False):
    """Predictions for a batch ``X`` of shape (batch, lookback, features)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[2] != model.feature_count:
        raise ValueError(f"expected (batch, lookback, {model.feature_count}) input, got {X.shape}")
    seq = X.transpose(1, 0, 2)
    caches = []
    for layer in model.layers:
        hs, cache = _layer_forward(layer, seq)
        caches.append((seq, hs, cache))
        seq = hs
    last = seq[-1]
    y = last @ model.head_w[0] + model.head_b[0]
    if return_cache:
        return y, (caches, last)
    return y


def forward(model: LstmModel, window: np.ndarray) -> float:
    """Scaled prediction for one window of shape (lookback, features)."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[1] != model.feature_count:
        raise ValueError(f"expected (lookback, {model.feature_count}) window, got {window.shape}")
    return float(forward_batch(model, window[None])[0])


def mse(model: LstmModel, X: np.ndarray, y: np.ndarray) -> float:
    pred = forward_batch(model, X)
    return float(np.mean((pred - y) ** 2))


def _layer_backward(layer: LstmLayerParams, xs, hs, cache, dhs):
    """BPTT through one layer; ``dhs`` is dL/dh_t from above (T x B x u)."""
    T, B, _ = xs.shape
    u = layer.units
    W2 = layer.W.reshape(4 * u, -1)
    U2 = layer.U.reshape(4 * u, u)
    dz_all = np.empty((T, B, 4 * u))
    dh_next = np.zeros((B, u))
    dc_next = np.zeros((B, u))
    for t in range(T - 1, -1, -1):
        i, f, o, g, zg, c_prev, c, rc = cache[t]
        dh = dhs[t] + dh_next
        do = dh * rc
        # relu'(0) is taken as 0
        dc = dh * o * (c > 0) + dc_next
        dz = dz_all[t]
        dz[:, :u] = dc * g * i * (1.0 - i)
        dz[:, u:2 * u] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * u:3 * u] = do * o * (1.0 - o)
        dz[:, 3 * u:] = dc * i * (zg > 0)
        dc_next = dc * f
        dh_next = dz @ U2
    hs_prev = np.concatenate([np.zeros((1, B, u)), hs[:-1]])
    flat_dz = dz_all.reshape(T * B, 4 * u)
    dW = (flat_dz.T @ xs.reshape(T * B, -1)).reshape(layer.W.shape)
    dU = (flat_dz.T @ hs_prev.reshape(T * B, u)).reshape(layer.U.shape)
    db = flat_dz.sum(axis=0).reshape(layer.b.shape)
    dxs = dz_all @ W2
    return LstmLayerParams(dW, dU, db), dxs


def backward(model: LstmModel, X: np.ndarray, y: np.ndarray):
    """Loss and exact gradients of the batch MSE, ``mean((pred - y)**2)``.

    Returns ``(loss, grads)`` where ``grads`` mirrors ``model.params()``;
    ``grads`` is empty when the loss is not finite.
    """
    y = np.asarray(y, dtype=np.float64)
    pred, (caches, last) = forward_batch(model, X, return_cache=True)
    resid = pred - y
    loss = float(np.mean(resid ** 2))
    if not math.isfinite(loss):
        return loss, []
    dy = 2.0 * resid / len(y)
    d_head_w = (dy @ last)[None, :]
    d_head_b = np.array([dy.sum()])
    T = caches[-1][1].shape[0]
    dhs = np.zeros_like(caches[-1][1])
    dhs[T - 1] = np.outer(dy, model.head_w[0])
    layer_grads = []
    for layer, (xs, hs, cache) in zip(reversed(model.layers), reversed(caches)):
        g, dhs = _layer_backward(layer, xs, hs, cache, dhs)
        layer_grads.append(g)
    layer_grads.reverse()
    grads = []
    for k, g in enumerate(layer_grads):
        grads += [(f"layer{k}.W", g.W), (f"layer{k}.U", g.U), (f"layer{k}.b", g.b)]
    grads += [("head.w", d_head_w), ("head.b", d_head_b)]
    return loss, grads


@dataclass
class _Adam:
    cfg: TrainConfig
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    t: int = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        cfg = self.cfg
        b1, b2 = cfg.beta1, cfg.beta2
        lr_t = cfg.learning_rate * math.sqrt(1 - b2 ** self.t) / (1 - b1 ** self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= lr_t * m / (np.sqrt(v) + cfg.adam_eps)


def clip_by_global_norm(grads: list[np.ndarray], max_norm: float | None) -> float:
    norm = math.sqrt(sum(float(np.vdot(g, g)) for g in grads))
    if max_norm is not None and norm > max_norm:
        scale = max_norm / norm
        for g in grads:
            g *= scale
    return norm


def train(model: LstmModel, X: np.ndarray, y: np.ndarray, config: TrainConfig,
          progress=None) -> tuple[LstmModel, list[float]]:
    """Mini-batch Adam on a copy of ``model``.

    Each epoch reshuffles sample order with a generator seeded from
    ``config.seed``; the history holds the sample-weighted mean batch loss
    per epoch. Raises TrainingDiverged on a non-finite loss.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(X) == 0:
        raise ValueError("no training samples")
    model = model.copy()
    params = [p for _, p in model.params()]
    opt = _Adam(config)
    rng = np.random.default_rng(config.seed)
    n = len(X)
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = backward(model, X[idx], y[idx])
            if not math.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch + 1}; try a smaller learning_rate "
                    f"(current {config.learning_rate}) or a tighter clip_norm")
            g = [a for _, a in grads]
            clip_by_global_norm(g, config.clip_norm)
            opt.step(params, g)
            total += loss * len(idx)
        history.append(total / n)
        if progress is not None:
            progress(epoch + 1, history[-1])
    return model, history


def predict_horizon(model: LstmModel, last_window: np.ndarray, scaler, horizon: int = 5,
                    future_rows: np.ndarray | None = None) -> list[float]:
    """Iterated one-step forecast of ``horizon`` closes in price units.

    Each scaled prediction becomes the close of a new input row appended to
    the window. The other columns of that row come from ``future_rows`` when
    given; otherwise price and volume columns repeat the last observed row
    and sentiment columns take the scaled value of 0, i.e. "no news known".
    """
    from .dataset import invert_scaler

    win = np.array(last_window, dtype=np.float64)
    close_j = scaler.columns.index("close")
    senti = [j for j, c in enumerate(scaler.columns) if c.startswith("senti_")]
    neutral = {j: scaler.scale_value(scaler.columns[j], 0.0) for j in senti}
    out = []
    for step in range(horizon):
        pred = forward(model, win)
        out.append(float(invert_scaler(pred, scaler, scaler.columns[close_j])))
        if step == horizon - 1:
            break
        if future_rows is not None:
            row = np.array(future_rows[step], dtype=np.float64)
        else:
            row = win[-1].copy()
            for j, val in neutral.items():
                row[j] = val
        row[close_j] = pred
        win = np.vstack([win[1:], row])
    return out


def save_model(model: LstmModel, path, config: TrainConfig | None = None, extra: dict | None = None) -> None:
    doc = {
        "format": "newsenti.lstm",
        "version": CHECKPOINT_VERSION,
        "seed": model.seed,
        "activation": model.activation,
        "gates": list(GATES),
        "config": asdict(config) if config is not None else None,
        "tensors": {name: {"shape": list(a.shape), "data": a.ravel().tolist()} for name, a in model.params()},
    }
    if extra:
        doc["extra"] = extra
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc))


def load_model(path) -> tuple[LstmModel, TrainConfig | None]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "newsenti.lstm" or doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: not a version {CHECKPOINT_VERSION} newsenti checkpoint")
    t = {k: np.array(v["data"], dtype=np.float64).reshape(v["shape"]) for k, v in doc["tensors"].items()}
    n_layers = sum(1 for k in t if k.endswith(".W"))
    layers = [LstmLayerParams(t[f"layer{k}.W"], t[f"layer{k}.U"], t[f"layer{k}.b"]) for k in range(n_layers)]
    model = LstmModel(layers, t["head.w"], t["head.b"], doc["seed"], doc["activation"])
    cfg = TrainConfig(**doc["config"]) if doc.get("config") else None
    return model, cfg

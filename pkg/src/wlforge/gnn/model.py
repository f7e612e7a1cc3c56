"""Hierarchical 1-2-3 GNN model: batched forward pass, manual gradients, serialization."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigurationError, DomainError, FormatError, UnsupportedConfigurationError
from ..graph import Graph, enumerate_ksets
from ..higher_order import atomic_type_set, atomic_type_vocabulary
from .layers import (
    Aggregator,
    GnnLayerParams,
    activate,
    activation_grad,
    det_matmul,
    kset_aggregators,
    node_aggregator,
    one_hot,
    subset_pooling,
)

ARCHITECTURES = {"1": (1,), "1-2": (1, 2), "1-2-3": (1, 2, 3)}


@dataclass(frozen=True)
class GnnConfig:
    num_labels: int
    dims: tuple[int, ...] = (1,)
    hidden: int = 64
    layers_1: int = 3
    layers_k: int = 2
    activation: str = "relu"
    readout: str = "mean"
    head_hidden: tuple[int, ...] = (64, 64)
    out_dim: int | None = 1
    loss: str = "bce"
    head_activation: str = "relu"
    scope: str = "full"
    split_global: bool = False

    def __post_init__(self):
        if self.dims not in ARCHITECTURES.values():
            raise ConfigurationError(f"dims must be one of {sorted(ARCHITECTURES.values())}, got {self.dims}")
        if self.num_labels < 1 or self.hidden < 1 or self.layers_1 < 1 or self.layers_k < 0:
            raise ConfigurationError("num_labels, hidden and layers_1 must be positive")
        if self.activation not in ("relu", "tanh", "sigmoid", "identity"):
            raise UnsupportedConfigurationError(f"activation {self.activation!r} is not trainable")
        if self.readout not in ("sum", "mean"):
            raise ConfigurationError(f"unknown readout {self.readout!r}")
        if self.loss not in ("mse", "bce"):
            raise ConfigurationError(f"unknown loss {self.loss!r}")
        if self.head_activation not in ("relu", "tanh", "sigmoid", "identity"):
            raise ConfigurationError(f"unknown head activation {self.head_activation!r}")
        if self.scope not in ("full", "local"):
            raise ConfigurationError(f"unknown scope {self.scope!r}")
        if self.split_global and self.scope == "local":
            raise ConfigurationError("split_global needs scope='full'")
        if self.out_dim is None and self.head_hidden:
            raise ConfigurationError("an identity head (out_dim=None) takes no hidden layers")
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "head_hidden", tuple(self.head_hidden))

    @classmethod
    def from_arch(cls, arch: str, num_labels: int, **kw) -> "GnnConfig":
        if arch not in ARCHITECTURES:
            raise ConfigurationError(f"unknown architecture {arch!r}; expected one of {sorted(ARCHITECTURES)}")
        return cls(num_labels=num_labels, dims=ARCHITECTURES[arch], **kw)

    def vocabulary(self, k: int) -> tuple:
        return atomic_type_vocabulary(k, self.num_labels)

    @property
    def readout_width(self) -> int:
        return self.hidden * len(self.dims)


@dataclass
class GnnModel:
    config: GnnConfig
    layers: dict[int, list[GnnLayerParams]]
    links: dict[int, np.ndarray]
    head: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        """Every trainable array, by name, in a fixed order."""
        out = []
        for k in self.config.dims:
            if k > 1:
                out.append((f"link{k}", self.links[k]))
            for i, p in enumerate(self.layers[k]):
                out += [(f"gnn{k}.{i}.W1", p.W1), (f"gnn{k}.{i}.W2", p.W2), (f"gnn{k}.{i}.b", p.bias)]
                if p.W_global is not None:
                    out.append((f"gnn{k}.{i}.Wg", p.W_global))
        for i, (W, b) in enumerate(self.head):
            out += [(f"head.{i}.W", W), (f"head.{i}.b", b)]
        return out

    def copy(self) -> "GnnModel":
        return model_from_dict(model_to_dict(self))

    def to_json(self) -> str:
        return json.dumps(model_to_dict(self), indent=1, sort_keys=True)


def init_model(config: GnnConfig, seed: int = 0) -> GnnModel:
    """Weights uniform in ``(-1/sqrt(fan_in), 1/sqrt(fan_in))``, biases zero."""
    rng = np.random.default_rng(seed)

    def uniform(fan_in: int, fan_out: int) -> np.ndarray:
        s = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-s, s, (fan_in, fan_out))

    h = config.hidden
    layers: dict[int, list[GnnLayerParams]] = {}
    links: dict[int, np.ndarray] = {}
    for k in config.dims:
        if k == 1:
            widths = [config.num_labels] + [h] * config.layers_1
        else:
            links[k] = uniform(len(config.vocabulary(k)) + h, h)
            widths = [h] * (config.layers_k + 1)
        layers[k] = []
        for d, e in zip(widths, widths[1:]):
            W1, W2 = uniform(d, e), uniform(d, e)
            Wg = uniform(d, e) if (k > 1 and config.split_global) else None
            layers[k].append(GnnLayerParams(W1, W2, np.zeros(e), config.activation, Wg))
    head = []
    if config.out_dim is not None:
        sizes = [config.readout_width, *config.head_hidden, config.out_dim]
        head = [(uniform(d, e), np.zeros(e)) for d, e in zip(sizes, sizes[1:])]
    return GnnModel(config, layers, links, head)


# ---------------------------------------------------------------------------
# Batched structure: one block-diagonal operator set per batch of graphs.


@dataclass
class _Level:
    size: int
    segments: np.ndarray
    nbr: Aggregator | None = None
    glob: Aggregator | None = None
    pool: Aggregator | None = None
    iso: np.ndarray | None = None


@dataclass
class Batch:
    num_graphs: int
    labels: np.ndarray
    levels: dict[int, _Level]


@lru_cache(maxsize=4096)
def _graph_level(g: Graph, k: int, scope: str, split: bool, num_labels: int):
    if k == 1:
        return node_aggregator(g), None, None, None
    if g.n < k:
        empty = Aggregator(np.zeros(1, np.int64), np.zeros(0, np.int64), 0)
        prev = g.n if k == 2 else comb(g.n, k - 1)
        return empty, (empty if split else None), Aggregator(np.zeros(1, np.int64), np.zeros(0, np.int64), prev), np.zeros(0, np.int64)
    local, glob, full = kset_aggregators(g, k)
    if scope == "local":
        nbr, gl = local, None
    elif split:
        nbr, gl = local, glob
    else:
        nbr, gl = full, None
    vocab = {c: i for i, c in enumerate(atomic_type_vocabulary(k, num_labels))}
    iso = np.array([vocab[atomic_type_set(g, s)] for s in enumerate_ksets(g, k)], dtype=np.int64)
    return nbr, gl, subset_pooling(g, k), iso


def make_batch(graphs: Sequence[Graph], config: GnnConfig) -> Batch:
    labels = np.concatenate([np.asarray(g.labels, dtype=np.int64) for g in graphs]) if graphs else np.zeros(0, np.int64)
    if len(labels) and (labels.min() < 0 or labels.max() >= config.num_labels):
        raise DomainError(f"node labels must lie in 0..{config.num_labels - 1}")
    levels = {}
    vocab_size = {k: len(config.vocabulary(k)) for k in config.dims if k > 1}
    for k in config.dims:
        parts = [_graph_level(g, k, config.scope, config.split_global, config.num_labels) for g in graphs]
        sizes = [p[0].num_rows for p in parts]
        seg = np.repeat(np.arange(len(graphs), dtype=np.int64), sizes)
        lvl = _Level(sum(sizes), seg, Aggregator.block_diag([p[0] for p in parts]))
        if k > 1:
            if config.split_global:
                lvl.glob = Aggregator.block_diag([p[1] for p in parts])
            lvl.pool = Aggregator.block_diag([p[2] for p in parts])
            lvl.iso = one_hot(np.concatenate([p[3] for p in parts]), vocab_size[k])
        levels[k] = lvl
    return Batch(len(graphs), labels, levels)


def _readout_matrix(seg: np.ndarray, m: int, mode: str) -> sp.csr_matrix:
    rows = len(seg)
    R = sp.csr_matrix((np.ones(rows), (seg, np.arange(rows))), shape=(m, rows))
    if mode == "mean":
        counts = np.maximum(np.bincount(seg, minlength=m), 1).astype(np.float64)
        R = sp.diags(1.0 / counts) @ R
    return R.tocsr()


def _readout(F: np.ndarray, seg: np.ndarray, m: int, mode: str, deterministic: bool) -> np.ndarray:
    if not deterministic:
        return np.asarray(_readout_matrix(seg, m, mode) @ F)
    indptr = np.zeros(m + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(seg, minlength=m))
    out = Aggregator(indptr, np.arange(len(seg), dtype=np.int64), len(seg))(F, True)
    if mode == "mean":
        out = out / np.maximum(np.diff(indptr), 1)[:, None]
    return out


# ---------------------------------------------------------------------------
# Forward and backward.


def _layer_forward(F, lvl: _Level, p: GnnLayerParams, det: bool, cache: list):
    S = lvl.nbr(F, det)
    Sg = lvl.glob(F, det) if p.W_global is not None else None
    if det:
        blocks, weights = [F, S], [p.W1, p.W2]
        if Sg is not None:
            blocks.append(Sg)
            weights.append(p.W_global)
        Z = det_matmul(np.hstack(blocks), np.vstack(weights)) + p.bias
    else:
        Z = F @ p.W1 + S @ p.W2 + p.bias
        if Sg is not None:
            Z = Z + Sg @ p.W_global
    H = activate(p.activation, Z)
    cache.append((F, S, Sg, Z, H))
    return H


def forward(model: GnnModel, batch: Batch | Graph | Sequence[Graph], deterministic: bool = False):
    """Predictions (one row per graph) and the cached intermediates for :func:`backward`."""
    cfg = model.config
    if isinstance(batch, Graph):
        batch = make_batch([batch], cfg)
    elif not isinstance(batch, Batch):
        batch = make_batch(list(batch), cfg)
    m = batch.num_graphs
    cache: dict = {"batch": batch, "layers": {}, "links": {}, "det": deterministic}
    reps = []
    prev = None
    for k in cfg.dims:
        lvl = batch.levels[k]
        if k == 1:
            F = one_hot(batch.labels, cfg.num_labels)
        else:
            X = np.hstack([lvl.iso, lvl.pool(prev, deterministic)])
            Z = det_matmul(X, model.links[k]) if deterministic else X @ model.links[k]
            F = activate(cfg.activation, Z)
            cache["links"][k] = (X, Z, F)
        cache["layers"][k] = []
        for p in model.layers[k]:
            F = _layer_forward(F, lvl, p, deterministic, cache["layers"][k])
        reps.append(_readout(F, lvl.segments, m, cfg.readout, deterministic))
        prev = F
    r = np.hstack(reps)
    cache["readout"] = r
    cache["head"] = []
    for i, (W, b) in enumerate(model.head):
        z = (det_matmul(r, W) if deterministic else r @ W) + b
        last = i == len(model.head) - 1
        h = z if last else activate(cfg.head_activation, z)
        cache["head"].append((r, z, h))
        r = h
    return r, cache


def loss_and_grad_output(pred: np.ndarray, target: np.ndarray, loss: str) -> tuple[float, np.ndarray]:
    """Mean loss over graphs and its gradient with respect to ``pred``."""
    target = np.asarray(target, dtype=np.float64).reshape(pred.shape)
    size = pred.size
    if loss == "mse":
        diff = pred - target
        return float(np.sum(diff * diff) / size), 2.0 * diff / size
    if loss == "bce":
        # log(1 + exp(z)) - y z, computed stably
        val = np.logaddexp(0.0, pred) - target * pred
        sig = 0.5 * (1.0 + np.tanh(0.5 * pred))
        return float(np.sum(val) / size), (sig - target) / size
    raise DomainError(f"unknown loss {loss!r}")


def backward(model: GnnModel, cache: dict, dpred: np.ndarray) -> dict[str, np.ndarray]:
    cfg = model.config
    batch: Batch = cache["batch"]
    grads: dict[str, np.ndarray] = {}
    d = dpred
    for i in range(len(model.head) - 1, -1, -1):
        W, _ = model.head[i]
        r, z, hz = cache["head"][i]
        if i != len(model.head) - 1:
            d = d * activation_grad(cfg.head_activation, z, hz)
        grads[f"head.{i}.W"] = r.T @ d
        grads[f"head.{i}.b"] = d.sum(axis=0)
        d = d @ W.T
    m = batch.num_graphs
    h = cfg.hidden
    dreps = {k: d[:, j * h : (j + 1) * h] for j, k in enumerate(cfg.dims)}
    carry = None
    for k in reversed(cfg.dims):
        lvl = batch.levels[k]
        R = _readout_matrix(lvl.segments, m, cfg.readout)
        dF = np.asarray(R.T @ dreps[k])
        if carry is not None:
            dF = dF + carry
        for i in range(len(model.layers[k]) - 1, -1, -1):
            p = model.layers[k][i]
            F, S, Sg, Z, H = cache["layers"][k][i]
            dZ = dF * activation_grad(p.activation, Z, H)
            grads[f"gnn{k}.{i}.W1"] = F.T @ dZ
            grads[f"gnn{k}.{i}.W2"] = S.T @ dZ
            grads[f"gnn{k}.{i}.b"] = dZ.sum(axis=0)
            dF = dZ @ p.W1.T + lvl.nbr.transpose_apply(dZ @ p.W2.T)
            if Sg is not None:
                grads[f"gnn{k}.{i}.Wg"] = Sg.T @ dZ
                dF = dF + lvl.glob.transpose_apply(dZ @ p.W_global.T)
        if k > 1:
            X, Z, F = cache["links"][k]
            dZ = dF * activation_grad(cfg.activation, Z, F)
            grads[f"link{k}"] = X.T @ dZ
            iso_w = lvl.iso.shape[1]
            carry = lvl.pool.transpose_apply((dZ @ model.links[k].T)[:, iso_w:])
    return grads


def loss_and_gradients(model: GnnModel, batch, targets) -> tuple[float, dict[str, np.ndarray]]:
    pred, cache = forward(model, batch)
    loss, dpred = loss_and_grad_output(pred, targets, model.config.loss)
    return loss, backward(model, cache, dpred)


def gradients(model: GnnModel, g: Graph, target) -> dict[str, np.ndarray]:
    """Gradients of the loss on one graph with respect to every parameter block."""
    return loss_and_gradients(model, [g], np.atleast_2d(np.asarray(target, dtype=np.float64)))[1]


def predict(model: GnnModel, graphs: Sequence[Graph], deterministic: bool = False) -> np.ndarray:
    return forward(model, list(graphs), deterministic)[0]


# ---------------------------------------------------------------------------
# Serialization: every array as {"shape": [...], "data": [row-major floats]}.


def _arr(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=np.float64)
    return {"shape": list(a.shape), "data": [float(x) for x in a.reshape(-1)]}


def _unarr(d: dict) -> np.ndarray:
    try:
        return np.asarray(d["data"], dtype=np.float64).reshape(d["shape"])
    except (KeyError, ValueError, TypeError) as e:
        raise FormatError(f"bad array record: {e}") from None


def model_to_dict(model: GnnModel) -> dict:
    cfg = asdict(model.config)
    return {
        "format": "wlforge-gnn-1",
        "config": cfg,
        "parameters": {name: _arr(a) for name, a in model.parameters()},
    }


def model_from_dict(d: dict) -> GnnModel:
    if d.get("format") != "wlforge-gnn-1":
        raise FormatError(f"unknown model format {d.get('format')!r}")
    cfg = dict(d["config"])
    cfg["dims"] = tuple(cfg["dims"])
    cfg["head_hidden"] = tuple(cfg["head_hidden"])
    model = init_model(GnnConfig(**cfg), seed=0)
    params = d["parameters"]
    for name, a in model.parameters():
        if name not in params:
            raise FormatError(f"missing parameter {name!r}")
        v = _unarr(params[name])
        if v.shape != a.shape:
            raise FormatError(f"parameter {name!r} has shape {v.shape}, expected {a.shape}")
        a[...] = v
    return model


def load_model(path: str) -> GnnModel:
    with open(path) as f:
        try:
            return model_from_dict(json.load(f))
        except json.JSONDecodeError as e:
            raise FormatError(str(e), path=path, line=e.lineno) from None

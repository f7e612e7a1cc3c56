"""Adam training loop, loss logs and the synthetic label-count task."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ConfigurationError, TrainingError
from ..graph import Graph, random_graph
from .model import GnnModel, backward, forward, loss_and_grad_output, loss_and_gradients, make_batch


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 100
    seed: int = 0
    batch_size: int | None = None
    shuffle: bool = False

    def __post_init__(self):
        if self.lr < 0 or self.epochs < 0 or not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigurationError("invalid optimizer settings")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigurationError("batch_size must be positive")


class Adam:
    """Adam with bias correction, updating arrays in place."""

    def __init__(self, params: Sequence[tuple[str, np.ndarray]], lr=1e-2, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {n: np.zeros_like(a) for n, a in self.params}
        self.v = {n: np.zeros_like(a) for n, a in self.params}
        self.t = 0

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name, a in self.params:
            g = grads.get(name)
            if g is None:
                continue
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            a -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    accuracy: float | None


def accuracy(model: GnnModel, pred: np.ndarray, targets: np.ndarray) -> float | None:
    """Fraction of correct sign decisions for single-output classification, else None."""
    if model.config.loss != "bce" or pred.shape[1] != 1:
        return None
    return float(np.mean((pred[:, 0] > 0) == (np.asarray(targets).reshape(-1) > 0.5)))


def train(
    model: GnnModel,
    dataset: Sequence[tuple[Graph, object]],
    config: TrainConfig = TrainConfig(),
) -> tuple[GnnModel, list[EpochRecord]]:
    """Train ``model`` in place; returns it with one log record per epoch.

    The record of epoch ``e`` holds the loss and accuracy of the parameters at
    the start of that epoch's pass, so the last record is followed by one
    extra evaluation of the final parameters (epoch ``epochs``).
    """
    graphs = [g for g, _ in dataset]
    targets = np.array([np.atleast_1d(np.asarray(y, dtype=np.float64)) for _, y in dataset])
    if not graphs:
        raise ConfigurationError("empty dataset")
    opt = Adam(model.parameters(), config.lr, config.beta1, config.beta2, config.eps)
    rng = np.random.default_rng(config.seed)
    size = config.batch_size or len(graphs)
    order = np.arange(len(graphs))
    chunks = [order[i : i + size] for i in range(0, len(graphs), size)]
    batches = {tuple(c): make_batch([graphs[i] for i in c], model.config) for c in chunks}
    full = batches[tuple(order)] if size >= len(graphs) else make_batch(graphs, model.config)
    log = []
    for epoch in range(config.epochs + 1):
        pred, cache = forward(model, full)
        with np.errstate(invalid="ignore", over="ignore"):
            loss, dpred = loss_and_grad_output(pred, targets, model.config.loss)
        if not np.isfinite(loss):
            raise TrainingError(f"loss became {loss} at epoch {epoch}; lower the learning rate")
        log.append(EpochRecord(epoch, loss, accuracy(model, pred, targets)))
        if epoch == config.epochs:
            break
        if size >= len(graphs):
            opt.step(backward(model, cache, dpred))
            continue
        if config.shuffle:
            perm = rng.permutation(len(graphs))
            chunks = [perm[i : i + size] for i in range(0, len(graphs), size)]
        for c in chunks:
            key = tuple(c)
            if key not in batches:
                batches[key] = make_batch([graphs[i] for i in c], model.config)
            _, grads = loss_and_gradients(model, batches[key], targets[c])
            opt.step(grads)
    return model, log


def log_to_csv(log: Sequence[EpochRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "loss", "accuracy"])
    for r in log:
        w.writerow([r.epoch, repr(r.loss), "" if r.accuracy is None else repr(r.accuracy)])
    return buf.getvalue()


def label_count_task(
    num_graphs: int = 200,
    seed: int = 0,
    n_range: tuple[int, int] = (5, 10),
    p: float = 0.3,
    threshold: int = 3,
) -> list[tuple[Graph, float]]:
    """Graphs with labels in {0, 1}; target 1 when at least ``threshold`` nodes carry label 0."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(num_graphs):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        g = random_graph(n, p, rng)
        count = int(rng.integers(0, min(n, 2 * threshold) + 1))
        labels = [1] * n
        for v in rng.choice(n, size=count, replace=False):
            labels[int(v)] = 0
        out.append((g.relabel(labels), float(count >= threshold)))
    return out

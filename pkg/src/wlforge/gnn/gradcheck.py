"""Central finite-difference check of the manual gradients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph import Graph, random_graph
from .model import GnnConfig, GnnModel, forward, init_model, loss_and_gradients, make_batch


@dataclass(frozen=True)
class GradCheckResult:
    max_relative_error: float
    per_block: dict[str, float]


def finite_difference_check(model: GnnModel, graphs: list[Graph], targets, h: float = 1e-4) -> GradCheckResult:
    """Relative error per parameter block: ``|g - g_fd| / max(|g| + |g_fd|, 1e-12)`` in the 2-norm."""
    batch = make_batch(graphs, model.config)
    targets = np.asarray(targets, dtype=np.float64).reshape(len(graphs), -1)
    _, grads = loss_and_gradients(model, batch, targets)
    errors = {}
    for name, a in model.parameters():
        num = np.zeros_like(a)
        flat, nflat = a.reshape(-1), num.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            lp, _ = loss_and_gradients(model, batch, targets)
            flat[i] = old - h
            lm, _ = loss_and_gradients(model, batch, targets)
            flat[i] = old
            nflat[i] = (lp - lm) / (2 * h)
        g = grads.get(name, np.zeros_like(a))
        errors[name] = float(np.linalg.norm(g - num) / max(np.linalg.norm(g) + np.linalg.norm(num), 1e-12))
    return GradCheckResult(max(errors.values()), errors)


def relu_margin(model: GnnModel, graphs: list[Graph]) -> float:
    """Smallest |preactivation| feeding a ReLU; a finite difference across a kink is meaningless."""
    cfg = model.config
    _, cache = forward(model, graphs)
    margins = [np.inf]
    if cfg.activation == "relu":
        for k, steps in cache["layers"].items():
            margins += [np.min(np.abs(Z)) for *_, Z, _ in steps if Z.size]
        margins += [np.min(np.abs(Z)) for _, Z, _ in cache["links"].values() if Z.size]
    if cfg.head_activation == "relu":
        margins += [np.min(np.abs(z)) for _, z, _ in cache["head"][:-1]]
    return float(min(margins))


def random_case(rng: np.random.Generator, margin: float = 1e-3) -> tuple[GnnModel, list[Graph], np.ndarray]:
    """A small random model, two graphs and targets, resampled until ReLU kinks are ``margin`` away."""
    while True:
        dims = [(1,), (1, 2), (1, 2, 3)][int(rng.integers(0, 3))]
        num_labels = int(rng.integers(1, 3))
        loss = ["mse", "bce"][int(rng.integers(0, 2))]
        cfg = GnnConfig(
            num_labels=num_labels,
            dims=dims,
            hidden=int(rng.integers(2, 4)),
            layers_1=int(rng.integers(1, 3)),
            layers_k=int(rng.integers(0, 2)),
            activation=["tanh", "sigmoid", "relu"][int(rng.integers(0, 3))],
            readout=["sum", "mean"][int(rng.integers(0, 2))],
            head_hidden=(int(rng.integers(2, 4)),),
            head_activation=["tanh", "sigmoid", "relu"][int(rng.integers(0, 3))],
            loss=loss,
            split_global=bool(rng.integers(0, 2)) and len(dims) > 1,
        )
        model = init_model(cfg, int(rng.integers(0, 2**31)))
        for name, a in model.parameters():
            if name.endswith("b"):
                a[...] = rng.uniform(-0.5, 0.5, a.shape)
        graphs = [random_graph(int(rng.integers(3, 6)), 0.5, rng, num_labels) for _ in range(2)]
        targets = rng.integers(0, 2, (2, 1)).astype(np.float64) if loss == "bce" else rng.normal(size=(2, 1))
        if relu_margin(model, graphs) > margin:
            return model, graphs, targets

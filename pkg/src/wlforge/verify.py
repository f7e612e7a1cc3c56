"""Seeded property suites checking GNN and WL expressiveness claims on random graphs.

Every trial draws from its own generator ``default_rng([seed, trial])``, so a
failing trial can be replayed alone and results do not depend on evaluation
order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import exact
from .errors import DomainError
from .gnn.layers import GnnLayerParams, gnn_layer_basic, iso_one_hot, kgnn_layer, one_hot
from .graph import Graph, product_graph, random_graph
from .higher_order import kwl_run
from .refinement import Coloring, partition_of_rows, refines, wl1_run
from .simulation import check_against_wl, dist2lu, relu_simulation, sign_pattern, simulate_wl_colored

SUITES = ("thm1", "thm2", "relu", "prop3", "prop4", "dist2lu", "appendix")


@dataclass
class SuiteReport:
    name: str
    seed: int
    trials: int = 0
    passed: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.trials > 0 and self.passed == self.trials

    def record(self, trial: int, ok: bool, detail: str = "") -> None:
        self.trials += 1
        if ok:
            self.passed += 1
        else:
            self.failures.append(f"trial {trial}: {detail}" if detail else f"trial {trial}")

    def merge(self, other: "SuiteReport") -> None:
        self.trials += other.trials
        self.passed += other.passed
        self.failures += [f"{other.name} {f}" for f in other.failures]

    def summary(self) -> str:
        return f"{self.name}: {self.passed}/{self.trials} {'PASS' if self.ok else 'FAIL'}"

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "ok": self.ok,
            "failures": self.failures,
        }


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def corpus_graph(seed: int, trial: int, n_range=(4, 12), max_labels: int = 3) -> Graph:
    """Graph ``trial`` of the seeded corpus: edge probability alternates 0.3/0.5."""
    rng = trial_rng(seed, trial)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    num_labels = int(rng.integers(1, max_labels + 1))
    return random_graph(n, 0.3 if trial % 2 == 0 else 0.5, rng, num_labels)


def _compact(labels) -> int:
    return max(labels, default=0) + 1


def thm1_trial(g: Graph, rng: np.random.Generator, iterations: int = 3, width: int = 8) -> tuple[bool, str]:
    """1-WL at ``t`` refines every random GNN's row partition at ``t``, for sigmoid and relu."""
    wl = wl1_run(g, max_iters=iterations)
    for act in ("sigmoid", "relu"):
        F = one_hot(g.labels, _compact(g.labels))
        for t in range(1, iterations + 1):
            p = GnnLayerParams.random(F.shape[1], width, rng, act)
            F = gnn_layer_basic(g, F, p, deterministic=True)
            if not refines(wl.at(t), partition_of_rows(F)):
                return False, f"{act} layer {t} separates nodes 1-WL merges"
    return True, ""


def thm2_trial(g: Graph, construction: str = "anchored") -> tuple[bool, str]:
    rep = check_against_wl(g, simulate_wl_colored(g, construction=construction))
    if not rep.ok:
        return False, f"equivalent={rep.per_iteration} independent={rep.row_independent}"
    if rep.max_width > 2 * max(g.n, 1):
        return False, f"width {rep.max_width} exceeds 2n"
    return True, ""


def relu_trial(g: Graph) -> tuple[bool, str]:
    res = relu_simulation(g)
    rep = check_against_wl(g, res)
    if not rep.ok:
        return False, f"equivalent={rep.per_iteration} independent={rep.row_independent}"
    if len(res.layers) != 2 * g.n or any(d <= 0 for d in res.deltas):
        return False, "layer count or delta positivity violated"
    return True, ""


def prop3_trial(g: Graph, rng: np.random.Generator, k: int = 2, iterations: int = 2, width: int = 8) -> tuple[bool, str]:
    """Split set k-WL at ``t`` refines a random full-scope k-GNN (single W2) at ``t``."""
    if g.n < k:
        return True, ""
    wl = kwl_run(g, k, "set-split", max_iters=iterations)
    F = iso_one_hot(g, k)
    for t in range(1, iterations + 1):
        act = "sigmoid" if t % 2 else "relu"
        F = kgnn_layer(g, k, F, GnnLayerParams.random(F.shape[1], width, rng, act), "full", deterministic=True)
        if not refines(wl.at(t), partition_of_rows(F)):
            return False, f"k={k} layer {t} separates sets the split k-WL merges"
    return True, ""


def prop4_trial(g: Graph, ks=(2, 3)) -> tuple[bool, str]:
    """Combined set k-WL on ``g`` and 1-WL on ``product_graph(g, k)`` agree at every iteration."""
    for k in ks:
        if g.n < k:
            continue
        a = kwl_run(g, k, "set-combined")
        P = product_graph(g, k)
        b = wl1_run(P, Coloring(P.labels))
        for t in range(max(len(a), len(b))):
            if a.at(t) != b.at(t):
                return False, f"k={k} differs at iteration {t}"
    return True, ""


def random_dist2lu_input(rng: np.random.Generator, max_dim: int = 8, max_n: int = 9) -> tuple[list[list[int]], int]:
    n = int(rng.integers(2, max_n + 1))
    t = int(rng.integers(1, max_dim + 1))
    s = int(rng.integers(1, min(max_dim, n**t) + 1))
    rows: set[tuple[int, ...]] = set()
    while len(rows) < s:
        rows.add(tuple(int(x) for x in rng.integers(0, n, t)))
    B = [list(r) for r in rows]
    rng.shuffle(B)
    return B, n


def dist2lu_trial(rng: np.random.Generator) -> tuple[bool, str]:
    B, n = random_dist2lu_input(rng)
    P = sign_pattern(B, dist2lu(B, n))
    r = exact.rank(exact.to_matrix(P))
    return r == len(B), f"rank {r} of {len(B)} for B={B}"


def _run(name: str, seed: int, trials: int, fn: Callable[[int], tuple[bool, str]]) -> SuiteReport:
    rep = SuiteReport(name, seed)
    for i in range(trials):
        try:
            ok, detail = fn(i)
        except DomainError as e:
            ok, detail = False, f"DomainError: {e}"
        rep.record(i, ok, detail)
    return rep


def run_suite(name: str, seed: int = 0, trials: int = 200) -> SuiteReport:
    if name == "thm1":
        return _run(name, seed, trials, lambda i: thm1_trial(corpus_graph(seed, i), trial_rng(seed + 1, i)))
    if name == "thm2":
        return _run(name, seed, trials, lambda i: thm2_trial(corpus_graph(seed, i)))
    if name == "relu":
        return _run(name, seed, trials, lambda i: relu_trial(corpus_graph(seed, i)))
    if name == "prop3":
        return _run(name, seed, trials, lambda i: prop3_trial(corpus_graph(seed, i, (4, 10)), trial_rng(seed + 1, i)))
    if name == "prop4":
        return _run(name, seed, trials, lambda i: prop4_trial(corpus_graph(seed, i, (3, 8))))
    if name == "dist2lu":
        return _run(name, seed, trials, lambda i: dist2lu_trial(trial_rng(seed, i)))
    if name == "appendix":
        rep = SuiteReport(name, seed)
        for sub in ("dist2lu", "thm2", "relu"):
            rep.merge(run_suite(sub, seed, trials))
        return rep
    raise DomainError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")

"""WL subtree kernels: explicit histogram feature maps and Gram matrices."""
from __future__ import annotations

import csv
import io
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import DomainError
from .graph import Graph
from .refinement import ColorDictionary, Refiner, build_domain, lockstep


class KernelFeatureVector:
    """Sparse counts keyed by ``(iteration, shared colour id)``."""

    __slots__ = ("entries",)

    def __init__(self, entries: dict[tuple[int, int], int] | None = None):
        self.entries = dict(entries or {})

    def __getitem__(self, key):
        return self.entries.get(key, 0)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KernelFeatureVector):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self) -> str:
        return f"KernelFeatureVector({dict(sorted(self.entries.items()))})"

    def iteration_totals(self) -> dict[int, int]:
        out: Counter = Counter()
        for (t, _), c in self.entries.items():
            out[t] += c
        return dict(out)

    def to_json(self) -> list[list[int]]:
        return [[t, c, n] for (t, c), n in sorted(self.entries.items())]


def corpus_features(
    corpus: Sequence[Graph],
    refiner: Refiner | None,
    iterations: int,
    dictionary: ColorDictionary | None = None,
) -> list[KernelFeatureVector]:
    """Feature vectors of every graph, refined in lockstep under one dictionary.

    Exactly ``iterations`` rounds are run (no early stop), so vectors from
    different corpora built with the same dictionary stay comparable.
    """
    if iterations < 0:
        raise DomainError(f"iterations must be >= 0, got {iterations}")
    refiner = refiner or Refiner()
    dictionary = dictionary if dictionary is not None else ColorDictionary()
    domains = _build_domains(corpus, refiner)
    rounds = lockstep(domains, iterations, dictionary)
    feats = []
    for i in range(len(corpus)):
        entries: dict[tuple[int, int], int] = {}
        for t, ids in enumerate(rounds):
            for color, count in Counter(ids[i].tolist()).items():
                entries[(t, color)] = count
        feats.append(KernelFeatureVector(entries))
    return feats


def _build_domains(corpus: Sequence[Graph], refiner: Refiner) -> list:
    # atomic types per graph are independent; map keeps corpus order
    workers = min(_backend.workers(), len(corpus))
    if workers <= 1:
        return [build_domain(g, refiner) for g in corpus]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda g: build_domain(g, refiner), corpus))


def wl_feature_vector(
    g: Graph,
    refiner: Refiner | None = None,
    iterations: int = 1,
    dictionary: ColorDictionary | None = None,
) -> KernelFeatureVector:
    """Concatenated colour histograms of ``g`` for iterations ``0..iterations``.

    Pass the same ``dictionary`` for every graph that will be compared.
    """
    return corpus_features([g], refiner, iterations, dictionary)[0]


def kernel_value(f1: KernelFeatureVector, f2: KernelFeatureVector) -> float:
    """Dot product, accumulated exactly in integers."""
    small, large = (f1, f2) if len(f1) <= len(f2) else (f2, f1)
    total = 0
    for key, c in small.entries.items():
        total += c * large.entries.get(key, 0)
    return float(total)


@dataclass(frozen=True)
class GramMatrix:
    values: np.ndarray
    ids: tuple[str, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.ids)
        for row in self.values:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def gram_from_features(feats: Sequence[KernelFeatureVector], normalize: bool = False) -> np.ndarray:
    m = len(feats)
    raw = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        for j in range(i, m):
            small, large = (feats[i], feats[j]) if len(feats[i]) <= len(feats[j]) else (feats[j], feats[i])
            v = 0
            for key, c in small.entries.items():
                v += c * large.entries.get(key, 0)
            raw[i, j] = raw[j, i] = v
    K = raw.astype(np.float64)
    if not normalize:
        return K
    diag = np.diag(K).copy()
    if np.any(diag <= 0):
        bad = int(np.nonzero(diag <= 0)[0][0])
        raise DomainError(f"graph {bad} has zero self-kernel; cannot normalize")
    K = K / np.sqrt(np.outer(diag, diag))
    np.fill_diagonal(K, diag / diag)
    return K


def gram_matrix(
    corpus: Sequence[Graph],
    refiner: Refiner | None = None,
    iterations: int = 3,
    normalize: bool = True,
    ids: Sequence[str] | None = None,
) -> GramMatrix:
    if not corpus:
        raise DomainError("corpus is empty")
    feats = corpus_features(corpus, refiner, iterations)
    ids = tuple(ids) if ids is not None else tuple(str(i) for i in range(len(corpus)))
    return GramMatrix(gram_from_features(feats, normalize), ids)

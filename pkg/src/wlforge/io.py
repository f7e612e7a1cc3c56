"""Graph files: the plain edge-list format and TUDataset directories."""
from __future__ import annotations

import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .errors import FormatError
from .graph import Graph, write_edge_list

__all__ = [
    "Dataset",
    "load_dataset",
    "load_edge_list",
    "load_tudataset",
    "parse_edge_list",
    "save_edge_list",
    "write_edge_list",
    "write_tudataset",
]


@dataclass
class Dataset:
    name: str
    graphs: list[Graph]
    graph_labels: list | None = None
    node_label_names: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.graph_labels is not None and len(self.graph_labels) != len(self.graphs):
            raise FormatError(f"{len(self.graph_labels)} graph labels for {len(self.graphs)} graphs")

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def num_labels(self) -> int:
        return max((max(g.labels, default=0) for g in self.graphs), default=0) + 1


def _ints(line: str, count: int, path, lineno: int) -> list[int]:
    parts = line.split()
    if len(parts) != count:
        raise FormatError(f"expected {count} integers, got {line.strip()!r}", path, lineno)
    try:
        return [int(x) for x in parts]
    except ValueError:
        raise FormatError(f"non-integer field in {line.strip()!r}", path, lineno) from None


def parse_edge_list(text: str, path: str | None = None) -> Graph:
    """Parse ``n m L``, then ``n`` lines ``v label``, then ``m`` lines ``u v``.

    Blank lines are ignored.  Nodes are 0-indexed and must be listed in order.
    """
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise FormatError("empty file", path, 1)
    lineno, head = lines[0]
    n, m, num_labels = _ints(head, 3, path, lineno)
    if n < 0 or m < 0 or num_labels < 1:
        raise FormatError("header values must be n >= 0, m >= 0, L >= 1", path, lineno)
    body = lines[1:]
    if len(body) != n + m:
        at = body[n + m][0] if len(body) > n + m else (body[-1][0] if body else lineno)
        raise FormatError(f"expected {n} node lines and {m} edge lines, found {len(body)} lines", path, at)
    labels = []
    for i, (ln, text_line) in enumerate(body[:n]):
        v, lab = _ints(text_line, 2, path, ln)
        if v != i:
            raise FormatError(f"node line for {v} where {i} was expected", path, ln)
        if not 0 <= lab < num_labels:
            raise FormatError(f"label {lab} outside 0..{num_labels - 1}", path, ln)
        labels.append(lab)
    seen = set()
    edges = []
    for ln, text_line in body[n:]:
        u, v = _ints(text_line, 2, path, ln)
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}", path, ln)
        if u == v:
            raise FormatError(f"self-loop at node {u}", path, ln)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise FormatError(f"duplicate edge ({u}, {v})", path, ln)
        seen.add(key)
        edges.append(key)
    return Graph(n, edges, labels)


def load_edge_list(path: str | os.PathLike) -> Graph:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as f:
        return parse_edge_list(f.read(), path)


def save_edge_list(g: Graph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(write_edge_list(g))


def _read_column(path: str, cast=int) -> list:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            s = line.strip()
            if not s:
                continue
            try:
                out.append(cast(s.split(",")[0].strip()))
            except ValueError:
                raise FormatError(f"cannot parse {s!r}", path, lineno) from None
    return out


def _number(s: str):
    v = float(s)
    return int(v) if v.is_integer() and "." not in s and "e" not in s.lower() else v


def load_tudataset(directory: str | os.PathLike, name: str) -> Dataset:
    """Read ``NAME_A.txt``, ``NAME_graph_indicator.txt`` and the optional label files.

    Files are 1-indexed and list each undirected edge in both directions;
    graphs are returned 0-indexed with each edge once.  Node labels are
    compacted to ``0..L-1`` in ascending order of the raw values.
    """
    directory = os.fspath(directory)
    prefix = os.path.join(directory, name)
    ind_path = f"{prefix}_graph_indicator.txt"
    a_path = f"{prefix}_A.txt"
    for p in (ind_path, a_path):
        if not os.path.exists(p):
            raise FormatError("missing file", p)
    indicator = _read_column(ind_path)
    if not indicator:
        raise FormatError("no nodes", ind_path)
    num_graphs = max(indicator)
    if min(indicator) < 1 or sorted(set(indicator)) != list(range(1, num_graphs + 1)):
        raise FormatError("graph ids must be 1..N with every graph non-empty", ind_path)
    if any(b < a for a, b in zip(indicator, indicator[1:])):
        raise FormatError("nodes must be grouped by graph in ascending order", ind_path)
    local = []
    counts = defaultdict(int)
    for gid in indicator:
        local.append(counts[gid])
        counts[gid] += 1

    lab_path = f"{prefix}_node_labels.txt"
    if os.path.exists(lab_path):
        raw = _read_column(lab_path)
        if len(raw) != len(indicator):
            raise FormatError(f"{len(raw)} node labels for {len(indicator)} nodes", lab_path)
        names = sorted(set(raw))
        code = {x: i for i, x in enumerate(names)}
        labels = [code[x] for x in raw]
    else:
        names, labels = [0], [0] * len(indicator)

    edges = defaultdict(set)
    with open(a_path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            s = line.strip()
            if not s:
                continue
            parts = s.replace(",", " ").split()
            if len(parts) != 2:
                raise FormatError(f"expected 'u, v', got {s!r}", a_path, lineno)
            try:
                u, v = int(parts[0]) - 1, int(parts[1]) - 1
            except ValueError:
                raise FormatError(f"non-integer node id in {s!r}", a_path, lineno) from None
            if not (0 <= u < len(indicator) and 0 <= v < len(indicator)):
                raise FormatError(f"node id outside 1..{len(indicator)}", a_path, lineno)
            if indicator[u] != indicator[v]:
                raise FormatError(f"edge ({u + 1}, {v + 1}) crosses graphs {indicator[u]} and {indicator[v]}", a_path, lineno)
            if u == v:
                raise FormatError(f"self-loop at node {u + 1}", a_path, lineno)
            edges[indicator[u]].add((min(local[u], local[v]), max(local[u], local[v])))

    graphs = []
    start = 0
    for gid in range(1, num_graphs + 1):
        n = counts[gid]
        graphs.append(Graph(n, sorted(edges[gid]), labels[start : start + n]))
        start += n

    gl_path = f"{prefix}_graph_labels.txt"
    graph_labels = None
    if os.path.exists(gl_path):
        graph_labels = _read_column(gl_path, _number)
        if len(graph_labels) != num_graphs:
            raise FormatError(f"{len(graph_labels)} graph labels for {num_graphs} graphs", gl_path)
    return Dataset(name, graphs, graph_labels, names)


def load_dataset(directory: str | os.PathLike) -> Dataset:
    """TUDataset directory; the name is taken from the single ``*_A.txt`` file in it."""
    directory = os.fspath(directory)
    if not os.path.isdir(directory):
        raise FormatError("not a directory", directory)
    names = sorted(f[: -len("_A.txt")] for f in os.listdir(directory) if f.endswith("_A.txt"))
    if len(names) != 1:
        raise FormatError(f"expected exactly one *_A.txt file, found {len(names)}", directory)
    return load_tudataset(directory, names[0])


def write_tudataset(dataset: Dataset, directory: str | os.PathLike, name: str | None = None) -> None:
    """Write ``dataset`` in the TUDataset convention (both edge directions, 1-indexed)."""
    name = name or dataset.name
    os.makedirs(directory, exist_ok=True)
    prefix = os.path.join(os.fspath(directory), name)
    a_lines, ind, labs = [], [], []
    off = 0
    for gid, g in enumerate(dataset.graphs, 1):
        for u, v in g.sorted_edges:
            a_lines += [f"{u + off + 1}, {v + off + 1}", f"{v + off + 1}, {u + off + 1}"]
        ind += [str(gid)] * g.n
        labs += [str(x) for x in g.labels]
        off += g.n
    _write(f"{prefix}_A.txt", a_lines)
    _write(f"{prefix}_graph_indicator.txt", ind)
    _write(f"{prefix}_node_labels.txt", labs)
    if dataset.graph_labels is not None:
        _write(f"{prefix}_graph_labels.txt", [str(y) for y in dataset.graph_labels])


def _write(path: str, lines: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + ("\n" if lines else ""))

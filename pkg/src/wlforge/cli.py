"""Command-line entry point: ``wlforge <command> [options]``.

Exit status: 0 success, 1 usage error, 2 input format error, 3 property failure.
Every artifact is deterministic for fixed arguments and embeds the resolved
run configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .errors import ConfigurationError, DomainError, FormatError, TrainingError
from .graph import enumerate_ksets, product_graph, write_edge_list
from .higher_order import enumerate_tuples, kwl_run
from .io import Dataset, load_dataset, load_edge_list
from .kernels import GramMatrix, corpus_features, gram_from_features
from .refinement import Refiner, distinguish, wl1_run

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_PROPERTY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> dict:
        return asdict(self)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _refiner(args) -> Refiner:
    if args.refiner == "wl1":
        return Refiner("wl1")
    return Refiner("kwl", k=args.k, variant=args.variant, max_k=args.max_k)


def _add_refiner(p: argparse.ArgumentParser) -> None:
    p.add_argument("--refiner", choices=("wl1", "kwl"), default="wl1")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--variant", choices=("tuple", "set-combined", "set-split", "set-local"), default="set-split")
    p.add_argument("--max-k", type=int, default=3, help="override the k <= 3 cap")


# ---------------------------------------------------------------------------
# Commands.


def cmd_color(args) -> int:
    g = load_edge_list(args.input)
    refiner = _refiner(args)
    if refiner.kind == "wl1":
        trace = wl1_run(g, max_iters=args.iters)
        elements = [str(v) for v in range(g.n)]
    else:
        trace = kwl_run(g, refiner.k, refiner.variant, max_iters=args.iters, max_k=refiner.max_k)
        items = enumerate_tuples(g.n, refiner.k) if refiner.variant == "tuple" else enumerate_ksets(g, refiner.k)
        elements = [" ".join(map(str, s)) for s in items]
    iters = args.iters if args.iters is not None else len(trace) - 1
    cols = [trace.at(t) for t in range(iters + 1)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["element"] + [f"t{t}" for t in range(iters + 1)])
    for i, e in enumerate(elements):
        w.writerow([e] + [int(c.colors[i]) for c in cols])
    config = RunConfig("color", {"input": args.input, "refiner": refiner.as_dict(), "iters": iters})
    hist = {
        "config": config.to_dict(),
        "converged_at": trace.converged_at,
        "histograms": [{str(k): v for k, v in sorted(c.histogram().items())} for c in cols],
        "num_colors": [c.num_colors for c in cols],
    }
    _write(os.path.join(args.out, "colors.csv"), buf.getvalue())
    _write(os.path.join(args.out, "histogram.json"), _dump(hist))
    print(f"{len(elements)} elements, {cols[-1].num_colors} colours after {iters} iterations")
    return EXIT_OK


def cmd_distinguish(args) -> int:
    g1, g2 = load_edge_list(args.a), load_edge_list(args.b)
    refiner = _refiner(args)
    verdict = distinguish(g1, g2, refiner, args.iters)
    print(verdict)
    if args.out:
        config = RunConfig("distinguish", {"a": args.a, "b": args.b, "refiner": refiner.as_dict(), "iters": args.iters})
        _write(args.out, _dump({"config": config.to_dict(), "distinguished": verdict.distinguished, "iteration": verdict.iteration}))
    return EXIT_OK


def cmd_kernel(args) -> int:
    ds = load_dataset(args.dataset)
    refiner = _refiner(args)
    feats = corpus_features(ds.graphs, refiner, args.iters)
    ids = tuple(str(i) for i in range(1, len(ds) + 1))
    gram = GramMatrix(gram_from_features(feats, args.normalize), ids)
    config = RunConfig(
        "kernel",
        {"dataset": args.dataset, "name": ds.name, "iters": args.iters, "normalize": args.normalize, "refiner": refiner.as_dict()},
    )
    _write(os.path.join(args.out, "gram.csv"), gram.to_csv())
    _write(
        os.path.join(args.out, "features.json"),
        _dump({"config": config.to_dict(), "ids": list(ids), "features": [f.to_json() for f in feats]}),
    )
    print(f"{len(ds)} graphs, Gram matrix written to {os.path.join(args.out, 'gram.csv')}")
    return EXIT_OK


def cmd_product(args) -> int:
    g = load_edge_list(args.input)
    if not 2 <= args.k <= min(g.n, args.max_k):
        raise ConfigurationError(f"k={args.k} outside supported range 2..min(n={g.n}, {args.max_k})")
    P = product_graph(g, args.k)
    _write(args.out, write_edge_list(P))
    sets = [list(s) for s in enumerate_ksets(g, args.k)]
    config = RunConfig("product", {"input": args.input, "k": args.k})
    _write(args.out + ".json", _dump({"config": config.to_dict(), "nodes": sets}))
    print(f"product graph: {P.n} nodes, {P.num_edges} edges")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .simulation import check_against_wl, relu_simulation, simulate_wl_colored

    g = load_edge_list(args.input)
    T = g.n if args.iters is None else args.iters
    try:
        if args.activation == "sign":
            res = simulate_wl_colored(g, T=T, construction=args.construction)
        else:
            res = relu_simulation(g, T=T)
    except DomainError as e:
        if args.construction != "concat":
            raise
        # the literal construction can lose row independence mid-run
        print(f"NOT equivalent: {e}")
        return EXIT_PROPERTY
    rep = check_against_wl(g, res)
    config = RunConfig(
        "simulate", {"input": args.input, "iters": T, "activation": args.activation, "construction": res.construction}
    )
    report = {
        "config": config.to_dict(),
        "equivalent": rep.per_iteration,
        "row_independent": rep.row_independent,
        "max_width": rep.max_width,
        "ok": rep.ok,
    }
    _write(os.path.join(args.out, "report.json"), _dump(report))
    _write(os.path.join(args.out, "weights.json"), _dump({"config": config.to_dict(), **res.to_json()}))
    if rep.ok:
        print("equivalent at all t")
        return EXIT_OK
    bad = [t for t, ok in enumerate(rep.per_iteration) if not ok]
    print(f"NOT equivalent at t={bad}; row independence {rep.row_independent}")
    return EXIT_PROPERTY


def _targets(ds: Dataset, task: str) -> np.ndarray:
    if ds.graph_labels is None:
        raise FormatError("dataset has no graph labels", ds.name)
    y = np.asarray(ds.graph_labels, dtype=np.float64)
    if task == "regress":
        return y
    classes = sorted(set(y.tolist()))
    if len(classes) > 2:
        raise ConfigurationError(f"classification needs two graph classes, found {len(classes)}")
    return (y == classes[-1]).astype(np.float64) if len(classes) == 2 else np.zeros_like(y)


def cmd_gnn(args) -> int:
    from .gnn import GnnConfig, TrainConfig, init_model, log_to_csv, train

    ds = load_dataset(args.dataset)
    y = _targets(ds, args.task)
    cfg = GnnConfig.from_arch(
        args.arch,
        ds.num_labels,
        hidden=args.hidden,
        readout=args.readout,
        head_hidden=(args.hidden, args.hidden),
        loss="bce" if args.task == "classify" else "mse",
    )
    tcfg = TrainConfig(lr=args.lr, epochs=args.epochs, seed=args.seed, batch_size=args.batch_size)
    model = init_model(cfg, args.seed)
    model, log = train(model, list(zip(ds.graphs, y)), tcfg)
    config = RunConfig(
        "gnn",
        {"dataset": args.dataset, "name": ds.name, "task": args.task, "model": asdict(cfg), "train": asdict(tcfg)},
    )
    _write(os.path.join(args.out, "loss.csv"), log_to_csv(log))
    model_json = json.loads(model.to_json())
    model_json["run"] = config.to_dict()
    _write(os.path.join(args.out, "model.json"), _dump(model_json))
    last = log[-1]
    acc = "" if last.accuracy is None else f", accuracy {last.accuracy:.4f}"
    print(f"epoch {last.epoch}: loss {last.loss:.6g}{acc}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    rep = run_suite(args.suite, args.seed, args.trials)
    if args.out:
        config = RunConfig("verify", {"suite": args.suite, "seed": args.seed, "trials": args.trials})
        _write(args.out, _dump({"config": config.to_dict(), **rep.to_json()}))
    print(rep.summary())
    for f in rep.failures[:20]:
        print(f"  {f}")
    return EXIT_OK if rep.ok else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wlforge", description="Weisfeiler-Leman refinement, WL kernels and k-GNNs.")
    p.add_argument("--version", action="version", version=f"wlforge {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("color", help="per-iteration colours of one graph")
    c.add_argument("--input", required=True)
    _add_refiner(c)
    c.add_argument("--iters", type=int, default=None, help="default: until stable")
    c.add_argument("--out", required=True, help="output directory")
    c.set_defaults(func=cmd_color)

    d = sub.add_parser("distinguish", help="does the refinement tell two graphs apart")
    d.add_argument("--a", required=True)
    d.add_argument("--b", required=True)
    _add_refiner(d)
    d.add_argument("--iters", type=int, default=None)
    d.add_argument("--out", help="optional JSON verdict file")
    d.set_defaults(func=cmd_distinguish)

    k = sub.add_parser("kernel", help="WL subtree kernel Gram matrix of a TUDataset directory")
    k.add_argument("--dataset", required=True)
    _add_refiner(k)
    k.add_argument("--iters", type=int, default=3)
    k.add_argument("--normalize", action="store_true")
    k.add_argument("--out", required=True, help="output directory")
    k.set_defaults(func=cmd_kernel)

    pr = sub.add_parser("product", help="write the k-set product graph")
    pr.add_argument("--input", required=True)
    pr.add_argument("--k", type=int, required=True)
    pr.add_argument("--max-k", type=int, default=3)
    pr.add_argument("--out", required=True, help="output edge-list file")
    pr.set_defaults(func=cmd_product)

    s = sub.add_parser("simulate", help="exact GNN weights reproducing 1-WL")
    s.add_argument("--input", required=True)
    s.add_argument("--iters", type=int, default=None, help="default: number of nodes")
    s.add_argument("--activation", choices=("sign", "relu"), default="sign")
    s.add_argument("--construction", choices=("anchored", "concat"), default="anchored")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    gn = sub.add_parser("gnn", help="train a (hierarchical) GNN on a TUDataset directory")
    gn.add_argument("--dataset", required=True)
    gn.add_argument("--arch", choices=("1", "1-2", "1-2-3"), default="1")
    gn.add_argument("--epochs", type=int, default=100)
    gn.add_argument("--seed", type=int, default=0)
    gn.add_argument("--task", choices=("classify", "regress"), default="classify")
    gn.add_argument("--lr", type=float, default=1e-2)
    gn.add_argument("--hidden", type=int, default=64)
    gn.add_argument("--readout", choices=("sum", "mean"), default="mean")
    gn.add_argument("--batch-size", type=int, default=None, help="default: full batch")
    gn.add_argument("--out", required=True, help="output directory")
    gn.set_defaults(func=cmd_gnn)

    v = sub.add_parser("verify", help="run a seeded property suite")
    v.add_argument("--suite", choices=("thm1", "thm2", "relu", "prop3", "prop4", "dist2lu", "appendix"), required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--out", help="optional JSON report file")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, DomainError) as e:
        print(f"wlforge: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, FileNotFoundError, IsADirectoryError) as e:
        print(f"wlforge: format error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except TrainingError as e:
        print(f"wlforge: training failed: {e}", file=sys.stderr)
        return EXIT_PROPERTY


if __name__ == "__main__":
    sys.exit(main())

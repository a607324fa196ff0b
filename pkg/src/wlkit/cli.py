"""Command-line interface.

Every command prints one JSON report to stdout:

    {"schema_version": 1, "command": ..., "config": {...}, "seed": ...,
     "results": {...}, "wall_time_s": ...}

Verdicts are data, not failures: a "NonIsomorphic" answer still exits 0.
Exit codes: 0 success, 2 usage or I/O errors, 3 input over a size limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .data import (
    GENERATOR_FAMILIES,
    GenerationError,
    TuParseError,
    dataset_from_json,
    dataset_to_json,
    gen_wl_hard_pairs,
    parse_tu_dataset,
)
from .fractional import (
    TooLargeError,
    fractional_iso_feasible,
    is_compact,
    LP_SIZE_LIMIT,
    POLYTOPE_SIZE_LIMIT,
)
from .graphs import Graph, GraphError, graph_from_json
from .nn import ModelConfig, TrainConfig, metrics_to_csv, save_checkpoint, train
from .refinement import tinhofer_test, wl_pair_test

__all__ = ["main", "build_parser"]

DEFAULT_SEED = 0
DATA_DIR_ENV = "WLKIT_DATA_DIR"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TOO_LARGE = 3


def _load_graph(path: str) -> Graph:
    with open(path) as fh:
        doc = json.load(fh)
    return graph_from_json(doc)


def _load_dataset(spec: str, data_dir: str | None):
    """Dataset from a JSON file path, or "tu:NAME" parsed from the data dir.

    The data directory comes from --data-dir or the WLKIT_DATA_DIR variable,
    defaulting to the working directory.
    """
    if spec.startswith("tu:"):
        root = data_dir or os.environ.get(DATA_DIR_ENV, ".")
        return parse_tu_dataset(root, spec[3:])
    with open(spec) as fh:
        return dataset_from_json(json.load(fh))


def _cmd_wl(args: argparse.Namespace) -> tuple[dict, dict, int | None]:
    verdict = wl_pair_test(_load_graph(args.graph_a), _load_graph(args.graph_b))
    results = {"outcome": verdict.outcome, "rounds": verdict.rounds}
    return results, {"graph_a": args.graph_a, "graph_b": args.graph_b}, None


def _cmd_tinhofer(args: argparse.Namespace) -> tuple[dict, dict, int | None]:
    verdict = tinhofer_test(_load_graph(args.graph_a), _load_graph(args.graph_b))
    results = {
        "outcome": verdict.outcome,
        "rounds": verdict.rounds,
        "certificate": list(verdict.certificate.mapping) if verdict.certificate else None,
        "recolor_trace": [
            [rnd, cls, [v, u]] for rnd, cls, (v, u) in verdict.recolor_trace
        ],
    }
    return results, {"graph_a": args.graph_a, "graph_b": args.graph_b}, None


def _cmd_fraciso(args: argparse.Namespace) -> tuple[dict, dict, int | None]:
    feasible, witness = fractional_iso_feasible(
        _load_graph(args.graph_a), _load_graph(args.graph_b), size_limit=args.limit
    )
    results = {
        "feasible": feasible,
        "witness": witness.to_json() if witness is not None else None,
    }
    config = {"graph_a": args.graph_a, "graph_b": args.graph_b, "limit": args.limit}
    return results, config, None


def _cmd_compact(args: argparse.Namespace) -> tuple[dict, dict, int | None]:
    report = is_compact(_load_graph(args.graph), n_limit=args.limit)
    if report.status == "TooLarge":
        raise TooLargeError(
            f"graph exceeds the compactness limit n <= {args.limit} "
            "(or is beyond the enumeration reach at this size)"
        )
    results = {
        "status": report.status,
        "automorphism_count": report.automorphism_count,
        "witness": report.witness.to_json() if report.witness is not None else None,
    }
    return results, {"graph": args.graph, "limit": args.limit}, None


def _cmd_gen(args: argparse.Namespace) -> tuple[dict, dict, int | None]:
    dataset = gen_wl_hard_pairs(
        args.family,
        m=args.m,
        n=args.n,
        degree=args.degree,
        count=args.count,
        seed=args.seed,
    )
    out = Path(args.out)
    out.write_text(json.dumps(dataset_to_json(dataset)) + "\n")
    results = {
        "path": str(out),
        "count": len(dataset),
        "num_classes": dataset.num_classes,
    }
    config = {
        "family": args.family,
        "m": args.m,
        "n": args.n,
        "degree": args.degree,
        "count": args.count,
        "out": str(out),
    }
    return results, config, args.seed


def _effective_layout(layout: str, recolor: str) -> str:
    if recolor == "none":
        layout = layout.replace("r", "")
    if not layout or set(layout) - {"g", "r"} or "g" not in layout:
        raise ValueError(f"invalid layout {layout!r}: need a g/r string with a g layer")
    return layout


def _cmd_train(args: argparse.Namespace) -> tuple[dict, dict, int | None]:
    dataset = _load_dataset(args.data, args.data_dir)
    layout = _effective_layout(args.layout, args.recolor)
    cfg = ModelConfig(
        layout=layout,
        hidden_dim=args.hidden,
        num_classes=dataset.num_classes,
        recolor_fraction=args.recolor if args.recolor != "none" else "single",
    )
    tcfg = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        lr_decay=args.lr_decay,
        lr_period=args.lr_period,
        seed=args.seed,
        batch_size=args.batch_size,
    )
    result = train(dataset, cfg, tcfg)
    if args.metrics:
        Path(args.metrics).write_text(metrics_to_csv(result.metrics))
    if args.save_model:
        save_checkpoint(args.save_model, cfg, result.params)
    last = result.metrics[-1]
    results = {
        "final_accuracy": last[2],
        "final_loss": last[1],
        "epochs": last[0],
        "metrics_path": args.metrics,
        "model_path": args.save_model,
    }
    config = {
        "data": args.data,
        "layout": layout,
        "hidden": args.hidden,
        "epochs": args.epochs,
        "recolor": args.recolor,
        "lr": args.lr,
        "lr_decay": args.lr_decay,
        "lr_period": args.lr_period,
        "batch_size": args.batch_size,
    }
    return results, config, args.seed


def _cmd_serve(args: argparse.Namespace) -> tuple[dict, dict, int | None]:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return {"stopped": True}, {"host": args.host, "port": args.port}, None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wlkit",
        description="Color refinement, isomorphism tests, compactness, and "
        "recoloring-GNN training",
    )
    parser.add_argument("--version", action="version", version=f"wlkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wl", help="refinement pair test on two graph files")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.set_defaults(handler=_cmd_wl)

    p = sub.add_parser("tinhofer", help="individualization-refinement test")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.set_defaults(handler=_cmd_tinhofer)

    p = sub.add_parser("fraciso", help="doubly stochastic commuting feasibility")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.add_argument("--limit", type=int, default=LP_SIZE_LIMIT)
    p.set_defaults(handler=_cmd_fraciso)

    p = sub.add_parser("compact", help="compactness check with witness")
    p.add_argument("graph")
    p.add_argument("--limit", type=int, default=POLYTOPE_SIZE_LIMIT)
    p.set_defaults(handler=_cmd_compact)

    p = sub.add_parser("gen", help="generate a synthetic benchmark dataset")
    p.add_argument("--family", required=True, choices=GENERATOR_FAMILIES)
    p.add_argument("--m", type=int, default=3, help="cycle half-length")
    p.add_argument("--n", type=int, default=8, help="random-regular node count")
    p.add_argument("--degree", type=int, default=3, help="random-regular degree")
    p.add_argument("--count", type=int, default=40)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("train", help="train a model on a dataset")
    p.add_argument(
        "--data",
        required=True,
        help="dataset JSON path, or tu:NAME for benchmark files in the data dir",
    )
    p.add_argument(
        "--data-dir",
        default=None,
        help=f"directory for tu: datasets (default ${DATA_DIR_ENV} or .)",
    )
    p.add_argument("--layout", default="gggrgg")
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--recolor", choices=("none", "single", "half"), default="single")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--lr-decay", type=float, default=0.1**0.5)
    p.add_argument("--lr-period", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--metrics", help="path for the per-epoch CSV")
    p.add_argument("--save-model", help="path for a JSON model checkpoint")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        results, config, seed = args.handler(args)
    except TooLargeError as exc:
        print(f"wlkit: too large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (GraphError, TuParseError, GenerationError, ValueError, OSError) as exc:
        print(f"wlkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"wlkit: error: invalid JSON input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {
        "schema_version": 1,
        "command": args.command,
        "config": config,
        "seed": seed,
        "results": results,
        "wall_time_s": round(time.perf_counter() - start, 6),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line shell around the library.

Five subcommands cover the operational lifecycle: ``ingest`` parses the
source files into an evidence pool, ``index`` builds the BM25 index,
``train-rerank`` fits the GNN re-ranker, ``ask`` answers one question and
``eval`` runs a benchmark. Every command is deterministic given its inputs,
flags and ``--seed``. Failures exit nonzero and print one JSON error line
with a machine-readable category to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import core
from .clients import HttpSiModelClient, TransportError
from .eval import read_benchmark, run_benchmark, write_report
from .ingest import build_pool, read_kg_facts, read_tables, read_text_docs
from .pipeline import EngineConfig, Pipeline, train_rerank_models
from .rerank import RerankSchedule, load_checkpoint, save_checkpoint
from .retrieval import bm25_build, load_index, save_index

EXIT_CODES = {"parse": 3, "io": 4, "config": 5, "transport": 6, "internal": 1}


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


def _fail(category: str, message: str) -> "CliError":
    return CliError(category, message)


def _load_config(args: argparse.Namespace) -> EngineConfig:
    if getattr(args, "config", None):
        try:
            config = EngineConfig.from_file(args.config)
        except FileNotFoundError as exc:
            raise _fail("io", str(exc)) from exc
        except (ValueError, TypeError) as exc:
            raise _fail("config", str(exc)) from exc
    else:
        config = EngineConfig()
    config = config.with_env_overrides()
    overrides = {}
    if getattr(args, "pool_p", None):
        overrides["pool_p"] = args.pool_p
    if overrides:
        config = dataclasses.replace(
            config, retrieval=dataclasses.replace(config.retrieval, **overrides)
        )
    if getattr(args, "topk_final", None):
        stages = list(config.rerank.schedule.stages)
        if not stages:
            raise _fail("config", "--topk-final requires a schedule with at least one stage")
        input_k, _ = stages[-1]
        stages[-1] = (input_k, args.topk_final)
        schedule = RerankSchedule(
            stages=tuple(stages),
            evidence_cap=config.rerank.schedule.evidence_cap,
            entity_cap=config.rerank.schedule.entity_cap,
        )
        config = dataclasses.replace(
            config, rerank=dataclasses.replace(config.rerank, schedule=schedule)
        )
    return config


def _build_pipeline(args: argparse.Namespace, config: EngineConfig) -> Pipeline:
    for flag in ("catalog", "pool", "index"):
        if not Path(getattr(args, flag)).exists():
            raise _fail("io", f"missing {flag} file: {getattr(args, flag)}")
    try:
        catalog = core.read_catalog(args.catalog)
        pool = core.read_pool(args.pool)
        index = load_index(args.index)
    except ValueError as exc:
        raise _fail("parse", str(exc)) from exc
    models = None
    if args.rf == "gnn":
        if not getattr(args, "model", None):
            raise _fail("config", "--rf gnn requires --model <checkpoint>")
        try:
            models = load_checkpoint(args.model)
        except FileNotFoundError as exc:
            raise _fail("io", str(exc)) from exc
        except ValueError as exc:
            raise _fail("parse", str(exc)) from exc
    si_client = None
    if config.qu.si_model_url:
        si_client = HttpSiModelClient(config.qu.si_model_url, config.qu.si_timeout_ms)
    try:
        return Pipeline(
            catalog=catalog,
            pool=pool,
            index=index,
            config=config,
            rf_mode=args.rf,
            gnn_models=models,
            generator_mode=args.generator,
            si_client=si_client,
        )
    except ValueError as exc:
        raise _fail("config", str(exc)) from exc


def cmd_ingest(args: argparse.Namespace) -> int:
    try:
        catalog = core.read_catalog(args.catalog)
        facts = read_kg_facts(args.kg) if args.kg else []
        tables = read_tables(args.tables) if args.tables else []
        docs = read_text_docs(args.text) if args.text else []
    except FileNotFoundError as exc:
        raise _fail("io", str(exc)) from exc
    except ValueError as exc:
        raise _fail("parse", str(exc)) from exc
    try:
        pool = build_pool(catalog, facts, tables, docs)
    except (KeyError, ValueError) as exc:
        raise _fail("parse", f"verbalization failed: {exc}") from exc
    core.write_pool(args.out_pool, pool)
    core.write_catalog(args.out_catalog, catalog)
    by_source: dict[str, int] = {}
    for piece in pool:
        by_source[piece.source.value] = by_source.get(piece.source.value, 0) + 1
    print(f"catalog entities: {len(catalog)}")
    print(f"evidence pieces: {len(pool)} ({json.dumps(by_source, sort_keys=True)})")
    if not pool:
        print("warning: evidence pool is empty", file=sys.stderr)
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    try:
        pool = core.read_pool(args.pool)
    except FileNotFoundError as exc:
        raise _fail("io", str(exc)) from exc
    except ValueError as exc:
        raise _fail("parse", str(exc)) from exc
    if not pool:
        raise _fail("config", f"pool {args.pool} is empty; nothing to index")
    index = bm25_build(pool)
    save_index(index, args.out)
    print(f"indexed {index.doc_count} pieces, {len(index.postings)} terms -> {args.out}")
    return 0


def cmd_ask(args: argparse.Namespace) -> int:
    config = _load_config(args)
    pipeline = _build_pipeline(args, config)
    try:
        question = core.Question(id="cli", text=args.question)
    except ValueError as exc:
        raise _fail("config", str(exc)) from exc
    try:
        result = pipeline.answer(question)
    except TransportError as exc:
        raise _fail("transport", str(exc)) from exc
    print(f"answer: {result.answer}")
    print(f"refrained: {str(core.is_unknown(result.answer)).lower()}")
    support = set(result.supporting_evidence)
    print(f"evidence ({len(result.prompt_evidence)} pieces):")
    for rank, piece in enumerate(result.prompt_evidence, start=1):
        marker = "*" if piece.id in support else " "
        print(f" {marker}{rank:3d}. [{piece.provenance}] {piece.text}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config(args)
    pipeline = _build_pipeline(args, config)
    if not Path(args.benchmark).exists():
        raise _fail("io", f"missing benchmark file: {args.benchmark}")
    try:
        questions = read_benchmark(args.benchmark)
    except ValueError as exc:
        raise _fail("parse", str(exc)) from exc
    ks = args.k if args.k else config.eval.ks
    report = run_benchmark(pipeline, questions, ks=ks, catalog=pipeline.catalog, jobs=args.jobs)
    write_report(report, args.out_report, args.out_table)
    print(report.render_table())
    print(f"report records -> {args.out_report}")
    if args.out_table:
        print(f"report table -> {args.out_table}")
    return 0


def cmd_train_rerank(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if args.epochs is not None:
        config = dataclasses.replace(
            config,
            rerank=dataclasses.replace(
                config.rerank, gnn=dataclasses.replace(config.rerank.gnn, epochs=args.epochs)
            ),
        )
    pipeline = _build_pipeline(args, config)
    for flag in ("train", "dev"):
        if not Path(getattr(args, flag)).exists():
            raise _fail("io", f"missing {flag} benchmark: {getattr(args, flag)}")
    try:
        train_questions = read_benchmark(args.train)
        dev_questions = read_benchmark(args.dev)
    except ValueError as exc:
        raise _fail("parse", str(exc)) from exc
    try:
        models, histories = train_rerank_models(pipeline, train_questions, dev_questions, args.seed)
    except ValueError as exc:
        raise _fail("config", str(exc)) from exc
    save_checkpoint(models, args.out)
    for stage, history in enumerate(histories, start=1):
        formatted = ", ".join(f"{m:.3f}" for m in history) or "none (0 epochs)"
        print(f"stage {stage} dev AP@30 by epoch: {formatted}")
    print(f"checkpoint -> {args.out}")
    return 0


def _int_list(raw: str) -> list[int]:
    try:
        return [int(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {raw!r}") from exc


def _add_pipeline_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--catalog", required=True, help="entity catalog file")
    sub.add_argument("--pool", required=True, help="evidence pool file")
    sub.add_argument("--index", required=True, help="BM25 index file")
    sub.add_argument("--config", help="engine config file (JSON)")
    sub.add_argument("--seed", type=int, default=0, help="random seed")
    sub.add_argument("--generator", choices=["oracle", "remote"], default="oracle",
                     help="answer generator backend")
    sub.add_argument("--rf", choices=["gnn", "ce", "bm25"], default="ce",
                     help="re-ranking strategy")
    sub.add_argument("--model", help="GNN checkpoint (required for --rf gnn)")
    sub.add_argument("--pool-p", type=int, dest="pool_p", help="retrieval pool size cap")
    sub.add_argument("--topk-final", type=int, dest="topk_final",
                     help="override the final stage's output size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heteroqa",
        description="Retrieval-augmented QA over KG facts, tables and text.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    ingest = commands.add_parser("ingest", help="verbalize source files into an evidence pool")
    ingest.add_argument("--catalog", required=True, help="entity catalog file")
    ingest.add_argument("--kg", help="KG facts file")
    ingest.add_argument("--tables", help="tables file")
    ingest.add_argument("--text", help="text documents file")
    ingest.add_argument("--out-pool", required=True, help="output evidence pool file")
    ingest.add_argument("--out-catalog", required=True, help="output catalog file")
    ingest.set_defaults(func=cmd_ingest)

    index = commands.add_parser("index", help="build the BM25 index over a pool")
    index.add_argument("--pool", required=True)
    index.add_argument("--out", required=True, help="output index file")
    index.set_defaults(func=cmd_index)

    ask = commands.add_parser("ask", help="answer a single question")
    ask.add_argument("question", help="question text")
    _add_pipeline_flags(ask)
    ask.set_defaults(func=cmd_ask)

    evaluate = commands.add_parser("eval", help="run a benchmark and write a report")
    evaluate.add_argument("--benchmark", required=True, help="benchmark file")
    evaluate.add_argument("--out-report", required=True, help="output report records file")
    evaluate.add_argument("--out-table", help="output plain-text table file")
    evaluate.add_argument("--k", type=_int_list, help="comma-separated AP/MRR depths")
    evaluate.add_argument("--jobs", type=int, default=1, help="parallel workers")
    _add_pipeline_flags(evaluate)
    evaluate.set_defaults(func=cmd_eval)

    train = commands.add_parser("train-rerank", help="train the GNN re-ranker")
    train.add_argument("--train", required=True, help="training benchmark file")
    train.add_argument("--dev", required=True, help="dev benchmark file")
    train.add_argument("--out", required=True, help="output checkpoint file")
    train.add_argument("--epochs", type=int, help="override training epochs")
    _add_pipeline_flags(train)
    train.set_defaults(func=cmd_train_rerank)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print("error: " + json.dumps({"category": exc.category, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except TransportError as exc:
        print("error: " + json.dumps({"category": "transport", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_CODES["transport"]


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end pipeline assembly and the engine configuration.

A :class:`Pipeline` owns the loaded catalog, evidence pool and BM25 index and
runs question understanding, retrieval, re-ranking and answer generation for
one question at a time. Configuration is a JSON file with one section per
stage; endpoint URLs may be overridden through the ``QUASAR_GENERATOR_URL``,
``QUASAR_SCORER_URL_1`` and ``QUASAR_SCORER_URL_2`` environment variables.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .answer import (
    GeneratorClient,
    GeneratorRequest,
    attach_support,
    build_prompt,
    extractive_oracle_generate,
    generate,
)
from .clients import (
    HttpCeClient,
    HttpGeneratorClient,
    HttpSiModelClient,
    TransportError,
)
from .core import (
    EntityCatalog,
    EvidencePiece,
    Question,
    StructuredIntent,
    UNKNOWN_ANSWER,
    si_concat,
)
from .eval import PipelineResult
from .qu import SiModelClient, generate_si_model, generate_si_rules
from .rerank import (
    Bm25Scorer,
    CeScorer,
    GnnModel,
    GnnScorer,
    RerankSchedule,
    Scorer,
    TrainingGraph,
    build_graph,
    encode_nodes,
    gnn_train,
    run_schedule,
    weak_label,
)
from .retrieval import Bm25Index, RetrievalConfig, retrieve

logger = logging.getLogger(__name__)

ENV_GENERATOR_URL = "QUASAR_GENERATOR_URL"
ENV_SCORER_URL_1 = "QUASAR_SCORER_URL_1"
ENV_SCORER_URL_2 = "QUASAR_SCORER_URL_2"


@dataclass(frozen=True)
class GnnConfig:
    layer_count: int = 3
    dim: int = 64
    learning_rate: float = 0.01
    epochs: int = 5
    train_evidence_cap: int = 100
    train_entity_cap: int = 400


@dataclass(frozen=True)
class RerankConfig:
    schedule: RerankSchedule = RerankSchedule()
    gnn: GnnConfig = GnnConfig()
    scorer_urls: tuple[str | None, str | None] = (None, None)
    scorer_timeout_ms: int = 10_000


@dataclass(frozen=True)
class AnswerConfig:
    max_answer_tokens: int = 32
    generator_url: str | None = None
    generator_timeout_ms: int = 30_000
    oracle_fallback: bool = True


@dataclass(frozen=True)
class QuConfig:
    si_model_url: str | None = None
    si_timeout_ms: int = 10_000


@dataclass(frozen=True)
class EvalConfig:
    ks: tuple[int, ...] = (30, 100, 1000)


@dataclass(frozen=True)
class EngineConfig:
    retrieval: RetrievalConfig = RetrievalConfig()
    rerank: RerankConfig = RerankConfig()
    answer: AnswerConfig = AnswerConfig()
    qu: QuConfig = QuConfig()
    eval: EvalConfig = EvalConfig()

    @classmethod
    def from_dict(cls, raw: dict) -> "EngineConfig":
        retrieval = RetrievalConfig(**raw.get("retrieval", {}))
        rr = dict(raw.get("rerank", {}))
        schedule = RerankSchedule(
            stages=tuple(tuple(s) for s in rr.pop("stages", RerankSchedule().stages)),
            evidence_cap=rr.pop("evidence_cap", 1000),
            entity_cap=rr.pop("entity_cap", 4000),
        )
        gnn = GnnConfig(**rr.pop("gnn", {}))
        urls = list(rr.pop("scorer_urls", ()) or ())
        rerank = RerankConfig(
            schedule=schedule,
            gnn=gnn,
            scorer_urls=tuple((urls + [None, None])[:2]),
            **rr,
        )
        answer = AnswerConfig(**raw.get("answer", {}))
        qu = QuConfig(**raw.get("qu", {}))
        ev = dict(raw.get("eval", {}))
        if "ks" in ev:
            ev["ks"] = tuple(int(k) for k in ev["ks"])
        return cls(retrieval=retrieval, rerank=rerank, answer=answer, qu=qu, eval=EvalConfig(**ev))

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: malformed config: {exc}") from exc
        return cls.from_dict(raw)

    def with_env_overrides(self) -> "EngineConfig":
        """Apply endpoint environment variables on top of the file values."""
        from dataclasses import replace

        answer = self.answer
        gen_url = os.environ.get(ENV_GENERATOR_URL)
        if gen_url:
            answer = replace(answer, generator_url=gen_url)
        urls = list(self.rerank.scorer_urls)
        for i, env in enumerate((ENV_SCORER_URL_1, ENV_SCORER_URL_2)):
            override = os.environ.get(env)
            if override:
                urls[i] = override
        rerank = RerankConfig(
            schedule=self.rerank.schedule,
            gnn=self.rerank.gnn,
            scorer_urls=(urls[0], urls[1]),
            scorer_timeout_ms=self.rerank.scorer_timeout_ms,
        )
        return replace(self, answer=answer, rerank=rerank)


class _StageOffsetScorer:
    """Presents a later stage of a composite schedule to a shared scorer."""

    def __init__(self, inner: Scorer, offset: int):
        self._inner = inner
        self._offset = offset

    def score_pool(self, pieces: Sequence[EvidencePiece], stage: int) -> list[float]:
        return self._inner.score_pool(pieces, stage + self._offset)


@dataclass
class Pipeline:
    """The four QA stages wired together over loaded artifacts."""

    catalog: EntityCatalog
    pool: list[EvidencePiece]
    index: Bm25Index
    config: EngineConfig = field(default_factory=EngineConfig)
    rf_mode: str = "ce"  # gnn | ce | bm25
    gnn_models: list[GnnModel] | None = None
    generator_mode: str = "oracle"  # oracle | remote
    si_client: SiModelClient | None = None
    generator_client: GeneratorClient | None = None

    def __post_init__(self) -> None:
        if self.rf_mode not in ("gnn", "ce", "bm25"):
            raise ValueError(f"unknown rf mode: {self.rf_mode!r}")
        if self.rf_mode == "gnn" and not self.gnn_models:
            raise ValueError("rf mode 'gnn' requires trained models (see train-rerank)")
        if self.generator_mode not in ("oracle", "remote"):
            raise ValueError(f"unknown generator mode: {self.generator_mode!r}")
        if self.generator_mode == "remote" and self.generator_client is None:
            url = self.config.answer.generator_url
            if not url:
                raise ValueError("remote generator requires answer.generator_url or "
                                 f"{ENV_GENERATOR_URL}")
            self.generator_client = HttpGeneratorClient(url, self.config.answer.generator_timeout_ms)

    def understand(self, question: Question) -> StructuredIntent:
        if self.si_client is not None:
            return generate_si_model(question, self.si_client, self.catalog)
        return generate_si_rules(question, self.catalog)

    def _scorer(self, si: StructuredIntent, fallback: str) -> Scorer:
        if self.rf_mode == "bm25":
            return Bm25Scorer()
        if self.rf_mode == "gnn":
            assert self.gnn_models is not None
            return GnnScorer(
                self.gnn_models, si, self.catalog, self.config.rerank.schedule, fallback
            )
        clients = [
            HttpCeClient(url, self.config.rerank.scorer_timeout_ms) if url else None
            for url in self.config.rerank.scorer_urls
        ]
        return CeScorer(si, clients, fallback)

    def rerank_stages(
        self, ranked_pool: Sequence[EvidencePiece], si: StructuredIntent, fallback: str
    ) -> list[list[EvidencePiece]]:
        """Run the schedule stage by stage, returning each stage's survivors."""
        scorer = self._scorer(si, fallback)
        schedule = self.config.rerank.schedule
        snapshots: list[list[EvidencePiece]] = []
        survivors = list(ranked_pool)
        for stage_idx, (input_k, output_k) in enumerate(schedule.stages):
            stage_schedule = RerankSchedule(
                stages=((input_k, output_k),),
                evidence_cap=schedule.evidence_cap,
                entity_cap=schedule.entity_cap,
            )
            survivors = run_schedule(survivors, stage_schedule, _StageOffsetScorer(scorer, stage_idx))
            snapshots.append(survivors)
        return snapshots

    def answer(self, question: Question) -> PipelineResult:
        si = self.understand(question)
        er_pool = retrieve(
            question, si, self.index, self.pool, self.catalog, self.config.retrieval
        )
        if not er_pool:
            return PipelineResult(
                answer=UNKNOWN_ANSWER,
                supporting_evidence=(),
                prompt_evidence=(),
                rankings=(("er", ()),),
            )
        snapshots = self.rerank_stages(er_pool, si, question.text)
        final = snapshots[-1] if snapshots else er_pool
        answer_text = self._generate(question, si, final)
        result = attach_support(answer_text, final, self.catalog)
        rankings = [(f"rf:{len(s)}", tuple(s)) for s in reversed(snapshots)]
        rankings.append(("er", tuple(er_pool)))
        return PipelineResult(
            answer=result.answer,
            supporting_evidence=result.supporting_evidence,
            prompt_evidence=tuple(final),
            rankings=tuple(rankings),
        )

    def _generate(
        self, question: Question, si: StructuredIntent, evidence: Sequence[EvidencePiece]
    ) -> str:
        if self.generator_mode == "oracle":
            return extractive_oracle_generate(si, evidence, self.catalog)
        prompt = build_prompt(si, evidence, question.text)
        request = GeneratorRequest(prompt, self.config.answer.max_answer_tokens)
        assert self.generator_client is not None
        try:
            return generate(self.generator_client, request)
        except TransportError as exc:
            if not self.config.answer.oracle_fallback:
                raise
            logger.warning("generator unreachable (%s); falling back to extractive answer", exc)
            return extractive_oracle_generate(si, evidence, self.catalog)


def build_training_dataset(
    pipeline: Pipeline,
    questions: Sequence[Question],
    pools: dict[str, list[EvidencePiece]] | None = None,
) -> tuple[list[TrainingGraph], dict[str, StructuredIntent]]:
    """Weakly labeled training graphs for one schedule stage.

    ``pools`` overrides the retrieval pool per question id (used to train
    later stages on the previous stage's output). Questions without gold
    answers or without any retrievable evidence are skipped.
    """
    cfg = pipeline.config.rerank.gnn
    dataset: list[TrainingGraph] = []
    intents: dict[str, StructuredIntent] = {}
    for q in questions:
        if not q.gold_answers:
            logger.warning("question %s has no gold answers; skipped for training", q.id)
            continue
        si = pipeline.understand(q)
        intents[q.id] = si
        if pools is not None:
            ranked = pools.get(q.id, [])
        else:
            ranked = retrieve(q, si, pipeline.index, pipeline.pool, pipeline.catalog,
                              pipeline.config.retrieval)
        if not ranked:
            continue
        graph = build_graph(ranked, cfg.train_evidence_cap, cfg.train_entity_cap)
        enc = encode_nodes(graph, si, ranked, pipeline.catalog, cfg.dim, q.text)
        labels = weak_label(ranked, q.gold_answers, pipeline.catalog)
        dataset.append(TrainingGraph(graph=graph, encodings=enc, labels=labels))
    return dataset, intents


def train_rerank_models(
    pipeline: Pipeline,
    train_questions: Sequence[Question],
    dev_questions: Sequence[Question],
    seed: int = 0,
) -> tuple[list[GnnModel], list[list[float]]]:
    """Train one GNN per schedule stage.

    Stage 1 trains on the BM25-ranked retrieval pools; each later stage
    trains on the pools produced by re-ranking with the previous stage's
    model. Returns the stage models and their per-epoch dev metrics.
    """
    cfg = pipeline.config.rerank
    models: list[GnnModel] = []
    histories: list[list[float]] = []
    train_pools: dict[str, list[EvidencePiece]] | None = None
    dev_pools: dict[str, list[EvidencePiece]] | None = None

    def stage_pools(
        questions: Sequence[Question],
        current: dict[str, list[EvidencePiece]] | None,
        model: GnnModel,
        stage_idx: int,
        intents: dict[str, StructuredIntent],
    ) -> dict[str, list[EvidencePiece]]:
        input_k, output_k = cfg.schedule.stages[stage_idx]
        advanced = {}
        for q in questions:
            if q.id not in intents:
                continue
            if current is not None:
                ranked = current.get(q.id, [])
            else:
                ranked = retrieve(q, intents[q.id], pipeline.index, pipeline.pool,
                                  pipeline.catalog, pipeline.config.retrieval)
            if not ranked:
                continue
            scorer = GnnScorer([model], intents[q.id], pipeline.catalog, cfg.schedule, q.text)
            stage_schedule = RerankSchedule(
                stages=((input_k, output_k),),
                evidence_cap=cfg.schedule.evidence_cap,
                entity_cap=cfg.schedule.entity_cap,
            )
            advanced[q.id] = run_schedule(ranked, stage_schedule, scorer)
        return advanced

    for stage_idx in range(len(cfg.schedule.stages)):
        train_ds, train_si = build_training_dataset(pipeline, train_questions, train_pools)
        dev_ds, dev_si = build_training_dataset(pipeline, dev_questions, dev_pools)
        if not train_ds:
            raise ValueError("no usable training graphs (missing gold answers or evidence)")
        model = GnnModel.create(cfg.gnn.layer_count, cfg.gnn.dim, seed + stage_idx)
        model, history = gnn_train(
            model,
            train_ds,
            epochs=cfg.gnn.epochs,
            dev=dev_ds or None,
            learning_rate=cfg.gnn.learning_rate,
        )
        models.append(model)
        histories.append(history)
        if stage_idx + 1 < len(cfg.schedule.stages):
            train_pools = stage_pools(train_questions, train_pools, model, stage_idx, train_si)
            dev_pools = stage_pools(dev_questions, dev_pools, model, stage_idx, dev_si)
    return models, histories

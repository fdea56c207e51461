"""heteroqa: retrieval-augmented QA over KG facts, tables and text.

The pipeline runs four stages per question: question understanding into a
structured intent, BM25 retrieval over verbalized evidence, staged
re-ranking (GNN or cross-encoder), and answer generation with supporting
evidence attached.
"""

from .core import (
    AnswerResult,
    Entity,
    EntityCatalog,
    EvidencePiece,
    Question,
    SourceType,
    StructuredIntent,
    UNKNOWN_ANSWER,
    si_concat,
)
from .ingest import (
    KgFact,
    TableDoc,
    TextDoc,
    build_pool,
    extract_entity_mentions,
    verbalize_kg,
    verbalize_table_row,
    verbalize_text_sentence,
)
from .qu import generate_si_model, generate_si_rules, parse_tagged_si, si_to_tagged
from .retrieval import (
    Bm25Index,
    RetrievalConfig,
    anchor_entities,
    bm25_build,
    bm25_search,
    retrieve,
    scope_evidence,
)
from .rerank import (
    BipartiteGraph,
    GnnModel,
    RerankSchedule,
    WeakLabels,
    build_graph,
    ce_score,
    encode_nodes,
    gnn_forward,
    gnn_train,
    run_schedule,
    weak_label,
)
from .answer import (
    GeneratorRequest,
    TrainingRecord,
    attach_support,
    build_prompt,
    extractive_oracle_generate,
    faithful_transform,
    generate,
)
from .eval import (
    EvalReport,
    answer_presence,
    mrr_at_k,
    normalize_answer,
    p_at_1,
    refrain_metrics,
    run_benchmark,
)
from .pipeline import EngineConfig, Pipeline, train_rerank_models

__version__ = "0.1.0"

__all__ = [
    "AnswerResult",
    "Bm25Index",
    "BipartiteGraph",
    "EngineConfig",
    "Entity",
    "EntityCatalog",
    "EvalReport",
    "EvidencePiece",
    "GeneratorRequest",
    "GnnModel",
    "KgFact",
    "Pipeline",
    "Question",
    "RerankSchedule",
    "RetrievalConfig",
    "SourceType",
    "StructuredIntent",
    "TableDoc",
    "TextDoc",
    "TrainingRecord",
    "UNKNOWN_ANSWER",
    "WeakLabels",
    "anchor_entities",
    "answer_presence",
    "attach_support",
    "bm25_build",
    "bm25_search",
    "build_graph",
    "build_pool",
    "build_prompt",
    "ce_score",
    "encode_nodes",
    "extract_entity_mentions",
    "extractive_oracle_generate",
    "faithful_transform",
    "generate",
    "generate_si_model",
    "generate_si_rules",
    "gnn_forward",
    "gnn_train",
    "mrr_at_k",
    "normalize_answer",
    "p_at_1",
    "parse_tagged_si",
    "refrain_metrics",
    "retrieve",
    "run_benchmark",
    "run_schedule",
    "scope_evidence",
    "si_concat",
    "si_to_tagged",
    "train_rerank_models",
    "verbalize_kg",
    "verbalize_table_row",
    "verbalize_text_sentence",
    "weak_label",
]

"""Answer generation: prompt assembly, generator clients, faithful targets.

The prompt is a single line: ``SI: <concatenated intent> Evidence: <pieces
joined by " | ">`` with no instruction text. Besides the remote generator, a
deterministic extractive stand-in is provided so the whole pipeline runs
offline: it answers with the best-supported entity that is not already part
of the question.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol, Sequence

from .core import (
    AnswerResult,
    EntityCatalog,
    EvidencePiece,
    StructuredIntent,
    UNKNOWN_ANSWER,
    is_unknown,
    si_concat,
    write_jsonl,
)
from .eval import normalize_answer, piece_matches_gold


@dataclass(frozen=True)
class GeneratorRequest:
    prompt: str
    max_answer_tokens: int = 32

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be non-empty")


class GeneratorClient(Protocol):
    """Wire contract for an external answer generator."""

    def generate(self, prompt: str, max_tokens: int) -> str: ...


def build_prompt(si: StructuredIntent, evidence: Sequence[EvidencePiece], fallback: str = "") -> str:
    """Single-line prompt over the intent and the rank-ordered evidence."""
    joined = " | ".join(p.text for p in evidence)
    return f"SI: {si_concat(si, fallback)} Evidence: {joined}"


def generate(client: GeneratorClient, request: GeneratorRequest) -> str:
    """Ask the remote generator; the first reply line is the answer.

    An empty reply is treated as a refusal. Transport errors propagate.
    """
    reply = client.generate(request.prompt, request.max_answer_tokens)
    first_line = reply.strip().splitlines()[0].strip() if reply.strip() else ""
    return first_line if first_line else UNKNOWN_ANSWER


def _question_entity_ids(si: StructuredIntent, catalog: EntityCatalog) -> set[str]:
    ids = set()
    for surface in si.entities:
        ent = catalog.by_name(surface)
        if ent is not None:
            ids.add(ent.id)
    return ids


def extractive_oracle_generate(
    si: StructuredIntent,
    evidence: Sequence[EvidencePiece],
    catalog: EntityCatalog,
) -> str:
    """Deterministic offline generator.

    Candidate answers are the entities mentioned in the evidence minus the
    question's own entities; the winner has the largest sum of scores over
    the pieces mentioning it, with ties going to the candidate seen at the
    best rank, then the smaller id. Returns the refusal sentinel when no
    candidate exists.
    """
    question_ids = _question_entity_ids(si, catalog)
    total: dict[str, float] = {}
    best_rank: dict[str, int] = {}
    for rank, piece in enumerate(evidence):
        for eid in piece.entity_ids:
            if eid in question_ids or eid not in catalog:
                continue
            total[eid] = total.get(eid, 0.0) + piece.score
            best_rank.setdefault(eid, rank)
    if not total:
        return UNKNOWN_ANSWER
    winner = min(total, key=lambda eid: (-total[eid], best_rank[eid], eid))
    return catalog.require(winner).label


@dataclass(frozen=True)
class TrainingRecord:
    """One generator fine-tuning example."""

    question_id: str
    si: StructuredIntent
    evidence: tuple[EvidencePiece, ...]
    target_answer: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "evidence", tuple(self.evidence))


def answer_in_evidence(
    evidence: Sequence[EvidencePiece],
    golds: Sequence[str],
    catalog: EntityCatalog | None = None,
) -> bool:
    return any(piece_matches_gold(p, golds, catalog) for p in evidence)


def faithful_transform(
    record: TrainingRecord,
    golds: Sequence[str],
    catalog: EntityCatalog | None = None,
) -> TrainingRecord:
    """Overwrite the target with the refusal sentinel when the evidence
    cannot support it; idempotent, alias-aware."""
    if answer_in_evidence(record.evidence, golds, catalog):
        return record
    return replace(record, target_answer=UNKNOWN_ANSWER)


def attach_support(
    answer: str,
    evidence: Sequence[EvidencePiece],
    catalog: EntityCatalog | None = None,
) -> AnswerResult:
    """Ground the answer: ids of the pieces that contain it.

    A piece supports the answer when its normalized text contains the
    normalized answer token-aligned, or any catalog alias of the answer
    entity. Refusals carry no support by definition.
    """
    if is_unknown(answer):
        return AnswerResult(
            answer=answer, supporting_evidence=(), prompt_evidence_count=len(evidence)
        )
    supporting = tuple(
        p.id for p in evidence if piece_matches_gold(p, [answer], catalog)
    )
    return AnswerResult(
        answer=answer,
        supporting_evidence=supporting,
        prompt_evidence_count=len(evidence),
    )


def export_training_records(
    records: Sequence[TrainingRecord],
    path: str | Path,
    fallbacks: dict[str, str] | None = None,
) -> int:
    """Write {prompt, target} pairs, one JSON object per line.

    ``fallbacks`` optionally maps question ids to raw question text used when
    a record's intent is empty.
    """
    fallbacks = fallbacks or {}
    return write_jsonl(
        path,
        (
            {
                "prompt": build_prompt(r.si, r.evidence, fallbacks.get(r.question_id, "")),
                "target": r.target_answer,
            }
            for r in records
        ),
    )

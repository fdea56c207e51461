"""Canonical data model shared by every pipeline stage.

All types are frozen dataclasses; sequence fields are converted to tuples on
construction so instances can be shared across threads without copying. The
line-delimited JSON interchange helpers at the bottom are the only supported
on-disk representation; field names in the records are a compatibility
contract and must not be renamed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Sequence

_WORD_RE = re.compile(r"[a-z0-9]+")

UNKNOWN_ANSWER = "unknown"


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric word split, used for all lexical matching."""
    return _WORD_RE.findall(text.lower())


def is_unknown(answer: str) -> bool:
    """Whether an answer string is the refusal sentinel (case/space tolerant)."""
    return answer.strip().lower() == UNKNOWN_ANSWER


class SourceType(Enum):
    KG = "KG"
    TEXT = "TEXT"
    TABLE = "TABLE"


@dataclass(frozen=True)
class Entity:
    """A catalog entity with its label and known surface aliases."""

    id: str
    label: str
    aliases: tuple[str, ...] = ()
    is_location: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "aliases", tuple(self.aliases))
        if not self.id:
            raise ValueError("entity id must be non-empty")
        if not self.label:
            raise ValueError(f"entity {self.id}: label must be non-empty")
        folded = [a.casefold() for a in self.aliases]
        if len(set(folded)) != len(folded):
            raise ValueError(f"entity {self.id}: duplicate aliases after case-folding")

    def names(self) -> tuple[str, ...]:
        return (self.label,) + self.aliases


class EntityCatalog:
    """Immutable lookup structure over a set of entities.

    Supports id lookup, case-folded name lookup, and exposes which entities
    are flagged as locations (used by the question-understanding rules).
    """

    def __init__(self, entities: Iterable[Entity]):
        self._by_id: dict[str, Entity] = {}
        self._by_name: dict[str, Entity] = {}
        for ent in entities:
            if ent.id in self._by_id:
                raise ValueError(f"duplicate entity id in catalog: {ent.id}")
            self._by_id[ent.id] = ent
        # Name collisions resolve to the first entity seen, deterministically.
        for ent in self._by_id.values():
            for name in ent.names():
                self._by_name.setdefault(name.casefold(), ent)

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[Entity]:
        return iter(self._by_id.values())

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self._by_id

    def get(self, entity_id: str) -> Entity | None:
        return self._by_id.get(entity_id)

    def require(self, entity_id: str) -> Entity:
        ent = self._by_id.get(entity_id)
        if ent is None:
            raise KeyError(f"unknown entity id: {entity_id!r}")
        return ent

    def by_name(self, name: str) -> Entity | None:
        return self._by_name.get(name.casefold())

    def locations(self) -> list[Entity]:
        return [e for e in self._by_id.values() if e.is_location]


@dataclass(frozen=True)
class EvidencePiece:
    """One verbalized unit of evidence from any source modality.

    ``provenance`` is a locator string of the form ``kg:<fact-id>``,
    ``text:<doc-id>:<sentence-index>`` or ``table:<table-id>:<row-index>``;
    it uniquely identifies the origin unit and doubles as the piece id.
    """

    id: str
    source: SourceType
    text: str
    entity_ids: tuple[str, ...]
    provenance: str
    score: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "entity_ids", tuple(self.entity_ids))
        if not self.text:
            raise ValueError(f"evidence {self.id}: text must be non-empty")
        if not self.provenance:
            raise ValueError(f"evidence {self.id}: provenance must be non-empty")


@dataclass(frozen=True)
class StructuredIntent:
    """Five-slot decomposition of a question.

    Slots may be empty; an all-empty intent is representable and callers fall
    back to the raw question text (see :func:`si_concat`).
    """

    ans_type: tuple[str, ...] = ()
    entities: tuple[str, ...] = ()
    relation: str | None = None
    time: str | None = None
    location: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "ans_type", tuple(v.strip() for v in self.ans_type))
        object.__setattr__(self, "entities", tuple(v.strip() for v in self.entities))
        for name in ("ans_type", "entities"):
            if any(not v for v in getattr(self, name)):
                raise ValueError(f"intent slot {name}: values must be non-empty after trimming")
        for name in ("relation", "time", "location"):
            value = getattr(self, name)
            if value is not None:
                value = value.strip()
                if not value:
                    raise ValueError(f"intent slot {name}: present value must be non-empty after trimming")
                object.__setattr__(self, name, value)

    @property
    def is_empty(self) -> bool:
        return not (self.ans_type or self.entities or self.relation or self.time or self.location)


def si_concat(si: StructuredIntent, fallback: str) -> str:
    """Concatenate intent slots into a retrieval query string.

    Slot order is fixed (answer type, entities, relation, time, location) and
    values are joined by single spaces; empty slots are skipped. When every
    slot is empty the raw question text ``fallback`` is returned instead.
    """
    parts: list[str] = []
    parts.extend(si.ans_type)
    parts.extend(si.entities)
    if si.relation:
        parts.append(si.relation)
    if si.time:
        parts.append(si.time)
    if si.location:
        parts.append(si.location)
    if not parts:
        return fallback
    return " ".join(parts)


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    gold_answers: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gold_answers", tuple(self.gold_answers))
        if not self.text:
            raise ValueError(f"question {self.id}: text must be non-empty")


@dataclass(frozen=True)
class AnswerResult:
    """Final answer plus its grounding in the evidence fed to the generator.

    ``refrained`` is derived from the answer string and cannot be set
    independently, which keeps the flag consistent by construction.
    """

    answer: str
    supporting_evidence: tuple[str, ...] = ()
    prompt_evidence_count: int = 0
    refrained: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "supporting_evidence", tuple(self.supporting_evidence))
        object.__setattr__(self, "refrained", is_unknown(self.answer))


# ---------------------------------------------------------------------------
# Interchange format: one JSON object per line, field names as defined above.


def entity_to_record(ent: Entity) -> dict:
    return {
        "id": ent.id,
        "label": ent.label,
        "aliases": list(ent.aliases),
        "is_location": ent.is_location,
    }


def entity_from_record(rec: dict) -> Entity:
    return Entity(
        id=rec["id"],
        label=rec["label"],
        aliases=tuple(rec.get("aliases", ())),
        is_location=bool(rec.get("is_location", False)),
    )


def evidence_to_record(piece: EvidencePiece) -> dict:
    return {
        "id": piece.id,
        "source": piece.source.value,
        "text": piece.text,
        "entity_ids": list(piece.entity_ids),
        "provenance": piece.provenance,
        "score": piece.score,
    }


def evidence_from_record(rec: dict) -> EvidencePiece:
    return EvidencePiece(
        id=rec["id"],
        source=SourceType(rec["source"]),
        text=rec["text"],
        entity_ids=tuple(rec["entity_ids"]),
        provenance=rec["provenance"],
        score=float(rec.get("score", 0.0)),
    )


def question_to_record(q: Question) -> dict:
    return {"id": q.id, "text": q.text, "gold_answers": list(q.gold_answers)}


def question_from_record(rec: dict) -> Question:
    return Question(id=rec["id"], text=rec["text"], gold_answers=tuple(rec.get("gold_answers", ())))


def intent_to_record(si: StructuredIntent) -> dict:
    return {
        "ans_type": list(si.ans_type),
        "entities": list(si.entities),
        "relation": si.relation,
        "time": si.time,
        "location": si.location,
    }


def intent_from_record(rec: dict) -> StructuredIntent:
    return StructuredIntent(
        ans_type=tuple(rec.get("ans_type", ())),
        entities=tuple(rec.get("entities", ())),
        relation=rec.get("relation"),
        time=rec.get("time"),
        location=rec.get("location"),
    )


def answer_result_to_record(res: AnswerResult) -> dict:
    return {
        "answer": res.answer,
        "refrained": res.refrained,
        "supporting_evidence": list(res.supporting_evidence),
        "prompt_evidence_count": res.prompt_evidence_count,
    }


def answer_result_from_record(rec: dict) -> AnswerResult:
    res = AnswerResult(
        answer=rec["answer"],
        supporting_evidence=tuple(rec.get("supporting_evidence", ())),
        prompt_evidence_count=int(rec.get("prompt_evidence_count", 0)),
    )
    if "refrained" in rec and bool(rec["refrained"]) != res.refrained:
        raise ValueError("answer record: refrained flag inconsistent with answer string")
    return res


def dump_record(rec: dict) -> str:
    return json.dumps(rec, ensure_ascii=False)


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    """Write records as line-delimited JSON; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dump_record(rec))
            fh.write("\n")
            count += 1
    return count


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) pairs, skipping blank lines.

    Malformed lines raise ValueError carrying the 1-based line number so the
    CLI can report the offending location.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed record: {exc}") from exc
            if not isinstance(rec, dict):
                raise ValueError(f"{path}:{lineno}: malformed record: expected an object")
            yield lineno, rec


def write_catalog(path: str | Path, catalog: EntityCatalog) -> int:
    return write_jsonl(path, (entity_to_record(e) for e in catalog))


def read_catalog(path: str | Path) -> EntityCatalog:
    entities = []
    for lineno, rec in read_jsonl(path):
        try:
            entities.append(entity_from_record(rec))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad entity record: {exc}") from exc
    return EntityCatalog(entities)


def write_pool(path: str | Path, pieces: Sequence[EvidencePiece]) -> int:
    return write_jsonl(path, (evidence_to_record(p) for p in pieces))


def read_pool(path: str | Path) -> list[EvidencePiece]:
    pool = []
    for lineno, rec in read_jsonl(path):
        try:
            pool.append(evidence_from_record(rec))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad evidence record: {exc}") from exc
    return pool

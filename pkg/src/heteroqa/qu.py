"""Question understanding: turning a question into a structured intent.

Two generators are provided. The rule-based one is deterministic and total:
wh-word mapping for the answer type, catalog mention extraction for entities,
a year/ordinal cue scan for time, and the residual question text as the
relation phrase. The model-backed one sends the question to an external
sequence-to-sequence service and parses its slot-tagged reply, falling back
to the rules on anything malformed.
"""

from __future__ import annotations

import logging
import re
from typing import Protocol

from .core import EntityCatalog, Question, StructuredIntent, tokenize
from .ingest import extract_entity_mentions

logger = logging.getLogger(__name__)

WH_TYPE_MAP = {
    "who": "person",
    "whom": "person",
    "when": "date",
    "where": "location",
}

# wh-words whose answer type comes from the following noun head
_NOUN_HEAD_WH = {"which", "what"}

# tokens that terminate the noun phrase after which/what
_HEAD_STOPWORDS = {
    "is", "are", "was", "were", "am", "be", "been", "being",
    "do", "does", "did", "done",
    "has", "have", "had",
    "will", "would", "can", "could", "shall", "should", "may", "might", "must",
}

_ARTICLES = {"a", "an", "the"}

_YEAR_RE = re.compile(r"\b([12]\d{3})\b")
_ORDINAL_CUES = ("first", "last", "latest", "earliest", "oldest", "newest")
_RELATIVE_RE = re.compile(r"\b(before|after)\s+([^,.?!]+)", re.IGNORECASE)


def _answer_type(tokens: list[str]) -> tuple[list[str], str | None]:
    """(answer types, wh token used) from the first wh-word in the question."""
    for i, tok in enumerate(tokens):
        if tok in WH_TYPE_MAP:
            return [WH_TYPE_MAP[tok]], tok
        if tok in _NOUN_HEAD_WH:
            head = None
            for nxt in tokens[i + 1 :]:
                if nxt in _ARTICLES:
                    continue
                if nxt in _HEAD_STOPWORDS:
                    break
                head = nxt
            return ([head] if head else []), tok
    return [], None


def _time_cue(text: str) -> str | None:
    year = _YEAR_RE.search(text)
    if year:
        return year.group(1)
    tokens = set(tokenize(text))
    for cue in _ORDINAL_CUES:
        if cue in tokens:
            return cue
    rel = _RELATIVE_RE.search(text)
    if rel:
        return f"{rel.group(1).lower()} {rel.group(2).strip()}"
    return None


def _strip_spans(text: str, spans: list[str], wh_token: str | None) -> str:
    """Remove matched entity surface forms and the wh-word, then tidy up."""
    residual = text
    if wh_token:
        residual = re.sub(rf"\b{re.escape(wh_token)}\b", " ", residual, count=1, flags=re.IGNORECASE)
    for span in sorted(spans, key=len, reverse=True):
        residual = re.sub(rf"\b{re.escape(span)}\b", " ", residual, flags=re.IGNORECASE)
    residual = re.sub(r"\s+", " ", residual).strip(" \t?.!,;:")
    return residual


def _mention_surfaces(text: str, catalog: EntityCatalog, entity_ids: list[str]) -> list[str]:
    """Surface forms (label or alias) through which each entity was matched."""
    surfaces = []
    folded = text.casefold()
    for eid in entity_ids:
        ent = catalog.require(eid)
        for name in sorted(ent.names(), key=len, reverse=True):
            if re.search(rf"\b{re.escape(name.casefold())}\b", folded):
                surfaces.append(name)
                break
    return surfaces


def generate_si_rules(q: Question, catalog: EntityCatalog) -> StructuredIntent:
    """Deterministic rule-based intent generator; never fails."""
    tokens = tokenize(q.text)
    ans_type, wh_token = _answer_type(tokens)
    entity_ids = extract_entity_mentions(q.text, catalog)
    entity_labels = [catalog.require(eid).label for eid in entity_ids]
    time = _time_cue(q.text)
    location = ", ".join(
        catalog.require(eid).label for eid in entity_ids if catalog.require(eid).is_location
    ) or None
    surfaces = _mention_surfaces(q.text, catalog, entity_ids)
    relation = _strip_spans(q.text, surfaces, wh_token) or None
    return StructuredIntent(
        ans_type=tuple(ans_type),
        entities=tuple(entity_labels),
        relation=relation,
        time=time,
        location=location,
    )


# ---------------------------------------------------------------------------
# Slot-tagged wire format: "Ans-Type: a, b | Entities: x, y | Relation: ... |
# Time: ... | Location: ...". Empty slots are omitted; unknown labels are
# ignored for forward compatibility.

_SLOT_LABELS = ("Ans-Type", "Entities", "Relation", "Time", "Location")
_LIST_SLOTS = {"Ans-Type", "Entities"}


class SiModelClient(Protocol):
    """Wire contract for an external intent model."""

    def generate_si(self, question: str) -> str: ...


def si_to_tagged(si: StructuredIntent) -> str:
    """Canonical slot-tagged serialization (inverse of :func:`parse_tagged_si`)."""
    segments = []
    if si.ans_type:
        segments.append("Ans-Type: " + ", ".join(si.ans_type))
    if si.entities:
        segments.append("Entities: " + ", ".join(si.entities))
    if si.relation:
        segments.append("Relation: " + si.relation)
    if si.time:
        segments.append("Time: " + si.time)
    if si.location:
        segments.append("Location: " + si.location)
    return " | ".join(segments)


def parse_tagged_si(reply: str) -> StructuredIntent | None:
    """Parse a slot-tagged reply; None when nothing parseable is found."""
    slots: dict[str, str] = {}
    recognized = False
    for segment in reply.split("|"):
        label, sep, value = segment.partition(":")
        if not sep:
            continue
        label = label.strip()
        value = value.strip()
        if label in _SLOT_LABELS:
            recognized = True
            if value:
                slots[label] = value
    if not recognized:
        return None
    def listed(label: str) -> tuple[str, ...]:
        raw = slots.get(label, "")
        return tuple(v.strip() for v in raw.split(",") if v.strip())

    return StructuredIntent(
        ans_type=listed("Ans-Type"),
        entities=listed("Entities"),
        relation=slots.get("Relation"),
        time=slots.get("Time"),
        location=slots.get("Location"),
    )


def generate_si_model(q: Question, client: SiModelClient, catalog: EntityCatalog) -> StructuredIntent:
    """Intent via the external model, with rule-based fallback.

    Transport errors propagate (they are retriable); a malformed or empty
    reply is logged and silently replaced by the rule-based intent.
    """
    reply = client.generate_si(q.text)
    si = parse_tagged_si(reply) if reply else None
    if si is None:
        logger.warning("question %s: malformed intent reply %r, using rules fallback", q.id, reply)
        return generate_si_rules(q, catalog)
    return si

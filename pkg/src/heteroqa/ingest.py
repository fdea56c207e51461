"""Source parsing and evidence verbalization.

Three input modalities (knowledge-graph facts, tables, text documents) are
parsed from line-delimited JSON files and flattened into uniform
:class:`~heteroqa.core.EvidencePiece` pseudo-sentences. All modalities share
the ``" / "`` separator convention: table rows and sentences are prefixed
with the page title and the section path of the page they come from.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import (
    Entity,
    EntityCatalog,
    EvidencePiece,
    SourceType,
    read_jsonl,
    tokenize,
)


@dataclass(frozen=True)
class KgFact:
    """A single KG fact with optional qualifier key/value pairs."""

    id: str
    subject: str
    predicate: str
    object: str
    qualifiers: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "qualifiers", tuple((k, v) for k, v in self.qualifiers))
        if not self.id:
            raise ValueError("fact id must be non-empty")
        if any(not k for k, _ in self.qualifiers):
            raise ValueError(f"fact {self.id}: qualifier keys must be non-empty")


@dataclass(frozen=True)
class TableDoc:
    id: str
    page_title: str
    dom_path: tuple[str, ...]
    headers: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dom_path", tuple(self.dom_path))
        object.__setattr__(self, "headers", tuple(self.headers))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for i, row in enumerate(self.rows):
            if len(row) != len(self.headers):
                raise ValueError(
                    f"table {self.id}: row {i} has {len(row)} cells, expected {len(self.headers)}"
                )


@dataclass(frozen=True)
class TextDoc:
    id: str
    page_title: str
    dom_path: tuple[str, ...]
    sentences: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dom_path", tuple(self.dom_path))
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if any(not s for s in self.sentences):
            raise ValueError(f"text doc {self.id}: sentences must be non-empty")


def extract_entity_mentions(text: str, catalog: EntityCatalog) -> list[str]:
    """Find catalog entities mentioned in ``text``.

    Case-insensitive longest-match scan on word boundaries over every label
    and alias; a longer match starting at the same position suppresses any
    shorter overlapping one. Ids are returned deduplicated in first-occurrence
    order.
    """
    if len(catalog) == 0:
        return []
    # Map token sequences of every catalog name to the owning entity.
    names: dict[tuple[str, ...], str] = {}
    max_len = 0
    for ent in catalog:
        for name in ent.names():
            toks = tuple(tokenize(name))
            if not toks:
                continue
            names.setdefault(toks, ent.id)
            max_len = max(max_len, len(toks))
    text_tokens = tokenize(text)
    found: list[str] = []
    seen: set[str] = set()
    i = 0
    while i < len(text_tokens):
        match_id = None
        match_len = 0
        for n in range(min(max_len, len(text_tokens) - i), 0, -1):
            cand = tuple(text_tokens[i : i + n])
            if cand in names:
                match_id = names[cand]
                match_len = n
                break
        if match_id is not None:
            if match_id not in seen:
                seen.add(match_id)
                found.append(match_id)
            i += match_len
        else:
            i += 1
    return found


def _prefix(page_title: str, dom_path: Sequence[str]) -> str:
    return " / ".join([page_title, *dom_path])


def verbalize_kg(anchor: Entity, facts: Sequence[KgFact], catalog: EntityCatalog) -> list[EvidencePiece]:
    """Linearize the anchor entity's facts, one evidence piece per fact.

    Facts are emitted in breadth-first order from the anchor; with the fixed
    1-hop neighbourhood this is simply the input order. The subject id must
    resolve in the catalog (anything else means the catalog is corrupt); an
    object id that does not resolve is rendered as a literal string.
    """
    pieces: list[EvidencePiece] = []
    for fact in facts:
        subject = catalog.require(fact.subject)
        obj_entity = catalog.get(fact.object)
        obj_text = obj_entity.label if obj_entity is not None else fact.object
        text = f"{subject.label} {fact.predicate} {obj_text}"
        for key, value in fact.qualifiers:
            text += f", {key}: {value}"
        entity_ids = [fact.subject]
        if obj_entity is not None and obj_entity.id not in entity_ids:
            entity_ids.append(obj_entity.id)
        for _, value in fact.qualifiers:
            if value in catalog and value not in entity_ids:
                entity_ids.append(value)
        locator = f"kg:{fact.id}"
        pieces.append(
            EvidencePiece(
                id=locator,
                source=SourceType.KG,
                text=text,
                entity_ids=tuple(entity_ids),
                provenance=locator,
            )
        )
    return pieces


def verbalize_table_row(table: TableDoc, row_index: int, catalog: EntityCatalog) -> EvidencePiece:
    """Render one table row as ``title / section path / header: cell, ...``.

    Cells that are empty after trimming are skipped together with their
    header.
    """
    if not 0 <= row_index < len(table.rows):
        raise IndexError(f"table {table.id}: row index {row_index} out of range")
    row = table.rows[row_index]
    cells = [f"{h}: {c}" for h, c in zip(table.headers, row) if c.strip()]
    text = _prefix(table.page_title, table.dom_path) + " / " + ", ".join(cells)
    locator = f"table:{table.id}:{row_index}"
    return EvidencePiece(
        id=locator,
        source=SourceType.TABLE,
        text=text,
        entity_ids=tuple(extract_entity_mentions(text, catalog)),
        provenance=locator,
    )


def verbalize_text_sentence(doc: TextDoc, sentence_index: int, catalog: EntityCatalog) -> EvidencePiece:
    """Prefix one sentence with the page title and section path."""
    if not 0 <= sentence_index < len(doc.sentences):
        raise IndexError(f"text doc {doc.id}: sentence index {sentence_index} out of range")
    text = _prefix(doc.page_title, doc.dom_path) + " / " + doc.sentences[sentence_index]
    locator = f"text:{doc.id}:{sentence_index}"
    return EvidencePiece(
        id=locator,
        source=SourceType.TEXT,
        text=text,
        entity_ids=tuple(extract_entity_mentions(text, catalog)),
        provenance=locator,
    )


def page_title_of(piece: EvidencePiece) -> str | None:
    """Page title of a text/table piece, recovered from its verbalization.

    Relies on the invariant that text and table verbalizations always start
    with ``<page title> / ``; KG pieces have no page and return None.
    """
    if piece.source is SourceType.KG:
        return None
    title, sep, _ = piece.text.partition(" / ")
    return title if sep else None


# ---------------------------------------------------------------------------
# File parsing. One JSON object per line; see README for the field layout.


def _parse_fact(rec: dict) -> KgFact:
    return KgFact(
        id=rec["id"],
        subject=rec["subject"],
        predicate=rec["predicate"],
        object=rec["object"],
        qualifiers=tuple((q[0], q[1]) for q in rec.get("qualifiers", ())),
    )


def _parse_table(rec: dict) -> TableDoc:
    return TableDoc(
        id=rec["id"],
        page_title=rec["page_title"],
        dom_path=tuple(rec.get("dom_path", ())),
        headers=tuple(rec["headers"]),
        rows=tuple(tuple(r) for r in rec["rows"]),
    )


def _parse_text(rec: dict) -> TextDoc:
    return TextDoc(
        id=rec["id"],
        page_title=rec["page_title"],
        dom_path=tuple(rec.get("dom_path", ())),
        sentences=tuple(rec["sentences"]),
    )


def read_kg_facts(path: str | Path) -> list[KgFact]:
    facts = []
    for lineno, rec in read_jsonl(path):
        try:
            facts.append(_parse_fact(rec))
        except (KeyError, ValueError, TypeError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: bad kg fact record: {exc}") from exc
    return facts


def read_tables(path: str | Path) -> list[TableDoc]:
    tables = []
    for lineno, rec in read_jsonl(path):
        try:
            tables.append(_parse_table(rec))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad table record: {exc}") from exc
    return tables


def read_text_docs(path: str | Path) -> list[TextDoc]:
    docs = []
    for lineno, rec in read_jsonl(path):
        try:
            docs.append(_parse_text(rec))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad text doc record: {exc}") from exc
    return docs


def build_pool(
    catalog: EntityCatalog,
    facts: Iterable[KgFact] = (),
    tables: Iterable[TableDoc] = (),
    text_docs: Iterable[TextDoc] = (),
) -> list[EvidencePiece]:
    """Verbalize all source units into one evidence pool.

    Output order is deterministic: KG facts in file order, then table rows by
    (table, row index), then sentences by (doc, sentence index).
    """
    pool: list[EvidencePiece] = []
    for fact in facts:
        pool.extend(verbalize_kg(catalog.require(fact.subject), [fact], catalog))
    for table in tables:
        for i in range(len(table.rows)):
            pool.append(verbalize_table_row(table, i, catalog))
    for doc in text_docs:
        for i in range(len(doc.sentences)):
            pool.append(verbalize_text_sentence(doc, i, catalog))
    return pool

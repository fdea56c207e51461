"""Entity anchoring and BM25 retrieval over the verbalized evidence pool.

Scoring is classic BM25 over lowercase alphanumeric tokens:

    idf(t)      = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
    score(d, q) = sum over query token occurrences t of
                  idf(t) * tf(t, d) * (k1 + 1) / (tf(t, d) + k1 * (1 - b + b * |d| / avgdl))

The idf variant with the +1 inside the log keeps every score non-negative.
Documents sharing no token with the query are never returned; ties are broken
by ascending evidence id.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .core import (
    Entity,
    EntityCatalog,
    EvidencePiece,
    Question,
    SourceType,
    StructuredIntent,
    si_concat,
    tokenize,
)
from .ingest import page_title_of

INDEX_FORMAT = "heteroqa-bm25-index"
INDEX_VERSION = 1


@dataclass(frozen=True)
class RetrievalConfig:
    anchor_k: int = 10
    pool_p: int = 1000
    bm25_k1: float = 1.2
    bm25_b: float = 0.75

    def __post_init__(self) -> None:
        if self.anchor_k < 1:
            raise ValueError("anchor_k must be >= 1")
        if self.pool_p < 1:
            raise ValueError("pool_p must be >= 1")
        if self.bm25_k1 <= 0:
            raise ValueError("bm25_k1 must be > 0")
        if not 0.0 <= self.bm25_b <= 1.0:
            raise ValueError("bm25_b must be in [0, 1]")


class Bm25Index:
    """Inverted index over evidence pieces."""

    def __init__(self, postings: dict[str, list[tuple[str, int]]], doc_lengths: dict[str, int]):
        self.postings = postings
        self.doc_lengths = doc_lengths
        self.doc_count = len(doc_lengths)
        self.avg_doc_length = (
            sum(doc_lengths.values()) / self.doc_count if self.doc_count else 0.0
        )

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))


def bm25_build(pieces: Sequence[EvidencePiece]) -> Bm25Index:
    if not pieces:
        raise ValueError("cannot build an index over an empty pool")
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for piece in pieces:
        tokens = tokenize(piece.text)
        if piece.id in doc_lengths:
            raise ValueError(f"duplicate evidence id: {piece.id}")
        doc_lengths[piece.id] = len(tokens)
        for term, tf in Counter(tokens).items():
            postings.setdefault(term, []).append((piece.id, tf))
    return Bm25Index(postings, doc_lengths)


def bm25_scores(index: Bm25Index, query: str, k1: float = 1.2, b: float = 0.75) -> dict[str, float]:
    """Accumulated BM25 score for every document sharing a token with the query."""
    scores: dict[str, float] = {}
    for term in tokenize(query):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for doc_id, tf in plist:
            norm = k1 * (1.0 - b + b * index.doc_lengths[doc_id] / index.avg_doc_length)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (k1 + 1.0) / (tf + norm)
    return scores


def bm25_search(
    index: Bm25Index,
    query: str,
    limit: int,
    k1: float = 1.2,
    b: float = 0.75,
) -> list[tuple[str, float]]:
    """Top ``limit`` (evidence id, score) pairs for the query."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    scores = bm25_scores(index, query, k1=k1, b=b)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:limit]


def anchor_entities(query: str, catalog: EntityCatalog, k: int) -> list[Entity]:
    """Top-k catalog entities by token overlap with the query.

    An entity's score is the best coverage ratio over its label and aliases:
    |name tokens present in the query| / |name tokens|. Zero-score entities are
    excluded; ties break by shorter label, then id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query_tokens = set(tokenize(query))
    scored: list[tuple[float, int, str, Entity]] = []
    for ent in catalog:
        best = 0.0
        for name in ent.names():
            toks = tokenize(name)
            if not toks:
                continue
            best = max(best, len(set(toks) & query_tokens) / len(set(toks)))
        if best > 0.0:
            scored.append((-best, len(ent.label), ent.id, ent))
    scored.sort(key=lambda item: item[:3])
    return [item[3] for item in scored[:k]]


def scope_evidence(anchors: Sequence[Entity], pool: Sequence[EvidencePiece]) -> list[EvidencePiece]:
    """Evidence attributable to the anchor entities.

    A piece is in scope when its page title equals an anchor name, or when it
    mentions an anchor (KG facts mention their subject and object, so facts
    involving an anchor are covered by the same test). With no anchors the
    whole pool is in scope.
    """
    if not anchors:
        return list(pool)
    anchor_ids = {a.id for a in anchors}
    anchor_names = {name.casefold() for a in anchors for name in a.names()}
    scoped = []
    for piece in pool:
        if anchor_ids.intersection(piece.entity_ids):
            scoped.append(piece)
            continue
        title = page_title_of(piece)
        if title is not None and title.casefold() in anchor_names:
            scoped.append(piece)
    return scoped


def retrieve(
    q: Question,
    si: StructuredIntent,
    index: Bm25Index,
    pool: Sequence[EvidencePiece],
    catalog: EntityCatalog,
    cfg: RetrievalConfig = RetrievalConfig(),
) -> list[EvidencePiece]:
    """Assemble the top-p candidate pool for a question.

    The concatenated intent is the query. Evidence scoped to the anchor
    entities is merged with the global BM25 results and everything is ranked
    uniformly by BM25 score regardless of source type; zero-scoring scoped
    pieces trail in id order.
    """
    if index.doc_count == 0:
        return []
    query = si_concat(si, q.text)
    anchors = anchor_entities(query, catalog, cfg.anchor_k)
    scoped = scope_evidence(anchors, pool)
    scores = bm25_scores(index, query, k1=cfg.bm25_k1, b=cfg.bm25_b)
    by_id = {p.id: p for p in pool}
    candidate_ids = {p.id for p in scoped}
    candidate_ids.update(doc_id for doc_id in scores if doc_id in by_id)
    ranked = sorted(candidate_ids, key=lambda pid: (-scores.get(pid, 0.0), pid))
    return [replace(by_id[pid], score=scores.get(pid, 0.0)) for pid in ranked[: cfg.pool_p]]


# ---------------------------------------------------------------------------
# Index persistence: a version header line followed by one record per section.
# Terms and postings are sorted so rebuilding the same pool is byte-identical.


def save_index(index: Bm25Index, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": INDEX_FORMAT,
            "version": INDEX_VERSION,
            "doc_count": index.doc_count,
        }
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        lengths = {doc_id: index.doc_lengths[doc_id] for doc_id in sorted(index.doc_lengths)}
        fh.write(json.dumps({"doc_lengths": lengths}, ensure_ascii=False) + "\n")
        for term in sorted(index.postings):
            plist = sorted(index.postings[term])
            fh.write(json.dumps({"term": term, "postings": plist}, ensure_ascii=False) + "\n")


def load_index(path: str | Path) -> Bm25Index:
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not an index file: {exc}") from exc
        if header.get("format") != INDEX_FORMAT:
            raise ValueError(f"{path}: not an index file (format={header.get('format')!r})")
        if header.get("version") != INDEX_VERSION:
            raise ValueError(f"{path}: unsupported index version {header.get('version')!r}")
        lengths_rec = json.loads(fh.readline())
        doc_lengths = {k: int(v) for k, v in lengths_rec["doc_lengths"].items()}
        postings: dict[str, list[tuple[str, int]]] = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            postings[rec["term"]] = [(doc_id, int(tf)) for doc_id, tf in rec["postings"]]
    index = Bm25Index(postings, doc_lengths)
    if index.doc_count != header["doc_count"]:
        raise ValueError(f"{path}: doc_count mismatch between header and body")
    return index

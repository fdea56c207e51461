"""Seeded synthetic benchmarks for retrieval and re-ranking experiments.

Two generators are provided, both fully deterministic per (seed, index):

``lift_question``
    A 1000-piece pool engineered so that plain BM25 is misled: a band of
    lexical distractors repeats the query's rare cue tokens and outranks the
    genuinely relevant pieces, which sit inside the BM25 top-100 but outside
    the top-30. The relevant pieces share marker tokens invisible to the
    query, so a weakly supervised re-ranker can learn to lift them.

``sweep_question``
    A small pool whose token-overlap scores form an exact descending ladder,
    with the two answer-bearing pieces planted at a controlled rank band.
    Used to study answer quality as a function of how much evidence reaches
    the generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Entity,
    EntityCatalog,
    EvidencePiece,
    Question,
    SourceType,
    StructuredIntent,
    si_concat,
)
from .retrieval import bm25_build, bm25_scores


@dataclass(frozen=True)
class SyntheticQuestion:
    question: Question
    si: StructuredIntent
    catalog: EntityCatalog
    pool: tuple[EvidencePiece, ...]  # ranked (BM25 for lift, ladder for sweep)


def _piece(qid: str, j: int, text: str, entity_ids: tuple[str, ...]) -> EvidencePiece:
    locator = f"text:{qid}d{j}:0"
    return EvidencePiece(
        id=locator,
        source=SourceType.TEXT,
        text=text,
        entity_ids=entity_ids,
        provenance=locator,
    )


def lift_question(
    seed: int,
    index: int,
    pool_size: int = 1000,
    strong_distractors: int = 60,
    relevant: int = 5,
    shared_distractor_entities: int = 50,
) -> SyntheticQuestion:
    """One question with a BM25-hostile, structure-friendly pool.

    The returned pool is ordered by the engine's BM25 score for the
    concatenated intent, so ``pool`` *is* the raw BM25 ranking.
    """
    rng = np.random.default_rng((seed, index))
    qid = f"s{seed}q{index}"
    ent_a = Entity(id=f"{qid}_a", label=f"alpha{qid}")
    ent_b = Entity(id=f"{qid}_b", label=f"beta{qid}")
    answer = Entity(id=f"{qid}_ans", label=f"answer{qid}")
    distractor_ents = [
        Entity(id=f"{qid}_d{j}", label=f"decoy{qid}x{j}") for j in range(shared_distractor_entities)
    ]
    catalog = EntityCatalog([ent_a, ent_b, answer, *distractor_ents])

    si = StructuredIntent(
        ans_type=("team",),
        entities=(ent_a.label, ent_b.label),
        relation="joined league",
        time="first",
    )
    question = Question(
        id=qid,
        text=f"which team {ent_a.label} {ent_b.label} joined league first",
        gold_answers=(answer.label,),
    )

    # Node neighborhoods are engineered to be identical between the capped
    # training graphs (BM25 top-100) and the full inference graphs: the
    # question entities are mentioned only by pieces inside the top-100, each
    # decoy entity by exactly one such piece, and the long tail of weak
    # distractors mentions no entity at all.
    markers = "chronicle ledger registry"
    pieces: list[EvidencePiece] = []
    j = 0
    for _ in range(strong_distractors):
        decoy = distractor_ents[j % len(distractor_ents)]
        text = f"{ent_a.label} {ent_b.label} joined league first team {decoy.label}"
        pieces.append(_piece(qid, j, text, (ent_a.id, ent_b.id, decoy.id)))
        j += 1
    for _ in range(relevant):
        noise = " ".join(f"note{rng.integers(0, 10**9)}" for _ in range(6))
        text = f"{answer.label} {markers} squad {ent_a.label} {ent_b.label} {noise}"
        pieces.append(_piece(qid, j, text, (answer.id, ent_a.id, ent_b.id)))
        j += 1
    while j < pool_size:
        filler = " ".join(f"pad{rng.integers(0, 10**9)}" for _ in range(10))
        pieces.append(_piece(qid, j, f"team {filler}", ()))
        j += 1

    order = rng.permutation(len(pieces))
    pieces = [pieces[i] for i in order]
    index_ = bm25_build(pieces)
    scores = bm25_scores(index_, si_concat(si, question.text))
    ranked = sorted(pieces, key=lambda p: (-scores.get(p.id, 0.0), p.id))
    ranked = [
        EvidencePiece(
            id=p.id,
            source=p.source,
            text=p.text,
            entity_ids=p.entity_ids,
            provenance=p.provenance,
            score=scores.get(p.id, 0.0),
        )
        for p in ranked
    ]
    return SyntheticQuestion(question=question, si=si, catalog=catalog, pool=tuple(ranked))


def sweep_question(
    seed: int,
    index: int,
    band: int,
    pool_size: int = 60,
) -> SyntheticQuestion:
    """One question whose two gold pieces enter the ranking at a set band.

    ``band`` 0, 1, 2 plants the gold pieces at ranks 2-3, 8-9 and 25-26 of
    the token-overlap (Jaccard) ordering, so the answer becomes reachable
    only once enough evidence is passed downstream. The ladder of scores is
    flat (9/(100+p) at position p), which keeps the summed score of the two
    gold pieces above any single distractor and lets the extractive
    generator find the answer whenever its pieces are in the window.
    """
    if band not in (0, 1, 2):
        raise ValueError("band must be 0, 1 or 2")
    rng = np.random.default_rng((seed, index, band))
    qid = f"w{seed}q{index}"
    ent_a = Entity(id=f"{qid}_a", label=f"alpha{qid}")
    ent_b = Entity(id=f"{qid}_b", label=f"beta{qid}")
    answer = Entity(id=f"{qid}_ans", label=f"answer{qid}")
    distractor_ents = [Entity(id=f"{qid}_d{j}", label=f"decoy{qid}x{j}") for j in range(pool_size)]
    catalog = EntityCatalog([ent_a, ent_b, answer, *distractor_ents])

    si = StructuredIntent(
        ans_type=("team",),
        entities=(ent_a.label, ent_b.label),
        relation="joined during opening season",
        time="first",
        location="north",
    )
    question = Question(
        id=qid,
        text=f"which team {ent_a.label} {ent_b.label} joined first",
        gold_answers=(answer.label,),
    )
    query_tokens = si_concat(si, question.text).split()  # 9 distinct tokens

    # A piece holding all 9 query tokens, one entity label and f fresh filler
    # tokens scores 9 / (10 + f); with f = 90 + p the piece at position p
    # lands at exactly that rank.
    gold_positions = {0: (1, 2), 1: (7, 8), 2: (24, 25)}[band]
    pieces: list[EvidencePiece] = []
    decoy_iter = iter(distractor_ents)
    for position in range(pool_size):
        filler = [f"pad{rng.integers(0, 10**9)}n{i}" for i in range(90 + position)]
        if position in gold_positions:
            label, ids = answer.label, (answer.id, ent_a.id, ent_b.id)
            piece_no = 1000 + position
        else:
            decoy = next(decoy_iter)
            label, ids = decoy.label, (decoy.id, ent_a.id, ent_b.id)
            piece_no = position
        text = " ".join([*query_tokens, label, *filler])
        pieces.append(_piece(qid, piece_no, text, ids))
    return SyntheticQuestion(question=question, si=si, catalog=catalog, pool=tuple(pieces))

"""Answer-matching metrics and the benchmark runner.

Metric conventions, stated once here:

* Answers are compared after :func:`normalize_answer` (lowercase, punctuation
  stripped, whitespace collapsed, leading articles dropped).
* A gold answer is "present" in an evidence piece if its normalized form
  occurs token-aligned in the normalized piece text, or if the piece mentions
  an entity whose label or alias normalizes to the gold answer.
* Refrain accuracy uses refrained rows as the denominator.
"""

from __future__ import annotations

import logging
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .core import (
    EntityCatalog,
    EvidencePiece,
    Question,
    is_unknown,
    read_jsonl,
    write_jsonl,
)

logger = logging.getLogger(__name__)

_ARTICLES = {"a", "an", "the"}
_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


def normalize_answer(s: str) -> str:
    """Canonical form for answer comparison."""
    s = s.lower().translate(_PUNCT_TABLE)
    tokens = s.split()
    while tokens and tokens[0] in _ARTICLES:
        tokens.pop(0)
    return " ".join(tokens)


def _gold_entities(golds: Sequence[str], catalog: EntityCatalog | None) -> set[str]:
    """Ids of catalog entities whose label or alias matches a gold answer."""
    if catalog is None:
        return set()
    wanted = {normalize_answer(g) for g in golds}
    matched = set()
    for ent in catalog:
        if any(normalize_answer(name) in wanted for name in ent.names()):
            matched.add(ent.id)
    return matched


def _acceptable_forms(golds: Sequence[str], catalog: EntityCatalog | None) -> set[str]:
    forms = {normalize_answer(g) for g in golds}
    if catalog is not None:
        for ent_id in _gold_entities(golds, catalog):
            ent = catalog.require(ent_id)
            forms.update(normalize_answer(name) for name in ent.names())
    forms.discard("")
    return forms


def p_at_1(predicted: str, golds: Sequence[str], catalog: EntityCatalog | None = None) -> int:
    """1 iff the prediction matches a gold answer or a catalog alias of one."""
    if not golds:
        raise ValueError("p_at_1 requires at least one gold answer")
    pred = normalize_answer(predicted)
    if not pred:
        return 0
    return int(pred in _acceptable_forms(golds, catalog))


def _contains_tokens(haystack_norm: str, needle_norm: str) -> bool:
    return f" {needle_norm} " in f" {haystack_norm} "


def piece_matches_gold(
    piece: EvidencePiece, golds: Sequence[str], catalog: EntityCatalog | None = None
) -> bool:
    """Whether one evidence piece contains any gold answer."""
    text_norm = normalize_answer(piece.text)
    gold_ids = _gold_entities(golds, catalog)
    if any(eid in gold_ids for eid in piece.entity_ids):
        return True
    for gold in golds:
        g = normalize_answer(gold)
        if g and _contains_tokens(text_norm, g):
            return True
    return False


def answer_presence(
    ranked: Sequence[EvidencePiece],
    golds: Sequence[str],
    k: int,
    catalog: EntityCatalog | None = None,
) -> bool:
    """Whether any of the top-k pieces contains a gold answer."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return any(piece_matches_gold(p, golds, catalog) for p in ranked[:k])


def mrr_at_k(
    ranked: Sequence[EvidencePiece],
    golds: Sequence[str],
    k: int,
    catalog: EntityCatalog | None = None,
) -> float:
    """Reciprocal rank of the first gold-bearing piece within the top-k; 0 if none."""
    if k < 1:
        raise ValueError("k must be >= 1")
    for rank, piece in enumerate(ranked[:k], start=1):
        if piece_matches_gold(piece, golds, catalog):
            return 1.0 / rank
    return 0.0


@dataclass(frozen=True)
class QuestionRow:
    """Per-question evaluation outcome."""

    id: str
    predicted: str
    correct: bool
    refrained: bool
    answer_present: bool
    ap_at: dict[int, bool]
    rr_at: dict[int, float]
    error: str | None = None


def refrain_metrics(rows: Sequence[QuestionRow]) -> tuple[float, float | None, float | None]:
    """(refrain_rate, refrain_accuracy, p_at_1_answered) over the rows.

    refrain_accuracy is None when nothing was refrained, and p_at_1_answered
    is None when everything was.
    """
    total = len(rows)
    if total == 0:
        raise ValueError("refrain_metrics requires at least one row")
    refrained = [r for r in rows if r.refrained]
    answered = [r for r in rows if not r.refrained]
    rate = len(refrained) / total
    accuracy = None
    if refrained:
        accuracy = sum(1 for r in refrained if not r.answer_present) / len(refrained)
    p1_answered = None
    if answered:
        p1_answered = sum(1 for r in answered if r.correct) / len(answered)
    return rate, accuracy, p1_answered


@dataclass
class EvalReport:
    rows: list[QuestionRow] = field(default_factory=list)
    ks: tuple[int, ...] = ()

    @property
    def p_at_1(self) -> float:
        return sum(r.correct for r in self.rows) / len(self.rows)

    @property
    def ap_at(self) -> dict[int, float]:
        return {k: sum(r.ap_at[k] for r in self.rows) / len(self.rows) for k in self.ks}

    @property
    def mrr_at(self) -> dict[int, float]:
        return {k: sum(r.rr_at[k] for r in self.rows) / len(self.rows) for k in self.ks}

    @property
    def refrain_rate(self) -> float:
        return refrain_metrics(self.rows)[0]

    @property
    def refrain_accuracy(self) -> float | None:
        return refrain_metrics(self.rows)[1]

    @property
    def p_at_1_answered(self) -> float | None:
        return refrain_metrics(self.rows)[2]

    def to_records(self) -> list[dict]:
        recs: list[dict] = [
            {
                "kind": "aggregate",
                "questions": len(self.rows),
                "p_at_1": self.p_at_1,
                "p_at_1_answered": self.p_at_1_answered,
                "ap_at": {str(k): v for k, v in self.ap_at.items()},
                "mrr_at": {str(k): v for k, v in self.mrr_at.items()},
                "refrain_rate": self.refrain_rate,
                "refrain_accuracy": self.refrain_accuracy,
                "note": "refrain_accuracy denominator: refrained questions",
            }
        ]
        for r in self.rows:
            recs.append(
                {
                    "kind": "question",
                    "id": r.id,
                    "predicted": r.predicted,
                    "correct": r.correct,
                    "refrained": r.refrained,
                    "answer_present": r.answer_present,
                    "ap_at": {str(k): v for k, v in r.ap_at.items()},
                    "rr_at": {str(k): v for k, v in r.rr_at.items()},
                    "error": r.error,
                }
            )
        return recs

    def render_table(self) -> str:
        """Aligned plain-text summary."""

        def fmt(value: float | None) -> str:
            return "n/a" if value is None else f"{value:.3f}"

        header = f"{'metric':<22}{'value':>10}"
        lines = [header, "-" * len(header)]
        lines.append(f"{'questions':<22}{len(self.rows):>10d}")
        lines.append(f"{'P@1':<22}{fmt(self.p_at_1):>10}")
        lines.append(f"{'P@1 (answered)':<22}{fmt(self.p_at_1_answered):>10}")
        for k in self.ks:
            lines.append(f"{f'AP@{k}':<22}{fmt(self.ap_at[k]):>10}")
        for k in self.ks:
            lines.append(f"{f'MRR@{k}':<22}{fmt(self.mrr_at[k]):>10}")
        lines.append(f"{'refrain rate':<22}{fmt(self.refrain_rate):>10}")
        lines.append(f"{'refrain accuracy':<22}{fmt(self.refrain_accuracy):>10}")
        return "\n".join(lines)


class AnswersQuestions(Protocol):
    """What run_benchmark needs from a pipeline."""

    def answer(self, question: Question) -> "PipelineResult": ...


@dataclass(frozen=True)
class PipelineResult:
    """Answer plus the ranked evidence snapshots the pipeline went through.

    ``rankings`` is ordered from the final (smallest) list to the initial
    retrieval pool; metrics at depth k are computed on the first snapshot
    deep enough to cover k, falling back to the retrieval pool.
    """

    answer: str
    supporting_evidence: tuple[str, ...]
    prompt_evidence: tuple[EvidencePiece, ...]
    rankings: tuple[tuple[str, tuple[EvidencePiece, ...]], ...]

    def snapshot_for(self, k: int) -> Sequence[EvidencePiece]:
        for _, pieces in self.rankings:
            if len(pieces) >= k:
                return pieces
        return self.rankings[-1][1] if self.rankings else ()


def read_benchmark(path: str | Path) -> list[Question]:
    """Parse a benchmark file of line-delimited {id, question, answers} records."""
    questions = []
    for lineno, rec in read_jsonl(path):
        try:
            questions.append(
                Question(id=str(rec["id"]), text=rec["question"], gold_answers=tuple(rec.get("answers", ())))
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad benchmark record: {exc}") from exc
    return questions


def run_benchmark(
    pipeline: AnswersQuestions,
    questions: Sequence[Question],
    ks: Sequence[int] = (30, 100, 1000),
    catalog: EntityCatalog | None = None,
    jobs: int = 1,
) -> EvalReport:
    """Run the full pipeline over a benchmark and score it.

    Per-question failures are recorded on the row (counted as incorrect) and
    the run continues. Rows are ordered by question id regardless of the
    number of worker threads.
    """
    ks = tuple(ks)

    def evaluate(q: Question) -> QuestionRow:
        try:
            result = pipeline.answer(q)
        except Exception as exc:  # noqa: BLE001 - failures become report rows
            logger.warning("question %s failed: %s", q.id, exc)
            return QuestionRow(
                id=q.id,
                predicted="",
                correct=False,
                refrained=False,
                answer_present=False,
                ap_at={k: False for k in ks},
                rr_at={k: 0.0 for k in ks},
                error=str(exc),
            )
        correct = bool(q.gold_answers) and p_at_1(result.answer, q.gold_answers, catalog) == 1
        present = bool(q.gold_answers) and bool(result.prompt_evidence) and answer_presence(
            result.prompt_evidence, q.gold_answers, len(result.prompt_evidence), catalog
        )
        ap = {}
        rr = {}
        for k in ks:
            snapshot = result.snapshot_for(k)
            ap[k] = bool(q.gold_answers) and answer_presence(snapshot, q.gold_answers, k, catalog)
            rr[k] = mrr_at_k(snapshot, q.gold_answers, k, catalog) if q.gold_answers else 0.0
        return QuestionRow(
            id=q.id,
            predicted=result.answer,
            correct=correct,
            refrained=is_unknown(result.answer),
            answer_present=present,
            ap_at=ap,
            rr_at=rr,
        )

    if jobs <= 1:
        rows = [evaluate(q) for q in questions]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate, questions))
    rows.sort(key=lambda r: r.id)
    return EvalReport(rows=rows, ks=ks)


def write_report(report: EvalReport, records_path: str | Path, table_path: str | Path | None = None) -> None:
    write_jsonl(records_path, report.to_records())
    if table_path is not None:
        Path(table_path).write_text(report.render_table() + "\n", encoding="utf-8")

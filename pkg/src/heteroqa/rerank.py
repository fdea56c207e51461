"""Re-ranking and filtering of the retrieved evidence pool.

The pool is reduced in stages (by default 1000 -> 100 -> 30) using one of
three interchangeable scorers:

* a small bipartite graph neural network scoring evidence and candidate
  entities jointly (trained here, from weak supervision),
* a cross-encoder behind a wire contract, with an embedded token-overlap
  fallback when no endpoint is configured,
* the incoming retrieval score (no re-ranking).

The GNN operates on the evidence/entity occurrence graph. Node features are
L2-normalized signed hashed bags of words over the node text concatenated
with the question intent. Each layer computes

    h' = tanh(W_self . h + W_msg . mean of neighbor h)

with weights shared between the two node sides, followed by a logistic head
on evidence nodes and a softmax head across entity nodes. The multi-task
loss is mean binary cross-entropy over evidence labels plus cross-entropy of
the entity softmax against the answer entities; gradients are computed
analytically (see ``_backward``) and checked against finite differences in
the test suite.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
from scipy import sparse

from .core import (
    EntityCatalog,
    EvidencePiece,
    StructuredIntent,
    si_concat,
    tokenize,
)
from .eval import normalize_answer

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "heteroqa-gnn-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class RerankSchedule:
    """Staged reduction plan plus the graph size caps."""

    stages: tuple[tuple[int, int], ...] = ((1000, 100), (100, 30))
    evidence_cap: int = 1000
    entity_cap: int = 4000

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple((int(a), int(b)) for a, b in self.stages))
        for input_k, output_k in self.stages:
            if output_k >= input_k:
                raise ValueError(f"stage ({input_k}, {output_k}): output_k must be < input_k")
        for (_, out_k), (next_in, _) in zip(self.stages, self.stages[1:]):
            if out_k != next_in:
                raise ValueError("consecutive stages must chain: output_k == next input_k")
        if self.evidence_cap < 1 or self.entity_cap < 1:
            raise ValueError("caps must be >= 1")


@dataclass(frozen=True)
class BipartiteGraph:
    evidence_nodes: tuple[str, ...]
    entity_nodes: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]


def build_graph(
    pool: Sequence[EvidencePiece],
    evidence_cap: int = 1000,
    entity_cap: int = 4000,
) -> BipartiteGraph:
    """Evidence/entity occurrence graph over the top of the pool.

    Evidence is truncated to ``evidence_cap`` by score (stable on ties), then
    entities to ``entity_cap`` by descending degree with id tie-break; edges
    of evicted entities disappear with them.
    """
    if not pool:
        raise ValueError("cannot build a graph over an empty pool")
    kept = sorted(pool, key=lambda p: -p.score)[:evidence_cap]
    degree: dict[str, int] = {}
    for piece in kept:
        for eid in set(piece.entity_ids):
            degree[eid] = degree.get(eid, 0) + 1
    entity_nodes = sorted(degree, key=lambda eid: (-degree[eid], eid))[:entity_cap]
    entity_index = {eid: i for i, eid in enumerate(entity_nodes)}
    edges = []
    for ev_idx, piece in enumerate(kept):
        for eid in dict.fromkeys(piece.entity_ids):
            ent_idx = entity_index.get(eid)
            if ent_idx is not None:
                edges.append((ev_idx, ent_idx))
    return BipartiteGraph(
        evidence_nodes=tuple(p.id for p in kept),
        entity_nodes=tuple(entity_nodes),
        edges=tuple(edges),
    )


def _stable_hash(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def hashed_bow(text: str, dim: int) -> np.ndarray:
    """Signed hashed bag of words, L2-normalized; all-zero for empty text."""
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokenize(text):
        h = _stable_hash(token)
        bucket = h % dim
        sign = 1.0 if (h >> 40) & 1 == 0 else -1.0
        vec[bucket] += sign
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


@dataclass(frozen=True)
class NodeEncodings:
    evidence: np.ndarray  # (|evidence|, dim)
    entity: np.ndarray  # (|entities|, dim)


def encode_nodes(
    graph: BipartiteGraph,
    si: StructuredIntent,
    pool: Sequence[EvidencePiece],
    catalog: EntityCatalog,
    dim: int = 64,
    fallback: str = "",
) -> NodeEncodings:
    """Initial features: hashed bag of words over node text plus the intent.

    Evidence nodes use their verbalized text, entity nodes their label.
    """
    query = si_concat(si, fallback)
    texts = {p.id: p.text for p in pool}
    evidence = np.stack(
        [hashed_bow(f"{texts[eid]} {query}", dim) for eid in graph.evidence_nodes]
    ) if graph.evidence_nodes else np.zeros((0, dim))
    labels = []
    for eid in graph.entity_nodes:
        ent = catalog.get(eid)
        labels.append(ent.label if ent is not None else eid)
    entity = np.stack(
        [hashed_bow(f"{label} {query}", dim) for label in labels]
    ) if labels else np.zeros((0, dim))
    return NodeEncodings(evidence=evidence, entity=entity)


@dataclass
class GnnModel:
    """Per-layer weights and the two scoring heads."""

    layer_count: int = 3
    dim: int = 64
    w_self: list[np.ndarray] = field(default_factory=list)
    w_msg: list[np.ndarray] = field(default_factory=list)
    head_evidence: np.ndarray = field(default_factory=lambda: np.zeros(0))
    head_entity: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rng_seed: int = 0

    @classmethod
    def create(cls, layer_count: int = 3, dim: int = 64, seed: int = 0) -> "GnnModel":
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(dim)
        return cls(
            layer_count=layer_count,
            dim=dim,
            w_self=[rng.normal(0.0, scale, (dim, dim)) for _ in range(layer_count)],
            w_msg=[rng.normal(0.0, scale, (dim, dim)) for _ in range(layer_count)],
            head_evidence=rng.normal(0.0, scale, dim),
            head_entity=rng.normal(0.0, scale, dim),
            rng_seed=seed,
        )

    def copy(self) -> "GnnModel":
        return GnnModel(
            layer_count=self.layer_count,
            dim=self.dim,
            w_self=[w.copy() for w in self.w_self],
            w_msg=[w.copy() for w in self.w_msg],
            head_evidence=self.head_evidence.copy(),
            head_entity=self.head_entity.copy(),
            rng_seed=self.rng_seed,
        )

    def validate(self) -> None:
        if len(self.w_self) != self.layer_count or len(self.w_msg) != self.layer_count:
            raise ValueError("weight list lengths must equal layer_count")
        for w in [*self.w_self, *self.w_msg]:
            if w.shape != (self.dim, self.dim):
                raise ValueError(f"layer weight shape {w.shape} != ({self.dim}, {self.dim})")
        if self.head_evidence.shape != (self.dim,) or self.head_entity.shape != (self.dim,):
            raise ValueError("head shapes must be (dim,)")


def _mean_operators(graph: BipartiteGraph, n_e: int, n_n: int) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Row-normalized neighbor-mean operators (evidence<-entity, entity<-evidence)."""
    if graph.edges:
        rows = np.array([e for e, _ in graph.edges])
        cols = np.array([n for _, n in graph.edges])
        data = np.ones(len(graph.edges))
        adj = sparse.csr_matrix((data, (rows, cols)), shape=(n_e, n_n))
    else:
        adj = sparse.csr_matrix((n_e, n_n))
    deg_e = np.asarray(adj.sum(axis=1)).ravel()
    deg_n = np.asarray(adj.sum(axis=0)).ravel()
    inv_e = np.divide(1.0, deg_e, out=np.zeros_like(deg_e), where=deg_e > 0)
    inv_n = np.divide(1.0, deg_n, out=np.zeros_like(deg_n), where=deg_n > 0)
    p_e = sparse.diags(inv_e) @ adj  # (n_e, n_n): mean over entity neighbors
    p_n = sparse.diags(inv_n) @ adj.T  # (n_n, n_e): mean over evidence neighbors
    return p_e.tocsr(), p_n.tocsr()


class _ForwardCache:
    """Per-layer activations kept for the analytic backward pass."""

    def __init__(self) -> None:
        self.h_e: list[np.ndarray] = []
        self.h_n: list[np.ndarray] = []
        self.m_e: list[np.ndarray] = []
        self.m_n: list[np.ndarray] = []
        self.evidence_logits: np.ndarray = np.zeros(0)
        self.entity_logits: np.ndarray = np.zeros(0)


def _forward(
    model: GnnModel, graph: BipartiteGraph, enc: NodeEncodings
) -> _ForwardCache:
    model.validate()
    n_e, n_n = len(graph.evidence_nodes), len(graph.entity_nodes)
    if enc.evidence.shape != (n_e, model.dim) or enc.entity.shape != (n_n, model.dim):
        raise ValueError(
            f"encoding shapes {enc.evidence.shape}/{enc.entity.shape} do not match "
            f"graph ({n_e}/{n_n}) and dim {model.dim}"
        )
    p_e, p_n = _mean_operators(graph, n_e, n_n)
    cache = _ForwardCache()
    h_e, h_n = enc.evidence, enc.entity
    cache.h_e.append(h_e)
    cache.h_n.append(h_n)
    for layer in range(model.layer_count):
        m_e = p_e @ h_n  # neighbor means; zero rows for isolated nodes
        m_n = p_n @ h_e
        cache.m_e.append(m_e)
        cache.m_n.append(m_n)
        h_e = np.tanh(h_e @ model.w_self[layer].T + m_e @ model.w_msg[layer].T)
        h_n = np.tanh(h_n @ model.w_self[layer].T + m_n @ model.w_msg[layer].T)
        cache.h_e.append(h_e)
        cache.h_n.append(h_n)
    cache.evidence_logits = h_e @ model.head_evidence
    cache.entity_logits = h_n @ model.head_entity
    return cache


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    if z.size == 0:
        return z
    shifted = z - z.max()
    e = np.exp(shifted)
    return e / e.sum()


def gnn_forward(
    model: GnnModel, graph: BipartiteGraph, enc: NodeEncodings
) -> tuple[dict[str, float], dict[str, float]]:
    """Evidence scores in (0, 1) and entity scores normalized via softmax."""
    cache = _forward(model, graph, enc)
    evidence_scores = dict(zip(graph.evidence_nodes, _sigmoid(cache.evidence_logits)))
    entity_scores = dict(zip(graph.entity_nodes, _softmax(cache.entity_logits)))
    return evidence_scores, entity_scores


@dataclass(frozen=True)
class WeakLabels:
    """Weak supervision: relevant evidence and answer entities."""

    evidence: dict[str, bool]
    entities: dict[str, bool]


def weak_label(
    pool: Sequence[EvidencePiece],
    gold_answers: Sequence[str],
    catalog: EntityCatalog,
) -> WeakLabels:
    """Label entities as answers by normalized name match, evidence by contact.

    An entity is an answer if any of its names normalizes to a gold answer;
    an evidence piece is relevant iff it mentions an answer entity.
    """
    if not gold_answers:
        raise ValueError("weak_label requires at least one gold answer")
    wanted = {normalize_answer(g) for g in gold_answers}
    entity_ids = {eid for piece in pool for eid in piece.entity_ids}
    entities: dict[str, bool] = {}
    for eid in entity_ids:
        ent = catalog.get(eid)
        entities[eid] = ent is not None and any(
            normalize_answer(name) in wanted for name in ent.names()
        )
    evidence = {
        piece.id: any(entities.get(eid, False) for eid in piece.entity_ids) for piece in pool
    }
    return WeakLabels(evidence=evidence, entities=entities)


@dataclass
class _Grads:
    w_self: list[np.ndarray]
    w_msg: list[np.ndarray]
    head_evidence: np.ndarray
    head_entity: np.ndarray


def _loss_targets(
    graph: BipartiteGraph, labels: WeakLabels
) -> tuple[np.ndarray, np.ndarray | None]:
    y_e = np.array([1.0 if labels.evidence.get(eid, False) else 0.0 for eid in graph.evidence_nodes])
    answers = [i for i, eid in enumerate(graph.entity_nodes) if labels.entities.get(eid, False)]
    t_n = None
    if answers:
        t_n = np.zeros(len(graph.entity_nodes))
        t_n[answers] = 1.0 / len(answers)
    return y_e, t_n


def multitask_loss(
    model: GnnModel, graph: BipartiteGraph, enc: NodeEncodings, labels: WeakLabels
) -> float:
    """Mean evidence BCE plus entity cross-entropy (skipped without answers)."""
    cache = _forward(model, graph, enc)
    y_e, t_n = _loss_targets(graph, labels)
    loss = 0.0
    if y_e.size:
        z = cache.evidence_logits
        # log(1 + e^z) - y*z, computed stably
        loss += float(np.mean(np.logaddexp(0.0, z) - y_e * z))
    if t_n is not None:
        z = cache.entity_logits
        log_p = z - (z.max() + np.log(np.exp(z - z.max()).sum()))
        loss += float(-(t_n * log_p).sum())
    return loss


def _backward(
    model: GnnModel, graph: BipartiteGraph, enc: NodeEncodings, labels: WeakLabels
) -> tuple[float, _Grads]:
    """Loss and analytic gradients for one graph."""
    cache = _forward(model, graph, enc)
    n_e, n_n = len(graph.evidence_nodes), len(graph.entity_nodes)
    p_e, p_n = _mean_operators(graph, n_e, n_n)
    y_e, t_n = _loss_targets(graph, labels)

    loss = 0.0
    d_he = np.zeros_like(cache.h_e[-1])
    d_hn = np.zeros_like(cache.h_n[-1])
    g_head_e = np.zeros(model.dim)
    g_head_n = np.zeros(model.dim)

    if y_e.size:
        z = cache.evidence_logits
        s = _sigmoid(z)
        loss += float(np.mean(np.logaddexp(0.0, z) - y_e * z))
        dz = (s - y_e) / n_e
        g_head_e = cache.h_e[-1].T @ dz
        d_he += np.outer(dz, model.head_evidence)
    if t_n is not None:
        z = cache.entity_logits
        p = _softmax(z)
        log_p = z - (z.max() + np.log(np.exp(z - z.max()).sum()))
        loss += float(-(t_n * log_p).sum())
        dz = p - t_n
        g_head_n = cache.h_n[-1].T @ dz
        d_hn += np.outer(dz, model.head_entity)

    g_self = [np.zeros((model.dim, model.dim)) for _ in range(model.layer_count)]
    g_msg = [np.zeros((model.dim, model.dim)) for _ in range(model.layer_count)]
    for layer in range(model.layer_count - 1, -1, -1):
        # gradient through h = tanh(prev @ Ws.T + m @ Wm.T), both node sides
        gz_e = d_he * (1.0 - cache.h_e[layer + 1] ** 2)
        gz_n = d_hn * (1.0 - cache.h_n[layer + 1] ** 2)
        g_self[layer] += gz_e.T @ cache.h_e[layer] + gz_n.T @ cache.h_n[layer]
        g_msg[layer] += gz_e.T @ cache.m_e[layer] + gz_n.T @ cache.m_n[layer]
        d_he = gz_e @ model.w_self[layer] + p_n.T @ (gz_n @ model.w_msg[layer])
        d_hn = gz_n @ model.w_self[layer] + p_e.T @ (gz_e @ model.w_msg[layer])
    return loss, _Grads(w_self=g_self, w_msg=g_msg, head_evidence=g_head_e, head_entity=g_head_n)


@dataclass(frozen=True)
class TrainingGraph:
    """One training example: graph, its encodings, and weak labels."""

    graph: BipartiteGraph
    encodings: NodeEncodings
    labels: WeakLabels


def dev_ap_at_k(model: GnnModel, dataset: Sequence[TrainingGraph], k: int = 30) -> float:
    """Fraction of graphs with a weak-positive piece in the top-k by GNN score."""
    if not dataset:
        return 0.0
    hits = 0
    for example in dataset:
        scores, _ = gnn_forward(model, example.graph, example.encodings)
        ranked = sorted(example.graph.evidence_nodes, key=lambda eid: (-scores[eid], eid))
        if any(example.labels.evidence.get(eid, False) for eid in ranked[:k]):
            hits += 1
    return hits / len(dataset)


def gnn_train(
    model: GnnModel,
    dataset: Sequence[TrainingGraph],
    epochs: int = 5,
    dev: Sequence[TrainingGraph] | None = None,
    learning_rate: float = 0.01,
    dev_k: int = 30,
) -> tuple[GnnModel, list[float]]:
    """Plain gradient descent with an epoch-wise snapshot selection.

    Updates are applied per graph in dataset order. After every epoch the
    model is scored on the dev set (the training set when none is given) and
    the snapshot with the best dev metric is returned, earliest epoch winning
    ties. ``epochs=0`` returns the initial model unchanged.
    """
    if not dataset:
        raise ValueError("training dataset is empty")
    if not any(any(ex.labels.evidence.values()) for ex in dataset):
        logger.warning("no positive evidence labels in training set; proceeding anyway")
    dev_set = dev if dev is not None else dataset
    current = model.copy()
    best = current.copy()
    best_metric = -1.0
    history: list[float] = []
    for _ in range(epochs):
        for example in dataset:
            _, grads = _backward(current, example.graph, example.encodings, example.labels)
            for layer in range(current.layer_count):
                current.w_self[layer] -= learning_rate * grads.w_self[layer]
                current.w_msg[layer] -= learning_rate * grads.w_msg[layer]
            current.head_evidence -= learning_rate * grads.head_evidence
            current.head_entity -= learning_rate * grads.head_entity
        metric = dev_ap_at_k(current, dev_set, k=dev_k)
        history.append(metric)
        if metric > best_metric:
            best_metric = metric
            best = current.copy()
    if epochs == 0:
        return model.copy(), history
    return best, history


# ---------------------------------------------------------------------------
# Cross-encoder scoring


class CeClient(Protocol):
    """Wire contract for an external cross-encoder scorer."""

    def score(self, query: str, passage: str) -> float: ...


def jaccard_score(query: str, passage: str) -> float:
    """Embedded fallback: token-set Jaccard overlap."""
    a, b = set(tokenize(query)), set(tokenize(passage))
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def ce_score(
    si: StructuredIntent,
    piece: EvidencePiece,
    client: CeClient | None = None,
    fallback: str = "",
) -> float:
    """Relatedness of one piece to the intent, remote or embedded.

    Transport failures from the client propagate; the embedded fallback never
    raises.
    """
    query = si_concat(si, fallback)
    if client is not None:
        return client.score(query, piece.text)
    return jaccard_score(query, piece.text)


# ---------------------------------------------------------------------------
# Schedule execution


class Scorer(Protocol):
    """Assigns a relevance score to every piece of a stage's survivors."""

    def score_pool(self, pieces: Sequence[EvidencePiece], stage: int) -> list[float]: ...


class CeScorer:
    """Cross-encoder scorer with per-stage clients and shared fallback."""

    def __init__(
        self,
        si: StructuredIntent,
        stage_clients: Sequence[CeClient | None] = (),
        fallback: str = "",
    ):
        self.si = si
        self.stage_clients = list(stage_clients)
        self.fallback = fallback

    def _client(self, stage: int) -> CeClient | None:
        if 0 <= stage < len(self.stage_clients):
            return self.stage_clients[stage]
        return None

    def score_pool(self, pieces: Sequence[EvidencePiece], stage: int) -> list[float]:
        client = self._client(stage)
        return [ce_score(self.si, p, client, self.fallback) for p in pieces]


class Bm25Scorer:
    """Keeps the incoming retrieval scores (plain truncation)."""

    def score_pool(self, pieces: Sequence[EvidencePiece], stage: int) -> list[float]:
        return [p.score for p in pieces]


class GnnScorer:
    """Scores stages with per-stage GNN models (the last model is reused
    when the schedule has more stages than models)."""

    def __init__(
        self,
        models: Sequence[GnnModel],
        si: StructuredIntent,
        catalog: EntityCatalog,
        schedule: RerankSchedule = RerankSchedule(),
        fallback: str = "",
    ):
        if not models:
            raise ValueError("GnnScorer requires at least one model")
        self.models = list(models)
        self.si = si
        self.catalog = catalog
        self.schedule = schedule
        self.fallback = fallback

    def score_pool(self, pieces: Sequence[EvidencePiece], stage: int) -> list[float]:
        model = self.models[min(stage, len(self.models) - 1)]
        graph = build_graph(pieces, self.schedule.evidence_cap, self.schedule.entity_cap)
        enc = encode_nodes(graph, self.si, pieces, self.catalog, model.dim, self.fallback)
        scores, _ = gnn_forward(model, graph, enc)
        # pieces evicted by the evidence cap sort below every scored one
        return [scores.get(p.id, float("-inf")) for p in pieces]


def run_schedule(
    pool: Sequence[EvidencePiece],
    schedule: RerankSchedule,
    scorer: Scorer,
) -> list[EvidencePiece]:
    """Apply the staged reduction and return the final ranked survivors.

    Within a stage, survivors keep ``output_k`` by descending score with the
    prior rank breaking ties; a stage whose survivors already fit in
    ``output_k`` is skipped, leaving the pool unchanged. Final scores are
    attached to the returned pieces.
    """
    if not pool:
        raise ValueError("run_schedule requires a non-empty pool")
    survivors = list(pool)
    for stage, (input_k, output_k) in enumerate(schedule.stages):
        survivors = survivors[:input_k]
        if len(survivors) <= output_k:
            continue
        scores = scorer.score_pool(survivors, stage)
        order = sorted(range(len(survivors)), key=lambda i: (-scores[i], i))[:output_k]
        survivors = [replace(survivors[i], score=scores[i]) for i in order]
    return survivors


# ---------------------------------------------------------------------------
# Checkpoint format: JSON header line, then the weight matrices as raw
# little-endian float64 in row-major order (w_self per layer, w_msg per
# layer, evidence head, entity head), in that order.


def save_checkpoint(models: Sequence[GnnModel], path: str | Path) -> None:
    if not models:
        raise ValueError("nothing to save")
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "stages": len(models),
        "layer_count": models[0].layer_count,
        "dim": models[0].dim,
        "rng_seed": models[0].rng_seed,
    }
    for model in models:
        if (model.layer_count, model.dim) != (header["layer_count"], header["dim"]):
            raise ValueError("all stage models must share layer_count and dim")
        model.validate()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("ascii") + b"\n")
        for model in models:
            for w in [*model.w_self, *model.w_msg]:
                fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(model.head_evidence, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(model.head_entity, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> list[GnnModel]:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line.decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"{path}: not a checkpoint file: {exc}") from exc
        if header.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path}: not a checkpoint file")
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')!r}")
        layer_count, dim = header["layer_count"], header["dim"]
        matrix_bytes = dim * dim * 8
        models = []
        for _ in range(header["stages"]):
            def read_array(nbytes: int, shape: tuple[int, ...]) -> np.ndarray:
                buf = fh.read(nbytes)
                if len(buf) != nbytes:
                    raise ValueError(f"{path}: truncated checkpoint")
                return np.frombuffer(buf, dtype="<f8").reshape(shape).copy()

            w_self = [read_array(matrix_bytes, (dim, dim)) for _ in range(layer_count)]
            w_msg = [read_array(matrix_bytes, (dim, dim)) for _ in range(layer_count)]
            head_e = read_array(dim * 8, (dim,))
            head_n = read_array(dim * 8, (dim,))
            models.append(
                GnnModel(
                    layer_count=layer_count,
                    dim=dim,
                    w_self=w_self,
                    w_msg=w_msg,
                    head_evidence=head_e,
                    head_entity=head_n,
                    rng_seed=header["rng_seed"],
                )
            )
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after checkpoint payload")
    return models

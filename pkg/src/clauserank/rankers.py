"""Importance rankers over a per-(party, category) candidate sentence set.

All rankers return a permutation of their candidates as a RankedList. Graph
rankers run PageRank over cosine similarities of TF-ISF vectors; LSA scores
sentences from a one-sided Jacobi SVD of the term matrix; KL-Sum orders by
greedy divergence minimization; oracle and model ranking consume gold scores
and imported pairwise predictions.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ._kernels import jacobi_svd, pagerank
from .btrank import RankedList, ScoreTable, fit_bradley_terry, rank_from_scores
from .categorize import Category
from .errors import ConvergenceError, DegenerateInput, MissingGold, NoPredictions

log = logging.getLogger(__name__)

KL_SMOOTHING = 0.001

_SPLIT = re.compile(r"[^0-9a-z]+")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("clauserank.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


STOPWORDS = _load_stopwords()


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop the fixed stopword list."""
    return [t for t in _SPLIT.split(text.lower()) if t and t not in STOPWORDS]


@dataclass
class CandidateSet:
    contract_id: str
    party: str
    category: Category | None
    indices: list[int]
    texts: list[str]

    def __post_init__(self):
        if len(self.indices) != len(self.texts):
            raise ValueError("indices and texts must align")

    def __len__(self):
        return len(self.indices)


@dataclass
class SimilarityGraph:
    nodes: list[int]
    weights: np.ndarray  # symmetric cosine similarities, zero diagonal


def term_count_matrix(texts) -> tuple[list[str], np.ndarray]:
    """Raw term-by-sentence count matrix over the tokenized texts."""
    token_lists = [tokenize(t) for t in texts]
    vocab = sorted({tok for toks in token_lists for tok in toks})
    vindex = {t: i for i, t in enumerate(vocab)}
    mat = np.zeros((len(vocab), len(texts)))
    for s, toks in enumerate(token_lists):
        for tok in toks:
            mat[vindex[tok], s] += 1.0
    return vocab, mat


def tfisf_matrix(texts) -> tuple[list[str], np.ndarray]:
    """Term-by-sentence matrix of tf * ln(N / sentence-frequency)."""
    vocab, mat = term_count_matrix(texts)
    if vocab:
        sf = (mat > 0).sum(axis=1)
        isf = np.log(len(texts) / sf)
        mat = mat * isf[:, None]
    return vocab, mat


def build_similarity_graph(cands: CandidateSet) -> SimilarityGraph:
    _, mat = tfisf_matrix(cands.texts)
    n = len(cands)
    norms = np.sqrt((mat * mat).sum(axis=0))
    weights = np.zeros((n, n))
    if mat.size:
        safe = np.where(norms > 0, norms, 1.0)
        unit = mat / safe
        weights = unit.T @ unit
        weights[norms == 0, :] = 0.0
        weights[:, norms == 0] = 0.0
        np.clip(weights, 0.0, 1.0, out=weights)
    np.fill_diagonal(weights, 0.0)
    return SimilarityGraph(nodes=list(cands.indices), weights=weights)


def pagerank_scores(weights: np.ndarray, damping: float, tol: float, max_iter: int) -> np.ndarray:
    """Power iteration with uniform teleport; ConvergenceError past max_iter."""
    w = np.ascontiguousarray(weights, dtype=np.float64)
    out_weight = w.sum(axis=1)
    p, iterations, converged = pagerank(w, out_weight, damping, tol, max_iter)
    p = np.asarray(p, dtype=float)
    if not converged:
        raise ConvergenceError(f"PageRank did not converge in {iterations} iterations")
    return p / p.sum()


def _ranked(cands: CandidateSet, score_by_index: dict[int, float]) -> RankedList:
    # quantize to 12 significant digits so ulp-level noise (e.g. from rotation
    # order in the SVD) cannot defeat the document-order tie rule
    def key(i):
        return (-float(f"{score_by_index[i]:.12g}"), i)

    order = sorted(cands.indices, key=key)
    return RankedList(items=order, scores=[float(score_by_index[i]) for i in order])


def rank_random(cands: CandidateSet, seed: int) -> RankedList:
    """Seeded uniform shuffle; scores are synthetic descending ranks."""
    if not len(cands):
        return RankedList()
    order = list(cands.indices)
    random.Random(seed).shuffle(order)
    n = len(order)
    return RankedList(items=order, scores=[(n - k) / n for k in range(n)])


def rank_textrank(
    cands: CandidateSet, damping: float = 0.85, tol: float = 1e-6, max_iter: int = 100
) -> RankedList:
    if not len(cands):
        return RankedList()
    graph = build_similarity_graph(cands)
    p = pagerank_scores(graph.weights, damping, tol, max_iter)
    return _ranked(cands, dict(zip(cands.indices, p)))


def rank_lexrank(
    cands: CandidateSet,
    threshold: float = 0.1,
    damping: float = 0.85,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> RankedList:
    """Continuous LexRank: similarity edges kept only above `threshold`."""
    if not len(cands):
        return RankedList()
    graph = build_similarity_graph(cands)
    pruned = np.where(graph.weights > threshold, graph.weights, 0.0)
    p = pagerank_scores(pruned, damping, tol, max_iter)
    return _ranked(cands, dict(zip(cands.indices, p)))


def rank_lsa(cands: CandidateSet, topics: int | None = None) -> RankedList:
    """Steinberger-Jezek LSA: score_s = sqrt(sum_k (sigma_k * v_ks)^2) over the
    top `topics` singular triplets of the term matrix."""
    if not len(cands):
        return RankedList()
    vocab, counts = term_count_matrix(cands.texts)
    if not vocab:
        raise DegenerateInput("no vocabulary left after tokenization")
    n = len(cands)
    k = min(3, n) if topics is None else min(topics, n)
    sv, v = jacobi_svd(counts)
    weighted = (sv[:k][None, :] * v[:, :k]) ** 2
    scores = np.sqrt(weighted.sum(axis=1))
    return _ranked(cands, dict(zip(cands.indices, scores)))


def _kl(p_doc: np.ndarray, counts: np.ndarray) -> float:
    total = counts.sum()
    q = (counts + KL_SMOOTHING) / (total + KL_SMOOTHING * len(counts))
    return float((p_doc * np.log(p_doc / q)).sum())


def rank_klsum(cands: CandidateSet) -> RankedList:
    """Greedy KL(doc || summary) minimization; the selection order is the
    ranking. Greedy scores need not be monotone."""
    if not len(cands):
        return RankedList()
    token_lists = [tokenize(t) for t in cands.texts]
    vocab = sorted({t for toks in token_lists for t in toks})
    if not vocab:
        n = len(cands)
        return RankedList(items=list(cands.indices), scores=[0.0] * n)
    vindex = {t: i for i, t in enumerate(vocab)}
    sent_counts = [
        np.bincount(np.array([vindex[t] for t in toks], dtype=int), minlength=len(vocab)).astype(float)
        for toks in token_lists
    ]
    doc_counts = np.sum(sent_counts, axis=0)
    p_doc = (doc_counts + KL_SMOOTHING) / (doc_counts.sum() + KL_SMOOTHING * len(vocab))

    remaining = list(range(len(cands)))
    summary = np.zeros(len(vocab))
    order, scores = [], []
    while remaining:
        best_pos, best_kl = None, None
        for pos in remaining:
            kl = _kl(p_doc, summary + sent_counts[pos])
            if best_kl is None or kl < best_kl:
                best_pos, best_kl = pos, kl
        summary += sent_counts[best_pos]
        remaining.remove(best_pos)
        order.append(cands.indices[best_pos])
        scores.append(-best_kl)
    return RankedList(items=order, scores=scores)


def rank_oracle(cands: CandidateSet, gold: ScoreTable) -> RankedList:
    """Descending gold score over the candidate subset; MissingGold when a
    candidate has no gold score."""
    if not len(cands):
        return RankedList()
    missing = [i for i in cands.indices if i not in gold.scores]
    if missing:
        raise MissingGold(f"no gold score for sentences {missing}")
    return _ranked(cands, {i: float(gold.scores[i]) for i in cands.indices})


def rank_model(cands: CandidateSet, pairwise_predictions, pseudo: float = 0.1) -> RankedList:
    """Bradley-Terry fit over imported pairwise predictions restricted to the
    candidate set; uncovered candidates go last in document order."""
    if not len(cands):
        return RankedList()
    members = set(cands.indices)
    covered_pairs = [c for c in pairwise_predictions if c.winner in members and c.loser in members]
    if not covered_pairs:
        raise NoPredictions("no prediction covers a candidate pair")
    table = fit_bradley_terry(covered_pairs, pseudo=pseudo)
    ranked = rank_from_scores(table)
    uncovered = sorted(members - set(ranked.items))
    if uncovered:
        log.warning("%d candidates not covered by any prediction ranked last", len(uncovered))
    items = ranked.items + uncovered
    scores = ranked.scores + [0.0] * len(uncovered)
    return RankedList(items=items, scores=scores)


RANKER_NAMES = ("random", "klsum", "lsa", "textrank", "lexrank", "oracle", "model")

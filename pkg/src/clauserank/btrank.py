"""Bradley-Terry aggregation of partial pairwise comparisons.

The solver is a minorization-maximization iteration over a dense comparison
matrix; a configurable pseudo-count ties every item to a dummy anchor with a
half-win/half-loss so disconnected graphs and undefeated items stay finite.
Scores are reported on the sum-to-one scale.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._kernels import bt_mm
from .errors import ConvergenceError, EmptyInput, UndefinedCorrelation, UnknownItem

log = logging.getLogger(__name__)

NORM_NONE = "none"
NORM_SUM_TO_ONE = "sum_to_one"
NORM_LOG_CENTERED = "log_centered"


@dataclass(frozen=True)
class PairwiseComparison:
    winner: object
    loser: object
    weight: float = 1.0

    def __post_init__(self):
        if self.winner == self.loser:
            raise ValueError(f"comparison of {self.winner!r} with itself")
        if not self.weight > 0:
            raise ValueError(f"non-positive weight {self.weight}")


@dataclass
class ScoreTable:
    scores: dict
    normalization: str = NORM_NONE

    def __post_init__(self):
        vals = np.array(list(self.scores.values()), dtype=float)
        if vals.size and not np.isfinite(vals).all():
            raise ValueError("non-finite score")
        if self.normalization == NORM_SUM_TO_ONE and vals.size:
            if (vals <= 0).any():
                raise ValueError("sum_to_one table requires strictly positive scores")
            if abs(vals.sum() - 1.0) > 1e-9:
                raise ValueError(f"sum_to_one table sums to {vals.sum()!r}")

    def __getitem__(self, item):
        return self.scores[item]

    def __contains__(self, item):
        return item in self.scores

    def items(self):
        return self.scores.items()

    def to_log_centered(self) -> "ScoreTable":
        """Log scores recentered to mean 0; requires strictly positive scores."""
        vals = np.array(list(self.scores.values()), dtype=float)
        if vals.size == 0:
            return ScoreTable({}, normalization=NORM_LOG_CENTERED)
        if (vals <= 0).any():
            raise ValueError("log_centered requires strictly positive scores")
        logs = np.log(vals)
        centered = logs - logs.mean()
        return ScoreTable(
            dict(zip(self.scores.keys(), centered.tolist())), normalization=NORM_LOG_CENTERED
        )


@dataclass
class RankedList:
    items: list = field(default_factory=list)
    scores: list = field(default_factory=list)

    def __len__(self):
        return len(self.items)


def fit_bradley_terry(
    comparisons,
    tol: float = 1e-8,
    max_iter: int = 10000,
    pseudo: float = 0.1,
) -> ScoreTable:
    """Maximize the Bradley-Terry likelihood with the MM update
    s_i <- W_i / sum_{j!=i} n_ij / (s_i + s_j).

    `pseudo` adds a virtual half-win/half-loss between every item and a dummy
    anchor (connectivity guard; set 0 for the exact MLE on well-posed data).
    Raises EmptyInput on no comparisons and ConvergenceError (carrying the
    last iterate) when max_iter passes without max |delta log s| < tol."""
    comparisons = list(comparisons)
    if not comparisons:
        raise EmptyInput("no comparisons")
    items = sorted({c.winner for c in comparisons} | {c.loser for c in comparisons})
    index = {item: k for k, item in enumerate(items)}
    n = len(items)
    size = n + 1 if pseudo > 0 else n

    n_mat = np.zeros((size, size))
    wins = np.zeros(size)
    for c in comparisons:
        w, l = index[c.winner], index[c.loser]
        n_mat[w, l] += c.weight
        n_mat[l, w] += c.weight
        wins[w] += c.weight
    if pseudo > 0:
        anchor = n
        for k in range(n):
            n_mat[k, anchor] += pseudo
            n_mat[anchor, k] += pseudo
            wins[k] += pseudo / 2.0
            wins[anchor] += pseudo / 2.0

    s, iterations, converged = bt_mm(n_mat, wins, tol, max_iter)
    raw = np.asarray(s, dtype=float)[:n]
    total = raw.sum()
    scores = {item: float(raw[index[item]] / total) if total > 0 else 0.0 for item in items}
    if not converged:
        raise ConvergenceError(
            f"Bradley-Terry MM did not converge in {iterations} iterations", scores=scores
        )
    return ScoreTable(scores=scores, normalization=NORM_SUM_TO_ONE)


def rank_from_scores(scores: ScoreTable) -> RankedList:
    """Descending score order, ties broken by ascending item id."""
    ordered = sorted(scores.scores, key=lambda item: (-scores.scores[item], item))
    return RankedList(items=ordered, scores=[float(scores.scores[i]) for i in ordered])


def derive_all_pairs(scores: ScoreTable) -> list[PairwiseComparison]:
    """One comparison per unordered pair, winner = higher score; score ties go
    to the lower id and are logged."""
    items = sorted(scores.scores)
    if len(items) < 2:
        raise EmptyInput("need at least 2 items to derive pairs")
    out = []
    ties = 0
    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            sa, sb = scores.scores[a], scores.scores[b]
            if sa == sb:
                ties += 1
                out.append(PairwiseComparison(winner=a, loser=b))
            elif sa > sb:
                out.append(PairwiseComparison(winner=a, loser=b))
            else:
                out.append(PairwiseComparison(winner=b, loser=a))
    if ties:
        log.warning("derive_all_pairs: %d tied pairs resolved to the lower id", ties)
    return out


def pair_probability(scores: ScoreTable, a, b) -> float:
    """P(a beats b) = s_a / (s_a + s_b)."""
    if a not in scores.scores:
        raise UnknownItem(repr(a))
    if b not in scores.scores:
        raise UnknownItem(repr(b))
    if a == b:
        raise ValueError("pair_probability of an item with itself")
    sa, sb = scores.scores[a], scores.scores[b]
    return sa / (sa + sb)


def average_ranks(values) -> np.ndarray:
    """Ranks 1..n with ties assigned the average of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    sv = v[order]
    while i < len(v):
        j = i
        while j + 1 < len(v) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Pearson correlation of average-tie ranks."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or len(xs) < 2:
        raise UndefinedCorrelation("need two equal-length vectors of >= 2 values")
    rx = average_ranks(xs)
    ry = average_ranks(ys)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    if denom == 0:
        raise UndefinedCorrelation("zero rank variance")
    return float((rx @ ry) / denom)

import math
import random

import numpy as np
import pytest

from clauserank.btrank import (
    NORM_SUM_TO_ONE,
    PairwiseComparison as PC,
    RankedList,
    ScoreTable,
    derive_all_pairs,
    fit_bradley_terry,
    pair_probability,
    rank_from_scores,
    spearman,
)
from clauserank.errors import ConvergenceError, EmptyInput, UndefinedCorrelation, UnknownItem


# --- fit_bradley_terry ------------------------------------------------------


def test_fit_symmetric_pair():
    t = fit_bradley_terry([PC("a", "b"), PC("b", "a")])
    assert t.normalization == NORM_SUM_TO_ONE
    assert t["a"] == pytest.approx(0.5, abs=1e-6)
    assert t["b"] == pytest.approx(0.5, abs=1e-6)


def test_fit_two_item_closed_form():
    # MLE of a 3:1 record is a score ratio of exactly wins/losses
    t = fit_bradley_terry([PC("a", "b")] * 3 + [PC("b", "a")], pseudo=0.0)
    assert t["a"] / t["b"] == pytest.approx(3.0, abs=1e-4)


def test_fit_matches_grid_search_oracle():
    comps = [PC("a", "b")] * 2 + [PC("b", "c")] * 2 + [PC("a", "c")] * 2

    def loglik(sa, sb, sc):
        s = {"a": sa, "b": sb, "c": sc}
        return sum(c.weight * math.log(s[c.winner] / (s[c.winner] + s[c.loser])) for c in comps)

    best, best_ll = None, -math.inf
    steps = 60
    for i in range(1, steps):
        for j in range(1, steps - i):
            sa, sb = i / steps, j / steps
            sc = 1.0 - sa - sb
            if sc <= 0:
                continue
            ll = loglik(sa, sb, sc)
            if ll > best_ll:
                best, best_ll = (sa, sb, sc), ll
    oracle_rank = [x for _, x in sorted(zip(best, "abc"), reverse=True)]
    assert oracle_rank == ["a", "b", "c"]

    fitted = rank_from_scores(fit_bradley_terry(comps))
    assert fitted.items == oracle_rank


def test_fit_empty_raises():
    with pytest.raises(EmptyInput):
        fit_bradley_terry([])


def test_fit_unregularized_all_loss_item_does_not_converge():
    with pytest.raises(ConvergenceError) as exc:
        fit_bradley_terry([PC("a", "b")], pseudo=0.0, max_iter=50)
    assert exc.value.scores is not None
    assert set(exc.value.scores) == {"a", "b"}


def test_fit_weights_respected():
    t1 = fit_bradley_terry([PC("a", "b", weight=3.0), PC("b", "a", weight=1.0)], pseudo=0.0)
    t2 = fit_bradley_terry([PC("a", "b")] * 3 + [PC("b", "a")], pseudo=0.0)
    assert t1["a"] == pytest.approx(t2["a"], abs=1e-9)


def test_comparison_validation():
    with pytest.raises(ValueError):
        PC("a", "a")
    with pytest.raises(ValueError):
        PC("a", "b", weight=0.0)


def test_score_table_sum_to_one_invariant():
    with pytest.raises(ValueError):
        ScoreTable({"a": 0.7, "b": 0.7}, normalization=NORM_SUM_TO_ONE)
    with pytest.raises(ValueError):
        ScoreTable({"a": 1.5, "b": -0.5}, normalization=NORM_SUM_TO_ONE)
    ScoreTable({"a": 0.5, "b": 0.5}, normalization=NORM_SUM_TO_ONE)


def test_score_table_log_centered():
    t = ScoreTable({"a": 0.75, "b": 0.25}, normalization=NORM_SUM_TO_ONE)
    lc = t.to_log_centered()
    vals = list(lc.scores.values())
    assert sum(vals) == pytest.approx(0.0, abs=1e-12)
    assert lc.scores["a"] - lc.scores["b"] == pytest.approx(math.log(3.0))
    # ranking is preserved under the transform
    assert rank_from_scores(lc).items == rank_from_scores(t).items


# --- rank_from_scores -------------------------------------------------------


def test_rank_descending():
    r = rank_from_scores(ScoreTable({"a": 0.5, "b": 0.3, "c": 0.2}))
    assert r.items == ["a", "b", "c"]
    assert r.scores == [0.5, 0.3, 0.2]


def test_rank_tie_breaks_by_id():
    r = rank_from_scores(ScoreTable({"b": 0.5, "a": 0.5}))
    assert r.items == ["a", "b"]


def test_rank_empty():
    assert rank_from_scores(ScoreTable({})).items == []


def test_rank_scale_invariance():
    rng = random.Random(5)
    scores = {i: rng.random() + 0.01 for i in range(12)}
    base = rank_from_scores(ScoreTable(scores)).items
    scaled = rank_from_scores(ScoreTable({k: 37.2 * v for k, v in scores.items()})).items
    assert base == scaled


# --- derive_all_pairs -------------------------------------------------------


def test_derive_pair_count():
    t = ScoreTable({i: 1.0 / (i + 1) for i in range(4)})
    assert len(derive_all_pairs(t)) == 6


def test_derive_winners():
    pairs = derive_all_pairs(ScoreTable({"a": 0.5, "b": 0.3, "c": 0.2}))
    got = {(p.winner, p.loser) for p in pairs}
    assert got == {("a", "b"), ("a", "c"), ("b", "c")}


def test_derive_n300():
    t = ScoreTable({i: float(i + 1) for i in range(300)})
    assert len(derive_all_pairs(t)) == 44850  # C(300, 2)


def test_derive_tie_goes_to_lower_id():
    pairs = derive_all_pairs(ScoreTable({"a": 0.5, "b": 0.5}))
    assert pairs[0].winner == "a" and pairs[0].loser == "b"


def test_derive_single_item_raises():
    with pytest.raises(EmptyInput):
        derive_all_pairs(ScoreTable({"a": 1.0}))


# --- pair_probability -------------------------------------------------------


def test_pair_probability_values():
    t = ScoreTable({"a": 0.75, "b": 0.25})
    assert pair_probability(t, "a", "b") == pytest.approx(0.75)
    t2 = ScoreTable({"a": 0.5, "b": 0.5})
    assert pair_probability(t2, "a", "b") == pytest.approx(0.5)


def test_pair_probability_complement():
    rng = random.Random(9)
    for _ in range(20):
        t = ScoreTable({i: rng.random() + 1e-3 for i in range(6)})
        a, b = rng.sample(range(6), 2)
        assert pair_probability(t, a, b) + pair_probability(t, b, a) == pytest.approx(1.0)


def test_pair_probability_unknown_item():
    with pytest.raises(UnknownItem):
        pair_probability(ScoreTable({"a": 1.0, "b": 1.0}), "a", "z")


# --- spearman ---------------------------------------------------------------


def test_spearman_identical():
    assert spearman([3.0, 1.0, 2.0], [3.0, 1.0, 2.0]) == pytest.approx(1.0)


def test_spearman_reversed():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert spearman(xs, list(reversed(xs))) == pytest.approx(-1.0)


def test_spearman_hand_value():
    # 1 - 6 * sum d^2 / (n(n^2-1)) = 1 - 12/60
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)


def test_spearman_tie_handling():
    # ties share average ranks; a perfectly matching tied pattern is still 1
    assert spearman([1, 1, 2, 3], [5, 5, 6, 7]) == pytest.approx(1.0)


def test_spearman_errors():
    with pytest.raises(UndefinedCorrelation):
        spearman([1, 2], [1, 2, 3])
    with pytest.raises(UndefinedCorrelation):
        spearman([1.0, 1.0, 1.0], [1, 2, 3])
    with pytest.raises(UndefinedCorrelation):
        spearman([1.0], [2.0])


# --- solver properties ------------------------------------------------------


def test_consistency_recovers_planted_order():
    # comparisons sampled without noise from a strict total order
    rng = random.Random(13)
    for trial in range(5):
        n = rng.randrange(5, 12)
        order = list(range(n))  # 0 strongest
        comps = [PC(i, i + 1) for i in range(n - 1)]  # adjacent coverage
        for _ in range(6 * n):
            a, b = rng.sample(order, 2)
            comps.append(PC(min(a, b), max(a, b)))
        fitted = rank_from_scores(fit_bradley_terry(comps, pseudo=0.1))
        assert fitted.items == order


def test_monotonicity_adding_win_never_lowers_ratio():
    rng = random.Random(31)
    for trial in range(10):
        n = 6
        comps = []
        for _ in range(40):
            a, b = rng.sample(range(n), 2)
            comps.append(PC(a, b))
        before = fit_bradley_terry(comps)
        after = fit_bradley_terry(comps + [PC(0, 1)])
        r_before = before[0] / before[1]
        r_after = after[0] / after[1]
        assert r_after >= r_before * (1 - 1e-6)


def test_round_trip_through_derived_pairs():
    rng = random.Random(77)
    for trial in range(8):
        n = rng.randrange(3, 10)
        values = rng.sample(range(1, 1000), n)
        table = ScoreTable({i: v / 1000.0 for i, v in enumerate(values)})
        ranked = rank_from_scores(table)
        refit = fit_bradley_terry(derive_all_pairs(table))
        assert rank_from_scores(refit).items == ranked.items

"""End-to-end summarization and evaluation: categorize -> rank -> budget ->
select, reference construction, IR metrics, and the nested category -> party
-> contract averaging.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

from .btrank import ScoreTable
from .categorize import Category, CategoryPrediction, cluster_by_category
from .corpus import Contract, PartyRef
from .errors import EmptyContract, EmptyInput, EmptyReport, InvalidRanking, MissingGold
from .rankers import (
    CandidateSet,
    rank_klsum,
    rank_lexrank,
    rank_lsa,
    rank_model,
    rank_oracle,
    rank_random,
    rank_textrank,
)

log = logging.getLogger(__name__)

DEFAULT_KS = (1, 3, 5, 10)
DEFAULT_NDCG_DEPTH = 10
DEFAULT_CAP = 10


@dataclass
class Summary:
    contract_id: str
    party: str
    compression_ratio: float
    cap: int
    selections: dict[Category, list[tuple[int, str]]]

    def to_dict(self) -> dict:
        return {
            "contract_id": self.contract_id,
            "party": self.party,
            "compression_ratio": self.compression_ratio,
            "cap": self.cap,
            "selections": {
                cat.value: [{"index": i, "text": t} for i, t in self.selections.get(cat, [])]
                for cat in Category
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Summary":
        selections = {
            Category(cat): [(rec["index"], rec["text"]) for rec in recs]
            for cat, recs in d["selections"].items()
        }
        return cls(d["contract_id"], d["party"], d["compression_ratio"], d["cap"], selections)

    def render_text(self) -> str:
        """Human-readable summary, one block per category in decreasing importance."""
        lines = [f"Summary for {self.party} — {self.contract_id} (CR={self.compression_ratio:g})"]
        for cat in Category:
            picked = self.selections.get(cat, [])
            lines.append("")
            lines.append(f"{cat.value.upper()}S ({len(picked)})")
            for rank, (idx, text) in enumerate(picked, start=1):
                lines.append(f"  {rank}. [{idx}] {text}")
        return "\n".join(lines) + "\n"


@dataclass
class MetricRow:
    contract_id: str
    party: str
    category: str
    p_at_k: dict[int, float]
    r_at_k: dict[int, float]
    f1_at_k: dict[int, float]
    map: float
    ndcg: float

    def metrics(self) -> dict[str, float]:
        out = {}
        for k in sorted(self.p_at_k):
            out[f"p@{k}"] = self.p_at_k[k]
        for k in sorted(self.r_at_k):
            out[f"r@{k}"] = self.r_at_k[k]
        for k in sorted(self.f1_at_k):
            out[f"f1@{k}"] = self.f1_at_k[k]
        out["map"] = self.map
        out["ndcg"] = self.ndcg
        return out


@dataclass
class Report:
    rows: list[MetricRow]
    averages: dict[str, float]
    per_contract: dict[str, dict[str, float]] = field(default_factory=dict)


def _largest_remainder(total: int, weights: dict) -> dict:
    """Integer shares of `total` proportional to weights; ties in the
    fractional remainders resolve in iteration order."""
    wsum = sum(weights.values())
    shares = {c: total * w / wsum for c, w in weights.items()}
    floors = {c: math.floor(s) for c, s in shares.items()}
    leftover = total - sum(floors.values())
    by_remainder = sorted(weights, key=lambda c: -(shares[c] - floors[c]))
    for c in by_remainder[:leftover]:
        floors[c] += 1
    return floors


def budget_per_category(
    cr: float, category_counts: dict[Category, int], n_total: int, cap: int = DEFAULT_CAP
) -> dict[Category, int]:
    """Split the summary budget round(cr * n_total) across categories
    proportionally to their candidate counts (largest-remainder rounding),
    clamping each to min(cap, count) and redistributing clamped surplus among
    the unclamped categories until everything is clamped or spent."""
    if n_total == 0:
        raise EmptyContract("no kept sentences to budget over")
    if not 0 < cr <= 1:
        raise ValueError(f"compression ratio {cr} outside (0, 1]")
    counts = {cat: int(category_counts.get(cat, 0)) for cat in Category}
    if any(v < 0 for v in counts.values()):
        raise ValueError("negative category count")
    alloc = {cat: 0 for cat in Category}
    clamp = {cat: min(cap, counts[cat]) for cat in Category}
    budget = math.floor(cr * n_total + 0.5)
    active = [cat for cat in Category if clamp[cat] > 0]
    while budget > 0 and active:
        shares = _largest_remainder(budget, {cat: counts[cat] for cat in active})
        for cat in active:
            take = min(shares[cat], clamp[cat] - alloc[cat])
            alloc[cat] += take
            budget -= take
        active = [cat for cat in active if clamp[cat] > alloc[cat]]
    return alloc


def ranking_metrics(
    predicted,
    reference,
    ks=DEFAULT_KS,
    n: int = DEFAULT_NDCG_DEPTH,
    contract_id: str = "",
    party: str = "",
    category: str = "",
) -> MetricRow:
    """Binary-relevance IR metrics of a predicted ordering against a reference
    set: P/R/F1 at each k (k clamped to |predicted|), average precision summed
    over every prefix, and NDCG at depth n."""
    predicted = list(predicted)
    reference = list(reference)
    if len(set(predicted)) != len(predicted):
        raise InvalidRanking("duplicate ids in predicted ranking")
    if not reference:
        raise EmptyInput("empty reference")
    refset = set(reference)
    rel = [1 if p in refset else 0 for p in predicted]

    def tp_at(k: int) -> int:
        return sum(rel[:k])

    p_at_k, r_at_k, f1_at_k = {}, {}, {}
    for k in ks:
        kk = min(k, len(predicted))
        if kk == 0:
            p = r = 0.0
        else:
            tp = tp_at(kk)
            p = tp / kk
            r = tp / len(reference)
        f1 = 0.0 if p * r == 0 else 2 * p * r / (p + r)
        p_at_k[k], r_at_k[k], f1_at_k[k] = p, r, f1

    ap = 0.0
    prev_recall = 0.0
    for k in range(1, len(predicted) + 1):
        tp = tp_at(k)
        precision = tp / k
        recall = tp / len(reference)
        ap += precision * (recall - prev_recall)
        prev_recall = recall

    depth = min(n, len(predicted))
    dcg = sum(rel[i] / math.log2(i + 2) for i in range(depth))
    ideal = min(n, len(reference))
    idcg = sum(1.0 / math.log2(i + 2) for i in range(ideal))
    ndcg = dcg / idcg

    return MetricRow(contract_id, party, category, p_at_k, r_at_k, f1_at_k, ap, ndcg)


_RANKERS = {
    "random": lambda cands, opt: rank_random(cands, seed=opt.get("seed", 0)),
    "klsum": lambda cands, opt: rank_klsum(cands),
    "lsa": lambda cands, opt: rank_lsa(cands, topics=opt.get("topics")),
    "textrank": lambda cands, opt: rank_textrank(
        cands, damping=opt.get("damping", 0.85), tol=opt.get("tol", 1e-6), max_iter=opt.get("max_iter", 100)
    ),
    "lexrank": lambda cands, opt: rank_lexrank(
        cands,
        threshold=opt.get("threshold", 0.1),
        damping=opt.get("damping", 0.85),
        tol=opt.get("tol", 1e-6),
        max_iter=opt.get("max_iter", 100),
    ),
    "oracle": lambda cands, opt: rank_oracle(cands, opt["gold_scores"]),
    "model": lambda cands, opt: rank_model(cands, opt["pairwise"], pseudo=opt.get("pseudo", 0.1)),
}


def build_summary(
    contract: Contract,
    party: PartyRef | str,
    ranker: str,
    predictions: list[CategoryPrediction],
    cr: float,
    cap: int = DEFAULT_CAP,
    **ranker_options,
) -> Summary:
    """Cluster predictions by category, rank each cluster with the chosen
    ranker, and keep the per-category budget."""
    if isinstance(party, str):
        party = contract.party(party)
    if ranker not in _RANKERS:
        raise ValueError(f"unknown ranker {ranker!r}; choose from {sorted(_RANKERS)}")
    kept = contract.kept_sentences()
    text_by_index = {s.index: s.text for s in kept}
    clusters = cluster_by_category(contract, party, predictions)
    counts = {cat: len(ix) for cat, ix in clusters.items()}
    budgets = budget_per_category(cr, counts, n_total=len(kept), cap=cap)

    selections: dict[Category, list[tuple[int, str]]] = {}
    for cat in Category:
        indices = clusters[cat]
        if not indices:
            selections[cat] = []
            continue
        cands = CandidateSet(
            contract_id=contract.id,
            party=party.canonical,
            category=cat,
            indices=indices,
            texts=[text_by_index[i] for i in indices],
        )
        ranked = _RANKERS[ranker](cands, ranker_options)
        top = ranked.items[: budgets[cat]]
        selections[cat] = [(i, text_by_index[i]) for i in top]
    return Summary(contract.id, party.canonical, cr, cap, selections)


def build_reference(
    contract: Contract,
    party: PartyRef | str,
    gold_labels: list[CategoryPrediction],
    gold_scores: ScoreTable,
    cr: float,
    cap: int = DEFAULT_CAP,
) -> Summary:
    """Reference summary: gold category labels ranked by gold importance."""
    party_name = party if isinstance(party, str) else party.canonical
    relevant = [
        p for p in gold_labels if p.contract_id == contract.id and p.party == party_name
    ]
    if not relevant:
        raise MissingGold(f"no gold labels for {contract.id}/{party_name}")
    if not gold_scores.scores:
        raise MissingGold(f"no gold scores for {contract.id}/{party_name}")
    return build_summary(
        contract, party, "oracle", relevant, cr, cap=cap, gold_scores=gold_scores
    )


def evaluate_summaries(predicted: Summary, reference: Summary, ks=DEFAULT_KS, n=DEFAULT_NDCG_DEPTH):
    """One MetricRow per category with a non-empty reference selection."""
    rows = []
    for cat in Category:
        ref_ids = [i for i, _ in reference.selections.get(cat, [])]
        if not ref_ids:
            log.warning(
                "skipping %s/%s/%s: empty reference", reference.contract_id, reference.party, cat.value
            )
            continue
        pred_ids = [i for i, _ in predicted.selections.get(cat, [])]
        rows.append(
            ranking_metrics(
                pred_ids,
                ref_ids,
                ks=ks,
                n=n,
                contract_id=predicted.contract_id,
                party=predicted.party,
                category=cat.value,
            )
        )
    return rows


def aggregate_report(rows) -> Report:
    """Nested means: categories within (contract, party), parties within
    contract, contracts overall."""
    rows = list(rows)
    if not rows:
        raise EmptyReport("no metric rows")
    metric_names = list(rows[0].metrics())

    by_contract: dict[str, dict[str, list[MetricRow]]] = {}
    for row in rows:
        by_contract.setdefault(row.contract_id, {}).setdefault(row.party, []).append(row)

    def mean(values):
        return sum(values) / len(values)

    per_contract = {}
    for cid, parties in by_contract.items():
        party_means = []
        for party_rows in parties.values():
            party_means.append({m: mean([r.metrics()[m] for r in party_rows]) for m in metric_names})
        per_contract[cid] = {m: mean([pm[m] for pm in party_means]) for m in metric_names}
    averages = {m: mean([per_contract[cid][m] for cid in per_contract]) for m in metric_names}
    return Report(rows=rows, averages=averages, per_contract=per_contract)


def write_report_csv(report: Report, path) -> None:
    """MetricRow per line plus an averages footer."""
    metric_names = list(report.rows[0].metrics()) if report.rows else list(report.averages)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["contract_id", "party", "category", *metric_names])
        for row in report.rows:
            m = row.metrics()
            writer.writerow(
                [row.contract_id, row.party, row.category, *[f"{m[name]:.6f}" for name in metric_names]]
            )
        writer.writerow(["AVERAGE", "", "", *[f"{report.averages[name]:.6f}" for name in metric_names]])


def write_summary(summary: Summary, json_path, text_path=None) -> None:
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if text_path is not None:
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(summary.render_text())


def read_summary(path) -> Summary:
    with open(path, encoding="utf-8") as fh:
        return Summary.from_dict(json.load(fh))

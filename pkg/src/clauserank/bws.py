"""Best-worst scaling machinery: 4-tuple designs, annotation validation,
conversion to pairwise comparisons, counting scores, split-half reliability.

Tuple designs are built by seeded shuffle-and-chunk rounds followed by a
replacement-only repair pass that swaps under-covered sentences into tuples
whose members are over-covered, so the published constraints hold: exactly
ceil(factor*N) unique tuples, four distinct members each, every sentence in
at least min_occ tuples.
"""

from __future__ import annotations

import json
import logging
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone

from .btrank import NORM_NONE, PairwiseComparison, ScoreTable, spearman
from .errors import (
    InfeasibleDesign,
    InsufficientAnnotations,
    InvalidPick,
    MissingTuple,
    UndefinedCorrelation,
)

log = logging.getLogger(__name__)

MIN_DESIGN_SIZE = 16


@dataclass(frozen=True)
class Tuple4:
    tuple_id: str
    contract_id: str
    party: str
    members: tuple

    def __post_init__(self):
        if len(self.members) != 4 or len(set(self.members)) != 4:
            raise ValueError(f"tuple {self.tuple_id!r} needs 4 distinct members, got {self.members}")
        object.__setattr__(self, "members", tuple(self.members))


@dataclass(frozen=True)
class BWSAnnotation:
    tuple_id: str
    annotator_id: str
    best: object
    worst: object
    timestamp: datetime

    def to_record(self) -> dict:
        return {
            "tuple_id": self.tuple_id,
            "annotator_id": self.annotator_id,
            "best": self.best,
            "worst": self.worst,
            "timestamp": self.timestamp.isoformat(),
        }


def generate_tuples(
    sentence_ids,
    factor: float = 1.5,
    min_occ: int = 6,
    seed: int = 0,
    contract_id: str = "contract",
    party: str = "party",
) -> list[Tuple4]:
    """Deterministic 4-tuple design over the given ids.

    Produces exactly ceil(factor*N) unique tuples with every id occurring in
    at least min_occ of them. Raises InfeasibleDesign for N < 16 or when the
    slot count 4*ceil(factor*N) cannot cover min_occ*N."""
    ids = list(sentence_ids)
    n = len(ids)
    if n < MIN_DESIGN_SIZE:
        raise InfeasibleDesign(f"need at least {MIN_DESIGN_SIZE} sentences, got {n}")
    if len(set(ids)) != n:
        raise ValueError("sentence_ids contain duplicates")
    target = math.ceil(factor * n)
    if 4 * target < min_occ * n:
        raise InfeasibleDesign(
            f"{target} tuples provide {4 * target} slots, fewer than min_occ*N = {min_occ * n}"
        )

    rng = random.Random(seed)
    tuples: list[tuple] = []
    seen: set[frozenset] = set()
    occ: Counter = Counter({i: 0 for i in ids})

    def try_add(members) -> bool:
        key = frozenset(members)
        if len(key) != 4 or key in seen:
            return False
        seen.add(key)
        tuples.append(tuple(members))
        for m in members:
            occ[m] += 1
        return True

    while len(tuples) < target:
        shuffled = ids[:]
        rng.shuffle(shuffled)
        chunks = [shuffled[k : k + 4] for k in range(0, n - n % 4, 4)]
        rem = n % 4
        if rem:
            # complete the leftover ids with the first ids of this shuffle
            extra = shuffled[n - rem :] + shuffled[: 4 - rem]
            chunks.append(extra)
        for chunk in chunks:
            if len(tuples) >= target:
                break
            if not try_add(chunk):
                # collision: redraw a fresh random 4-subset
                for _ in range(1000):
                    if try_add(rng.sample(ids, 4)):
                        break
                else:
                    raise InfeasibleDesign("could not draw a fresh unique tuple")

    _repair_coverage(tuples, seen, occ, ids, min_occ)

    width = max(5, len(str(len(tuples))))
    return [
        Tuple4(tuple_id=f"{contract_id}:{party}:{k:0{width}d}", contract_id=contract_id, party=party, members=t)
        for k, t in enumerate(tuples)
    ]


def _repair_coverage(tuples, seen, occ, ids, min_occ):
    """Swap under-covered ids over over-covered members; replaces tuples, never
    adds them."""
    under = sorted((i for i in ids if occ[i] < min_occ), key=lambda i: (occ[i], str(i)))
    while under:
        s = under[0]
        swapped = False
        for t_idx, members in enumerate(tuples):
            if s in members:
                continue
            donors = sorted(
                (m for m in members if occ[m] > min_occ), key=lambda m: (-occ[m], str(m))
            )
            for donor in donors:
                new_members = tuple(s if m == donor else m for m in members)
                key = frozenset(new_members)
                if key in seen:
                    continue
                seen.discard(frozenset(members))
                seen.add(key)
                tuples[t_idx] = new_members
                occ[donor] -= 1
                occ[s] += 1
                swapped = True
                break
            if swapped:
                break
        if not swapped:
            raise InfeasibleDesign(f"cannot raise occurrence of {s!r} to {min_occ}")
        under = sorted((i for i in ids if occ[i] < min_occ), key=lambda i: (occ[i], str(i)))


def validate_annotation(
    tup: Tuple4,
    best,
    worst,
    annotator_id: str = "",
    timestamp: datetime | None = None,
) -> BWSAnnotation:
    """InvalidPick unless best and worst are distinct tuple members."""
    if best == worst:
        raise InvalidPick(f"best and worst are both {best!r}")
    if best not in tup.members:
        raise InvalidPick(f"best {best!r} is not a member of {tup.tuple_id}")
    if worst not in tup.members:
        raise InvalidPick(f"worst {worst!r} is not a member of {tup.tuple_id}")
    if timestamp is None:
        timestamp = datetime.now(timezone.utc)
    return BWSAnnotation(tup.tuple_id, annotator_id, best, worst, timestamp)


def _tuple_index(tuples) -> dict[str, Tuple4]:
    if isinstance(tuples, dict):
        return tuples
    return {t.tuple_id: t for t in tuples}


def tuples_to_pairs(annotations, tuples) -> list[PairwiseComparison]:
    """Five inequalities per annotation: best beats the two middles and worst,
    and each middle beats worst."""
    by_id = _tuple_index(tuples)
    pairs = []
    for ann in annotations:
        tup = by_id.get(ann.tuple_id)
        if tup is None:
            raise MissingTuple(ann.tuple_id)
        others = [m for m in tup.members if m != ann.best and m != ann.worst]
        for o in others:
            pairs.append(PairwiseComparison(winner=ann.best, loser=o))
        pairs.append(PairwiseComparison(winner=ann.best, loser=ann.worst))
        for o in others:
            pairs.append(PairwiseComparison(winner=o, loser=ann.worst))
    return pairs


def counting_scores(annotations, universe, tuples, warn_uncovered: bool = True) -> ScoreTable:
    """fraction-chosen-best minus fraction-chosen-worst per sentence.

    Sentences of the universe that appear in no annotated tuple score 0."""
    by_id = _tuple_index(tuples)
    appearances: Counter = Counter()
    best: Counter = Counter()
    worst: Counter = Counter()
    for ann in annotations:
        tup = by_id.get(ann.tuple_id)
        if tup is None:
            raise MissingTuple(ann.tuple_id)
        for m in tup.members:
            appearances[m] += 1
        best[ann.best] += 1
        worst[ann.worst] += 1
    scores = {}
    uncovered = []
    for s in universe:
        if appearances[s] == 0:
            uncovered.append(s)
            scores[s] = 0.0
        else:
            scores[s] = (best[s] - worst[s]) / appearances[s]
    if uncovered and warn_uncovered:
        log.warning("%d sentences appear in no annotated tuple; scored 0", len(uncovered))
    return ScoreTable(scores=scores, normalization=NORM_NONE)


def split_half_reliability(annotations, tuples, repetitions: int = 100, seed: int = 0):
    """Mean and std of the Spearman correlation between counting scores of two
    random annotation halves, over `repetitions` splits.

    Tuples with fewer than two annotations are excluded (warned). Each
    repetition r uses its own generator seeded with seed + r."""
    by_id = _tuple_index(tuples)
    grouped: dict[str, list[BWSAnnotation]] = defaultdict(list)
    for ann in annotations:
        if ann.tuple_id not in by_id:
            raise MissingTuple(ann.tuple_id)
        grouped[ann.tuple_id].append(ann)
    eligible = sorted(tid for tid, anns in grouped.items() if len(anns) >= 2)
    excluded = len(grouped) - len(eligible)
    if excluded:
        log.warning("%d tuples with fewer than 2 annotations excluded from SHR", excluded)
    if not eligible:
        raise InsufficientAnnotations("no tuple has 2 or more annotations")

    universe = sorted({m for tid in eligible for m in by_id[tid].members})
    corrs = []
    for r in range(repetitions):
        rng = random.Random(seed + r)
        bin_a, bin_b = [], []
        for tid in eligible:
            anns = grouped[tid][:]
            rng.shuffle(anns)
            half = len(anns) // 2
            bin_a.extend(anns[:half])
            bin_b.extend(anns[half:])
        ta = counting_scores(bin_a, universe, by_id, warn_uncovered=False)
        tb = counting_scores(bin_b, universe, by_id, warn_uncovered=False)
        try:
            corrs.append(spearman([ta[s] for s in universe], [tb[s] for s in universe]))
        except UndefinedCorrelation:
            continue
    if not corrs:
        raise InsufficientAnnotations("every split produced constant scores")
    mean = sum(corrs) / len(corrs)
    var = sum((c - mean) ** 2 for c in corrs) / len(corrs)
    return mean, math.sqrt(var)


# --- JSON Lines I/O -------------------------------------------------------


def write_tuples(tuples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in tuples:
            fh.write(
                json.dumps(
                    {
                        "tuple_id": t.tuple_id,
                        "contract_id": t.contract_id,
                        "party": t.party,
                        "members": list(t.members),
                    }
                )
                + "\n"
            )


def read_tuples(path) -> list[Tuple4]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(
                Tuple4(rec["tuple_id"], rec["contract_id"], rec["party"], tuple(rec["members"]))
            )
    return out


def write_annotations(annotations, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ann in annotations:
            fh.write(json.dumps(ann.to_record()) + "\n")


def read_annotations(path) -> list[BWSAnnotation]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(
                BWSAnnotation(
                    tuple_id=rec["tuple_id"],
                    annotator_id=rec["annotator_id"],
                    best=rec["best"],
                    worst=rec["worst"],
                    timestamp=datetime.fromisoformat(rec["timestamp"]),
                )
            )
    return out

"""Deontic categorization of (sentence, party) pairs.

Two sources: a rule baseline that matches a trigger lexicon within a token
window after a party alias, and an import path for externally produced
predictions (JSON Lines). Permission is not a category here; producers must
merge it into entitlement before import.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .corpus import Contract, PartyRef, Sentence
from .errors import PredictionImportError

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class Category(str, Enum):
    OBLIGATION = "obligation"
    ENTITLEMENT = "entitlement"
    PROHIBITION = "prohibition"

    @classmethod
    def parse(cls, name: str) -> "Category":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise PredictionImportError(f"unknown category {name!r}") from None


SOURCE_RULE = "rule"
SOURCE_IMPORTED = "imported"
SOURCE_GOLD = "gold"


@dataclass(frozen=True)
class CategoryPrediction:
    contract_id: str
    sentence_index: int
    party: str
    labels: frozenset[Category]
    source: str = SOURCE_IMPORTED

    def key(self):
        return (self.contract_id, self.sentence_index, self.party, self.source)


def default_lexicon() -> dict[Category, tuple[tuple[str, ...], ...]]:
    raw = json.loads(resources.files("clauserank.data").joinpath("trigger_lexicon.json").read_text("utf-8"))
    return compile_lexicon(raw)


def compile_lexicon(raw: dict[str, list[str]]) -> dict[Category, tuple[tuple[str, ...], ...]]:
    """Tokenize each trigger phrase once; multi-word triggers match token runs."""
    out = {}
    for name, phrases in raw.items():
        cat = Category.parse(name)
        out[cat] = tuple(tuple(_TOKEN_RE.findall(p.lower())) for p in phrases)
    return out


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def categorize_rule(
    sentence: Sentence | str,
    party: PartyRef,
    lexicon: dict[Category, tuple[tuple[str, ...], ...]] | None = None,
    window: int = 10,
) -> set[Category]:
    """Categories whose trigger phrase starts within `window` tokens after a
    party alias. A trigger strictly contained in a longer trigger of another
    category is suppressed, so "shall not" yields prohibition without the
    obligation its "shall" would otherwise add."""
    if lexicon is None:
        lexicon = default_lexicon()
    text = sentence.text if isinstance(sentence, Sentence) else sentence
    toks = _tokens(text)
    if not toks:
        return set()

    alias_ends = []
    for alias in sorted(party.aliases):
        alias_toks = tuple(_TOKEN_RE.findall(alias.lower()))
        if not alias_toks:
            continue
        for start in range(len(toks) - len(alias_toks) + 1):
            if tuple(toks[start : start + len(alias_toks)]) == alias_toks:
                alias_ends.append(start + len(alias_toks) - 1)
    if not alias_ends:
        return set()

    matches = []  # (category, start, end) token spans, end exclusive
    for cat, triggers in lexicon.items():
        for trig in triggers:
            if not trig:
                continue
            for start in range(len(toks) - len(trig) + 1):
                if tuple(toks[start : start + len(trig)]) != trig:
                    continue
                if any(0 < start - q <= window for q in alias_ends):
                    matches.append((cat, start, start + len(trig)))

    result = set()
    for cat, start, end in matches:
        contained = any(
            other_cat != cat and o_start <= start and end <= o_end and (o_end - o_start) > (end - start)
            for other_cat, o_start, o_end in matches
        )
        if not contained:
            result.add(cat)
    return result


def import_predictions(path, source: str = SOURCE_IMPORTED, known_parties=None) -> list[CategoryPrediction]:
    """Read predictions from a JSON Lines file
    {contract_id, sentence_index, party, labels:[...]}.

    Duplicate keys: last record wins with a logged warning. Malformed lines,
    unknown categories (including "permission"), and unknown parties raise
    PredictionImportError with the line number."""
    known = set(known_parties) if known_parties is not None else None
    by_key: dict[tuple, CategoryPrediction] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise PredictionImportError(f"invalid JSON: {e}", line=lineno) from None
            try:
                contract_id = str(rec["contract_id"])
                sentence_index = int(rec["sentence_index"])
                party = str(rec["party"])
                raw_labels = rec["labels"]
            except (KeyError, TypeError, ValueError) as e:
                raise PredictionImportError(f"missing or malformed field: {e}", line=lineno) from None
            if not isinstance(raw_labels, list):
                raise PredictionImportError("labels must be a list", line=lineno)
            if known is not None and party not in known:
                raise PredictionImportError(f"unknown party {party!r}", line=lineno)
            try:
                labels = frozenset(Category.parse(lbl) for lbl in raw_labels)
            except PredictionImportError as e:
                raise PredictionImportError(str(e), line=lineno) from None
            pred = CategoryPrediction(contract_id, sentence_index, party, labels, source)
            if pred.key() in by_key:
                log.warning("duplicate prediction key %s at line %d; last record wins", pred.key(), lineno)
            by_key[pred.key()] = pred
    return list(by_key.values())


def predict_rule(contract: Contract, party: PartyRef, lexicon=None, window: int = 10) -> list[CategoryPrediction]:
    """Run the rule baseline over all kept sentences of a contract."""
    preds = []
    for s in contract.kept_sentences():
        labels = categorize_rule(s, party, lexicon=lexicon, window=window)
        preds.append(
            CategoryPrediction(contract.id, s.index, party.canonical, frozenset(labels), SOURCE_RULE)
        )
    return preds


def cluster_by_category(
    contract: Contract, party: PartyRef, predictions: list[CategoryPrediction]
) -> dict[Category, list[int]]:
    """Map each category to the kept sentence indices predicted to carry it,
    in document order. Multi-label sentences appear in several clusters."""
    kept = {s.index for s in contract.kept_sentences()}
    labels_by_index: dict[int, frozenset[Category]] = {}
    for p in predictions:
        if p.contract_id != contract.id or p.party != party.canonical:
            continue
        if p.sentence_index not in kept:
            log.debug("prediction for non-kept sentence %s:%d ignored", p.contract_id, p.sentence_index)
            continue
        labels_by_index[p.sentence_index] = p.labels
    clusters: dict[Category, list[int]] = {c: [] for c in Category}
    for idx in sorted(labels_by_index):
        for cat in labels_by_index[idx]:
            clusters[cat].append(idx)
    return clusters

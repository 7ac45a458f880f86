"""Parse raw contract text into ordered, party-attributed, filtered sentences.

The splitter is deterministic and rule-based: it breaks on terminal
punctuation followed by whitespace and a capital (or section marker),
protecting a shipped legal-abbreviation list, decimal numbers, and bare
numeric item markers. Filtering drops definitional sentences and sentences
that mention no party alias.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources

from .errors import EmptyContract, MissingParties

FILTER_DEFINITIONAL = "definitional"
FILTER_NO_PARTY = "no_party_mention"

_TERMINALS = ".;?!"
_OPENERS = "\"'“‘("
_ITEM_MARKER = re.compile(r"\d{1,3}\.\s")

DEFAULT_DEFINITIONAL_PATTERNS = (
    r"\bmeans\b",
    r"\bmean\b",
    r"shall mean",
    r"shall have the meaning",
    r"is defined as",
)


def _load_data_text(name: str) -> str:
    return resources.files("clauserank.data").joinpath(name).read_text(encoding="utf-8")


def default_abbreviations() -> frozenset[str]:
    lines = _load_data_text("abbreviations.txt").splitlines()
    return frozenset(ln.strip().lower() for ln in lines if ln.strip() and not ln.startswith("#"))


@dataclass(frozen=True)
class PartyRef:
    """A contracting role and the surface aliases that refer to it."""

    canonical: str
    aliases: frozenset[str]

    def __post_init__(self):
        if not self.aliases:
            raise ValueError(f"party {self.canonical!r} has no aliases")
        object.__setattr__(self, "aliases", frozenset(a.lower() for a in self.aliases))

    def alias_pattern(self) -> re.Pattern:
        alts = "|".join(re.escape(a) for a in sorted(self.aliases))
        return re.compile(rf"\b(?:{alts})\b", re.IGNORECASE)


@dataclass
class Sentence:
    index: int
    text: str
    kept: bool = True
    filter_reason: str | None = None


@dataclass
class Contract:
    id: str
    title: str
    sentences: list[Sentence]
    parties: list[PartyRef]

    def kept_sentences(self) -> list[Sentence]:
        return [s for s in self.sentences if s.kept]

    def party(self, canonical: str) -> PartyRef:
        for p in self.parties:
            if p.canonical == canonical:
                return p
        raise KeyError(canonical)


@dataclass
class CorpusConfig:
    """Party alias table, definitional patterns, and abbreviation list."""

    parties: list[PartyRef] = field(default_factory=list)
    definitional_patterns: tuple[str, ...] = DEFAULT_DEFINITIONAL_PATTERNS
    abbreviations: frozenset[str] = field(default_factory=default_abbreviations)
    trigger_window: int = 10

    def __post_init__(self):
        aliases_seen: dict[str, str] = {}
        for p in self.parties:
            for a in p.aliases:
                if a in aliases_seen and aliases_seen[a] != p.canonical:
                    raise ValueError(f"alias {a!r} shared by {aliases_seen[a]} and {p.canonical}")
                aliases_seen[a] = p.canonical

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusConfig":
        parties = [PartyRef(name, frozenset(aliases)) for name, aliases in d.get("parties", {}).items()]
        kwargs = {}
        if "definitional_patterns" in d:
            kwargs["definitional_patterns"] = tuple(d["definitional_patterns"])
        if "abbreviations" in d:
            kwargs["abbreviations"] = frozenset(a.lower() for a in d["abbreviations"])
        if "trigger_window" in d:
            kwargs["trigger_window"] = int(d["trigger_window"])
        return cls(parties=parties, **kwargs)

    @classmethod
    def from_json(cls, path) -> "CorpusConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def default_config() -> CorpusConfig:
    return CorpusConfig.from_dict(json.loads(_load_data_text("default_config.json")))


def _word_before(text: str, pos: int) -> str:
    """Maximal [A-Za-z0-9.] run ending just before text[pos]."""
    start = pos
    while start > 0 and (text[start - 1].isalnum() or text[start - 1] == "."):
        start -= 1
    return text[start:pos]


def segment_sentences(raw: str, abbreviations: frozenset[str] | None = None) -> list[str]:
    """Split text on terminal punctuation followed by whitespace and a capital
    letter or section marker.

    Protected from splitting: the abbreviation list (trailing-dot tokens such
    as Sec., No., U.S.), decimal numbers (no whitespace after the dot), and
    bare numeric item markers like "1." opening a sentence. Concatenating the
    result reproduces the input up to whitespace normalization.
    """
    if abbreviations is None:
        abbreviations = default_abbreviations()
    if not raw or not raw.strip():
        return []

    n = len(raw)
    boundaries = []
    seg_start = 0
    for i, ch in enumerate(raw):
        if ch not in _TERMINALS:
            continue
        if i + 1 >= n or not raw[i + 1].isspace():
            continue
        j = i + 1
        while j < n and raw[j].isspace():
            j += 1
        if j >= n:
            continue
        nxt = raw[j]
        if nxt in _OPENERS and j + 1 < n:
            nxt = raw[j + 1]
        # a numbered item marker ("2. ") opens a sentence like a capital does
        if not (nxt.isupper() or nxt == "§" or _ITEM_MARKER.match(raw, j)):
            continue
        if ch == ".":
            word = _word_before(raw, i)
            if word.lower() in abbreviations:
                continue
            # a bare "1." / "2." list marker opens a sentence, it never ends one
            if word.isdigit() and raw[seg_start:i].strip() == word:
                continue
        boundaries.append(i + 1)
        seg_start = i + 1

    pieces = []
    start = 0
    for b in boundaries + [n]:
        piece = raw[start:b].strip()
        if piece:
            pieces.append(piece)
        start = b
    return pieces


def detect_party_mentions(sentence: Sentence | str, party: PartyRef) -> bool:
    """True iff any alias of the party occurs as a whole word (case-insensitive)."""
    text = sentence.text if isinstance(sentence, Sentence) else sentence
    return party.alias_pattern().search(text) is not None


def filter_sentences(
    contract: Contract, definitional_patterns: tuple[str, ...] = DEFAULT_DEFINITIONAL_PATTERNS
) -> Contract:
    """Return a copy with kept flags set: a sentence survives iff it matches no
    definitional pattern and mentions at least one party alias. Idempotent."""
    if not contract.parties:
        raise MissingParties(f"contract {contract.id!r} has no parties configured")
    patterns = [re.compile(p, re.IGNORECASE) for p in definitional_patterns]
    out = []
    for s in contract.sentences:
        if any(p.search(s.text) for p in patterns):
            out.append(replace(s, kept=False, filter_reason=FILTER_DEFINITIONAL))
        elif not any(detect_party_mentions(s, party) for party in contract.parties):
            out.append(replace(s, kept=False, filter_reason=FILTER_NO_PARTY))
        else:
            out.append(replace(s, kept=True, filter_reason=None))
    return Contract(id=contract.id, title=contract.title, sentences=out, parties=contract.parties)


def load_contract(raw: str, config: CorpusConfig, contract_id: str = "contract", title: str = "") -> Contract:
    """Segment raw text into a Contract carrying the configured parties.

    Raises EmptyContract for blank input and MissingParties when the config
    names no parties. Filtering is a separate step (filter_sentences).
    """
    if not raw or not raw.strip():
        raise EmptyContract("contract text is empty")
    if not config.parties:
        raise MissingParties("corpus config names no parties")
    texts = segment_sentences(raw, config.abbreviations)
    sentences = [Sentence(index=i, text=t) for i, t in enumerate(texts)]
    return Contract(id=contract_id, title=title, sentences=sentences, parties=list(config.parties))


def sentences_to_records(contract: Contract) -> list[dict]:
    """JSON Lines records: {contract_id, index, text, kept, filter_reason}."""
    return [
        {
            "contract_id": contract.id,
            "index": s.index,
            "text": s.text,
            "kept": s.kept,
            "filter_reason": s.filter_reason,
        }
        for s in contract.sentences
    ]

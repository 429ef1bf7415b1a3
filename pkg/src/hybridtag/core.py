"""Readings, cohorts, corpora, tokenization and ambiguity metrics.

Tags are plain strings.  A :class:`Reading` is an ordered bundle of fine
tags, a :class:`Cohort` is a word form with its alternative readings, and a
sentence is a tuple of cohorts.
"""

from __future__ import annotations

import io
import re
from importlib import resources
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, TextIO

from .errors import FormatError

FINE = "fine"
COARSE = "coarse"
TAGSETS = (FINE, COARSE)

GOLD_MARK = "<Gold>"
TERMINAL_PUNCT = frozenset(".!?")


def check_tag(name: str) -> str:
    if not name or any(ch.isspace() for ch in name):
        raise ValueError(f"invalid tag {name!r}")
    if name == GOLD_MARK:
        raise ValueError(f"{GOLD_MARK} is reserved")
    return name


@dataclass(frozen=True)
class Reading:
    """One morphological analysis, e.g. ``V PRES -SG3 VFIN``."""

    tags: tuple[str, ...]

    def __post_init__(self):
        if not isinstance(self.tags, tuple):
            object.__setattr__(self, "tags", tuple(self.tags))
        if not self.tags:
            raise ValueError("empty reading")
        for tag in self.tags:
            check_tag(tag)
        if len(set(self.tags)) != len(self.tags):
            raise ValueError(f"duplicate tag in reading {' '.join(self.tags)!r}")

    @classmethod
    def parse(cls, text: str) -> Reading:
        return cls(tuple(text.split()))

    @cached_property
    def tagset(self) -> frozenset[str]:
        return frozenset(self.tags)

    def has_all(self, tags: Iterable[str]) -> bool:
        return self.tagset.issuperset(tags)

    def __str__(self):
        return " ".join(self.tags)


def readings(*texts: str) -> tuple[Reading, ...]:
    """Shorthand: ``readings("V INF", "N NOM SG")``."""
    return tuple(Reading.parse(t) for t in texts)


@dataclass(frozen=True)
class Cohort:
    surface: str
    readings: tuple[Reading, ...]
    gold: int | None = None

    def __post_init__(self):
        if not isinstance(self.readings, tuple):
            object.__setattr__(self, "readings", tuple(self.readings))
        if not self.surface:
            raise ValueError("empty surface")
        if len(set(self.readings)) != len(self.readings):
            raise ValueError(f"duplicate reading in cohort {self.surface!r}")
        if self.gold is not None and not 0 <= self.gold < len(self.readings):
            raise ValueError(f"gold index {self.gold} out of range for {self.surface!r}")

    @property
    def ambiguous(self) -> bool:
        return len(self.readings) > 1

    @property
    def gold_reading(self) -> Reading | None:
        return None if self.gold is None else self.readings[self.gold]

    def with_readings(self, new: Iterable[Reading]) -> Cohort:
        """Copy with a reduced reading set; the gold index follows its reading."""
        new = tuple(new)
        gold = None
        if self.gold is not None:
            g = self.readings[self.gold]
            gold = new.index(g) if g in new else None
        return Cohort(self.surface, new, gold)

    def without_gold(self) -> Cohort:
        return self if self.gold is None else Cohort(self.surface, self.readings)


Sentence = tuple  # tuple[Cohort, ...]


@dataclass(frozen=True)
class AnnotatedCorpus:
    sentences: tuple[tuple[Cohort, ...], ...] = ()
    tagset: str = FINE

    def __post_init__(self):
        if self.tagset not in TAGSETS:
            raise ValueError(f"unknown tagset {self.tagset!r}")
        object.__setattr__(
            self, "sentences", tuple(tuple(s) for s in self.sentences))
        for sent in self.sentences:
            if not sent:
                raise ValueError("empty sentence")
            if self.tagset == COARSE:
                for cohort in sent:
                    if any(len(r.tags) != 1 for r in cohort.readings):
                        raise ValueError(
                            f"coarse cohort {cohort.surface!r} has a multi-tag reading")

    def cohorts(self) -> Iterator[Cohort]:
        for sent in self.sentences:
            yield from sent

    def __len__(self):
        return sum(len(s) for s in self.sentences)

    def without_gold(self) -> AnnotatedCorpus:
        return AnnotatedCorpus(
            tuple(tuple(c.without_gold() for c in s) for s in self.sentences),
            self.tagset)


# ---------------------------------------------------------------------------
# vertical cohort format

def parse_corpus(stream: TextIO | str, tagset: str = FINE, source=None) -> AnnotatedCorpus:
    """Read the vertical format: ``"<word>"`` lines, TAB-indented readings,
    blank lines between sentences."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    sentences = []
    current: list[Cohort] = []
    surface = None
    word_line = 0
    rds: list[Reading] = []
    gold = None

    def close_cohort():
        nonlocal surface
        if surface is None:
            return
        if not rds:
            raise FormatError(f"word {surface!r} has no readings", word_line, source)
        try:
            current.append(Cohort(surface, tuple(rds), gold))
        except ValueError as exc:
            raise FormatError(str(exc), word_line, source) from None
        surface = None

    def close_sentence():
        close_cohort()
        if current:
            sentences.append(tuple(current))
            current.clear()

    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\n")
        if not line.strip():
            close_sentence()
        elif line.startswith('"<') and line.endswith('>"') and len(line) > 4:
            close_cohort()
            surface = line[2:-2]
            word_line = lineno
            rds = []
            gold = None
        elif line.startswith("\t"):
            if surface is None:
                raise FormatError("reading line before any word line", lineno, source)
            tags = line[1:].split(" ")
            is_gold = tags[-1] == GOLD_MARK
            if is_gold:
                tags.pop()
                if gold is not None:
                    raise FormatError("second gold marker in cohort", lineno, source)
            if not tags or any(not t for t in tags):
                if is_gold:
                    raise FormatError("gold marker on unknown reading", lineno, source)
                raise FormatError("malformed reading line", lineno, source)
            try:
                reading = Reading(tuple(tags))
            except ValueError as exc:
                raise FormatError(str(exc), lineno, source) from None
            if tagset == COARSE and len(reading.tags) != 1:
                raise FormatError("coarse reading must be a single tag", lineno, source)
            if is_gold:
                gold = len(rds)
            rds.append(reading)
        else:
            raise FormatError(f"malformed line {line!r}", lineno, source)
    close_sentence()
    return AnnotatedCorpus(tuple(sentences), tagset)


def serialize_corpus(corpus: AnnotatedCorpus) -> str:
    out = []
    for sent in corpus.sentences:
        for cohort in sent:
            out.append(f'"<{cohort.surface}>"\n')
            for i, r in enumerate(cohort.readings):
                mark = f" {GOLD_MARK}" if i == cohort.gold else ""
                out.append(f"\t{r}{mark}\n")
        out.append("\n")
    return "".join(out)


# ---------------------------------------------------------------------------
# tokenization

@dataclass(frozen=True)
class TokenizationPolicy:
    """How text is cut into tokens for one tagger.

    Fine mode splits contractions and merges multiword units; coarse mode
    leaves contractions whole and multiword units as separate words.
    """

    mode: str = FINE
    multiword_units: tuple[str, ...] = ()
    contraction_splits: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in TAGSETS:
            raise ValueError(f"unknown tokenization mode {self.mode!r}")
        object.__setattr__(self, "multiword_units", tuple(self.multiword_units))
        for mwu in self.multiword_units:
            if not mwu.split():
                raise ValueError("empty multiword unit")
        splits = {}
        for key, parts in self.contraction_splits.items():
            parts = tuple(parts)
            if not key or not parts or any(not p for p in parts):
                raise ValueError(f"empty contraction entry {key!r}")
            splits[key] = parts
        object.__setattr__(self, "contraction_splits", splits)

    def coarse(self) -> TokenizationPolicy:
        return replace(self, mode=COARSE)

    def fine(self) -> TokenizationPolicy:
        return replace(self, mode=FINE)

    @cached_property
    def _mwu_words(self) -> list[tuple[str, ...]]:
        # greedy-longest: more words first, then file order
        words = [tuple(m.split()) for m in self.multiword_units]
        return sorted(words, key=len, reverse=True)

    def split_contraction(self, surface: str) -> tuple[str, ...] | None:
        parts = self.contraction_splits.get(surface)
        if parts is not None:
            return parts
        parts = self.contraction_splits.get(surface.lower())
        if parts is None:
            return None
        if surface[:1].isupper():
            parts = (parts[0][:1].upper() + parts[0][1:],) + parts[1:]
        return parts

    def match_mwu(self, surfaces: Sequence[str], start: int) -> int:
        """Length of the longest multiword unit starting at ``start``, or 0."""
        for words in self._mwu_words:
            n = len(words)
            if start + n > len(surfaces):
                continue
            first = surfaces[start]
            if not (first[:1].lower() == words[0][:1].lower() and first[1:] == words[0][1:]):
                continue
            if all(surfaces[start + k] == words[k] for k in range(1, n)):
                return n
        return 0


def load_policy(stream: TextIO | str, source=None) -> TokenizationPolicy:
    """``MWU<TAB>in spite of`` and ``SPLIT<TAB>aren't<TAB>are not`` lines."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    mwus = []
    splits = {}
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if fields[0] == "MWU" and len(fields) == 2 and fields[1].split():
            mwus.append(" ".join(fields[1].split()))
        elif fields[0] == "SPLIT" and len(fields) == 3 and fields[1] and fields[2].split():
            splits[fields[1]] = tuple(fields[2].split())
        else:
            raise FormatError(f"malformed policy line {line!r}", lineno, source)
    return TokenizationPolicy(FINE, tuple(mwus), splits)


def default_policy() -> TokenizationPolicy:
    """The shipped policy: *in spite of* as one unit, *aren't* split."""
    text = resources.files("hybridtag").joinpath("data/default.tok").read_text(encoding="utf-8")
    return load_policy(text, source="default.tok")


def serialize_policy(policy: TokenizationPolicy) -> str:
    lines = [f"MWU\t{m}\n" for m in policy.multiword_units]
    lines += [f"SPLIT\t{k}\t{' '.join(v)}\n" for k, v in policy.contraction_splits.items()]
    return "".join(lines)


class Token(NamedTuple):
    surface: str
    start: int
    end: int


_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)+(?!\w)|\w+(?:['’-]\w+)*|\S")


def _raw_sentences(text: str) -> list[list[Token]]:
    sentences = []
    current: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        tok = Token(m.group(), m.start(), m.end())
        current.append(tok)
        if tok.surface in TERMINAL_PUNCT and (tok.end == len(text) or text[tok.end].isspace()):
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


def _split_spans(tok: Token, parts: tuple[str, ...]) -> list[Token]:
    # each part but the last takes the longest common prefix it shares with
    # what is left of the surface; the last part takes the remainder
    out = []
    pos = tok.start
    rest = tok.surface
    for part in parts[:-1]:
        n = 0
        while n < min(len(part), len(rest)) and part[n].lower() == rest[n].lower():
            n += 1
        out.append(Token(part, pos, pos + n))
        pos += n
        rest = rest[n:]
    out.append(Token(parts[-1], pos, tok.end))
    return out


def tokenize_spans(text: str, policy: TokenizationPolicy) -> list[list[Token]]:
    """Tokenize into sentences of tokens carrying character spans."""
    result = []
    for raw in _raw_sentences(text):
        if policy.mode == COARSE:
            result.append(raw)
            continue
        split: list[Token] = []
        for tok in raw:
            parts = policy.split_contraction(tok.surface)
            split.extend(_split_spans(tok, parts) if parts else [tok])
        merged = []
        surfaces = [t.surface for t in split]
        i = 0
        while i < len(split):
            n = policy.match_mwu(surfaces, i)
            if n > 1:
                merged.append(Token(" ".join(surfaces[i:i + n]), split[i].start, split[i + n - 1].end))
                i += n
            else:
                merged.append(split[i])
                i += 1
        result.append(merged)
    return result


def tokenize(text: str, policy: TokenizationPolicy) -> list[list[str]]:
    """Sentences of token surfaces.

    >>> tokenize("They aren't here.", TokenizationPolicy(contraction_splits={"aren't": ("are", "not")}))
    [['They', 'are', 'not', 'here', '.']]
    """
    return [[t.surface for t in sent] for sent in tokenize_spans(text, policy)]


# ---------------------------------------------------------------------------
# metrics

class AmbiguityMetrics(NamedTuple):
    ambiguous_fraction: float
    total_readings: int
    readings_per_word: float
    tokens: int
    ambiguous: int


def ambiguity_metrics(corpus: AnnotatedCorpus | Iterable[Cohort]) -> AmbiguityMetrics:
    cohorts = corpus.cohorts() if isinstance(corpus, AnnotatedCorpus) else corpus
    tokens = ambiguous = total = 0
    for c in cohorts:
        tokens += 1
        total += len(c.readings)
        if len(c.readings) > 1:
            ambiguous += 1
    if tokens == 0:
        raise ValueError("empty corpus")
    return AmbiguityMetrics(ambiguous / tokens, total, total / tokens, tokens, ambiguous)

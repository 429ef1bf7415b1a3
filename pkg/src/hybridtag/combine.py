"""Joining the coarse tagger's output with fine cohorts.

The two token streams are aligned by word form, and each coarse tag is
translated through a decision list of fine readings, most frequent first.
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, NamedTuple, Sequence, TextIO

from .core import AnnotatedCorpus, Cohort, Reading, TokenizationPolicy
from .errors import AlignmentError, FormatError

CAREFUL = "careful"
UNAMBIGUOUS = "unambiguous"


class AlignmentLink(NamedTuple):
    fine: int
    coarse: int


def _surface(tok) -> str:
    return tok.surface if isinstance(tok, Cohort) else tok


def align(fine: Sequence, coarse: Sequence, policy: TokenizationPolicy) -> list[AlignmentLink]:
    """Monotone links between fine and coarse tokens (surfaces or cohorts).

    Identical forms link one to one, a multiword unit links to each of its
    coarse words, and the parts of a split contraction link to the whole.
    """
    fine = [_surface(t) for t in fine]
    coarse = [_surface(t) for t in coarse]
    links = []
    i = j = 0
    while i < len(fine) and j < len(coarse):
        f, c = fine[i], coarse[j]
        if f == c:
            links.append(AlignmentLink(i, j))
            i += 1
            j += 1
            continue
        words = f.split(" ")
        n = len(words)
        if n > 1 and coarse[j:j + n] == words and policy.match_mwu(coarse, j) >= n:
            links.extend(AlignmentLink(i, j + k) for k in range(n))
            i += 1
            j += n
            continue
        parts = policy.split_contraction(c)
        if parts and tuple(fine[i:i + len(parts)]) == parts:
            links.extend(AlignmentLink(i + k, j) for k in range(len(parts)))
            i += len(parts)
            j += 1
            continue
        raise AlignmentError(f"cannot align {f!r} with {c!r}", i, j)
    if i < len(fine) or j < len(coarse):
        raise AlignmentError("token streams end at different points", i, j)
    return links


# ---------------------------------------------------------------------------
# decision lists

class Alternative(NamedTuple):
    reading: Reading
    count: int
    fraction: float


@dataclass(frozen=True)
class DecisionList:
    coarse_tag: str
    alternatives: tuple[Alternative, ...]

    def __post_init__(self):
        for a in self.alternatives:
            if a.count <= 0:
                raise ValueError(f"non-positive count for {self.coarse_tag}/{a.reading}")

    @property
    def readings(self) -> tuple[Reading, ...]:
        return tuple(a.reading for a in self.alternatives)

    def rank(self, reading: Reading) -> int | None:
        for i, a in enumerate(self.alternatives):
            if a.reading == reading:
                return i
        return None

    @classmethod
    def from_counts(cls, coarse_tag: str, counts: dict[Reading, int]) -> DecisionList:
        total = sum(counts.values())
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], str(kv[0])))
        return cls(coarse_tag, tuple(Alternative(r, n, n / total) for r, n in ordered))


@dataclass(frozen=True)
class TagMapping:
    lists: dict[str, DecisionList]

    def __post_init__(self):
        for tag, dl in self.lists.items():
            if dl.coarse_tag != tag:
                raise ValueError(f"decision list for {dl.coarse_tag!r} filed under {tag!r}")

    def get(self, coarse_tag: str) -> DecisionList | None:
        return self.lists.get(coarse_tag)

    def __contains__(self, coarse_tag):
        return coarse_tag in self.lists


class ParallelSentence(NamedTuple):
    fine: tuple[Cohort, ...]        # gold-annotated
    coarse_tags: tuple[str, ...]
    links: tuple[AlignmentLink, ...]


def align_parallel(fine: AnnotatedCorpus, coarse: AnnotatedCorpus,
                   policy: TokenizationPolicy) -> list[ParallelSentence]:
    """Pair a gold fine corpus with a gold coarse corpus of the same text."""
    if len(fine.sentences) != len(coarse.sentences):
        raise AlignmentError("corpora differ in sentence count",
                             len(fine.sentences), len(coarse.sentences))
    out = []
    for fs, cs in zip(fine.sentences, coarse.sentences):
        tags = []
        for c in cs:
            if c.gold_reading is None:
                raise ValueError(f"coarse token {c.surface!r} has no gold tag")
            tags.append(c.gold_reading.tags[0])
        out.append(ParallelSentence(fs, tuple(tags), tuple(align(fs, cs, policy))))
    return out


def build_mapping(parallel: Iterable[ParallelSentence]) -> TagMapping:
    counts: dict[str, Counter] = {}
    for sent in parallel:
        for link in sent.links:
            gold = sent.fine[link.fine].gold_reading
            if gold is None:
                raise ValueError(f"fine token {sent.fine[link.fine].surface!r} has no gold reading")
            counts.setdefault(sent.coarse_tags[link.coarse], Counter())[gold] += 1
    return TagMapping({tag: DecisionList.from_counts(tag, dict(c))
                       for tag, c in sorted(counts.items())})


def load_mapping(stream: TextIO | str, source=None) -> TagMapping:
    """``COARSE<TAB>fine tags<TAB>count`` lines, grouped and ordered."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    groups: dict[str, list[tuple[Reading, int, int]]] = {}
    last = None
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3 or not fields[0] or not fields[1].split():
            raise FormatError(f"malformed mapping line {line!r}", lineno, source)
        try:
            reading = Reading(tuple(fields[1].split(" ")))
            count = int(fields[2])
        except ValueError as exc:
            raise FormatError(str(exc), lineno, source) from None
        if count <= 0:
            raise FormatError("count must be positive", lineno, source)
        tag = fields[0]
        if tag != last and tag in groups:
            raise FormatError(f"lines for {tag!r} are not grouped", lineno, source)
        last = tag
        group = groups.setdefault(tag, [])
        if any(r == reading for r, _, _ in group):
            raise FormatError(f"duplicate reading {reading} for {tag!r}", lineno, source)
        if group:
            prev_r, prev_n, _ = group[-1]
            if (-prev_n, str(prev_r)) > (-count, str(reading)):
                raise FormatError(f"decision list for {tag!r} is out of order", lineno, source)
        group.append((reading, count, lineno))
    lists = {}
    for tag, group in groups.items():
        total = sum(n for _, n, _ in group)
        lists[tag] = DecisionList(tag, tuple(Alternative(r, n, n / total) for r, n, _ in group))
    return TagMapping(lists)


def serialize_mapping(mapping: TagMapping) -> str:
    return "".join(f"{tag}\t{a.reading}\t{a.count}\n"
                   for tag, dl in mapping.lists.items() for a in dl.alternatives)


def default_mapping() -> TagMapping:
    """Partial mapping holding the two most probable readings per tag for a
    handful of Brown tags (counts in per mille)."""
    text = resources.files("hybridtag").joinpath("data/default.map").read_text(encoding="utf-8")
    return load_mapping(text, source="default.map")


# ---------------------------------------------------------------------------
# resolution

def resolve_careful(cohort: Cohort, coarse_tag: str, mapping: TagMapping) -> Cohort:
    """Drop readings absent from the tag's decision list, unless none remain."""
    dl = mapping.get(coarse_tag)
    if dl is None:
        return cohort
    listed = set(dl.readings)
    keep = [r for r in cohort.readings if r in listed]
    if not keep or len(keep) == len(cohort.readings):
        return cohort
    return cohort.with_readings(keep)


def resolve_unambiguous(cohort: Cohort, coarse_tag: str, mapping: TagMapping) -> Cohort:
    """Keep the cohort reading listed first for the tag; unchanged if none is listed."""
    dl = mapping.get(coarse_tag)
    if dl is None or len(cohort.readings) == 1:
        return cohort
    present = set(cohort.readings)
    for r in dl.readings:
        if r in present:
            return cohort.with_readings([r])
    return cohort


def resolve(cohort: Cohort, coarse_tag: str, mapping: TagMapping, mode: str) -> Cohort:
    if mode == CAREFUL:
        return resolve_careful(cohort, coarse_tag, mapping)
    if mode == UNAMBIGUOUS:
        return resolve_unambiguous(cohort, coarse_tag, mapping)
    raise ValueError(f"unknown mapping mode {mode!r}")

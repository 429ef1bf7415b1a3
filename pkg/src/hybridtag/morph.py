"""Lexicon lookup with an affix-rule guesser for unknown words."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .core import AnnotatedCorpus, Cohort, Reading
from .errors import FormatError

log = logging.getLogger(__name__)

NUMERAL = Reading(("NUM", "CARD"))


@dataclass(frozen=True)
class Lexicon:
    """Surface form -> readings, in load order.

    Lookup tries the exact form first, then its lowercase form.
    """

    entries: dict[str, tuple[Reading, ...]] = field(default_factory=dict)
    case_folding: bool = True

    def __post_init__(self):
        for surface, rds in self.entries.items():
            if not surface:
                raise ValueError("empty surface in lexicon")
            if not rds:
                raise ValueError(f"lexicon entry {surface!r} has no readings")

    def lookup(self, word: str) -> tuple[Reading, ...] | None:
        rds = self.entries.get(word)
        if rds is None and self.case_folding:
            rds = self.entries.get(word.lower())
        return rds

    def __contains__(self, word):
        return self.lookup(word) is not None

    def __len__(self):
        return len(self.entries)

    def without(self, surface: str, reading: Reading) -> Lexicon:
        """Copy with one reading dropped (the entry disappears with its last reading)."""
        entries = dict(self.entries)
        rest = tuple(r for r in entries.get(surface, ()) if r != reading)
        if rest:
            entries[surface] = rest
        else:
            entries.pop(surface, None)
        return Lexicon(entries, self.case_folding)

    @classmethod
    def from_corpus(cls, corpus: AnnotatedCorpus) -> Lexicon:
        entries: dict[str, list[Reading]] = {}
        for cohort in corpus.cohorts():
            known = entries.setdefault(cohort.surface, [])
            known.extend(r for r in cohort.readings if r not in known)
        return cls({k: tuple(v) for k, v in entries.items()})


def load_lexicon(stream: TextIO | str, source=None) -> Lexicon:
    """One ``surface<TAB>TAG TAG ...`` line per (surface, reading) pair."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    entries: dict[str, list[Reading]] = {}
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1].split():
            raise FormatError(f"malformed lexicon line {line!r}", lineno, source)
        try:
            reading = Reading(tuple(fields[1].split(" ")))
        except ValueError as exc:
            raise FormatError(str(exc), lineno, source) from None
        known = entries.setdefault(fields[0], [])
        if reading in known:
            log.warning("%s line %d: duplicate reading %s for %r dropped",
                        source or "<lexicon>", lineno, reading, fields[0])
            continue
        known.append(reading)
    return Lexicon({k: tuple(v) for k, v in entries.items()})


def serialize_lexicon(lexicon: Lexicon) -> str:
    return "".join(f"{surface}\t{r}\n"
                   for surface, rds in lexicon.entries.items() for r in rds)


@dataclass(frozen=True)
class AffixRule:
    prefix: str | None
    suffix: str | None
    readings: tuple[Reading, ...]

    def __post_init__(self):
        if not self.prefix and not self.suffix:
            raise ValueError("affix rule needs a prefix or a suffix")
        if not self.readings:
            raise ValueError("affix rule without readings")

    def matches(self, word: str) -> bool:
        w = word.lower()
        pre = self.prefix or ""
        suf = self.suffix or ""
        return len(w) >= len(pre) + len(suf) and w.startswith(pre) and w.endswith(suf)

    @property
    def key(self) -> str:
        parts = []
        if self.prefix:
            parts.append(f"PREFIX:{self.prefix}")
        if self.suffix:
            parts.append(f"SUFFIX:{self.suffix}")
        return " ".join(parts)


@dataclass(frozen=True)
class GuesserConfig:
    rules: tuple[AffixRule, ...]
    open_class: tuple[Reading, ...]

    def __post_init__(self):
        if not self.open_class:
            raise ValueError("open class must not be empty")


def load_guesser(stream: TextIO | str, source=None) -> GuesserConfig:
    """Affix rules and the open-class set.

    Lines are ``PREFIX:un SUFFIX:al<TAB>A ABS`` or ``OPENCLASS<TAB>N NOM SG``.
    Several lines with the same affix key add readings to one rule, which
    keeps the position of its first line.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rules: dict[tuple, list[Reading]] = {}
    open_class: list[Reading] = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[1].split():
            raise FormatError(f"malformed guesser line {line!r}", lineno, source)
        try:
            reading = Reading(tuple(fields[1].split(" ")))
        except ValueError as exc:
            raise FormatError(str(exc), lineno, source) from None
        if fields[0] == "OPENCLASS":
            if reading not in open_class:
                open_class.append(reading)
            continue
        prefix = suffix = None
        for part in fields[0].split():
            kind, _, affix = part.partition(":")
            if not affix:
                raise FormatError(f"malformed affix {part!r}", lineno, source)
            if kind == "PREFIX" and prefix is None:
                prefix = affix.lower()
            elif kind == "SUFFIX" and suffix is None:
                suffix = affix.lower()
            else:
                raise FormatError(f"malformed affix {part!r}", lineno, source)
        if prefix is None and suffix is None:
            raise FormatError("affix rule needs a prefix or a suffix", lineno, source)
        known = rules.setdefault((prefix, suffix), [])
        if reading not in known:
            known.append(reading)
    if not open_class:
        raise FormatError("no OPENCLASS readings defined", None, source)
    return GuesserConfig(
        tuple(AffixRule(p, s, tuple(r)) for (p, s), r in rules.items()),
        tuple(open_class))


def serialize_guesser(guesser: GuesserConfig) -> str:
    lines = [f"{rule.key}\t{r}\n" for rule in guesser.rules for r in rule.readings]
    lines += [f"OPENCLASS\t{r}\n" for r in guesser.open_class]
    return "".join(lines)


def guess(word: str, guesser: GuesserConfig) -> tuple[Reading, ...]:
    if word.isdigit():
        return (NUMERAL,)
    for rule in guesser.rules:
        if rule.matches(word):
            return rule.readings
    return guesser.open_class


def analyze(word: str, lexicon: Lexicon, guesser: GuesserConfig) -> Cohort:
    rds = lexicon.lookup(word)
    if rds is None:
        rds = guess(word, guesser)
    return Cohort(word, rds)


def analyze_sentences(sentences: Iterable[Iterable[str]], lexicon: Lexicon,
                      guesser: GuesserConfig) -> AnnotatedCorpus:
    return AnnotatedCorpus(tuple(
        tuple(analyze(w, lexicon, guesser) for w in sent) for sent in sentences))

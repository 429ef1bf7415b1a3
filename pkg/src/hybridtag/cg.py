"""Constraint Grammar: rule files, context tests and fixpoint disambiguation.

Rule syntax::

    CONSTRAINTS
    # the finite-verb reading cannot follow an unambiguous determiner
    REMOVE (VFIN) IF (-1C DET);
    HEURISTICS
    SELECT (PREP) IF (1 DET) (2 N);

A test ``(OFFSET[C] [NOT] TAG ...)`` looks at the cohort at a relative
position; ``C`` requires that cohort to be unambiguous, ``NOT`` negates the
tag condition.  Tag lists are conjunctive: a reading matches when it carries
all of them.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence, TextIO

from .core import Cohort, Reading, check_tag
from .errors import FormatError

REMOVE = "REMOVE"
SELECT = "SELECT"
ACTIONS = (REMOVE, SELECT)

GRAMMAR = "grammar"
HEURISTIC = "heuristic"
TIERS = (GRAMMAR, HEURISTIC)
_TIER_RANK = {GRAMMAR: 0, HEURISTIC: 1}
_SECTION = {"CONSTRAINTS": GRAMMAR, "HEURISTICS": HEURISTIC}


def _tag_tuple(tags) -> tuple[str, ...]:
    if isinstance(tags, str):
        tags = tags.split()
    return tuple(dict.fromkeys(tags))


@dataclass(frozen=True)
class ContextTest:
    position: int
    tags: tuple[str, ...]
    careful: bool = False
    negate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tags", _tag_tuple(self.tags))
        if not self.tags:
            raise ValueError("context test without tags")

    @cached_property
    def tagset(self) -> frozenset[str]:
        return frozenset(self.tags)

    def __str__(self):
        head = f"{self.position}{'C' if self.careful else ''}"
        neg = " NOT" if self.negate else ""
        return f"({head}{neg} {' '.join(self.tags)})"


@dataclass(frozen=True)
class ConstraintRule:
    action: str
    target: tuple[str, ...]
    tests: tuple[ContextTest, ...] = ()
    tier: str = GRAMMAR
    line: int | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "target", _tag_tuple(self.target))
        object.__setattr__(self, "tests", tuple(self.tests))
        if self.action not in ACTIONS:
            raise ValueError(f"unknown action {self.action!r}")
        if not self.target:
            raise ValueError("rule without target tags")
        if self.tier not in TIERS:
            raise ValueError(f"unknown tier {self.tier!r}")

    @cached_property
    def target_set(self) -> frozenset[str]:
        return frozenset(self.target)

    def __str__(self):
        text = f"{self.action} ({' '.join(self.target)})"
        if self.tests:
            text += " IF " + " ".join(str(t) for t in self.tests)
        return text + ";"


@dataclass(frozen=True)
class Grammar:
    rules: tuple[ConstraintRule, ...] = ()

    def __post_init__(self):
        # grammar tier first; stable within a tier
        rules = sorted(self.rules, key=lambda r: _TIER_RANK[r.tier])
        object.__setattr__(self, "rules", tuple(rules))

    def upto(self, max_tier: str) -> tuple[ConstraintRule, ...]:
        limit = _TIER_RANK[max_tier]
        return tuple(r for r in self.rules if _TIER_RANK[r.tier] <= limit)

    def __len__(self):
        return len(self.rules)


_RULE_RE = re.compile(
    r"^(?P<action>[A-Za-z]+)\s*\((?P<target>[^()]*)\)\s*"
    r"(?:IF\s*(?P<tests>(?:\([^()]*\)\s*)+))?;$")
_TEST_RE = re.compile(r"\(([^()]*)\)")
_OFFSET_RE = re.compile(r"^([+-]?\d+)(C?)$")


def _parse_tags(text: str, lineno: int, source) -> tuple[str, ...]:
    tags = text.split()
    if not tags:
        raise FormatError("empty tag list", lineno, source)
    try:
        return _tag_tuple(check_tag(t) for t in tags)
    except ValueError as exc:
        raise FormatError(str(exc), lineno, source) from None


def _parse_rule(text: str, tier: str, lineno: int, source) -> ConstraintRule:
    m = _RULE_RE.match(text)
    if not m:
        head = text.split("(", 1)[0].strip()
        if head and head.split()[0] not in ACTIONS:
            raise FormatError(f"unknown action {head.split()[0]!r}", lineno, source)
        raise FormatError(f"malformed rule {text!r}", lineno, source)
    action = m.group("action")
    if action not in ACTIONS:
        raise FormatError(f"unknown action {action!r}", lineno, source)
    target = _parse_tags(m.group("target"), lineno, source)
    tests = []
    for body in _TEST_RE.findall(m.group("tests") or ""):
        words = body.split()
        if not words:
            raise FormatError("empty context test", lineno, source)
        om = _OFFSET_RE.match(words[0])
        if not om:
            raise FormatError(f"malformed offset {words[0]!r}", lineno, source)
        negate = len(words) > 1 and words[1] == "NOT"
        tags = _parse_tags(" ".join(words[2 if negate else 1:]), lineno, source)
        tests.append(ContextTest(int(om.group(1)), tags, bool(om.group(2)), negate))
    return ConstraintRule(action, target, tuple(tests), tier, lineno)


def parse_grammar(stream: TextIO | str, source=None) -> Grammar:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rules = []
    tier = GRAMMAR
    buf: list[str] = []
    start = 0
    for lineno, raw in enumerate(stream, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not buf and line in _SECTION:
            tier = _SECTION[line]
            continue
        if not buf:
            start = lineno
        # a line may hold several statements
        while line:
            head, sep, line = line.partition(";")
            buf.append(head)
            if not sep:
                break
            rules.append(_parse_rule(" ".join(buf).strip() + ";", tier, start, source))
            buf = []
            start = lineno
            line = line.strip()
    if buf and " ".join(buf).strip():
        raise FormatError("rule not terminated by ';'", start, source)
    return Grammar(tuple(rules))


def serialize_grammar(grammar: Grammar) -> str:
    out = []
    for tier, header in ((GRAMMAR, "CONSTRAINTS"), (HEURISTIC, "HEURISTICS")):
        tier_rules = [r for r in grammar.rules if r.tier == tier]
        if tier_rules:
            out.append(header + "\n")
            out.extend(f"{r}\n" for r in tier_rules)
    return "".join(out)


# ---------------------------------------------------------------------------
# application

def _matches(reading: Reading, tags: frozenset[str]) -> bool:
    return tags <= reading.tagset


def _test_passes(test: ContextTest, sentence: Sequence[Cohort], index: int) -> bool:
    pos = index + test.position
    if not 0 <= pos < len(sentence):
        return False
    rds = sentence[pos].readings
    if test.careful and len(rds) != 1:
        return False
    hit = any(_matches(r, test.tagset) for r in rds)
    return hit != test.negate


def rule_applies(rule: ConstraintRule, sentence: Sequence[Cohort], index: int) -> bool:
    """True when every context test of ``rule`` holds around ``index``."""
    return all(_test_passes(t, sentence, index) for t in rule.tests)


class TraceEvent(NamedTuple):
    rule_line: int | None
    sentence_index: int
    cohort_index: int
    removed: tuple[Reading, ...]

    def __str__(self):
        removed = " | ".join(str(r) for r in self.removed)
        return f"rule@{self.rule_line}\tsent {self.sentence_index}\tword {self.cohort_index}\t-{removed}"


def _apply(rule: ConstraintRule, cohort: Cohort) -> Cohort | None:
    hits = [_matches(r, rule.target_set) for r in cohort.readings]
    n = sum(hits)
    if n == 0 or n == len(hits):
        # nothing to remove, or the removal would empty the cohort
        return None
    keep = [r for r, h in zip(cohort.readings, hits) if h == (rule.action == SELECT)]
    return cohort.with_readings(keep)


def _fixpoint(cohorts: list[Cohort], rules: Sequence[ConstraintRule],
              sentence_index: int, trace: Callable[[TraceEvent], None] | None) -> None:
    # every changing pass removes at least one reading
    limit = sum(len(c.readings) for c in cohorts) + 1
    for _ in range(limit):
        changed = False
        for rule in rules:
            for i in range(len(cohorts)):
                if not rule_applies(rule, cohorts, i):
                    continue
                new = _apply(rule, cohorts[i])
                if new is None:
                    continue
                if trace is not None:
                    removed = tuple(r for r in cohorts[i].readings if r not in new.readings)
                    trace(TraceEvent(rule.line, sentence_index, i, removed))
                cohorts[i] = new
                changed = True
        if not changed:
            return
    raise AssertionError("disambiguation exceeded its pass bound")


def disambiguate(sentence: Sequence[Cohort], grammar: Grammar, max_tier: str = HEURISTIC,
                 trace: Callable[[TraceEvent], None] | None = None,
                 sentence_index: int = 0) -> tuple[Cohort, ...]:
    """Apply the grammar to a fixpoint.

    The grammar-based tier runs to its own fixpoint first; with
    ``max_tier="heuristic"`` the heuristic rules then join the grammar rules
    for a second fixpoint over the already reduced sentence.
    """
    if max_tier not in TIERS:
        raise ValueError(f"unknown tier {max_tier!r}")
    cohorts = list(sentence)
    _fixpoint(cohorts, grammar.upto(GRAMMAR), sentence_index, trace)
    if max_tier == HEURISTIC:
        _fixpoint(cohorts, grammar.upto(HEURISTIC), sentence_index, trace)
    return tuple(cohorts)

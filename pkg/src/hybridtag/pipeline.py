"""The D0-D5 disambiguation cascades, their evaluation and reporting.

=====  ==============================================
D0     morphological analysis only
D1     D0 + grammar-based constraints
D2     D1 + heuristic constraints
D3a    D2 + HMM tagger, careful mapping
D3b    D2 + HMM tagger, unambiguous mapping
D4     D1 + HMM tagger, unambiguous mapping
D5     D0 + HMM tagger, unambiguous mapping
=====  ==============================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

from . import cg, combine, hmm
from .core import (AnnotatedCorpus, Cohort, TokenizationPolicy, ambiguity_metrics,
                   tokenize)
from .errors import EvaluationError, ResourceError
from .morph import GuesserConfig, Lexicon, analyze

log = logging.getLogger(__name__)

MORPH = "morph"
CG_GRAMMAR = "cg-grammar"
CG_HEURISTIC = "cg-heuristic"
HMM_CAREFUL = "hmm-careful"
HMM_UNAMBIGUOUS = "hmm-unambiguous"

CONFIGS = {
    "D0": (MORPH,),
    "D1": (MORPH, CG_GRAMMAR),
    "D2": (MORPH, CG_GRAMMAR, CG_HEURISTIC),
    "D3a": (MORPH, CG_GRAMMAR, CG_HEURISTIC, HMM_CAREFUL),
    "D3b": (MORPH, CG_GRAMMAR, CG_HEURISTIC, HMM_UNAMBIGUOUS),
    "D4": (MORPH, CG_GRAMMAR, HMM_UNAMBIGUOUS),
    "D5": (MORPH, HMM_UNAMBIGUOUS),
}

DESCRIPTIONS = {
    "D0": "Morphological analysis",
    "D1": "D0 + CG",
    "D2": "D1 + CG heuristics",
    "D3a": "D2 + HMM + careful mapping",
    "D3b": "D2 + HMM + mapping",
    "D4": "D1 + HMM + mapping",
    "D5": "D0 + HMM + mapping",
}


@dataclass(frozen=True)
class StageConfig:
    label: str

    def __post_init__(self):
        if self.label not in CONFIGS:
            raise ValueError(f"unknown configuration {self.label!r}; "
                             f"expected one of {', '.join(CONFIGS)}")

    @property
    def stages(self) -> tuple[str, ...]:
        return CONFIGS[self.label]


@dataclass
class Resources:
    fine_lexicon: Lexicon | None = None
    guesser: GuesserConfig | None = None
    grammar: cg.Grammar | None = None
    coarse_vocab: hmm.CoarseVocabulary | None = None
    model: hmm.HmmModel | None = None
    mapping: combine.TagMapping | None = None
    policy: TokenizationPolicy = field(default_factory=TokenizationPolicy)


class RunResult(NamedTuple):
    corpus: AnnotatedCorpus
    residual: tuple[tuple[int, int], ...]   # (sentence, cohort) left ambiguous by mapping


def _need(resources: Resources, stage: str, label: str, *names: str) -> None:
    missing = [n for n in names if getattr(resources, n) is None]
    if missing:
        raise ResourceError(f"{label}: stage {stage} needs {', '.join(missing)}")


def coarse_from_fine(surfaces: Sequence[str], policy: TokenizationPolicy) -> list[str]:
    """Rebuild the coarse token stream behind a fine one."""
    rejoin = {}
    for whole, parts in policy.contraction_splits.items():
        rejoin.setdefault(parts, whole)
    out = []
    i = 0
    while i < len(surfaces):
        for parts, whole in rejoin.items():
            n = len(parts)
            seg = tuple(surfaces[i:i + n])
            if len(seg) == n and seg[1:] == parts[1:] and seg[0].lower() == parts[0].lower():
                out.append(whole[:1].upper() + whole[1:] if seg[0][:1].isupper() else whole)
                i += n
                break
        else:
            out.extend(surfaces[i].split(" "))
            i += 1
    return out


def _hmm_stage(sentences: list[list[Cohort]], coarse: list[list[str]], res: Resources,
               mode: str) -> list[tuple[int, int]]:
    residual = []
    if len(coarse) != len(sentences):
        raise ResourceError(
            f"fine and coarse tokenization disagree on sentence count "
            f"({len(sentences)} vs {len(coarse)})")
    for si, (fine, words) in enumerate(zip(sentences, coarse)):
        ids = hmm.encode(words, res.model, res.coarse_vocab)
        tags = hmm.viterbi(res.model, ids)
        first_link: dict[int, int] = {}
        for link in combine.align(fine, words, res.policy):
            first_link.setdefault(link.fine, link.coarse)
        for ci, cohort in enumerate(fine):
            # unambiguous cohorts are trusted as they stand
            if not cohort.ambiguous:
                continue
            new = combine.resolve(cohort, tags[first_link[ci]], res.mapping, mode)
            fine[ci] = new
            if new.ambiguous:
                residual.append((si, ci))
    return residual


def run(config: StageConfig | str, source: str | AnnotatedCorpus, resources: Resources,
        trace: Callable[[cg.TraceEvent], None] | None = None) -> RunResult:
    """Run one cascade over raw text or over an already analysed corpus.

    A corpus input stands in for the morphological stage: its cohorts (gold
    marks dropped) are taken as the D0 analysis.
    """
    if isinstance(config, str):
        config = StageConfig(config)
    label = config.label
    res = resources
    if isinstance(source, AnnotatedCorpus):
        sentences = [list(s) for s in source.without_gold().sentences]
        text = None
    else:
        _need(res, MORPH, label, "fine_lexicon", "guesser")
        text = source
        sentences = [[analyze(w, res.fine_lexicon, res.guesser) for w in sent]
                     for sent in tokenize(text, res.policy.fine())]
    residual: list[tuple[int, int]] = []
    for stage in config.stages[1:]:
        if stage in (CG_GRAMMAR, CG_HEURISTIC):
            _need(res, stage, label, "grammar")
            tier = cg.GRAMMAR if stage == CG_GRAMMAR else cg.HEURISTIC
            sentences = [list(cg.disambiguate(s, res.grammar, tier, trace, i))
                         for i, s in enumerate(sentences)]
        else:
            _need(res, stage, label, "model", "coarse_vocab", "mapping")
            if text is not None:
                coarse = tokenize(text, res.policy.coarse())
            else:
                coarse = [coarse_from_fine([c.surface for c in s], res.policy) for s in sentences]
            mode = combine.CAREFUL if stage == HMM_CAREFUL else combine.UNAMBIGUOUS
            residual = _hmm_stage(sentences, coarse, res, mode)
    return RunResult(AnnotatedCorpus(tuple(tuple(s) for s in sentences)), tuple(residual))


# ---------------------------------------------------------------------------
# evaluation

@dataclass(frozen=True)
class EvalRow:
    label: str
    tokens: int
    ambiguous: int
    total_readings: int
    errors: int

    @property
    def ambiguous_pct(self) -> float:
        return 100.0 * self.ambiguous / self.tokens

    @property
    def readings_per_word(self) -> float:
        return self.total_readings / self.tokens

    @property
    def error_rate_pct(self) -> float:
        return 100.0 * self.errors / self.tokens


def evaluate(output: AnnotatedCorpus, gold: AnnotatedCorpus, label: str = "") -> EvalRow:
    """Count cohorts that lost their gold reading.

    A cohort still holding several readings is not an error as long as the
    gold reading is among them.
    """
    out = list(output.cohorts())
    ref = list(gold.cohorts())
    errors = 0
    for i, (o, g) in enumerate(zip(out, ref)):
        if o.surface != g.surface:
            raise EvaluationError(f"token mismatch at index {i}: {o.surface!r} vs {g.surface!r}")
        if g.gold_reading is None:
            raise EvaluationError(f"gold token {i} ({g.surface!r}) has no gold reading")
        if g.gold_reading not in o.readings:
            errors += 1
    if len(out) != len(ref):
        raise EvaluationError(
            f"token count mismatch ({len(out)} vs {len(ref)}); first diverging index {min(len(out), len(ref))}")
    m = ambiguity_metrics(out)
    return EvalRow(label, m.tokens, m.ambiguous, m.total_readings, errors)


COLUMNS = ("Amb. words", "Readings", "Readings / word", "Errors", "Error rate (%)")


def _cells(row: EvalRow) -> list[str]:
    return [f"{row.ambiguous_pct:.1f} %", str(row.total_readings),
            f"{row.readings_per_word:.2f}", str(row.errors), f"{row.error_rate_pct:.2f} %"]


def _label(row: EvalRow) -> str:
    desc = DESCRIPTIONS.get(row.label)
    return f"{row.label} ({desc})" if desc else row.label


def report(rows: Sequence[EvalRow], fmt: str = "table") -> str:
    """Comparison table, one row per configuration in the given order."""
    if not rows:
        raise ValueError("no rows to report")
    if fmt == "tsv":
        lines = ["\t".join(("Config", "Tokens") + COLUMNS)]
        lines += ["\t".join([row.label, str(row.tokens)] + _cells(row)) for row in rows]
        return "\n".join(lines) + "\n"
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    body = [[_label(r)] + _cells(r) for r in rows]
    head = [""] + list(COLUMNS)
    widths = [max(len(line[k]) for line in body + [head]) for k in range(len(head))]

    def fmt_line(cells):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first] + rest).rstrip()

    lines = [fmt_line(head), "  ".join("-" * w for w in widths)]
    lines += [fmt_line(b) for b in body]
    return "\n".join(lines) + "\n"

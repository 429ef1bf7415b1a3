import logging

import pytest

from hybridtag import morph
from hybridtag.core import AnnotatedCorpus, Cohort, Reading, readings
from hybridtag.errors import FormatError
from hybridtag.morph import analyze, guess, load_guesser, load_lexicon

COOK = readings("V PRES -SG3 VFIN", "V INF", "V IMP VFIN", "V SUBJUNCTIVE VFIN", "N NOM SG")

LEXICON = """\
cook\tV PRES -SG3 VFIN
cook\tV INF
cook\tV IMP VFIN
cook\tV SUBJUNCTIVE VFIN
cook\tN NOM SG
the\tDET
"""

GUESSER = """\
# affix rules, first match wins
PREFIX:un SUFFIX:al\tA ABS
SUFFIX:ing\tPCP1
SUFFIX:al\tN NOM SG
OPENCLASS\tN NOM SG
OPENCLASS\tA ABS
OPENCLASS\tV INF
"""


@pytest.fixture
def lexicon():
    return load_lexicon(LEXICON)


@pytest.fixture
def guesser():
    return load_guesser(GUESSER)


def test_cook_has_five_readings(lexicon, guesser):
    assert analyze("cook", lexicon, guesser).readings == COOK


def test_cooling_is_pcp1(lexicon, guesser):
    assert analyze("cooling", lexicon, guesser).readings == readings("PCP1")


def test_known_word_single_reading(lexicon, guesser):
    assert analyze("the", lexicon, guesser).readings == readings("DET")


def test_capitalized_word_falls_back_to_lowercase(lexicon, guesser):
    assert analyze("The", lexicon, guesser).readings == readings("DET")
    assert analyze("The", lexicon, guesser).surface == "The"


def test_unmusical_prefix_and_suffix(guesser):
    assert guess("unmusical", guesser) == readings("A ABS")


def test_first_matching_rule_wins(guesser):
    # "unnatural" matches both un...al and ...al; the first rule is used alone
    assert guess("unnatural", guesser) == readings("A ABS")
    assert guess("natural", guesser) == readings("N NOM SG")


def test_prefix_and_suffix_must_not_overlap(guesser):
    assert guess("unal", guesser) == readings("A ABS")
    assert guess("ual", guesser) == readings("N NOM SG")


def test_no_rule_gives_open_class(guesser):
    assert guess("zzqx", guesser) == readings("N NOM SG", "A ABS", "V INF")


def test_numbers(guesser):
    assert guess("1994", guesser) == (morph.NUMERAL,)


def test_guesser_not_consulted_for_known_words(lexicon, monkeypatch):
    calls = []
    monkeypatch.setattr(morph, "guess", lambda w, g: calls.append(w) or readings("X"))
    morph.analyze("cook", lexicon, None)
    assert calls == []
    assert morph.analyze("zzqx", lexicon, None).readings == readings("X")
    assert calls == ["zzqx"]


def test_empty_lexicon():
    assert len(load_lexicon("")) == 0


def test_duplicate_line_kept_once(caplog):
    with caplog.at_level(logging.WARNING):
        lex = load_lexicon("cook\tV INF\ncook\tV INF\n")
    assert lex.lookup("cook") == readings("V INF")
    assert "duplicate" in caplog.text


@pytest.mark.parametrize("text", ["cook\n", "cook\t\n", "\tV INF\n", "cook\tV  INF\n"])
def test_malformed_lexicon_line(text):
    with pytest.raises(FormatError) as exc:
        load_lexicon("the\tDET\n" + text)
    assert exc.value.line == 2


def test_guesser_requires_open_class():
    with pytest.raises(FormatError):
        load_guesser("SUFFIX:ing\tPCP1\n")


@pytest.mark.parametrize("line", ["SUFFIX\tPCP1", "INFIX:x\tPCP1", "SUFFIX:ing", "SUFFIX:a SUFFIX:b\tN"])
def test_malformed_guesser_line(line):
    with pytest.raises(FormatError) as exc:
        load_guesser("OPENCLASS\tN\n" + line + "\n")
    assert exc.value.line == 2


def test_guesser_round_trip():
    g = load_guesser(GUESSER)
    assert load_guesser(morph.serialize_guesser(g)) == g


def test_same_affix_lines_merge():
    g = load_guesser("SUFFIX:s\tN NOM PL\nSUFFIX:ing\tPCP1\nSUFFIX:s\tV PRES SG3 VFIN\nOPENCLASS\tN\n")
    assert [r.key for r in g.rules] == ["SUFFIX:s", "SUFFIX:ing"]
    assert guess("runs", g) == readings("N NOM PL", "V PRES SG3 VFIN")


def test_lexicon_from_corpus_reproduces_analyses(lexicon, guesser):
    words = ["The", "cook", "cooling", "zzqx"]
    corpus = AnnotatedCorpus((tuple(analyze(w, lexicon, guesser) for w in words),))
    derived = morph.Lexicon.from_corpus(corpus)
    for cohort in corpus.cohorts():
        assert analyze(cohort.surface, derived, guesser).readings == cohort.readings


def test_without_removes_one_reading(lexicon):
    smaller = lexicon.without("cook", Reading.parse("N NOM SG"))
    assert Reading.parse("N NOM SG") not in smaller.lookup("cook")
    assert len(smaller.lookup("cook")) == 4
    assert len(lexicon.lookup("cook")) == 5


def test_analyze_sentences(lexicon, guesser):
    corpus = morph.analyze_sentences([["the", "cook"]], lexicon, guesser)
    assert corpus.sentences[0][1] == Cohort("cook", COOK)

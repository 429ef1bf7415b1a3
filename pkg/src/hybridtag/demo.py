"""A small English-like language with fine and coarse gold annotation.

The language is built so that the word *as* is a subordinating conjunction
when a finite verb follows its noun phrase and a preposition when the
sentence ends there instead.  Both readings share the same two-word window,
so only the sentence-wide constraint rules can tell them apart.

``build_demo(directory)`` writes a complete resource directory (lexicons,
guessers, grammar, policy, decision-list mapping, trained HMM) together with
training text, test text and its gold corpus.
"""

from __future__ import annotations

import random
from pathlib import Path
from typing import NamedTuple

from . import cg, combine, hmm
from .core import AnnotatedCorpus, Cohort, Reading, load_policy, serialize_corpus, tokenize
from .morph import analyze, load_guesser, load_lexicon

_BASE_VERB = ("V PRES -SG3 VFIN", "V INF", "V IMP VFIN", "V SUBJUNCTIVE VFIN")

# surface -> (fine readings, coarse tags); None where a form exists on one side only
VOCABULARY = {
    "the": (("DET",), ("AT",)),
    "dog": (("N NOM SG",), ("NN",)),
    "cat": (("N NOM SG",), ("NN",)),
    "man": (("N NOM SG",), ("NN",)),
    "judge": (("N NOM SG",), ("NN",)),
    "dogs": (("N NOM PL",), ("NNS",)),
    "cats": (("N NOM PL",), ("NNS",)),
    "men": (("N NOM PL",), ("NNS",)),
    "cook": (_BASE_VERB + ("N NOM SG",), ("VB", "NN")),
    "guard": (_BASE_VERB + ("N NOM SG",), ("VB", "NN")),
    "plan": (_BASE_VERB + ("N NOM SG",), ("VB", "NN")),
    "light": (("A ABS", "N NOM SG"), ("JJ", "NN")),
    "cold": (("A ABS", "N NOM SG"), ("JJ", "NN")),
    "big": (("A ABS",), ("JJ",)),
    "old": (("A ABS",), ("JJ",)),
    "sleeps": (("V PRES SG3 VFIN",), ("VBZ",)),
    "waits": (("V PRES SG3 VFIN",), ("VBZ",)),
    "smiles": (("V PRES SG3 VFIN",), ("VBZ",)),
    "as": (("CS", "PREP"), ("CS", "IN")),
    "in spite of": (("PREP",), None),
    "in": (None, ("IN",)),
    "spite": (None, ("NN",)),
    "of": (None, ("IN",)),
    "are": (("V PRES -SG3 VFIN",), None),
    "not": (("NEG-PART",), None),
    "aren't": (None, ("BER*",)),
    ".": (("PUNCT",), (".",)),
}

# unknown to both lexicons
NONCE_NOUNS = ("dax", "wug", "blick", "toma", "fep")
NONCE_VERBS = ("gorps", "zibs", "meeks")

FINE_GUESSER = """\
PREFIX:un SUFFIX:al\tA ABS
SUFFIX:ing\tPCP1
SUFFIX:s\tN NOM PL
SUFFIX:s\tV PRES SG3 VFIN
OPENCLASS\tN NOM SG
OPENCLASS\tA ABS
OPENCLASS\tV INF
"""

COARSE_GUESSER = """\
SUFFIX:s\tNNS
SUFFIX:s\tVBZ
OPENCLASS\tNN
OPENCLASS\tJJ
OPENCLASS\tVB
"""

GRAMMAR = """\
CONSTRAINTS
# no finite verb or infinitive right after an unambiguous determiner
REMOVE (VFIN) IF (-1C DET);
REMOVE (INF) IF (-1C DET);
# base-form verb after a plural subject
SELECT (V PRES -SG3 VFIN) IF (-1C N PL);
# "as": a finite verb after the noun phrase makes it a subordinator
SELECT (CS) IF (1C DET) (2 N) (3 VFIN);
SELECT (CS) IF (1C DET) (2 A) (3 N) (4 VFIN);
SELECT (PREP) IF (1C DET) (2 N) (3 PUNCT);
SELECT (PREP) IF (1C DET) (2 A) (3 N) (4 PUNCT);
HEURISTICS
# noun-noun sequences are rare: prefer the adjective
REMOVE (N) IF (1C N);
"""

POLICY = "MWU\tin spite of\nSPLIT\taren't\tare not\n"


def fine_lexicon_text() -> str:
    return "".join(f"{w}\t{r}\n" for w, (fine, _) in VOCABULARY.items() if fine for r in fine)


def coarse_lexicon_text() -> str:
    return "".join(f"{w}\t{t}\n" for w, (_, coarse) in VOCABULARY.items() if coarse for t in coarse)


class DemoSentence(NamedTuple):
    text: str
    fine: tuple[Cohort, ...]
    coarse: tuple[Cohort, ...]


class _Builder:
    def __init__(self):
        self.fine: list[tuple[str, str]] = []
        self.coarse: list[tuple[str, str]] = []

    def word(self, surface, fine_gold, coarse_gold):
        self.fine.append((surface, fine_gold))
        self.coarse.append((surface, coarse_gold))


class DemoLanguage:
    """Sentence generator with the analysers needed to annotate its output."""

    def __init__(self):
        self.fine_lexicon = load_lexicon(fine_lexicon_text())
        self.coarse_lexicon = load_lexicon(coarse_lexicon_text())
        self.guesser = load_guesser(FINE_GUESSER)
        self.coarse_guesser = load_guesser(COARSE_GUESSER)
        self.vocab = hmm.CoarseVocabulary.from_resources(self.coarse_lexicon, self.coarse_guesser)
        self.policy = load_policy(POLICY)

    # -- grammar of the language ---------------------------------------
    def _np_sg(self, b: _Builder, rng: random.Random):
        b.word("the", "DET", "AT")
        kind = rng.random()
        if kind < 0.35:
            b.word(rng.choice(("dog", "cat", "man", "judge")), "N NOM SG", "NN")
        elif kind < 0.6:
            b.word(rng.choice(("big", "old", "light", "cold")), "A ABS", "JJ")
            b.word(rng.choice(("dog", "cat", "man", "judge")), "N NOM SG", "NN")
        elif kind < 0.75:
            b.word(rng.choice(("cook", "guard", "plan")), "N NOM SG", "NN")
        elif kind < 0.9:
            b.word(rng.choice(("light", "cold")), "N NOM SG", "NN")
        else:
            b.word(rng.choice(NONCE_NOUNS), "N NOM SG", "NN")

    def _verb(self, b: _Builder, rng: random.Random):
        if rng.random() < 0.15:
            b.word(rng.choice(NONCE_VERBS), "V PRES SG3 VFIN", "VBZ")
        else:
            b.word(rng.choice(("sleeps", "waits", "smiles")), "V PRES SG3 VFIN", "VBZ")

    def _sentence(self, rng: random.Random) -> _Builder:
        b = _Builder()
        kind = rng.random()
        if kind < 0.7:
            self._np_sg(b, rng)
            self._verb(b, rng)
            tail = rng.random()
            if tail < 0.3:
                b.word("as", "CS", "CS")
                self._np_sg(b, rng)
                self._verb(b, rng)
            elif tail < 0.6:
                b.word("as", "PREP", "IN")
                self._np_sg(b, rng)
            elif tail < 0.8:
                b.fine.append(("in spite of", "PREP"))
                b.coarse += [("in", "IN"), ("spite", "NN"), ("of", "IN")]
                self._np_sg(b, rng)
        elif kind < 0.85:
            b.word("the", "DET", "AT")
            b.word(rng.choice(("dogs", "cats", "men")), "N NOM PL", "NNS")
            b.fine += [("are", "V PRES -SG3 VFIN"), ("not", "NEG-PART")]
            b.coarse.append(("aren't", "BER*"))
            b.word(rng.choice(("big", "old")), "A ABS", "JJ")
        else:
            b.word("the", "DET", "AT")
            b.word(rng.choice(("dogs", "cats", "men")), "N NOM PL", "NNS")
            b.word(rng.choice(("cook", "guard", "plan")), "V PRES -SG3 VFIN", "VB")
        b.word(".", "PUNCT", ".")
        return b

    def _annotate(self, b: _Builder) -> DemoSentence:
        cap = lambda s: s[:1].upper() + s[1:]
        fine_surf = [cap(b.fine[0][0])] + [s for s, _ in b.fine[1:]]
        coarse_surf = [cap(b.coarse[0][0])] + [s for s, _ in b.coarse[1:]]
        fine = []
        for surface, gold in zip(fine_surf, (g for _, g in b.fine)):
            cohort = analyze(surface, self.fine_lexicon, self.guesser)
            fine.append(Cohort(surface, cohort.readings, cohort.readings.index(Reading.parse(gold))))
        coarse = []
        for surface, gold in zip(coarse_surf, (g for _, g in b.coarse)):
            tags = sorted(self.vocab.classify(surface))
            coarse.append(Cohort(surface, tuple(Reading((t,)) for t in tags), tags.index(gold)))
        text = " ".join(coarse_surf[:-1]) + coarse_surf[-1]
        return DemoSentence(text, tuple(fine), tuple(coarse))

    def generate(self, n: int, seed: int = 0) -> list[DemoSentence]:
        rng = random.Random(seed)
        return [self._annotate(self._sentence(rng)) for _ in range(n)]


def gold_corpora(sentences: list[DemoSentence]) -> tuple[AnnotatedCorpus, AnnotatedCorpus]:
    fine = AnnotatedCorpus(tuple(s.fine for s in sentences))
    coarse = AnnotatedCorpus(tuple(s.coarse for s in sentences), "coarse")
    return fine, coarse


def text_of(sentences: list[DemoSentence]) -> str:
    return " ".join(s.text for s in sentences) + "\n"


def train_demo_model(lang: DemoLanguage, text: str, iterations: int = 20) -> hmm.HmmModel:
    tags, classes = hmm.build_classes(lang.vocab.all_keys())
    model = hmm.init_model(tags, classes)
    corpus = [hmm.encode(s, model, lang.vocab) for s in tokenize(text, lang.policy.coarse())]
    return hmm.train(model, corpus, hmm.TrainingParams(iterations, 100, 1e-6))


def build_demo(directory, seed: int = 1, n_train: int = 1500, n_parallel: int = 400,
               n_test: int = 300) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lang = DemoLanguage()
    train = lang.generate(n_train, seed)
    parallel = lang.generate(n_parallel, seed + 1)
    test = lang.generate(n_test, seed + 2)

    fine_gold, coarse_gold = gold_corpora(parallel)
    mapping = combine.build_mapping(combine.align_parallel(fine_gold, coarse_gold, lang.policy))
    model = train_demo_model(lang, text_of(train))

    files = {
        "fine.lex": fine_lexicon_text(),
        "coarse.lex": coarse_lexicon_text(),
        "guesser.rules": FINE_GUESSER,
        "coarse.rules": COARSE_GUESSER,
        "grammar.cg": GRAMMAR,
        "policy.tok": POLICY,
        "mapping.map": combine.serialize_mapping(mapping),
        "model.hmm": hmm.serialize_model(model),
        "train.txt": text_of(train),
        "test.txt": text_of(test),
        "gold.vrt": serialize_corpus(gold_corpora(test)[0]),
    }
    for name, content in files.items():
        (directory / name).write_text(content, encoding="utf-8")
    # sanity: the grammar parses
    cg.parse_grammar(GRAMMAR)


if __name__ == "__main__":
    import sys
    build_demo(sys.argv[1] if len(sys.argv) > 1 else "demo")

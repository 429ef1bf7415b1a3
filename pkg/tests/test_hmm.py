import itertools
from pathlib import Path

import numpy as np
import pytest

import oracles
from hybridtag import hmm
from hybridtag.core import Reading
from hybridtag.errors import FormatError, ImpossibleSequence, ResourceError
from hybridtag.morph import load_guesser, load_lexicon

COARSE_LEXICON = "cook\tvb\ncook\tnn\nhas\thvz\nthe\tat\ndog\tnn\n"


@pytest.fixture
def vocab():
    guesser = load_guesser("SUFFIX:ing\tvbg\nOPENCLASS\tnn\nOPENCLASS\tjj\nOPENCLASS\tvb\n")
    return hmm.CoarseVocabulary.from_resources(load_lexicon(COARSE_LEXICON), guesser)


def _model(tags, class_tags, initial, transition, emission):
    classes = tuple(hmm.EquivalenceClass(i, tuple(c.split())) for i, c in enumerate(class_tags))
    return hmm.HmmModel(tuple(tags), classes, np.array(initial), np.array(transition), np.array(emission))


class TestClassify:
    def test_lexicon_classes(self, vocab):
        assert vocab.classify("cook") == frozenset({"vb", "nn"})
        assert vocab.classify("has") == frozenset({"hvz"})
        assert vocab.classify("The") == frozenset({"at"})

    def test_open_class(self, vocab):
        assert vocab.classify("zzqx") == frozenset({"nn", "jj", "vb"})

    def test_suffix(self, vocab):
        assert vocab.classify("blorping") == frozenset({"vbg"})

    def test_default_open_class_is_every_lexicon_tag(self):
        vocab = hmm.CoarseVocabulary.from_resources(load_lexicon(COARSE_LEXICON))
        assert vocab.classify("zzqx") == frozenset({"vb", "nn", "hvz", "at"})

    def test_build_classes_is_ordered(self, vocab):
        tags, classes = hmm.build_classes(vocab.all_keys())
        assert tags == tuple(sorted(tags))
        sizes = [len(c.tags) for c in classes]
        assert sizes == sorted(sizes)
        assert [c.id for c in classes] == list(range(len(classes)))

    def test_removing_rare_reading_removes_tag_from_output(self):
        lex = load_lexicon(COARSE_LEXICON)
        vocab = hmm.CoarseVocabulary.from_resources(lex.without("cook", Reading(("vb",))))
        assert vocab.classify("cook") == frozenset({"nn"})
        tags, classes = hmm.build_classes(vocab.all_keys())
        model = hmm.init_model(tags, classes)
        for words in (["the", "cook"], ["cook"], ["cook", "has", "cook"]):
            decoded = hmm.viterbi(model, hmm.encode(words, model, vocab))
            assert all(t == "nn" for w, t in zip(words, decoded) if w == "cook")


class TestInit:
    def test_uniform(self):
        model = hmm.init_model(["a", "b"], [hmm.EquivalenceClass(0, ("a",)), hmm.EquivalenceClass(1, ("b",))])
        np.testing.assert_array_equal(model.transition, [[0.5, 0.5], [0.5, 0.5]])
        np.testing.assert_array_equal(model.emission, [[1, 0], [0, 1]])

    def test_transition_bias(self):
        classes = [hmm.EquivalenceClass(0, ("a", "b"))]
        model = hmm.init_model(["a", "b"], classes, hmm.BiasSpec({("a", "b"): 3}))
        np.testing.assert_allclose(model.transition[0], [0.2, 0.8])
        np.testing.assert_allclose(model.transition[1], [0.5, 0.5])

    def test_symbol_bias(self):
        classes = [hmm.EquivalenceClass(0, ("a",)), hmm.EquivalenceClass(1, ("a", "b"))]
        model = hmm.init_model(["a", "b"], classes, hmm.BiasSpec(symbol={(1, "a"): 2}))
        np.testing.assert_allclose(model.emission[0], [0.25, 0.75])

    def test_unemittable_tag(self):
        with pytest.raises(ResourceError, match="unemittable tag"):
            hmm.init_model(["a", "b"], [hmm.EquivalenceClass(0, ("a",))])

    @pytest.mark.parametrize("bias", [hmm.BiasSpec({("a", "z"): 1}), hmm.BiasSpec({("a", "a"): -1}),
                                      hmm.BiasSpec(symbol={(0, "b"): 1})])
    def test_bad_bias(self, bias):
        classes = [hmm.EquivalenceClass(0, ("a",)), hmm.EquivalenceClass(1, ("b",))]
        with pytest.raises(ResourceError):
            hmm.init_model(["a", "b"], classes, bias)


class TestInference:
    def test_single_token_single_tag(self):
        model = _model(["a", "b"], ["a", "b"], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], [[1, 0], [0, 1]])
        post, ll = hmm.forward_backward(model, [1])
        np.testing.assert_array_equal(post, [[0.0, 1.0]])
        assert ll == pytest.approx(np.log(0.5))

    def test_three_tokens_against_all_eight_paths(self):
        model = _model(["a", "b"], ["a b", "a", "b"], [0.6, 0.4], [[0.7, 0.3], [0.2, 0.8]],
                       [[0.5, 0.5, 0.0], [0.9, 0.0, 0.1]])
        seq = [0, 0, 2]
        total = 0.0
        marg = np.zeros((3, 2))
        for path in itertools.product(range(2), repeat=3):
            p = np.exp(oracles.path_score(model, seq, path))
            total += p
            for k, t in enumerate(path):
                marg[k, t] += p
        post, ll = hmm.forward_backward(model, seq)
        np.testing.assert_allclose(post, marg / total, rtol=1e-12)
        assert ll == pytest.approx(np.log(total), rel=1e-12)

    def test_impossible_sequence(self):
        model = _model(["a", "b"], ["a", "b"], [1.0, 0.0], [[1.0, 0.0], [0.5, 0.5]], [[1, 0], [0, 1]])
        with pytest.raises(ImpossibleSequence, match="impossible sequence"):
            hmm.forward_backward(model, [0, 1])
        with pytest.raises(ImpossibleSequence):
            hmm.viterbi(model, [1])
        post, ll = hmm.forward_backward_batch(model, [[0, 1], [0, 0]])
        assert ll[0] == -np.inf and np.isfinite(ll[1])
        assert not post[0].any()

    def test_forced_path(self):
        model = _model(["a", "b", "c"], ["a", "b", "c"], [1 / 3] * 3, [[1 / 3] * 3] * 3, np.eye(3))
        assert hmm.viterbi(model, [2, 0, 1, 1]) == ["c", "a", "b", "b"]

    def test_tie_goes_to_lower_index(self):
        model = _model(["a", "b"], ["a b"], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], [[1.0], [1.0]])
        assert hmm.viterbi(model, [0]) == ["a"]
        assert hmm.viterbi(model, [0, 0, 0]) == ["a", "a", "a"]

    def test_viterbi_matches_enumeration_with_tie_break(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            model = oracles.random_model(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)), zeros=0.2)
            for L in (1, 2, 3):
                for seq in oracles.all_sequences(len(model.classes), L):
                    best, path = oracles.brute_viterbi(model, seq)
                    if best == -np.inf:
                        continue
                    got = [model.tag_index[t] for t in hmm.viterbi(model, list(seq))]
                    assert oracles.path_score(model, seq, got) == pytest.approx(best, rel=1e-12)

    def test_empty_sentence(self):
        model = _model(["a"], ["a"], [1.0], [[1.0]], [[1.0]])
        with pytest.raises(ValueError):
            hmm.viterbi(model, [])

    def test_class_out_of_range(self):
        model = _model(["a"], ["a"], [1.0], [[1.0]], [[1.0]])
        with pytest.raises(ValueError):
            hmm.forward_backward(model, [1])


class TestTraining:
    def test_zero_iterations(self):
        rng = np.random.default_rng(0)
        model = oracles.random_model(rng, 3, 3)
        trained, history = hmm.baum_welch(model, [[0, 1]], hmm.TrainingParams(0))
        assert trained is model and history == []

    def test_structural_zeros_survive(self):
        rng = np.random.default_rng(1)
        truth = oracles.random_model(rng, 4, 5)
        corpus = oracles.sample_corpus(rng, truth, 40)
        start = hmm.init_model(truth.tags, truth.classes)
        trained = hmm.train(start, corpus, hmm.TrainingParams(5))
        assert (trained.emission[~trained.mask] == 0).all()
        hmm.check_model(trained)

    def test_block_size_does_not_change_estimates(self):
        rng = np.random.default_rng(2)
        truth = oracles.random_model(rng, 4, 4)
        corpus = oracles.sample_corpus(rng, truth, 60)
        start = hmm.init_model(truth.tags, truth.classes)
        models = [hmm.train(start, corpus, hmm.TrainingParams(4, block)) for block in (1, 7, 1000)]
        for m in models[1:]:
            np.testing.assert_allclose(m.transition, models[0].transition, rtol=1e-10, atol=1e-15)
            np.testing.assert_allclose(m.emission, models[0].emission, rtol=1e-10, atol=1e-15)

    def test_epsilon_stops_early(self):
        rng = np.random.default_rng(4)
        truth = oracles.random_model(rng, 3, 3)
        corpus = oracles.sample_corpus(rng, truth, 30)
        start = hmm.init_model(truth.tags, truth.classes)
        _, full = hmm.baum_welch(start, corpus, hmm.TrainingParams(30))
        _, early = hmm.baum_welch(start, corpus, hmm.TrainingParams(30, 100, 0.05))
        assert len(full) == 31
        assert len(early) < len(full)
        assert early == full[:len(early)]

    def test_noun_after_determiner(self):
        # "dt" words are always followed by a {vb, nn} word; seeded with a
        # dt->nn bias, training keeps the preference and decoding picks nn
        classes = [hmm.EquivalenceClass(0, ("dt",)), hmm.EquivalenceClass(1, ("nn", "vb")),
                   hmm.EquivalenceClass(2, ("vb",)), hmm.EquivalenceClass(3, ("nn",))]
        model = hmm.init_model(["dt", "nn", "vb"], classes, hmm.BiasSpec({("dt", "nn"): 5}))
        corpus = [[0, 1, 2], [0, 1, 2, 0, 3], [3, 2, 0, 1]] * 20
        trained = hmm.train(model, corpus, hmm.TrainingParams(10))
        assert hmm.viterbi(trained, [0, 1]) == ["dt", "nn"]
        assert hmm.viterbi(trained, [0, 1, 2]) == ["dt", "nn", "vb"]

    def test_params_validation(self):
        for bad in ({"iterations": -1}, {"block_size": 0}, {"epsilon": -1.0}):
            with pytest.raises(ValueError):
                hmm.TrainingParams(**bad)


class TestFiles:
    def test_model_round_trip(self):
        rng = np.random.default_rng(9)
        model = oracles.random_model(rng, 5, 5)
        text = hmm.serialize_model(model)
        again = hmm.load_model(text)
        assert hmm.serialize_model(again) == text
        assert again.tags == model.tags and again.classes == model.classes
        np.testing.assert_array_equal(again.initial, model.initial)

    @pytest.mark.parametrize("mutate, line", [
        (lambda t: t.replace("HMM v1", "HMM v2"), 1),
        (lambda t: t.replace("0.25 0.25 0.5", "0.25 0.25 x"), 10),
        (lambda t: t.replace("0.25 0.25 0.5", "0.25 0.25"), 10),
        (lambda t: t.replace("INIT", "START"), 6),
    ])
    def test_malformed_model(self, mutate, line):
        with pytest.raises(FormatError) as exc:
            hmm.load_model(mutate(_fixture("canonical.hmm")))
        assert exc.value.line == line

    def test_rows_must_be_stochastic(self):
        text = _fixture("canonical.hmm").replace("0.125 0.75 0.125", "0.125 0.75 0.25")
        with pytest.raises(FormatError, match="sum to 1"):
            hmm.load_model(text)

    def test_emission_outside_class(self):
        text = _fixture("canonical.hmm").replace("1 0 0", "0.5 0.5 0")
        with pytest.raises(FormatError, match="outside"):
            hmm.load_model(text)

    def test_bias_round_trip(self):
        text = _fixture("canonical.bias")
        spec = hmm.load_biases(text)
        assert spec.transition == {("dt", "nn"): 3.0}
        assert spec.symbol == {(2, "nn"): 0.5}
        assert hmm.serialize_biases(spec) == text

    def test_bad_bias_line(self):
        with pytest.raises(FormatError) as exc:
            hmm.load_biases("TRANS a b 1\nSYM x a 1\n")
        assert exc.value.line == 2


def _fixture(name):
    return (Path(__file__).parent / "fixtures" / name).read_text(encoding="utf-8")

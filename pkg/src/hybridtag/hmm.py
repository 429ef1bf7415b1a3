"""First-order HMM tagger over word equivalence classes.

Words are not emitted directly: every word maps to the class of words that
share its set of possible coarse tags, and the model emits class ids.  Tags
outside a class's tag set have structural zeros in the emission matrix, and
those zeros survive training.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import FormatError, ImpossibleSequence, ResourceError
from .morph import AffixRule, GuesserConfig, Lexicon

log = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class EquivalenceClass:
    id: int
    tags: tuple[str, ...]

    @property
    def key(self) -> frozenset[str]:
        return frozenset(self.tags)


@dataclass
class BiasSpec:
    """Pseudo-count weights added on top of 1 before normalisation."""

    transition: dict[tuple[str, str], float] = field(default_factory=dict)
    symbol: dict[tuple[int, str], float] = field(default_factory=dict)


@dataclass(frozen=True)
class TrainingParams:
    iterations: int = 10
    block_size: int = 100
    epsilon: float = 0.0

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.block_size < 1:
            raise ValueError("block size must be >= 1")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")


@dataclass(frozen=True, eq=False)
class HmmModel:
    tags: tuple[str, ...]
    classes: tuple[EquivalenceClass, ...]
    initial: np.ndarray
    transition: np.ndarray
    emission: np.ndarray

    def __post_init__(self):
        T, C = len(self.tags), len(self.classes)
        for name, arr, shape in (("initial", self.initial, (T,)),
                                 ("transition", self.transition, (T, T)),
                                 ("emission", self.emission, (T, C))):
            arr = np.asarray(arr, dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for i, cls in enumerate(self.classes):
            if cls.id != i:
                raise ValueError("class ids must be 0..C-1 in order")

    @property
    def tag_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.tags)}

    @property
    def mask(self) -> np.ndarray:
        """``mask[t, c]`` is true when tag t belongs to class c."""
        idx = self.tag_index
        m = np.zeros((len(self.tags), len(self.classes)), dtype=bool)
        for cls in self.classes:
            for t in cls.tags:
                m[idx[t], cls.id] = True
        return m

    def class_index(self, key: Iterable[str]) -> int:
        key = frozenset(key)
        for cls in self.classes:
            if cls.key == key:
                return cls.id
        raise ResourceError(f"no equivalence class {{{' '.join(sorted(key))}}} in model")

    def copy_with(self, initial=None, transition=None, emission=None) -> HmmModel:
        return HmmModel(self.tags, self.classes,
                        self.initial if initial is None else initial,
                        self.transition if transition is None else transition,
                        self.emission if emission is None else emission)


# ---------------------------------------------------------------------------
# equivalence classes

@dataclass(frozen=True)
class CoarseVocabulary:
    """Coarse lexicon, suffix table and open class used to classify words."""

    lexicon: Lexicon
    rules: tuple[AffixRule, ...] = ()
    open_class: frozenset[str] = frozenset()

    @classmethod
    def from_resources(cls, lexicon: Lexicon, guesser: GuesserConfig | None = None) -> CoarseVocabulary:
        if guesser is None:
            # without a suffix table, unknown words may take any known tag
            tags = {t for rds in lexicon.entries.values() for r in rds for t in r.tags}
            return cls(lexicon, (), frozenset(tags))
        open_class = frozenset(t for r in guesser.open_class for t in r.tags)
        return cls(lexicon, guesser.rules, open_class)

    def classify(self, word: str) -> frozenset[str]:
        return classify(word, self.lexicon, self.open_class, self.rules)

    def all_keys(self) -> list[frozenset[str]]:
        keys = {frozenset(t for r in rds for t in r.tags) for rds in self.lexicon.entries.values()}
        keys.update(frozenset(t for r in rule.readings for t in r.tags) for rule in self.rules)
        if self.open_class:
            keys.add(self.open_class)
        return list(keys)


def classify(word: str, lexicon: Lexicon, open_class: Iterable[str],
             rules: Sequence[AffixRule] = ()) -> frozenset[str]:
    """The coarse tag set keying ``word``'s equivalence class."""
    rds = lexicon.lookup(word)
    if rds is None:
        for rule in rules:
            if rule.matches(word):
                rds = rule.readings
                break
    if rds is None:
        key = frozenset(open_class)
    else:
        key = frozenset(t for r in rds for t in r.tags)
    if not key:
        raise ResourceError(f"word {word!r} has no coarse tags")
    return key


def build_classes(keys: Iterable[Iterable[str]]) -> tuple[tuple[str, ...], tuple[EquivalenceClass, ...]]:
    """Sorted tag list and classes ordered by (size, tag indices)."""
    keys = {frozenset(k) for k in keys}
    tags = tuple(sorted(set().union(*keys))) if keys else ()
    idx = {t: i for i, t in enumerate(tags)}
    ordered = sorted((tuple(sorted(idx[t] for t in k)) for k in keys), key=lambda k: (len(k), k))
    classes = tuple(EquivalenceClass(i, tuple(tags[j] for j in k)) for i, k in enumerate(ordered))
    return tags, classes


def encode(words: Sequence[str], model: HmmModel, vocab: CoarseVocabulary) -> list[int]:
    return [model.class_index(vocab.classify(w)) for w in words]


# ---------------------------------------------------------------------------
# initialisation

def init_model(tags: Sequence[str], classes: Sequence[EquivalenceClass],
               biases: BiasSpec | None = None) -> HmmModel:
    tags = tuple(tags)
    classes = tuple(classes)
    biases = biases or BiasSpec()
    idx = {t: i for i, t in enumerate(tags)}
    T, C = len(tags), len(classes)
    mask = np.zeros((T, C), dtype=bool)
    for cls in classes:
        for t in cls.tags:
            if t not in idx:
                raise ResourceError(f"class {cls.id} uses unknown tag {t!r}")
            mask[idx[t], cls.id] = True
    for t, row in zip(tags, mask):
        if not row.any():
            raise ResourceError(f"unemittable tag {t!r}")

    trans = np.ones((T, T))
    for (a, b), w in biases.transition.items():
        if a not in idx or b not in idx:
            raise ResourceError(f"transition bias references unknown tag in ({a}, {b})")
        if not (np.isfinite(w) and w >= 0):
            raise ResourceError(f"transition bias ({a}, {b}) must be finite and >= 0")
        trans[idx[a], idx[b]] += w
    emit = mask.astype(float)
    for (c, t), w in biases.symbol.items():
        if not 0 <= c < C or t not in idx:
            raise ResourceError(f"symbol bias references unknown class/tag ({c}, {t})")
        if not mask[idx[t], c]:
            raise ResourceError(f"symbol bias ({c}, {t}): tag not in class")
        if not (np.isfinite(w) and w >= 0):
            raise ResourceError(f"symbol bias ({c}, {t}) must be finite and >= 0")
        emit[idx[t], c] += w
    trans /= trans.sum(axis=1, keepdims=True)
    emit /= emit.sum(axis=1, keepdims=True)
    return HmmModel(tags, classes, np.full(T, 1.0 / T), trans, emit)


# ---------------------------------------------------------------------------
# inference

def _as_batch(model: HmmModel, seqs) -> np.ndarray:
    obs = np.asarray(seqs, dtype=np.int64)
    if obs.ndim != 2 or obs.shape[1] == 0:
        raise ValueError("expected a non-empty batch of equal-length sequences")
    if obs.size and (obs.min() < 0 or obs.max() >= len(model.classes)):
        raise ValueError("class id out of range")
    return obs


def _scaled_passes(model: HmmModel, obs: np.ndarray):
    """Scaled forward and backward variables for a batch (N, L)."""
    A = model.transition
    E = model.emission[:, obs].transpose(1, 2, 0)          # (N, L, T)
    N, L, T = E.shape
    alpha = np.empty((N, L, T))
    scale = np.empty((N, L))
    a = model.initial * E[:, 0]
    for t in range(L):
        if t:
            a = (alpha[:, t - 1] @ A) * E[:, t]
        c = a.sum(axis=1)
        scale[:, t] = c
        alpha[:, t] = a / np.where(c > 0, c, 1.0)[:, None]
    possible = (scale > 0).all(axis=1)
    safe = np.where(scale > 0, scale, 1.0)
    beta = np.empty((N, L, T))
    beta[:, L - 1] = 1.0
    for t in range(L - 2, -1, -1):
        beta[:, t] = ((E[:, t + 1] * beta[:, t + 1]) @ A.T) / safe[:, t + 1, None]
    return E, alpha, beta, safe, possible


def forward_backward_batch(model: HmmModel, seqs) -> tuple[np.ndarray, np.ndarray]:
    """Posteriors (N, L, T) and log-likelihoods (N,) for equal-length sequences.

    Impossible sequences get a log-likelihood of ``-inf`` and zero posteriors.
    """
    obs = _as_batch(model, seqs)
    _, alpha, beta, safe, possible = _scaled_passes(model, obs)
    post = alpha * beta
    norm = post.sum(axis=2, keepdims=True)
    post = np.where(norm > 0, post / np.where(norm > 0, norm, 1.0), 0.0)
    post[~possible] = 0.0
    ll = np.where(possible, np.log(safe).sum(axis=1), -np.inf)
    return post, ll


def forward_backward(model: HmmModel, sentence: Sequence[int]) -> tuple[np.ndarray, float]:
    if len(sentence) == 0:
        raise ValueError("empty sentence")
    post, ll = forward_backward_batch(model, [list(sentence)])
    if not np.isfinite(ll[0]):
        raise ImpossibleSequence()
    return post[0], float(ll[0])


def _logs(model: HmmModel):
    with np.errstate(divide="ignore"):
        return np.log(model.initial), np.log(model.transition), np.log(model.emission)


def viterbi_batch(model: HmmModel, seqs) -> tuple[np.ndarray, np.ndarray]:
    """Best tag-index paths (N, L) and their log-probabilities (N,).

    Ties go to the lowest tag index, both at back-pointers and at the end.
    """
    obs = _as_batch(model, seqs)
    log_pi, log_a, log_b = _logs(model)
    N, L = obs.shape
    delta = log_pi + log_b[:, obs[:, 0]].T                 # (N, T)
    back = np.zeros((N, L, len(model.tags)), dtype=np.int64)
    for t in range(1, L):
        scores = delta[:, :, None] + log_a                  # (N, from, to)
        best = scores.argmax(axis=1)
        back[:, t] = best
        delta = scores.max(axis=1) + log_b[:, obs[:, t]].T
    paths = np.empty((N, L), dtype=np.int64)
    paths[:, L - 1] = delta.argmax(axis=1)
    logp = delta[np.arange(N), paths[:, L - 1]]
    for t in range(L - 1, 0, -1):
        paths[:, t - 1] = back[np.arange(N), t, paths[:, t]]
    return paths, logp


def viterbi(model: HmmModel, sentence: Sequence[int]) -> list[str]:
    if len(sentence) == 0:
        raise ValueError("empty sentence")
    paths, logp = viterbi_batch(model, [list(sentence)])
    if not np.isfinite(logp[0]):
        raise ImpossibleSequence()
    return [model.tags[i] for i in paths[0]]


def path_log_prob(model: HmmModel, sentence: Sequence[int], path: Sequence[int]) -> float:
    log_pi, log_a, log_b = _logs(model)
    lp = log_pi[path[0]] + log_b[path[0], sentence[0]]
    for t in range(1, len(sentence)):
        lp += log_a[path[t - 1], path[t]] + log_b[path[t], sentence[t]]
    return float(lp)


# ---------------------------------------------------------------------------
# training

def _by_length(sentences: Sequence[Sequence[int]]):
    groups: dict[int, list] = {}
    for s in sentences:
        groups.setdefault(len(s), []).append(s)
    for length in sorted(groups):
        yield np.asarray(groups[length], dtype=np.int64)


def _expected_counts(model: HmmModel, corpus: Sequence[Sequence[int]], block_size: int):
    T, C = len(model.tags), len(model.classes)
    start = np.zeros(T)
    trans = np.zeros((T, T))
    emit = np.zeros((T, C))
    total_ll = 0.0
    for b in range(0, len(corpus), block_size):
        b_start, b_trans, b_emit = np.zeros(T), np.zeros((T, T)), np.zeros((T, C))
        b_ll = 0.0
        for obs in _by_length(corpus[b:b + block_size]):
            E, alpha, beta, safe, possible = _scaled_passes(model, obs)
            if not possible.all():
                raise ImpossibleSequence()
            gamma = alpha * beta
            gamma /= gamma.sum(axis=2, keepdims=True)
            b_start += gamma[:, 0].sum(axis=0)
            if obs.shape[1] > 1:
                right = E[:, 1:] * beta[:, 1:] / safe[:, 1:, None]
                b_trans += np.einsum("nti,ntj->ij", alpha[:, :-1], right) * model.transition
            flat_obs = obs.ravel()
            flat_gamma = gamma.reshape(-1, T)
            for c in np.unique(flat_obs):
                b_emit[:, c] += flat_gamma[flat_obs == c].sum(axis=0)
            b_ll += float(np.log(safe).sum())
        start += b_start
        trans += b_trans
        emit += b_emit
        total_ll += b_ll
    return (start, trans, emit), total_ll


def _normalize_rows(counts: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    sums = counts.sum(axis=-1, keepdims=True)
    # rows never visited keep their previous estimate
    return np.where(sums > 0, counts / np.where(sums > 0, sums, 1.0), fallback)


def _reestimate(model: HmmModel, counts) -> HmmModel:
    start, trans, emit = counts
    emit = emit * model.mask
    return model.copy_with(
        initial=_normalize_rows(start, model.initial),
        transition=_normalize_rows(trans, model.transition),
        emission=_normalize_rows(emit, model.emission))


def log_likelihood(model: HmmModel, corpus: Sequence[Sequence[int]]) -> float:
    _, ll = _expected_counts(model, corpus, max(1, len(corpus)))
    return ll


def baum_welch(model: HmmModel, corpus: Sequence[Sequence[int]],
               params: TrainingParams) -> tuple[HmmModel, list[float]]:
    """Batch EM.  Returns the trained model and the corpus log-likelihood of
    the starting model followed by that of every re-estimated model."""
    corpus = [list(s) for s in corpus if len(s)]
    if not corpus:
        raise ValueError("empty training corpus")
    if params.iterations == 0:
        return model, []
    counts, ll = _expected_counts(model, corpus, params.block_size)
    history = [ll]
    for it in range(params.iterations):
        model = _reestimate(model, counts)
        counts, ll = _expected_counts(model, corpus, params.block_size)
        history.append(ll)
        log.info("iteration %d: log-likelihood %.6f", it + 1, ll)
        # epsilon 0 runs every iteration
        if params.epsilon > 0 and ll - history[-2] < params.epsilon:
            break
    return model, history


def train(model: HmmModel, corpus: Sequence[Sequence[int]], params: TrainingParams) -> HmmModel:
    return baum_welch(model, corpus, params)[0]


# ---------------------------------------------------------------------------
# files

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize_model(model: HmmModel) -> str:
    out = ["HMM v1\n", "TAGS " + " ".join(model.tags) + "\n"]
    out += [f"CLASS {c.id}: {' '.join(c.tags)}\n" for c in model.classes]
    out.append("INIT\n" + " ".join(_fmt(x) for x in model.initial) + "\n")
    out.append("TRANS\n")
    out += [" ".join(_fmt(x) for x in row) + "\n" for row in model.transition]
    out.append("EMIT\n")
    out += [" ".join(_fmt(x) for x in row) + "\n" for row in model.emission]
    return "".join(out)


def check_model(model: HmmModel, source=None) -> None:
    rows = [model.initial[None, :], model.transition, model.emission]
    for name, mat in zip(("INIT", "TRANS", "EMIT"), rows):
        if (mat < 0).any() or not np.isfinite(mat).all():
            raise FormatError(f"{name}: probabilities must be finite and >= 0", None, source)
        if np.abs(mat.sum(axis=1) - 1.0).max(initial=0.0) > STOCHASTIC_TOL:
            raise FormatError(f"{name}: rows must sum to 1", None, source)
    if (model.emission[~model.mask] != 0).any():
        raise FormatError("EMIT: nonzero probability outside a class tag set", None, source)


def load_model(stream: TextIO | str, source=None) -> HmmModel:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = [(n, l.rstrip("\n")) for n, l in enumerate(stream, 1) if l.strip()]
    if not lines or lines[0][1] != "HMM v1":
        raise FormatError("missing 'HMM v1' header", 1, source)
    pos = 1

    def expect(prefix):
        nonlocal pos
        if pos >= len(lines) or not lines[pos][1].startswith(prefix):
            line = lines[pos][0] if pos < len(lines) else (lines[-1][0] + 1)
            raise FormatError(f"expected {prefix.strip()!r}", line, source)
        pos += 1
        return lines[pos - 1]

    def numbers(n_rows, width):
        nonlocal pos
        rows = []
        for _ in range(n_rows):
            if pos >= len(lines):
                raise FormatError("truncated matrix", lines[-1][0] + 1, source)
            lineno, text = lines[pos]
            try:
                row = [float(x) for x in text.split()]
            except ValueError:
                raise FormatError(f"bad number in {text!r}", lineno, source) from None
            if len(row) != width:
                raise FormatError(f"expected {width} numbers", lineno, source)
            rows.append(row)
            pos += 1
        return np.array(rows, dtype=float).reshape(n_rows, width)

    _, text = expect("TAGS ")
    tags = tuple(text.split()[1:])
    classes = []
    while pos < len(lines) and lines[pos][1].startswith("CLASS "):
        lineno, text = lines[pos]
        head, _, body = text.partition(":")
        try:
            cid = int(head.split()[1])
        except (IndexError, ValueError):
            raise FormatError(f"malformed class line {text!r}", lineno, source) from None
        if cid != len(classes) or not body.split():
            raise FormatError(f"malformed class line {text!r}", lineno, source)
        classes.append(EquivalenceClass(cid, tuple(body.split())))
        pos += 1
    known = set(tags)
    for c in classes:
        if not set(c.tags) <= known:
            raise FormatError(f"class {c.id} uses unknown tags", None, source)
    T, C = len(tags), len(classes)
    expect("INIT")
    initial = numbers(1, T)[0]
    expect("TRANS")
    transition = numbers(T, T)
    expect("EMIT")
    emission = numbers(T, C)
    if pos != len(lines):
        raise FormatError("trailing content", lines[pos][0], source)
    model = HmmModel(tags, tuple(classes), initial, transition, emission)
    check_model(model, source)
    return model


def load_biases(stream: TextIO | str, source=None) -> BiasSpec:
    """``TRANS a b weight`` and ``SYM classId tag weight`` lines."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    spec = BiasSpec()
    for lineno, raw in enumerate(stream, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        f = line.split()
        try:
            if f[0] == "TRANS" and len(f) == 4:
                spec.transition[(f[1], f[2])] = float(f[3])
            elif f[0] == "SYM" and len(f) == 4:
                spec.symbol[(int(f[1]), f[2])] = float(f[3])
            else:
                raise ValueError
        except ValueError:
            raise FormatError(f"malformed bias line {line!r}", lineno, source) from None
    return spec


def serialize_biases(spec: BiasSpec) -> str:
    out = [f"TRANS {a} {b} {_fmt(w)}\n" for (a, b), w in spec.transition.items()]
    out += [f"SYM {c} {t} {_fmt(w)}\n" for (c, t), w in spec.symbol.items()]
    return "".join(out)

"""Command line interface.

Exit codes: 0 success, 1 usage, 2 data/format error, 3 resource inconsistency.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import cg, combine, hmm
from .core import (AnnotatedCorpus, TokenizationPolicy, default_policy, load_policy,
                   parse_corpus, serialize_corpus, tokenize)
from .errors import HybridTagError, ResourceError
from .morph import analyze, load_guesser, load_lexicon
from .pipeline import CONFIGS, MORPH, Resources, StageConfig, evaluate, report, run

log = logging.getLogger("hybridtag")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RESOURCE = 0, 1, 2, 3

RESOURCE_FILES = {
    "fine_lexicon": "fine.lex",
    "guesser": "guesser.rules",
    "grammar": "grammar.cg",
    "coarse_lexicon": "coarse.lex",
    "coarse_guesser": "coarse.rules",
    "model": "model.hmm",
    "mapping": "mapping.map",
    "policy": "policy.tok",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_text(path) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _load(loader, path, **kw):
    with open(path, encoding="utf-8") as f:
        return loader(f, source=str(path), **kw)


def load_resource_dir(directory, config: str, text_input: bool = True) -> Resources:
    """Load what ``config`` needs from a resource directory.

    ``policy.tok`` and ``mapping.map`` fall back to the shipped defaults;
    ``coarse.rules`` is optional.
    """
    directory = Path(directory)
    stages = StageConfig(config).stages
    if not directory.is_dir():
        raise ResourceError(f"resource directory {directory} does not exist")

    def need(stage, key):
        path = directory / RESOURCE_FILES[key]
        if not path.is_file():
            raise ResourceError(f"{config}: stage {stage} needs {path.name} in {directory}")
        return path

    res = Resources()
    policy_path = directory / RESOURCE_FILES["policy"]
    res.policy = _load(load_policy, policy_path) if policy_path.is_file() else default_policy()
    if text_input:
        res.fine_lexicon = _load(load_lexicon, need(MORPH, "fine_lexicon"))
        res.guesser = _load(load_guesser, need(MORPH, "guesser"))
    for stage in stages[1:]:
        if stage.startswith("cg-") and res.grammar is None:
            res.grammar = _load(cg.parse_grammar, need(stage, "grammar"))
        if stage.startswith("hmm-") and res.model is None:
            coarse_lex = _load(load_lexicon, need(stage, "coarse_lexicon"))
            rules_path = directory / RESOURCE_FILES["coarse_guesser"]
            coarse_rules = _load(load_guesser, rules_path) if rules_path.is_file() else None
            res.coarse_vocab = hmm.CoarseVocabulary.from_resources(coarse_lex, coarse_rules)
            res.model = _load(hmm.load_model, need(stage, "model"))
            map_path = directory / RESOURCE_FILES["mapping"]
            res.mapping = _load(combine.load_mapping, map_path) if map_path.is_file() \
                else combine.default_mapping()
    return res


def _trace_to_stderr(event):
    print(event, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands

def cmd_analyze(args) -> int:
    lexicon = _load(load_lexicon, args.lexicon)
    guesser = _load(load_guesser, args.guesser)
    policy = _load(load_policy, args.policy) if args.policy else default_policy()
    sentences = tokenize(_read_text(args.input), policy.fine())
    corpus = AnnotatedCorpus(tuple(
        tuple(analyze(w, lexicon, guesser) for w in sent) for sent in sentences))
    _write_text(args.out, serialize_corpus(corpus))
    return EXIT_OK


def cmd_disambiguate(args) -> int:
    grammar = _load(cg.parse_grammar, args.grammar)
    corpus = parse_corpus(_read_text(args.input), source=args.input)
    trace = _trace_to_stderr if args.trace else None
    out = AnnotatedCorpus(tuple(
        cg.disambiguate(s, grammar, args.tier, trace, i)
        for i, s in enumerate(corpus.without_gold().sentences)))
    _write_text(args.out, serialize_corpus(out))
    return EXIT_OK


def cmd_train_hmm(args) -> int:
    lexicon = _load(load_lexicon, args.coarse_lexicon)
    rules = _load(load_guesser, args.coarse_guesser) if args.coarse_guesser else None
    vocab = hmm.CoarseVocabulary.from_resources(lexicon, rules)
    tags, classes = hmm.build_classes(vocab.all_keys())
    biases = _load(hmm.load_biases, args.bias) if args.bias else None
    model = hmm.init_model(tags, classes, biases)
    sentences = tokenize(_read_text(args.corpus), TokenizationPolicy().coarse())
    corpus = [hmm.encode(s, model, vocab) for s in sentences]
    params = hmm.TrainingParams(args.iterations, args.block, args.epsilon)
    model, history = hmm.baum_welch(model, corpus, params)
    for i, ll in enumerate(history):
        log.info("log-likelihood after %d iterations: %.6f", i, ll)
    _write_text(args.out, hmm.serialize_model(model))
    return EXIT_OK


def cmd_tag(args) -> int:
    corpus_input = args.in_format == "corpus"
    res = load_resource_dir(args.resources, args.config, text_input=not corpus_input)
    text = _read_text(args.input)
    source = parse_corpus(text, source=args.input) if corpus_input else text
    trace = _trace_to_stderr if args.trace else None
    result = run(args.config, source, res, trace)
    for si, ci in result.residual:
        log.info("residual ambiguity: sentence %d word %d", si, ci)
    _write_text(args.out, serialize_corpus(result.corpus))
    return EXIT_OK


def cmd_eval(args) -> int:
    gold = parse_corpus(_read_text(args.gold), source=args.gold)
    rows = []
    for path in args.outputs:
        out = parse_corpus(_read_text(path), source=path)
        rows.append(evaluate(out, gold, label=Path(path).stem))
    _write_text(args.report, report(rows, args.format))
    if args.plot:
        from .plotting import save_report_figure
        save_report_figure(rows, args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridtag", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("analyze", help="tokenize and analyze text (D0 corpus)")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--guesser", required=True)
    p.add_argument("--policy")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("disambiguate", help="apply a constraint grammar to a corpus")
    p.add_argument("--grammar", required=True)
    p.add_argument("--tier", choices=cg.TIERS, default=cg.HEURISTIC)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", action="store_true", help="print applied rules to stderr")
    p.set_defaults(func=cmd_disambiguate)

    p = sub.add_parser("train-hmm", help="train the coarse HMM on untagged text")
    p.add_argument("--coarse-lexicon", required=True)
    p.add_argument("--coarse-guesser", help="suffix table and open class (guesser format)")
    p.add_argument("--bias")
    p.add_argument("--corpus", required=True)
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--block", type=int, default=100)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_hmm)

    p = sub.add_parser("tag", help="run a D0-D5 cascade")
    p.add_argument("--config", required=True, choices=list(CONFIGS))
    p.add_argument("--resources", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--in-format", choices=("text", "corpus"), default="text")
    p.add_argument("--out", required=True)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="compare system outputs with a gold corpus")
    p.add_argument("--gold", required=True)
    p.add_argument("--out", dest="outputs", nargs="+", required=True)
    p.add_argument("--format", choices=("table", "tsv"), default="table")
    p.add_argument("--report", help="write the report here instead of stdout")
    p.add_argument("--plot", help="also render the comparison as an image")
    p.set_defaults(func=cmd_eval)
    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"hybridtag: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except HybridTagError as exc:
        print(f"hybridtag: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"hybridtag: {exc}", file=sys.stderr)
        return EXIT_DATA


def main():
    sys.exit(dispatch())

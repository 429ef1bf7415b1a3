"""Hybrid part-of-speech disambiguation: constraint rules first, an HMM
tagger for what the rules leave open."""

from .core import (AnnotatedCorpus, Cohort, Reading, TokenizationPolicy,
                   ambiguity_metrics, parse_corpus, serialize_corpus, tokenize)
from .errors import (AlignmentError, EvaluationError, FormatError, HybridTagError,
                     ImpossibleSequence, ResourceError)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedCorpus", "Cohort", "Reading", "TokenizationPolicy",
    "ambiguity_metrics", "parse_corpus", "serialize_corpus", "tokenize",
    "AlignmentError", "EvaluationError", "FormatError", "HybridTagError",
    "ImpossibleSequence", "ResourceError",
]

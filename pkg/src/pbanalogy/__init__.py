"""Pronunciation by analogy with probabilistic candidate scoring."""

__version__ = "0.1.0"

from .corpus import AlignedEntry, Direction, Lexicon, filter_corpus, load_lexicon, parse_nettalk, swap_direction
from .index import SubstringIndex, estimated_probability, conditional_probability
from .lattice import Candidate, Mode, NoPronunciation, Segmentation, enumerate_segmentations, expand_candidates, generate_candidates
from .strategies import CandidateSet, StrategySpec, parse_strategy
from .evaluation import bounds, evaluate_corpus, evaluate_many, levenshtein, score_word

__all__ = [
    "AlignedEntry", "Candidate", "CandidateSet", "Direction", "Lexicon", "Mode", "NoPronunciation",
    "Segmentation", "StrategySpec", "SubstringIndex", "bounds", "conditional_probability",
    "enumerate_segmentations", "estimated_probability", "evaluate_corpus", "evaluate_many",
    "expand_candidates", "filter_corpus", "generate_candidates", "levenshtein", "load_lexicon",
    "parse_nettalk", "parse_strategy", "score_word", "swap_direction",
]

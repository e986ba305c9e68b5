"""Multi-objective evolutionary adversarial text generation."""

from evotext.text import TokenSeq, positional_jaccard, preprocess, words_replaced

__version__ = "0.1.0"

__all__ = ["TokenSeq", "positional_jaccard", "preprocess", "words_replaced"]

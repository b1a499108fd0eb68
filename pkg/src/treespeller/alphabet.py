"""The 28-symbol character set and corpus normalization.

Everything downstream (language model, trees, sessions) works over a fixed
alphabet of 26 lowercase letters, space, and the end-of-message character
``.``.  A complete message always ends with ``.`` and contains no other
``.`` anywhere.
"""

from __future__ import annotations

import re

LETTERS = "abcdefghijklmnopqrstuvwxyz"
SPACE = " "
STOP = "."


class CorpusError(ValueError):
    """Raised when a corpus is unusable after normalization."""


class Alphabet:
    """Fixed, ordered symbol set: a..z, space, ``.`` (28 symbols).

    The ordering is contractual; it drives the clockwise display layout and
    every tie-break rule in tree construction.
    """

    def __init__(self, symbols: str = LETTERS + SPACE + STOP):
        if STOP not in symbols:
            raise ValueError("alphabet must contain the stop character '.'")
        if len(set(symbols)) != len(symbols):
            raise ValueError("alphabet symbols must be unique")
        self.symbols = symbols
        self._index = {c: i for i, c in enumerate(symbols)}

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, char: str) -> bool:
        return char in self._index

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def index(self, char: str) -> int:
        return self._index[char]

    @property
    def stop(self) -> str:
        return STOP

    def is_valid_string(self, s: str) -> bool:
        """True for a complete message: ends in ``.``, no interior ``.``."""
        if not s or not s.endswith(STOP):
            return False
        body = s[:-1]
        return STOP not in body and all(c in self._index for c in body)


DEFAULT_ALPHABET = Alphabet()

_SENTENCE_END = re.compile(r"[.!?]")
_NON_ALPHABET = re.compile(r"[^a-z .]")
_MULTI_SPACE = re.compile(r" +")
_SPACE_AROUND_STOP = re.compile(r" *\. *")
_MULTI_STOP = re.compile(r"\.+")


def normalize_corpus(raw_text: str) -> str:
    """Reduce arbitrary text to the 28-symbol alphabet.

    Uppercase folds to lowercase, sentence-ending punctuation maps to ``.``,
    whitespace runs collapse to single spaces, everything else is dropped.
    Spaces never touch a ``.`` and ``.`` never repeats.
    """
    text = raw_text.lower()
    text = _SENTENCE_END.sub(STOP, text)
    text = re.sub(r"\s+", SPACE, text)
    text = _NON_ALPHABET.sub("", text)
    text = _MULTI_SPACE.sub(SPACE, text)
    text = _SPACE_AROUND_STOP.sub(STOP, text)
    text = _MULTI_STOP.sub(STOP, text)
    text = text.strip(SPACE).lstrip(STOP)
    if not text:
        raise CorpusError("corpus is empty after normalization")
    return text

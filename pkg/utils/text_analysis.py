"""Tokenization, stop-word removal and Porter stemming shared by events and corpora."""
from __future__ import annotations

import os
import re
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from nltk.stem import PorterStemmer

from utils.config import STOPWORDS_FILE
from utils.errors import InputNotFoundError

# Unicode letters and digits; underscores and punctuation split words
_WORD_RE = re.compile(r"[^\W_]+")


def split_words(text: Optional[str]) -> List[str]:
    """Lower-case and split text on anything that is not a letter or digit."""
    if not text:
        return []
    return _WORD_RE.findall(text.lower())


def load_stop_words(path: str = STOPWORDS_FILE) -> FrozenSet[str]:
    """Read a stop-word file: one word per line, '#' starts a comment line."""
    if not os.path.exists(path):
        raise InputNotFoundError(path, "stop-word list")
    words = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            word = line.strip().lower()
            if word and not word.startswith("#"):
                words.add(word)
    return frozenset(words)


class Analyzer:
    """Lower-case, split, drop stop-words and optionally Porter-stem."""

    def __init__(self, stop_words: Iterable[str] = (), stem: bool = True):
        self._stop_words = frozenset(w.lower() for w in stop_words)
        self._stem = stem
        self._stemmer = PorterStemmer()
        self._stem_cache: Dict[str, str] = {}

    @property
    def stop_words(self) -> FrozenSet[str]:
        return self._stop_words

    def is_stop_word(self, word: str) -> bool:
        return word.lower() in self._stop_words

    def stem(self, word: str) -> str:
        word = word.lower()
        cached = self._stem_cache.get(word)
        if cached is None:
            cached = self._stemmer.stem(word)
            self._stem_cache[word] = cached
        return cached

    def surface_tokens(self, text: Optional[str]) -> List[str]:
        """Lower-cased words with stop-words removed, unstemmed."""
        return [w for w in split_words(text) if w not in self._stop_words]

    def pairs(self, text: Optional[str]) -> List[Tuple[str, str]]:
        """(surface, stem) for every non-stop word, in text order."""
        return [(w, self.stem(w)) for w in self.surface_tokens(text)]

    def tokenize(self, text: Optional[str], stem: Optional[bool] = None) -> List[str]:
        do_stem = self._stem if stem is None else stem
        words = self.surface_tokens(text)
        if not do_stem:
            return words
        return [self.stem(w) for w in words]


def tokenize(text: Optional[str], stem: bool = True,
             stop_list: Optional[Iterable[str]] = None) -> List[str]:
    """Tokenize with an explicit stop list, or the bundled list when none is given."""
    if stop_list is None:
        return default_analyzer().tokenize(text, stem=stem)
    return Analyzer(stop_list, stem=stem).tokenize(text)


_default_analyzer: Optional[Analyzer] = None


def default_analyzer() -> Analyzer:
    """Analyzer over the bundled stop-word list (built once)."""
    global _default_analyzer
    if _default_analyzer is None:
        _default_analyzer = Analyzer(load_stop_words(), stem=True)
    return _default_analyzer

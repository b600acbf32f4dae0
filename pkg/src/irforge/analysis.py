"""Text analysis chain: tokenizer, stopword filter, Porter stemmer."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# Letters and digits only; underscore is a separator like any other punctuation.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Lucene's classic English list plus the auxiliaries/pronouns that keyword
# selection must never pick. One list serves both indexing and masking.
ENGLISH_STOPWORDS = frozenset(
    """
    a an and are as at be but by for if in into is it no not of on or such
    that the their then there these they this to was will with
    am can could did do does doing done from had has have he her hers him
    his how i its may me might must my our ours she should so than them
    those us we were what when where which who whom why would you your
    yours
    """.split()
)


def tokenize(text: str) -> list[str]:
    """Split on Unicode non-letter/non-digit boundaries."""
    return _TOKEN_RE.findall(text)


def token_spans(text: str) -> list[tuple[int, int, str]]:
    """Like tokenize but with (start, end) character offsets."""
    return [(m.start(), m.end(), m.group()) for m in _TOKEN_RE.finditer(text)]


class PorterStemmer:
    """The original Porter suffix-stripping algorithm.

    Operates on lowercase ASCII words; anything shorter than three
    characters is returned unchanged, as in the reference implementation.
    """

    def __init__(self) -> None:
        self.b = ""
        self.k = 0
        self.j = 0

    def _cons(self, i: int) -> bool:
        ch = self.b[i]
        if ch in "aeiou":
            return False
        if ch == "y":
            return True if i == 0 else not self._cons(i - 1)
        return True

    def _m(self) -> int:
        # number of consonant-vowel sequences in b[0..j]
        n = 0
        i = 0
        while True:
            if i > self.j:
                return n
            if not self._cons(i):
                break
            i += 1
        i += 1
        while True:
            while True:
                if i > self.j:
                    return n
                if self._cons(i):
                    break
                i += 1
            i += 1
            n += 1
            while True:
                if i > self.j:
                    return n
                if not self._cons(i):
                    break
                i += 1
            i += 1

    def _vowel_in_stem(self) -> bool:
        return any(not self._cons(i) for i in range(self.j + 1))

    def _doublec(self, j: int) -> bool:
        return j >= 1 and self.b[j] == self.b[j - 1] and self._cons(j)

    def _cvc(self, i: int) -> bool:
        if i < 2 or not self._cons(i) or self._cons(i - 1) or not self._cons(i - 2):
            return False
        return self.b[i] not in "wxy"

    def _ends(self, s: str) -> bool:
        if len(s) > self.k + 1 or not self.b[: self.k + 1].endswith(s):
            return False
        self.j = self.k - len(s)
        return True

    def _setto(self, s: str) -> None:
        self.b = self.b[: self.j + 1] + s
        self.k = len(self.b) - 1

    def _r(self, s: str) -> None:
        if self._m() > 0:
            self._setto(s)

    def _step1ab(self) -> None:
        if self.b[self.k] == "s":
            if self._ends("sses"):
                self.k -= 2
            elif self._ends("ies"):
                self._setto("i")
            elif self.b[self.k - 1] != "s":
                self.k -= 1
        if self._ends("eed"):
            if self._m() > 0:
                self.k -= 1
        elif (self._ends("ed") or self._ends("ing")) and self._vowel_in_stem():
            self.k = self.j
            self.b = self.b[: self.k + 1]
            if self._ends("at"):
                self._setto("ate")
            elif self._ends("bl"):
                self._setto("ble")
            elif self._ends("iz"):
                self._setto("ize")
            elif self._doublec(self.k):
                if self.b[self.k] not in "lsz":
                    self.k -= 1
            elif self._m() == 1 and self._cvc(self.k):
                self._setto("e")

    def _step1c(self) -> None:
        if self._ends("y") and self._vowel_in_stem():
            self.b = self.b[: self.k] + "i"

    def _step2(self) -> None:
        pairs = (
            ("ational", "ate"), ("tional", "tion"), ("enci", "ence"),
            ("anci", "ance"), ("izer", "ize"), ("bli", "ble"),
            ("alli", "al"), ("entli", "ent"), ("eli", "e"),
            ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
            ("ator", "ate"), ("alism", "al"), ("iveness", "ive"),
            ("fulness", "ful"), ("ousness", "ous"), ("aliti", "al"),
            ("iviti", "ive"), ("biliti", "ble"), ("logi", "log"),
        )
        for suffix, repl in pairs:
            if self._ends(suffix):
                self._r(repl)
                return

    def _step3(self) -> None:
        pairs = (
            ("icate", "ic"), ("ative", ""), ("alize", "al"),
            ("iciti", "ic"), ("ical", "ic"), ("ful", ""), ("ness", ""),
        )
        for suffix, repl in pairs:
            if self._ends(suffix):
                self._r(repl)
                return

    def _step4(self) -> None:
        suffixes = (
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant",
            "ement", "ment", "ent", "ion", "ou", "ism", "ate", "iti",
            "ous", "ive", "ize",
        )
        for suffix in suffixes:
            if self._ends(suffix):
                if suffix == "ion" and self.b[self.j] not in "st":
                    continue
                if self._m() > 1:
                    self.k = self.j
                    self.b = self.b[: self.k + 1]
                return

    def _step5(self) -> None:
        self.j = self.k
        if self.b[self.k] == "e":
            a = self._m()
            if a > 1 or (a == 1 and not self._cvc(self.k - 1)):
                self.k -= 1
                self.b = self.b[: self.k + 1]
        if self.b[self.k] == "l" and self._doublec(self.k) and self._m() > 1:
            self.k -= 1
            self.b = self.b[: self.k + 1]

    def stem(self, word: str) -> str:
        if len(word) <= 2:
            return word
        self.b = word
        self.k = len(word) - 1
        self.j = 0
        self._step1ab()
        self._step1c()
        self._step2()
        self._step3()
        self._step4()
        self._step5()
        return self.b[: self.k + 1]


_PORTER = PorterStemmer()

STEM_PORTER = "porter"
STEM_NONE = "none"


@dataclass(frozen=True)
class Analyzer:
    """Tokenize, lowercase, drop stopwords, then stem.

    Stemming always runs after stopword removal so the stopword list can
    stay in surface form.
    """

    lowercase: bool = True
    stopword_list: frozenset[str] = field(default_factory=lambda: ENGLISH_STOPWORDS)
    stemmer: str = STEM_PORTER

    def __post_init__(self) -> None:
        if self.stemmer not in (STEM_PORTER, STEM_NONE):
            raise ValueError(f"unknown stemmer: {self.stemmer!r}")

    def analyze(self, text: str) -> list[str]:
        tokens = tokenize(text)
        if self.lowercase:
            tokens = [t.lower() for t in tokens]
        if self.stopword_list:
            tokens = [t for t in tokens if t not in self.stopword_list]
        if self.stemmer == STEM_PORTER:
            tokens = [_PORTER.stem(t) for t in tokens]
        return tokens

"""Tweet content features and the lexicons behind them.

Twelve features are computed per tweet, in this fixed order:

==== =======================================================================
TF1  number of user mentions
TF2  number of hashtags
TF3  number of URLs
TF4  count of media attachments
TF5  1 if the tweet is a reply, else 0
TF6  number of special characters (neither alphanumeric nor whitespace)
TF7  length of the text in characters (Unicode scalar values)
TF8  mean sentiment polarity of matched word tokens, clamped to [-1, +1]
TF9  number of noun word tokens
TF10 number of adjective word tokens
TF11 number of pronoun word tokens
TF12 number of verb word tokens
==== =======================================================================

TF1-TF3 prefer entity metadata when the record carries it (source platforms
export mention/hashtag/URL lists); otherwise they fall back to the
whitespace tokenizer below.  Sentiment and part-of-speech lookups are
pluggable lexicons in the file formats documented on the loaders; small demo
lexicons ship with the package.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DataFormatError

__all__ = [
    "TweetRecord",
    "Token",
    "SentimentLexicon",
    "PosLexicon",
    "FEATURE_NAMES",
    "LABELS",
    "CATEGORIES",
    "POS_TAGS",
    "tokenize",
    "extract_features",
    "load_sentiment_lexicon",
    "save_sentiment_lexicon",
    "load_pos_lexicon",
    "save_pos_lexicon",
    "demo_sentiment_lexicon",
    "demo_pos_lexicon",
]

LABELS = ("genuine", "blackmarket")
CATEGORIES = ("Promotional", "Entertainment", "Spam", "News", "Politics", "Others")
POS_TAGS = ("noun", "adjective", "pronoun", "verb", "other")
FEATURE_NAMES = tuple(f"TF{i}" for i in range(1, 13))

URL_SCHEMES = ("http://", "https://")
SHORTENER_DOMAINS = ("t.co", "bit.ly", "tinyurl.com", "goo.gl", "ow.ly", "buff.ly", "is.gd")


@dataclass
class TweetRecord:
    """One tweet: text, source metadata, engagement five days after posting,
    and (for labeled data) the class label plus the annotation category that
    is only meaningful for blackmarket tweets."""

    id: str
    text: str
    lang: str | None = None
    is_reply: bool = False
    media_count: int = 0
    mentions: list[str] | None = None
    hashtags: list[str] | None = None
    urls: list[str] | None = None
    retweets_5d: int = 0
    likes_5d: int = 0
    label: str | None = None
    category: str | None = None


@dataclass(frozen=True)
class Token:
    kind: str  # "word" | "mention" | "hashtag" | "url"
    text: str


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def _leading_word_run(raw: str, start: int) -> str:
    end = start
    while end < len(raw) and _is_word_char(raw[end]):
        end += 1
    return raw[start:end]


def _looks_like_url(raw: str) -> bool:
    low = raw.lower()
    if low.startswith(URL_SCHEMES):
        return True
    for dom in SHORTENER_DOMAINS:
        if low.startswith(dom + "/") and len(low) > len(dom) + 1:
            return True
    return False


def tokenize(text: str) -> list[Token]:
    """Split on whitespace and classify each piece.

    A token starting with '@' or '#' followed by at least one word character
    becomes a mention/hashtag whose text is the marker plus that word-char
    run (trailing punctuation is discarded).  A token starting with
    "http://"/"https://" or with a known URL-shortener domain is a URL and
    is kept verbatim.  Anything else is a word: leading and trailing
    non-alphanumeric characters are stripped and the rest lowercased; tokens
    that strip to nothing are dropped.
    """
    tokens: list[Token] = []
    for raw in text.split():
        if raw[0] == "@":
            run = _leading_word_run(raw, 1)
            if run:
                tokens.append(Token("mention", "@" + run))
                continue
        elif raw[0] == "#":
            run = _leading_word_run(raw, 1)
            if run:
                tokens.append(Token("hashtag", "#" + run))
                continue
        if _looks_like_url(raw):
            tokens.append(Token("url", raw))
            continue
        start = 0
        end = len(raw)
        while start < end and not raw[start].isalnum():
            start += 1
        while end > start and not raw[end - 1].isalnum():
            end -= 1
        if end > start:
            tokens.append(Token("word", raw[start:end].lower()))
    return tokens


# ---------------------------------------------------------------------------
# Lexicons
# ---------------------------------------------------------------------------

@dataclass
class SentimentLexicon:
    """token -> polarity in [-1, +1]; insertion order is preserved on save."""

    polarity: dict[str, float] = field(default_factory=dict)


def load_sentiment_lexicon(path) -> SentimentLexicon:
    """Parse a sentiment lexicon file.

    Format: UTF-8, one ``token<TAB>polarity`` per line; lines starting with
    '#' and blank lines are ignored.  Polarities must lie in [-1, +1].
    Duplicate tokens keep the last entry and emit a warning.
    """
    lex = SentimentLexicon()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise DataFormatError(f"expected 'token<TAB>polarity', got {line!r}", lineno)
            token, raw_polarity = parts
            try:
                polarity = float(raw_polarity)
            except ValueError:
                raise DataFormatError(f"polarity {raw_polarity!r} is not a number", lineno) from None
            if not -1.0 <= polarity <= 1.0:
                raise DataFormatError(f"polarity {polarity} outside [-1, 1]", lineno)
            if token in lex.polarity:
                warnings.warn(f"duplicate sentiment token {token!r} at line {lineno}; last entry wins")
            lex.polarity[token] = polarity
    return lex


def save_sentiment_lexicon(lex: SentimentLexicon, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token, polarity in lex.polarity.items():
            fh.write(f"{token}\t{polarity!r}\n")


@dataclass
class PosLexicon:
    """Deterministic word tagger: exact lookup, then ordered suffix rules,
    then the default tag."""

    words: dict[str, str] = field(default_factory=dict)
    suffix_rules: list[tuple[str, str]] = field(default_factory=list)
    default_tag: str = "noun"

    def tag(self, token: str) -> str:
        t = self.words.get(token)
        if t is not None:
            return t
        for suffix, tag in self.suffix_rules:
            if len(token) > len(suffix) and token.endswith(suffix):
                return tag
        return self.default_tag


def load_pos_lexicon(path) -> PosLexicon:
    """Parse a part-of-speech lexicon file.

    Format: UTF-8 with three sections.  ``[words]`` holds
    ``token<TAB>tag`` lines, ``[suffixes]`` holds ``suffix<TAB>tag`` lines
    whose order is the matching order, and an optional ``[default]`` section
    holds a single tag line (default "noun").  Tags must be one of
    noun/adjective/pronoun/verb/other.  '#' comments and blank lines are
    ignored; duplicate word entries keep the last one and warn.
    """
    lex = PosLexicon()
    section = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if line in ("[words]", "[suffixes]", "[default]"):
                section = line[1:-1]
                continue
            if section is None:
                raise DataFormatError(f"entry before any section header: {line!r}", lineno)
            if section == "default":
                tag = line.strip()
                if tag not in POS_TAGS:
                    raise DataFormatError(f"unknown tag {tag!r}", lineno)
                lex.default_tag = tag
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise DataFormatError(f"expected 'entry<TAB>tag', got {line!r}", lineno)
            entry, tag = parts
            if tag not in POS_TAGS:
                raise DataFormatError(f"unknown tag {tag!r}", lineno)
            if section == "words":
                if entry in lex.words:
                    warnings.warn(f"duplicate word {entry!r} at line {lineno}; last entry wins")
                lex.words[entry] = tag
            else:
                lex.suffix_rules.append((entry, tag))
    return lex


def save_pos_lexicon(lex: PosLexicon, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("[words]\n")
        for word, tag in lex.words.items():
            fh.write(f"{word}\t{tag}\n")
        fh.write("[suffixes]\n")
        for suffix, tag in lex.suffix_rules:
            fh.write(f"{suffix}\t{tag}\n")
        fh.write("[default]\n")
        fh.write(f"{lex.default_tag}\n")


def _bundled(name: str):
    return resources.files("bmtweet").joinpath("lexicons", name)


def demo_sentiment_lexicon() -> SentimentLexicon:
    """The small sentiment lexicon bundled with the package."""
    with resources.as_file(_bundled("sentiment_demo.tsv")) as p:
        return load_sentiment_lexicon(p)


def demo_pos_lexicon() -> PosLexicon:
    """The small part-of-speech lexicon bundled with the package."""
    with resources.as_file(_bundled("pos_demo.tsv")) as p:
        return load_pos_lexicon(p)


# ---------------------------------------------------------------------------
# Feature extraction
# ---------------------------------------------------------------------------

def extract_features(rec: TweetRecord, sentiment: SentimentLexicon,
                     pos: PosLexicon) -> np.ndarray:
    """Compute the 12-entry feature vector for one tweet.

    Total and deterministic: any Unicode text yields a vector.  When the
    record carries entity metadata lists, TF1-TF3 are their lengths even if
    the text disagrees; otherwise the tokenizer counts are used.
    """
    tokens = tokenize(rec.text)
    kind_counts = {"mention": 0, "hashtag": 0, "url": 0}
    words: list[str] = []
    for tok in tokens:
        if tok.kind == "word":
            words.append(tok.text)
        else:
            kind_counts[tok.kind] += 1

    tf1 = len(rec.mentions) if rec.mentions is not None else kind_counts["mention"]
    tf2 = len(rec.hashtags) if rec.hashtags is not None else kind_counts["hashtag"]
    tf3 = len(rec.urls) if rec.urls is not None else kind_counts["url"]
    tf4 = rec.media_count
    tf5 = 1.0 if rec.is_reply else 0.0
    tf6 = sum(1 for ch in rec.text if not ch.isalnum() and not ch.isspace())
    tf7 = len(rec.text)

    polarities = [sentiment.polarity[w] for w in words if w in sentiment.polarity]
    tf8 = float(np.clip(sum(polarities) / len(polarities), -1.0, 1.0)) if polarities else 0.0

    tag_counts = dict.fromkeys(POS_TAGS, 0)
    for w in words:
        tag_counts[pos.tag(w)] += 1

    return np.array([
        tf1, tf2, tf3, tf4, tf5, tf6, tf7, tf8,
        tag_counts["noun"], tag_counts["adjective"],
        tag_counts["pronoun"], tag_counts["verb"],
    ], dtype=np.float64)

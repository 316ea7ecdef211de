"""Stylometric and extended per-email features, and feature-vector assembly.

Every value is a pure function of the cleaned body and the lexicon config.
Ratios are normalized by the total character count (character features) or
the word count (word features); an empty base gives 0.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import CleanedEmail, is_word, tokenize
from .content import Codebook, tfidf_row

GROUPS = ("lexical", "structural", "syntactic", "extended", "content")
BASELINE_GROUPS = ("lexical", "structural", "syntactic")

PUNCTUATION = (".", ",", ";", ":", "?", "!", "'", '"', "-", "(", ")")
SPECIAL_CHARS = ("~", "@", "#", "$", "%", "^", "&", "*", "_", "=", "+", "<", ">", "[", "]", "{", "}", "/", "\\", "|", "`")
GREETINGS = ("hi", "hello", "dear", "hey", "greetings")
FAREWELLS = ("regards", "thanks", "thank you", "cheers", "best", "sincerely", "br")

# Order fixed by the one-hot layout of the ending-punctuation feature.
LAST_PUNCT = {".": "full_stop", "?": "q_mark", ",": "comma", "!": "exclam", ";": "semicolon"}
SENTENCE_END = frozenset(".!?")

_CHAR_NAMES = {
    ".": "period", ",": "comma", ";": "semicolon", ":": "colon", "?": "question",
    "!": "exclamation", "'": "apostrophe", '"': "quote", "-": "hyphen", "(": "lparen",
    ")": "rparen", "~": "tilde", "@": "at", "#": "hash", "$": "dollar", "%": "percent",
    "^": "caret", "&": "ampersand", "*": "asterisk", "_": "underscore", "=": "equals",
    "+": "plus", "<": "lt", ">": "gt", "[": "lbracket", "]": "rbracket", "{": "lbrace",
    "}": "rbrace", "/": "slash", "\\": "backslash", "|": "pipe", "`": "backtick",
}

_MOBILE_RE = re.compile(r"\bsent from my \w+|\bsent from (?:a )?(?:mobile|wireless|handheld)", re.IGNORECASE)
_DIGITAL_TIME_RE = re.compile(r"\b\d{1,2}:\d{2}\b")
_SPELLED_TIME_RE = re.compile(r"\b\d{1,2}\s*o\s*'\s*clock\b|\b\d{1,2}\s+oclock\b", re.IGNORECASE)


def _char_name(ch: str) -> str:
    return _CHAR_NAMES.get(ch, f"u{ord(ch):04x}")


def read_lexicon(path) -> tuple[str, ...]:
    """One entry per line; blank lines and ``#`` comments ignored."""
    text = Path(path).read_text(encoding="utf-8")
    return tuple(line.strip().lower() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#"))


def default_function_words() -> tuple[str, ...]:
    ref = resources.files("emailauthor") / "data" / "function_words.txt"
    with resources.as_file(ref) as p:
        return read_lexicon(p)


@dataclass(frozen=True)
class StyleConfig:
    function_words: tuple[str, ...] = field(default_factory=default_function_words)
    punctuation: tuple[str, ...] = PUNCTUATION
    special_chars: tuple[str, ...] = SPECIAL_CHARS
    greetings: tuple[str, ...] = GREETINGS
    farewells: tuple[str, ...] = FAREWELLS

    def to_dict(self) -> dict:
        return {"function_words": list(self.function_words), "punctuation": list(self.punctuation),
                "special_chars": list(self.special_chars), "greetings": list(self.greetings),
                "farewells": list(self.farewells)}

    @classmethod
    def from_dict(cls, d: dict) -> "StyleConfig":
        return cls(**{k: tuple(v) for k, v in d.items()})

    @cached_property
    def stylometric_names(self) -> tuple[tuple[str, str], ...]:
        lexical = ["char_count", "digit_ratio", "space_ratio"]
        lexical += [f"char_{c}" for c in "abcdefghijklmnopqrstuvwxyz"]
        lexical += [f"special_{_char_name(c)}" for c in self.special_chars]
        lexical += ["word_count", "avg_word_length", "avg_sentence_length", "short_word_ratio"]
        structural = ["paragraph_count", "sentences_per_paragraph", "indent_space_paragraphs", "indent_tab_paragraphs"]
        structural += [f"greeting_{g.replace(' ', '_')}" for g in self.greetings]
        syntactic = [f"fw_{w}" for w in self.function_words]
        syntactic += [f"punct_{_char_name(c)}" for c in self.punctuation]
        return (tuple((n, "lexical") for n in lexical) + tuple((n, "structural") for n in structural)
                + tuple((n, "syntactic") for n in syntactic))

    @cached_property
    def extended_names(self) -> tuple[str, ...]:
        names = [f"farewell_{f.replace(' ', '_')}" for f in self.farewells]
        names += [f"last_punct_{v}" for v in LAST_PUNCT.values()]
        names += [f"top_punct_{v}" for v in LAST_PUNCT.values()]
        names += [
            "mobile_marker", "repeated_word_flag", "repeated_word_runs", "time_digital", "time_spelled",
            "single_sentence", "questioning", "punct_before_farewell", "punct_after_farewell_comma",
            "punct_after_farewell_exclam", "punct_after_farewell_stop", "greeting_punct_comma",
            "greeting_punct_exclam", "greeting_punct_colon", "greeting_punct_stop",
            "incomplete_sentence_punct_ratio", "sentence_initial_cap_ratio", "first_char_upper",
        ]
        return tuple(names)


# -- text structure helpers ---------------------------------------------------

@dataclass
class _Sentence:
    words: list[str]
    terminal: Optional[str]


def _sentences(tokens: Sequence[str]) -> list[_Sentence]:
    out, words = [], []
    for tok in tokens:
        if tok in SENTENCE_END:
            if words:
                out.append(_Sentence(words, tok))
            words = []
        elif is_word(tok):
            words.append(tok)
    if words:
        out.append(_Sentence(words, None))
    return out


def _paragraphs(text: str) -> list[list[str]]:
    paras, current = [], []
    for line in text.split("\n"):
        if line.strip():
            current.append(line)
        elif current:
            paras.append(current)
            current = []
    if current:
        paras.append(current)
    return paras


def _nonblank_lines(text: str) -> list[str]:
    return [ln for ln in text.split("\n") if ln.strip()]


def _find_phrase(words: Sequence[str], phrase: Sequence[str]) -> list[int]:
    n = len(phrase)
    first = phrase[0]
    return [i for i, w in enumerate(words) if w == first and list(words[i:i + n]) == list(phrase)]


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


# -- feature groups -----------------------------------------------------------

def last_punctuation(body: str) -> dict[str, int]:
    """One-hot over the five ending marks, keyed full_stop/q_mark/comma/exclam/semicolon."""
    out = {name: 0 for name in LAST_PUNCT.values()}
    stripped = body.rstrip()
    if stripped and stripped[-1] in LAST_PUNCT:
        out[LAST_PUNCT[stripped[-1]]] = 1
    return out


def extract_stylometric(email: CleanedEmail, config: StyleConfig) -> dict[str, float]:
    """Lexical, structural and syntactic features in schema order."""
    text = email.body.rstrip()
    tokens = email.tokens if text == email.body else tuple(tokenize(text))
    words = email.words if text == email.body else [t for t in tokens if is_word(t)]
    lower_words = [w.lower() for w in words]
    n_chars = len(text)
    n_words = len(words)
    sentences = _sentences(tokens)
    paragraphs = _paragraphs(text)
    char_counts = Counter(text.lower())

    v: dict[str, float] = {}
    v["char_count"] = float(n_chars)
    v["digit_ratio"] = _safe_div(sum(n for ch, n in char_counts.items() if ch.isdigit()), n_chars)
    v["space_ratio"] = _safe_div(char_counts[" "], n_chars)
    for c in "abcdefghijklmnopqrstuvwxyz":
        v[f"char_{c}"] = _safe_div(char_counts[c], n_chars)
    for c in config.special_chars:
        v[f"special_{_char_name(c)}"] = _safe_div(char_counts[c], n_chars)
    v["word_count"] = float(n_words)
    v["avg_word_length"] = _safe_div(sum(len(w) for w in words), n_words)
    v["avg_sentence_length"] = _safe_div(n_words, len(sentences))
    v["short_word_ratio"] = _safe_div(sum(len(w) <= 3 for w in words), n_words)

    v["paragraph_count"] = float(len(paragraphs))
    v["sentences_per_paragraph"] = _safe_div(len(sentences), len(paragraphs))
    v["indent_space_paragraphs"] = float(sum(p[0][:1] == " " for p in paragraphs))
    v["indent_tab_paragraphs"] = float(sum(p[0][:1] == "\t" for p in paragraphs))
    head = [[w.lower() for w in tokenize(ln) if is_word(w)] for ln in _nonblank_lines(text)[:2]]
    for g in config.greetings:
        phrase = g.split()
        v[f"greeting_{g.replace(' ', '_')}"] = float(any(line[:len(phrase)] == phrase for line in head))

    word_freq = Counter(lower_words)
    for w in config.function_words:
        v[f"fw_{w}"] = _safe_div(word_freq[w], n_words)
    for c in config.punctuation:
        v[f"punct_{_char_name(c)}"] = _safe_div(char_counts[c], n_chars)
    return v


def _repeated_runs(tokens: Sequence[str]) -> int:
    """Runs of the same word repeated back to back, commas allowed between."""
    runs, prev, length = 0, None, 0
    for tok in tokens:
        if tok == ",":
            continue
        key = tok.lower() if is_word(tok) else None
        if key is not None and key == prev:
            length += 1
            if length == 2:
                runs += 1
        else:
            prev, length = key, 1
    return runs


def extract_extended(email: CleanedEmail, config: StyleConfig) -> dict[str, float]:
    """Email-specific habits: farewells, ending and dominant punctuation,
    mobile marker, repetition, time style, sentence shape, capitalization."""
    text = email.body.rstrip()
    tokens = list(email.tokens) if text == email.body else tokenize(text)
    lines = _nonblank_lines(text)
    sentences = _sentences(tokens)
    v: dict[str, float] = {}

    # farewell words in the closing lines; token positions for adjacency checks
    tail_start = len(tokenize("\n".join(lines[:-4]))) if len(lines) > 4 else 0
    tail = [t.lower() for t in tokens[tail_start:]]
    farewell_at: Optional[tuple[int, int]] = None
    for f in config.farewells:
        phrase = f.split()
        hits = [tail_start + i for i in _find_phrase(tail, phrase)]
        v[f"farewell_{f.replace(' ', '_')}"] = float(bool(hits))
        if hits and (farewell_at is None or hits[-1] > farewell_at[0]):
            farewell_at = (hits[-1], hits[-1] + len(phrase))

    for name, value in last_punctuation(text).items():
        v[f"last_punct_{name}"] = float(value)
    counts = Counter(t for t in tokens if t in LAST_PUNCT)
    top = max(LAST_PUNCT, key=lambda c: counts[c]) if counts else None
    for mark, name in LAST_PUNCT.items():
        v[f"top_punct_{name}"] = float(mark == top)

    v["mobile_marker"] = float(bool(_MOBILE_RE.search(text)))
    runs = _repeated_runs(tokens)
    v["repeated_word_flag"] = float(runs > 0)
    v["repeated_word_runs"] = float(runs)
    v["time_digital"] = float(bool(_DIGITAL_TIME_RE.search(text)))
    v["time_spelled"] = float(bool(_SPELLED_TIME_RE.search(text)))
    v["single_sentence"] = float(len(sentences) == 1)
    v["questioning"] = float(len(sentences) == 1 and sentences[0].terminal == "?")

    before = after = None
    if farewell_at is not None:
        start, end = farewell_at
        if start > 0 and not is_word(tokens[start - 1]):
            before = tokens[start - 1]
        if end < len(tokens) and not is_word(tokens[end]):
            after = tokens[end]
    v["punct_before_farewell"] = float(before is not None)
    v["punct_after_farewell_comma"] = float(after == ",")
    v["punct_after_farewell_exclam"] = float(after == "!")
    v["punct_after_farewell_stop"] = float(after == ".")

    greet_punct = None
    for line in lines[:2]:
        line_tokens = tokenize(line)
        line_words = [t.lower() for t in line_tokens if is_word(t)]
        if any(line_words[:len(g.split())] == g.split() for g in config.greetings):
            greet_punct = next((t for t in line_tokens if not is_word(t)), None)
            break
    v["greeting_punct_comma"] = float(greet_punct == ",")
    v["greeting_punct_exclam"] = float(greet_punct == "!")
    v["greeting_punct_colon"] = float(greet_punct == ":")
    v["greeting_punct_stop"] = float(greet_punct == ".")

    short = [s for s in sentences if len(s.words) <= 3]
    v["incomplete_sentence_punct_ratio"] = _safe_div(sum(s.terminal is not None for s in short), len(short))
    v["sentence_initial_cap_ratio"] = _safe_div(sum(s.words[0][:1].isupper() for s in sentences), len(sentences))
    first = text.lstrip()[:1]
    v["first_char_upper"] = float(first.isupper())
    return v


# -- schema and assembly ------------------------------------------------------

class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureSchema:
    entries: tuple[tuple[str, str], ...]
    codebook_version: Optional[str] = None

    def __post_init__(self):
        names = [n for n, _ in self.entries]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        for _, group in self.entries:
            if group not in GROUPS:
                raise SchemaError(f"unknown feature group {group!r}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.entries]

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(g for g in GROUPS if any(eg == g for _, eg in self.entries))

    def group_slice(self, group: str) -> list[int]:
        return [i for i, (_, g) in enumerate(self.entries) if g == group]

    def to_dict(self) -> dict:
        return {"entries": [list(e) for e in self.entries], "codebook_version": self.codebook_version}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSchema":
        return cls(tuple((n, g) for n, g in d["entries"]), d.get("codebook_version"))


@dataclass(frozen=True)
class FeatureVector:
    email_id: str
    values: np.ndarray


def build_schema(config: StyleConfig, codebook: Optional[Codebook] = None,
                 groups: Iterable[str] = GROUPS) -> FeatureSchema:
    """Ordered feature layout: baseline groups, then extended, then content."""
    groups = set(groups)
    entries = [e for e in config.stylometric_names if e[1] in groups]
    if "extended" in groups:
        entries += [(n, "extended") for n in config.extended_names]
    version = None
    if "content" in groups:
        if codebook is None:
            raise SchemaError("content group needs a codebook")
        entries += [(f"term_{t}", "content") for t in codebook.term_list]
        version = codebook.version
    return FeatureSchema(tuple(entries), version)


def stylometric_values(email: CleanedEmail, config: StyleConfig, extended: bool = True) -> dict[str, float]:
    values = extract_stylometric(email, config)
    if extended:
        values.update(extract_extended(email, config))
    return values


def assemble_vector(email: CleanedEmail, schema: FeatureSchema, codebook: Optional[Codebook],
                    config: Optional[StyleConfig] = None) -> FeatureVector:
    """Concatenate feature groups in schema order; content slots hold tf-idf."""
    config = config or StyleConfig()
    return FeatureVector(email.id, feature_matrix([email], schema, codebook, config)[0])


def feature_matrix(emails: Sequence[CleanedEmail], schema: FeatureSchema, codebook: Optional[Codebook],
                   config: Optional[StyleConfig] = None) -> np.ndarray:
    """Dense (n_emails, len(schema)) matrix of assembled vectors."""
    config = config or StyleConfig()
    content_idx = schema.group_slice("content")
    if content_idx:
        if codebook is None or codebook.version != schema.codebook_version:
            raise SchemaError("schema content section does not match the codebook")
        if len(content_idx) != len(codebook.terms):
            raise SchemaError("schema content width differs from codebook size")
    style_idx = [i for i, (_, g) in enumerate(schema.entries) if g != "content"]
    style_names = [schema.entries[i][0] for i in style_idx]
    need_extended = "extended" in schema.groups

    out = np.zeros((len(emails), len(schema)))
    for row, email in enumerate(emails):
        if style_idx:
            values = stylometric_values(email, config, need_extended)
            try:
                out[row, style_idx] = [values[n] for n in style_names]
            except KeyError as exc:
                raise SchemaError(f"schema feature {exc.args[0]!r} is not produced by this config") from None
        if content_idx:
            out[row, content_idx] = tfidf_row(email, codebook)
    return out

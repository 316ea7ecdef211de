"""Seeded synthetic email corpus with per-author writing habits.

Stands in for real mailboxes in tests and demos.  Every author gets a
private 50-word topic lexicon (disjoint across authors) on top of a shared
200-word function-word pool and a shared pool of general business words.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corpus import Corpus, RawEmail, ReferenceType, build_corpus
from .stylometry import default_function_words

TOPIC_WORDS = 50
FUNCTION_POOL_SIZE = 200
GENERAL_WORDS = 300

GREETING_CHOICES = (None, "Hi", "Hello", "Dear", "Hey", "Greetings")
FAREWELL_CHOICES = (None, "Regards", "Thanks", "Thank you", "Cheers", "Best", "Sincerely")
ATTACHED_PUNCT = ("", ",", "!", ":", ".")
TERMINALS = (".", "!", "?", "")
MOBILE_LINES = ("Sent from my iPhone", "Sent from my BlackBerry", "Sent from my mobile device")

_FILLERS = (
    "also", "really", "please", "well", "still", "maybe", "already", "soon", "even", "never",
    "always", "often", "again", "quite", "almost", "rather", "perhaps", "actually", "probably", "certainly",
    "however", "therefore", "instead", "anyway", "indeed", "together", "later", "today", "tomorrow", "yesterday",
    "yes", "okay", "sure", "thing", "things", "something", "anything", "nothing", "everything", "someone",
    "anyone", "everyone", "get", "got", "let", "make", "take", "know", "think", "see", "fine",
)
_ONSETS = ("b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
           "br", "cr", "dr", "fl", "gr", "pl", "pr", "sh", "st", "th", "tr")
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ea", "ou")
_CODAS = ("", "", "n", "r", "l", "s", "t", "m", "nd", "rk", "st")


@dataclass(frozen=True)
class SyntheticStyle:
    author: str
    greeting: Optional[str]
    greeting_punct: str
    farewell: Optional[str]
    farewell_punct: str
    terminal_punct: tuple[float, ...]
    function_profile: tuple[float, ...]
    topic_vocabulary: tuple[str, ...]
    mean_sentence_length: float
    capitalization: float
    mobile_probability: float
    digital_time: bool

    def differences(self, other: "SyntheticStyle") -> int:
        """How many habit parameters two styles disagree on."""
        fields = ("greeting", "greeting_punct", "farewell", "farewell_punct", "terminal_punct", "function_profile",
                  "topic_vocabulary", "mean_sentence_length", "capitalization", "mobile_probability", "digital_time")
        return sum(getattr(self, f) != getattr(other, f) for f in fields)


def function_pool() -> tuple[str, ...]:
    words = list(default_function_words())
    words += [w for w in _FILLERS if w not in words]
    return tuple(words[:FUNCTION_POOL_SIZE])


def _pseudo_words(rng: np.random.Generator, count: int, exclude: set[str]) -> list[str]:
    out: list[str] = []
    seen = set(exclude)
    while len(out) < count:
        n_syll = int(rng.integers(2, 4))
        word = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] for _ in range(n_syll))
        word += _CODAS[rng.integers(len(_CODAS))]
        if word not in seen:
            seen.add(word)
            out.append(word)
    return out


def _zipf(n: int, s: float = 1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


@dataclass(frozen=True)
class GeneratorParams:
    mean_words: float = 135.0
    length_spread: float = 0.7
    function_rate: float = 0.45
    topic_rate: float = 0.06
    comma_rate: float = 0.06
    profile_spread: float = 0.25


def make_styles(n_authors: int, seed: int, params: "GeneratorParams" = None) -> tuple[list[SyntheticStyle], tuple[str, ...]]:
    """Per-author styles plus the shared general vocabulary."""
    params = params or GeneratorParams()
    rng = np.random.default_rng([seed, 0])
    pool = function_pool()
    words = _pseudo_words(rng, n_authors * TOPIC_WORDS + GENERAL_WORDS, set(pool))
    general = tuple(words[:GENERAL_WORDS])
    base = _zipf(len(pool), 1.1)
    styles: list[SyntheticStyle] = []
    for a in range(n_authors):
        while True:
            profile = base * np.exp(rng.normal(0.0, params.profile_spread, len(pool)))
            terminal = rng.dirichlet([4.0, 1.0, 1.0, 0.7])
            style = SyntheticStyle(
                author=f"author_{a:03d}",
                greeting=GREETING_CHOICES[rng.integers(len(GREETING_CHOICES))],
                greeting_punct=ATTACHED_PUNCT[rng.integers(len(ATTACHED_PUNCT))],
                farewell=FAREWELL_CHOICES[rng.integers(len(FAREWELL_CHOICES))],
                farewell_punct=ATTACHED_PUNCT[rng.integers(len(ATTACHED_PUNCT))],
                terminal_punct=tuple(round(float(p), 6) for p in terminal),
                function_profile=tuple(round(float(p), 8) for p in profile / profile.sum()),
                topic_vocabulary=tuple(words[GENERAL_WORDS + a * TOPIC_WORDS:GENERAL_WORDS + (a + 1) * TOPIC_WORDS]),
                mean_sentence_length=round(float(rng.uniform(6.0, 18.0)), 3),
                capitalization=round(float(rng.uniform(0.3, 1.0)), 3),
                mobile_probability=0.0 if rng.random() < 0.7 else round(float(rng.uniform(0.2, 0.8)), 3),
                digital_time=bool(rng.random() < 0.5),
            )
            if all(style.differences(s) >= 3 for s in styles):
                break
        styles.append(style)
    return styles, general


def _sentence(rng, style: SyntheticStyle, general, pool, profile_cdf, topic_cdf, terminal_cdf,
              params: GeneratorParams) -> str:
    n = max(1, int(rng.poisson(style.mean_sentence_length)))
    kind = rng.random(n)
    pick = rng.random(n)
    topic_cut = params.function_rate + (1 - params.function_rate) * params.topic_rate
    fn_idx = np.minimum(np.searchsorted(profile_cdf, pick, side="right"), len(pool) - 1)
    topic_idx = np.minimum(np.searchsorted(topic_cdf, pick, side="right"), TOPIC_WORDS - 1)
    general_idx = (pick * len(general)).astype(int)
    words = [pool[f] if r < params.function_rate else style.topic_vocabulary[t] if r < topic_cut else general[g]
             for r, f, t, g in zip(kind.tolist(), fn_idx.tolist(), topic_idx.tolist(), general_idx.tolist())]
    for i in np.flatnonzero(rng.random(n) < params.comma_rate):
        if i < n - 1:
            words[i] += ","
    if rng.random() < 0.05:
        words.insert(int(rng.integers(len(words) + 1)), "2:00" if style.digital_time else "2 o'clock")
    if rng.random() < 0.03:
        w = words[-1].rstrip(",")
        words += [w + ",", w + ",", w]
    if rng.random() < style.capitalization:
        words[0] = words[0][:1].upper() + words[0][1:]
    words[-1] = words[-1].rstrip(",")
    terminal = TERMINALS[min(int(np.searchsorted(terminal_cdf, rng.random(), side="right")), len(TERMINALS) - 1)]
    return " ".join(words) + terminal


def _email_body(rng, style: SyntheticStyle, general, pool, params: GeneratorParams) -> str:
    profile = np.cumsum(style.function_profile)
    profile /= profile[-1]
    topic_p = np.cumsum(_zipf(TOPIC_WORDS, 0.8))
    terminal = np.cumsum(style.terminal_punct)
    terminal /= terminal[-1]
    target = max(2.0, params.mean_words * float(rng.lognormal(-params.length_spread ** 2 / 2, params.length_spread)))
    n_sent = max(1, int(round(target / style.mean_sentence_length)))
    sentences = [_sentence(rng, style, general, pool, profile, topic_p, terminal, params) for _ in range(n_sent)]
    paragraphs, cur = [], []
    for s in sentences:
        cur.append(s)
        if len(cur) >= 2 and rng.random() < 0.35:
            paragraphs.append(" ".join(cur))
            cur = []
    if cur:
        paragraphs.append(" ".join(cur))
    parts = []
    if style.greeting and rng.random() < 0.8:
        parts.append(f"{style.greeting}{style.greeting_punct}")
    parts.append("\n\n".join(paragraphs))
    if style.farewell and rng.random() < 0.8:
        parts.append(f"{style.farewell}{style.farewell_punct}")
    if rng.random() < 0.2:
        parts.append(f"--\n{style.author}")
    if style.mobile_probability and rng.random() < style.mobile_probability:
        parts.append(MOBILE_LINES[int(rng.integers(len(MOBILE_LINES)))])
    return "\n\n".join(parts)


def generate_raw_emails(n_authors: int = 10, emails_per_author: int = 600, seed: int = 0,
                        params: GeneratorParams = GeneratorParams()) -> list[RawEmail]:
    if n_authors < 1 or emails_per_author < 1:
        raise ValueError("need at least one author and one email per author")
    styles, general = make_styles(n_authors, seed, params)
    pool = function_pool()
    raws = []
    for style_index, style in enumerate(styles):
        rng = np.random.default_rng([seed, 1, style_index])
        for j in range(emails_per_author):
            body = _email_body(rng, style, general, pool, params)
            raws.append(RawEmail(id=f"{style.author}-{j:04d}", author=style.author, body=body,
                                 reference_type=ReferenceType.NONE))
    return raws


def generate_synthetic_corpus(n_authors: int = 10, emails_per_author: int = 600, seed: int = 0,
                              params: GeneratorParams = GeneratorParams()) -> Corpus:
    """``n_authors * emails_per_author`` cleaned emails, identical for identical arguments."""
    return build_corpus(generate_raw_emails(n_authors, emails_per_author, seed, params))


def sample_email_body(style: SyntheticStyle, general: tuple[str, ...], rng: np.random.Generator,
                      params: GeneratorParams = GeneratorParams()) -> str:
    """One fresh body from a style; used by simulation tests."""
    return _email_body(rng, style, general, function_pool(), params)

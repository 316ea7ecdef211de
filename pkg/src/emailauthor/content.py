"""Content terms: tf-idf weighting, Info Gain ranking, top-k codebook."""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .corpus import CleanedEmail, Corpus


def term_frequency(count: int, email_length: int) -> float:
    return count / email_length if email_length else 0.0


def inverse_document_frequency(n_documents: int, document_frequency: int) -> float:
    """log2(|E| / (1 + df)); negative once a term is in every document."""
    return math.log2(n_documents / (1 + document_frequency))


def email_length(email: CleanedEmail) -> int:
    """|e|: the number of word tokens in the body."""
    return email.word_count


def compute_tfidf(corpus: Corpus, min_corpus_freq: int = 3) -> tuple[list[str], list[dict[str, float]]]:
    """Vocabulary of terms occurring at least ``min_corpus_freq`` times in the
    whole corpus, and each email's tf-idf weights over it."""
    if len(corpus) == 0:
        raise ValueError("tf-idf needs a non-empty corpus")
    counts = [Counter(e.terms) for e in corpus.emails]
    total: Counter = Counter()
    df: Counter = Counter()
    for c in counts:
        total.update(c)
        df.update(c.keys())
    vocabulary = sorted(t for t, n in total.items() if n >= min_corpus_freq)
    keep = set(vocabulary)
    n_docs = len(corpus)
    idf = {t: inverse_document_frequency(n_docs, df[t]) for t in vocabulary}
    weights = []
    for email, c in zip(corpus.emails, counts):
        size = email_length(email)
        weights.append({t: term_frequency(n, size) * idf[t] for t, n in c.items() if t in keep})
    return vocabulary, weights


def _entropy(counts) -> float:
    total = sum(counts)
    h = 0.0
    for n in counts:
        if n:
            p = n / total
            h -= p * math.log2(p)
    return h


def info_gain(feature_values: Sequence[float], labels: Sequence) -> float:
    """IG(A, f) = H(A) - H(A | f) in bits, with f binarized to presence (> 0)."""
    if len(feature_values) != len(labels):
        raise ValueError(f"{len(feature_values)} feature values for {len(labels)} labels")
    if not labels:
        return 0.0
    by_value: dict[bool, Counter] = {True: Counter(), False: Counter()}
    for value, label in zip(feature_values, labels):
        by_value[value > 0][label] += 1
    n = len(labels)
    h_a = _entropy(list(Counter(labels).values()))
    h_a_f = sum(sum(c.values()) / n * _entropy(list(c.values())) for c in by_value.values() if c)
    return max(0.0, h_a - h_a_f)


def _plogp_bits(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """Column entropies of a (classes, terms) count table, 0 log 0 = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1), 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=0)


def info_gain_table(presence_by_class: np.ndarray, class_sizes: np.ndarray) -> np.ndarray:
    """IG for many terms at once.

    ``presence_by_class[a, t]`` counts emails of author ``a`` containing term
    ``t``; ``class_sizes[a]`` counts emails of author ``a``.
    """
    presence_by_class = np.asarray(presence_by_class, dtype=float)
    sizes = np.asarray(class_sizes, dtype=float)
    n = sizes.sum()
    h_a = _plogp_bits(sizes[:, None], np.array([n]))[0]
    absent = sizes[:, None] - presence_by_class
    n_present = presence_by_class.sum(axis=0)
    n_absent = n - n_present
    h_cond = (n_present / n) * _plogp_bits(presence_by_class, n_present) + (n_absent / n) * _plogp_bits(absent, n_absent)
    return np.maximum(h_a - h_cond, 0.0)


@dataclass(frozen=True)
class CodebookTerm:
    term: str
    document_frequency: int
    ig_score: float


@dataclass(frozen=True)
class Codebook:
    terms: tuple[CodebookTerm, ...]
    n_documents: int
    top_k: int
    min_corpus_freq: int
    version: str

    @property
    def term_list(self) -> list[str]:
        return [t.term for t in self.terms]

    def idf(self) -> np.ndarray:
        return np.array([inverse_document_frequency(self.n_documents, t.document_frequency) for t in self.terms])

    def to_dict(self) -> dict:
        return {
            "terms": [[t.term, t.document_frequency, t.ig_score] for t in self.terms],
            "n_documents": self.n_documents,
            "top_k": self.top_k,
            "min_corpus_freq": self.min_corpus_freq,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Codebook":
        terms = tuple(CodebookTerm(str(t), int(df), float(ig)) for t, df, ig in d["terms"])
        return cls(terms, int(d["n_documents"]), int(d["top_k"]), int(d["min_corpus_freq"]), d["version"])

    def dump(self) -> str:
        """Plain-text listing: rank, term, document frequency, IG bits."""
        lines = [f"{i + 1}\t{t.term}\t{t.document_frequency}\t{t.ig_score:.6f}" for i, t in enumerate(self.terms)]
        return "\n".join(lines) + ("\n" if lines else "")


class TermMatrix:
    """Sparse email x term count matrix over every content term in a set of
    emails, so codebooks for many training subsets share one tokenization."""

    def __init__(self, emails: Sequence[CleanedEmail]):
        counts = [Counter(e.terms) for e in emails]
        self.vocabulary = sorted(set().union(*counts)) if counts else []
        index = {t: j for j, t in enumerate(self.vocabulary)}
        rows, cols, vals = [], [], []
        for i, c in enumerate(counts):
            for t, n in c.items():
                rows.append(i)
                cols.append(index[t])
                vals.append(n)
        self.counts = sparse.csr_matrix((vals, (rows, cols)), shape=(len(emails), len(self.vocabulary)), dtype=np.int64)
        self.lengths = np.array([email_length(e) for e in emails], dtype=np.int64)
        self.fingerprints = [_email_digest(e) for e in emails]
        self.index = index

    def codebook(self, rows: Sequence[int], labels: Sequence[str], top_k: int = 1000,
                 min_corpus_freq: int = 3) -> Codebook:
        rows = np.asarray(rows, dtype=np.int64)
        if len(rows) == 0:
            raise ValueError("codebook needs at least one email")
        sub = self.counts[rows]
        total = np.asarray(sub.sum(axis=0)).ravel()
        keep = np.flatnonzero(total >= min_corpus_freq)
        presence = (sub[:, keep] > 0).astype(np.int64)
        df = np.asarray(presence.sum(axis=0)).ravel()

        authors = sorted(set(labels))
        a_index = {a: i for i, a in enumerate(authors)}
        y = np.array([a_index[a] for a in labels])
        onehot = sparse.csr_matrix((np.ones(len(y)), (y, np.arange(len(y)))), shape=(len(authors), len(y)))
        by_class = np.asarray((onehot @ presence).todense())
        sizes = np.bincount(y, minlength=len(authors))
        ig = info_gain_table(by_class, sizes) if len(keep) else np.zeros(0)

        names = [self.vocabulary[j] for j in keep]
        order = sorted(range(len(keep)), key=lambda j: (-ig[j], names[j]))[:top_k]
        terms = tuple(CodebookTerm(names[j], int(df[j]), float(ig[j])) for j in order)
        digest = hashlib.sha256()
        digest.update(json.dumps(sorted(self.fingerprints[i] for i in rows)).encode())
        digest.update(json.dumps([top_k, min_corpus_freq]).encode())
        return Codebook(terms, len(rows), top_k, min_corpus_freq, digest.hexdigest()[:16])

    def tfidf(self, rows: Sequence[int], codebook: Codebook) -> np.ndarray:
        """Dense tf-idf block for ``rows`` over the codebook's terms."""
        rows = np.asarray(rows, dtype=np.int64)
        out = np.zeros((len(rows), len(codebook.terms)))
        cols = [self.index.get(t.term) for t in codebook.terms]
        present = [k for k, c in enumerate(cols) if c is not None]
        if present and len(rows):
            block = self.counts[rows][:, [cols[k] for k in present]].toarray().astype(float)
            lengths = self.lengths[rows].astype(float)
            tf = np.divide(block, lengths[:, None], out=np.zeros_like(block), where=lengths[:, None] > 0)
            out[:, present] = tf * codebook.idf()[present]
        return out


def _email_digest(email: CleanedEmail) -> str:
    return hashlib.sha256("\0".join((email.id, email.author, email.body)).encode()).hexdigest()


def build_codebook(corpus: Corpus, top_k: int = 1000, min_corpus_freq: int = 3) -> Codebook:
    """Rank surviving terms by Info Gain, keep the best ``top_k``; ties go to
    the alphabetically smaller term."""
    if top_k < 0:
        raise ValueError("top_k must be non-negative")
    matrix = TermMatrix(corpus.emails)
    return matrix.codebook(range(len(corpus)), corpus.labels, top_k, min_corpus_freq)


def tfidf_row(email: CleanedEmail, codebook: Codebook) -> np.ndarray:
    counts = Counter(email.terms)
    size = email_length(email)
    return np.array([term_frequency(counts[t.term], size) * inverse_document_frequency(codebook.n_documents, t.document_frequency)
                     for t in codebook.terms])

"""Cross-validation, accuracy metrics, the five-experiment suite and the
unknown-author gate."""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from . import ccm
from .content import TermMatrix, tfidf_row
from .corpus import CleanedEmail, Corpus
from .stylometry import BASELINE_GROUPS, StyleConfig, build_schema, feature_matrix

EXPERIMENTS = {
    1: ("Baseline", "SVM"),
    2: ("Extended Baseline", "SVM"),
    3: ("Baseline plus IG feature selection based content features", "SVM"),
    4: ("Extended Baseline plus IG feature selection based content features", "SVM"),
    5: ("Extended Baseline plus IG feature selection based content features", "CCM"),
}


class EvaluationError(ValueError):
    pass


# -- metrics ------------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise EvaluationError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)

    @classmethod
    def one_vs_rest(cls, truth: Sequence[str], predicted: Sequence[str], authors: Sequence[str]) -> "ConfusionCounts":
        """Sum of the per-author binary tables over every (email, author) decision."""
        if len(truth) != len(predicted):
            raise EvaluationError("truth and predictions differ in length")
        correct = sum(t == p for t, p in zip(truth, predicted))
        wrong = len(truth) - correct
        # each wrong email is one FP (for the predicted author) and one FN (for the true one)
        tn = len(truth) * len(authors) - correct - 2 * wrong
        return cls(correct, tn, wrong, wrong)

    def to_dict(self) -> dict:
        return {"TP": self.tp, "TN": self.tn, "FP": self.fp, "FN": self.fn}


def accuracy(counts: ConfusionCounts) -> float:
    """(TP + TN) / (TP + TN + FP + FN) as a percentage."""
    if counts.total == 0:
        raise EvaluationError("accuracy of zero decisions is undefined")
    return 100.0 * (counts.tp + counts.tn) / counts.total


def ccm_accuracy(cluster_rows: Iterable[tuple[int, float]], n: int) -> float:
    """Cluster-size-weighted accuracy, (1/n) * sum(|c_i| * ac_i), as a percentage."""
    rows = list(cluster_rows)
    if sum(size for size, _ in rows) != n:
        raise EvaluationError(f"cluster sizes sum to {sum(s for s, _ in rows)}, expected {n}")
    if n <= 0:
        raise EvaluationError("n must be positive")
    for size, ac in rows:
        if size < 0 or not 0.0 <= ac <= 1.0:
            raise EvaluationError(f"bad cluster row ({size}, {ac})")
    return 100.0 * sum(size * ac for size, ac in rows) / n


# -- cross-validation ---------------------------------------------------------

def stratified_folds(labels: Sequence[str] | Corpus, folds: int = 10, seed: int = 42) -> np.ndarray:
    """Fold index per email.

    Each author's emails are shuffled and dealt round-robin; the dealing
    position carries over from one author to the next so fold sizes stay
    within one of each other as well.
    """
    if isinstance(labels, Corpus):
        labels = labels.labels
    labels = list(labels)
    if folds < 2:
        raise EvaluationError("folds must be >= 2")
    if folds > len(labels):
        raise EvaluationError(f"{folds} folds for {len(labels)} emails")
    rng = np.random.default_rng(seed)
    by_author: dict[str, list[int]] = {}
    for i, a in enumerate(labels):
        by_author.setdefault(a, []).append(i)
    out = np.empty(len(labels), dtype=np.int64)
    position = 0
    for author in sorted(by_author):
        rows = np.asarray(by_author[author])
        for r in rng.permutation(rows):
            out[r] = position % folds
            position += 1
    return out


# -- reports ------------------------------------------------------------------

@dataclass
class EvalReport:
    experiment: int
    feature_set: str
    model: str
    fold_accuracies: list[float]
    cluster_rows: list[list[tuple[int, float]]]
    confusion: ConfusionCounts
    correct: int
    total: int
    n_authors: int
    seed: int
    hyperparameters: dict
    elapsed_seconds: float = 0.0

    @property
    def accuracy(self) -> float:
        """Mean of the per-fold accuracies, in percent."""
        return float(np.mean(self.fold_accuracies))

    @property
    def pooled_accuracy(self) -> float:
        return 100.0 * self.correct / self.total

    @property
    def one_vs_rest_accuracy(self) -> float:
        return accuracy(self.confusion)

    def recomputed_accuracy(self) -> float:
        """Aggregate rebuilt from the per-cluster rows of every fold."""
        return float(np.mean([ccm_accuracy(rows, sum(s for s, _ in rows)) for rows in self.cluster_rows]))

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "feature_set": self.feature_set,
            "model": self.model,
            "accuracy": self.accuracy,
            "fold_accuracies": self.fold_accuracies,
            "cluster_rows": [[[int(s), float(a)] for s, a in rows] for rows in self.cluster_rows],
            "confusion": self.confusion.to_dict(),
            "one_vs_rest_accuracy": self.one_vs_rest_accuracy,
            "correct": self.correct,
            "total": self.total,
            "pooled_accuracy": self.pooled_accuracy,
            "n_authors": self.n_authors,
            "seed": self.seed,
            "hyperparameters": self.hyperparameters,
        }


def format_table(reports: Sequence[EvalReport]) -> str:
    header = ("Exp", "Feature set", "Model", "Accuracy %", "Correct/Total", "One-vs-rest %")
    rows = [(str(r.experiment), r.feature_set, r.model, f"{r.accuracy:.2f}", f"{r.correct}/{r.total}",
             f"{r.one_vs_rest_accuracy:.2f}") for r in reports]
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    lines = ["  ".join(x.ljust(w) for x, w in zip(line, widths)).rstrip() for line in [header, *rows]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def reports_json(reports: Sequence[EvalReport]) -> str:
    return json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2, sort_keys=True) + "\n"


def plot_rows(reports: Sequence[EvalReport]) -> str:
    """Tab-separated (n_authors, experiment, accuracy) rows for charts."""
    lines = ["n_authors\texperiment\taccuracy"]
    lines += [f"{r.n_authors}\t{r.experiment}\t{r.accuracy:.4f}" for r in reports]
    return "\n".join(lines) + "\n"


# -- experiment suite ---------------------------------------------------------

class FeatureCache:
    """Per-corpus work shared by every fold and experiment: the stylometric
    and extended columns, and the sparse term counts."""

    def __init__(self, corpus: Corpus, config: Optional[StyleConfig] = None):
        self.corpus = corpus
        self.config = config or StyleConfig()
        self.style_schema = build_schema(self.config, None, BASELINE_GROUPS + ("extended",))
        self.style = feature_matrix(corpus.emails, self.style_schema, None, self.config)
        self.baseline_cols = [i for i, (_, g) in enumerate(self.style_schema.entries) if g != "extended"]
        self.terms = TermMatrix(corpus.emails)
        self.labels = np.asarray(corpus.labels, dtype=object)


def _validate_experiments(experiments: Iterable[int]) -> list[int]:
    out = []
    for e in experiments:
        if e not in EXPERIMENTS:
            raise EvaluationError(f"unknown experiment id {e!r}; valid ids are 1-5")
        if e not in out:
            out.append(e)
    return out


def run_experiment_suite(corpus: Corpus, experiments: Iterable[int] = (1, 2, 3, 4, 5), seed: int = 42,
                         folds: int = 10, top_k: int = 1000, min_corpus_freq: int = 3,
                         params: Optional[ccm.CcmParams] = None, config: Optional[StyleConfig] = None,
                         cache: Optional[FeatureCache] = None) -> list[EvalReport]:
    """Stratified k-fold evaluation of each requested configuration.

    The codebook and the standardization are fitted on training folds only.
    """
    experiments = _validate_experiments(experiments)
    if len(corpus) == 0:
        raise EvaluationError("cannot evaluate an empty corpus")
    params = params or ccm.CcmParams(seed=seed)
    cache = cache or FeatureCache(corpus, config)
    config = cache.config
    labels = cache.labels
    assignment = stratified_folds(corpus.labels, folds, seed)
    hyper = {"folds": folds, "top_k": top_k, "min_corpus_freq": min_corpus_freq, **params.to_dict()}

    acc: dict[int, dict] = {e: {"folds": [], "rows": [], "conf": ConfusionCounts(), "correct": 0, "time": 0.0}
                            for e in experiments}
    for f in range(folds):
        train = np.flatnonzero(assignment != f)
        test = np.flatnonzero(assignment == f)
        codebook = None
        content = None
        if any(e >= 3 for e in experiments):
            t0 = time.perf_counter()
            codebook = cache.terms.codebook(train, labels[train].tolist(), top_k, min_corpus_freq)
            content = cache.terms.tfidf(np.arange(len(corpus)), codebook)
            share = (time.perf_counter() - t0) / sum(e >= 3 for e in experiments)
            for e in experiments:
                if e >= 3:
                    acc[e]["time"] += share
        for e in experiments:
            t0 = time.perf_counter()
            style = cache.style[:, cache.baseline_cols] if e in (1, 3) else cache.style
            X = np.hstack([style, content]) if e >= 3 else style
            fold_seed = params.seed + 1000 * f
            if e == 5:
                schema = build_schema(config, codebook, BASELINE_GROUPS + ("extended", "content"))
                model = ccm.train_ccm(_subcorpus(corpus, train), schema,
                                      codebook, ccm.CcmParams(**{**params.to_dict(), "seed": fold_seed}), config,
                                      X=X[train], keep_reference=False)
                out = model.predict_matrix(X[test])
                predicted = [p[0] for p in out]
                leaves = [p[1] for p in out]
            else:
                std = ccm.Standardizer.fit(X[train])
                clf = ccm.train_linear_svm(std.transform(X[train]), labels[train].tolist(), C=params.C,
                                           seed=fold_seed, validate=False)
                predicted = clf.predict(std.transform(X[test]))
                leaves = ["flat"] * len(test)
            truth = labels[test].tolist()
            hits = [t == p for t, p in zip(truth, predicted)]
            per_leaf: dict[str, list[bool]] = {}
            for leaf, hit in zip(leaves, hits):
                per_leaf.setdefault(leaf, []).append(hit)
            rows = [(len(v), sum(v) / len(v)) for _, v in sorted(per_leaf.items())]
            a = acc[e]
            a["rows"].append(rows)
            a["folds"].append(ccm_accuracy(rows, len(test)))
            a["conf"] = a["conf"] + ConfusionCounts.one_vs_rest(truth, predicted, corpus.authors)
            a["correct"] += sum(hits)
            a["time"] += time.perf_counter() - t0

    return [EvalReport(e, *EXPERIMENTS[e], acc[e]["folds"], acc[e]["rows"], acc[e]["conf"], acc[e]["correct"],
                       len(corpus), len(corpus.authors), seed, hyper, acc[e]["time"]) for e in experiments]


def _subcorpus(corpus: Corpus, rows: np.ndarray) -> Corpus:
    """Training subset that keeps the full author list, so label sets stay aligned."""
    return Corpus(tuple(corpus.emails[i] for i in rows), corpus.authors)


# -- unknown-author gate ------------------------------------------------------

KNOWN = "Known"
UNKNOWN = "Unknown"
MIN_REFERENCE_EMAILS = 5
EXACT_LIMIT = 12


class InconclusiveError(EvaluationError):
    """Too little reference data to run the test."""


def kruskal_wallis_h(*groups: Sequence[float]) -> float:
    """H on average ranks with the usual tie correction; 0 when every value ties."""
    sizes = [len(g) for g in groups]
    pooled = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    n = len(pooled)
    if n < 2 or any(s == 0 for s in sizes):
        return 0.0
    ranks = stats.rankdata(pooled)
    correction = stats.tiecorrect(ranks)
    if correction == 0:
        return 0.0
    h, start = 0.0, 0
    for s in sizes:
        h += ranks[start:start + s].sum() ** 2 / s
        start += s
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    return max(0.0, h / correction)


def _exact_p(test: np.ndarray, reference: np.ndarray, h_obs: float) -> float:
    pooled = np.concatenate([test, reference])
    n, g = len(pooled), len(test)
    count = total = 0
    for chosen in itertools.combinations(range(n), g):
        mask = np.zeros(n, dtype=bool)
        mask[list(chosen)] = True
        total += 1
        count += kruskal_wallis_h(pooled[mask], pooled[~mask]) >= h_obs - 1e-12
    return count / total


def _gate_columns(test: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Codebook terms the test email uses; when it uses none, the terms the
    reference emails use."""
    used = np.flatnonzero(test != 0)
    return used if len(used) else np.flatnonzero((reference != 0).any(axis=0))


def _gate_h(test: np.ndarray, reference: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    columns = _gate_columns(test, reference)
    t, r = test[columns], reference[:, columns].ravel()
    return kruskal_wallis_h(t, r), t, r


@dataclass
class KwReference:
    """The assigned author's training content rows plus the H value of each
    row against the others, which serves as the reference distribution."""

    values: np.ndarray
    loo_h: np.ndarray = field(default=None)

    @classmethod
    def build(cls, content_rows: np.ndarray) -> "KwReference":
        content_rows = np.asarray(content_rows, dtype=float)
        if len(content_rows) < MIN_REFERENCE_EMAILS:
            raise InconclusiveError(f"{len(content_rows)} reference emails; at least {MIN_REFERENCE_EMAILS} needed")
        loo = np.array([_gate_h(content_rows[i], np.delete(content_rows, i, axis=0))[0]
                        for i in range(len(content_rows))])
        return cls(content_rows, loo)


@dataclass(frozen=True)
class KwResult:
    verdict: str
    h: float
    p_value: float
    method: str


def kruskal_wallis_unknown(model: ccm.CcmModel, training_emails: Sequence[CleanedEmail] | None,
                           test_email: CleanedEmail, alpha: float = 0.05, method: str = "reference",
                           reference: Optional[KwReference] = None, author: Optional[str] = None) -> KwResult:
    """Compare the test email's content-feature values with those of the
    assigned author's training emails, over the codebook terms the test
    email contains.

    ``method="reference"`` takes the tail probability from the author's own
    leave-one-email-out H values; ``method="chi2"`` uses the chi-square
    approximation with one degree of freedom.  Pooled samples of at most 12
    values always use the exact permutation distribution.
    """
    if not 0.0 < alpha < 1.0:
        raise EvaluationError("alpha must lie in (0, 1)")
    if method not in ("reference", "chi2"):
        raise EvaluationError(f"unknown method {method!r}")
    if model.codebook is None:
        raise EvaluationError("the unknown-author test needs a model with content features")
    if reference is None:
        if training_emails is not None:
            rows = np.array([tfidf_row(e, model.codebook) for e in training_emails]).reshape(-1, len(model.codebook.terms))
        else:
            rows = model.reference_content(author if author is not None else test_email.author)
        reference = KwReference.build(rows)
    test_row = tfidf_row(test_email, model.codebook)
    h, test, pooled_reference = _gate_h(test_row, reference.values)
    if not test_row.any():
        # No codebook term to rank: the tail probability is how often the
        # author's own emails carry no codebook term either.
        empty = int(np.sum(~reference.values.any(axis=1)))
        p, used = (1 + empty) / (len(reference.values) + 1), "no-terms"
    elif len(test) + len(pooled_reference) <= EXACT_LIMIT:
        p, used = _exact_p(test, pooled_reference, h), "exact"
    elif method == "chi2":
        p, used = float(stats.chi2.sf(h, 1)), "chi2"
    else:
        p = (1 + int(np.sum(reference.loo_h >= h - 1e-12))) / (len(reference.loo_h) + 1)
        used = "reference"
    return KwResult(UNKNOWN if p < alpha else KNOWN, float(h), float(p), used)

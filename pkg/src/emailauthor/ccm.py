"""Cluster-then-classify model: k-means over emails, a linear SVM inside each
mixed cluster, recursive re-clustering when a cluster's classifier does not
beat its parent's.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .content import Codebook
from .corpus import CleanedEmail, Corpus
from .stylometry import FeatureSchema, FeatureVector, StyleConfig, feature_matrix

MAX_KMEANS_ITER = 300


class ModelError(ValueError):
    pass


def choose_k(n_authors: int, override: Optional[int] = None) -> int:
    if n_authors < 1:
        raise ModelError("need at least one author")
    if override is not None:
        if override < 1:
            raise ModelError(f"k must be >= 1, got {override}")
        return int(override)
    return max(1, math.ceil(math.sqrt(n_authors)))


# -- standardization ----------------------------------------------------------

@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        return cls(mean, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale


# -- k-means ------------------------------------------------------------------

@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    sse_history: list[float]
    n_iter: int


def _sq_dists(X: np.ndarray, C: np.ndarray, sq_norms: Optional[np.ndarray] = None) -> np.ndarray:
    if sq_norms is None:
        sq_norms = (X * X).sum(axis=1)
    d = sq_norms[:, None] - 2.0 * (X @ C.T) + (C * C).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def kmeans(X: np.ndarray, k: int, seed: int = 0, max_iter: int = MAX_KMEANS_ITER) -> KMeansResult:
    """Lloyd's algorithm from a seeded k-means++ start.

    Stops at an assignment fixpoint or after ``max_iter`` rounds.  A cluster
    that empties is reseeded with the point lying farthest from its own
    centroid.  ``sse_history`` records the within-cluster SSE after every
    centroid update (the last entry is the converged SSE).
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    if not 1 <= k <= n:
        raise ModelError(f"k={k} is outside 1..{n}")
    rng = np.random.default_rng(seed)

    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    closest = _sq_dists(X, centroids[:1]).ravel()
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centroids[j] = X[idx]
        closest = np.minimum(closest, _sq_dists(X, centroids[j:j + 1]).ravel())

    # distances for assignment are computed in single precision (the pass
    # over X dominates the cost); the recorded SSE is exact double precision
    X32 = X.astype(np.float32)
    sq_norms = (X * X).sum(axis=1)
    sq_norms32 = sq_norms.astype(np.float32)
    total_sq = float(sq_norms.sum())
    labels = np.full(n, -1)
    history: list[float] = []
    it = 0
    for it in range(1, max_iter + 1):
        dist = _sq_dists(X32, centroids.astype(np.float32), sq_norms32)
        new_labels = dist.argmin(axis=1)
        counts = np.bincount(new_labels, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            own = dist[np.arange(n), new_labels].copy()
            donors = counts[new_labels] > 1
            if not donors.any():
                break
            own[~donors] = -1.0
            far = int(own.argmax())
            counts[new_labels[far]] -= 1
            new_labels[far] = empty
            counts[empty] = 1
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        onehot = np.zeros((k, n))
        onehot[labels, np.arange(n)] = 1.0
        counts = onehot.sum(axis=1)
        filled = counts > 0
        sums = onehot[filled] @ X
        centroids[filled] = sums / counts[filled, None]
        # with every centroid at its cluster mean, SSE = sum |x|^2 - sum_j |S_j|^2 / n_j
        history.append(max(0.0, total_sq - float(((sums * sums).sum(axis=1) / counts[filled]).sum())))
    return KMeansResult(labels, centroids, history, it)


# -- linear SVM ---------------------------------------------------------------

@dataclass
class LinearClassifier:
    """One-vs-rest linear SVMs; the bias is the last weight column."""

    classes: tuple[str, ...]
    weights: np.ndarray
    C: float
    epochs: int
    validation_accuracy: float
    training_accuracy: float = 0.0

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.weights.shape[1] - 1:
            raise ModelError(f"vector width {X.shape[1]} != classifier width {self.weights.shape[1] - 1}")
        return X @ self.weights[:, :-1].T + self.weights[:, -1]

    def predict(self, X: np.ndarray) -> list[str]:
        return [self.classes[i] for i in self.decision_function(X).argmax(axis=1)]

    def to_dict(self) -> dict:
        return {"classes": list(self.classes), "weights": self.weights.tolist(), "C": self.C,
                "epochs": self.epochs, "validation_accuracy": self.validation_accuracy,
                "training_accuracy": self.training_accuracy}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearClassifier":
        return cls(tuple(d["classes"]), np.asarray(d["weights"], dtype=float), float(d["C"]), int(d["epochs"]),
                   float(d["validation_accuracy"]), float(d.get("training_accuracy", 0.0)))


BATCH_SIZE = 64
PROJECT_EVERY = 4


def _pegasos(X: np.ndarray, y: np.ndarray, n_classes: int, C: float, epochs: int, rng) -> np.ndarray:
    """Mini-batch stochastic subgradient descent on the regularized hinge loss
    for all one-vs-rest problems at once.

    Step size 1/(lambda t) with lambda = 1/(C n).  Weights are kept as
    ``scale * V`` so the shrink step is O(1); the returned weights average
    snapshots taken over the second half of the run.
    """
    n, d = X.shape
    Xb = np.hstack([X, np.ones((n, 1))]).astype(np.float32)
    signs = -np.ones((n, n_classes), dtype=np.float32)
    signs[np.arange(n), y] = 1.0
    lam = 1.0 / (C * n)
    steps = max(2, math.ceil(epochs / BATCH_SIZE))
    snap_every = max(1, steps // 40)
    radius = 1.0 / math.sqrt(lam)
    V = np.zeros((n_classes, d + 1), dtype=np.float32)
    scale = 1.0
    avg = np.zeros(V.shape)
    n_avg = 0
    for t in range(1, steps + 1):
        idx = rng.integers(0, n, BATCH_SIZE)
        xb, sb = Xb[idx], signs[idx]
        violated = (sb * (scale * (xb @ V.T)) < 1.0) * sb
        if t == 1:
            # the first step's shrink factor is exactly zero
            V[:] = 0.0
            scale = 1.0
        else:
            scale *= 1.0 - 1.0 / t
        V += (1.0 / (lam * t * BATCH_SIZE * scale)) * (violated.T @ xb)
        if t % PROJECT_EVERY == 0 or t == steps:
            V *= scale
            scale = 1.0
            norms = np.sqrt((V * V).sum(axis=1))
            over = norms > radius
            if over.any():
                V[over] *= (radius / norms[over])[:, None]
        if 2 * t > steps and (steps - t) % snap_every == 0:
            avg += scale * V
            n_avg += 1
    return (avg / n_avg).astype(float)


def _stratified_holdout(y: np.ndarray, fraction: float, rng) -> np.ndarray:
    """Boolean mask of held-out rows; classes with one example stay in training."""
    mask = np.zeros(len(y), dtype=bool)
    for c in np.unique(y):
        rows = np.flatnonzero(y == c)
        n_out = int(round(len(rows) * fraction))
        if len(rows) >= 2 and n_out >= 1:
            mask[rng.permutation(rows)[:min(n_out, len(rows) - 1)]] = True
    return mask


class _SvmTask:
    """Training data for one node's classifier.

    The holdout accuracy is computed eagerly; the full-data model is only
    fitted when somebody asks for it, since most internal nodes never need it.
    """

    def __init__(self, X: np.ndarray, labels: Sequence[str], C: float, epochs: Optional[int], seed: int,
                 holdout: Optional[float]):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] != len(labels):
            raise ModelError("vectors and labels are misaligned")
        self.classes = tuple(sorted(set(labels)))
        if len(self.classes) < 2:
            raise ModelError("a classifier needs at least two authors")
        if C <= 0:
            raise ModelError("C must be positive")
        index = {c: i for i, c in enumerate(self.classes)}
        self.X = X
        self.y = np.array([index[a] for a in labels])
        self.C = C
        self.epochs = epochs
        self.seed = seed
        self._model: Optional[LinearClassifier] = None
        self.validation_accuracy = float("nan")
        if holdout:
            rng = np.random.default_rng([seed, 1])
            held = _stratified_holdout(self.y, holdout, rng)
            if held.any():
                W = self._fit(~held, rng)
                scores = X[held] @ W[:, :-1].T + W[:, -1]
                self.validation_accuracy = float((scores.argmax(axis=1) == self.y[held]).mean())

    def _fit(self, rows: np.ndarray, rng) -> np.ndarray:
        X, y = self.X[rows], self.y[rows]
        epochs = self.epochs if self.epochs is not None else 10 * len(y)
        return _pegasos(X, y, len(self.classes), self.C, epochs, rng)

    @property
    def model(self) -> LinearClassifier:
        if self._model is None:
            everything = np.ones(len(self.y), dtype=bool)
            W = self._fit(everything, np.random.default_rng([self.seed, 2]))
            train_acc = float(((self.X @ W[:, :-1].T + W[:, -1]).argmax(axis=1) == self.y).mean())
            val = train_acc if math.isnan(self.validation_accuracy) else self.validation_accuracy
            epochs = self.epochs if self.epochs is not None else 10 * len(self.y)
            self._model = LinearClassifier(self.classes, W, self.C, epochs, val, train_acc)
        return self._model

    @property
    def score(self) -> float:
        """Accuracy used when comparing against a parent: holdout if there was one."""
        return self.model.training_accuracy if math.isnan(self.validation_accuracy) else self.validation_accuracy


def train_linear_svm(X: np.ndarray, labels: Sequence[str], C: float = 1.0, epochs: Optional[int] = None,
                     seed: int = 0, validate: bool = True, holdout: float = 0.2) -> LinearClassifier:
    """One-vs-rest soft-margin linear SVM.

    ``epochs`` counts single-example subgradient evaluations (default ten
    passes over the training rows).  With ``validate`` a model fitted on a
    stratified 80/20 split reports its held-out accuracy as
    ``validation_accuracy``; the returned weights always come from the full data.
    """
    return _SvmTask(X, labels, C, epochs, seed, holdout if validate else None).model


# -- cluster tree -------------------------------------------------------------

PURE = "pure"
CLASSIFIER = "classifier"
INTERNAL = "internal"


@dataclass
class ClusterNode:
    node_id: str
    centroid: np.ndarray
    author_set: tuple[str, ...]
    depth: int
    kind: str = INTERNAL
    members: list[int] = field(default_factory=list)
    classifier: Optional[LinearClassifier] = None
    children: list["ClusterNode"] = field(default_factory=list)

    @property
    def author(self) -> Optional[str]:
        return self.author_set[0] if self.kind == PURE else None

    def leaves(self):
        if self.kind == INTERNAL:
            for child in self.children:
                yield from child.leaves()
        else:
            yield self

    def to_dict(self) -> dict:
        d = {"node_id": self.node_id, "kind": self.kind, "depth": self.depth,
             "author_set": list(self.author_set), "size": len(self.members),
             "centroid": self.centroid.tolist()}
        if self.classifier is not None:
            d["classifier"] = self.classifier.to_dict()
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterNode":
        node = cls(d["node_id"], np.asarray(d["centroid"], dtype=float), tuple(d["author_set"]), int(d["depth"]),
                   d["kind"])
        node.members = [-1] * int(d.get("size", 0))
        if "classifier" in d:
            node.classifier = LinearClassifier.from_dict(d["classifier"])
        node.children = [cls.from_dict(c) for c in d.get("children", [])]
        return node


def cluster_similarity(a, b) -> float:
    """Jaccard overlap of the two clusters' author sets."""
    sa = set(a.author_set if isinstance(a, ClusterNode) else a)
    sb = set(b.author_set if isinstance(b, ClusterNode) else b)
    union = sa | sb
    return len(sa & sb) / len(union) if union else 0.0


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    return float(u @ v / (nu * nv)) if nu and nv else 0.0


@dataclass
class _Cluster:
    members: np.ndarray
    authors: frozenset

    def centroid(self, X):
        return X[self.members].mean(axis=0)


@dataclass
class CcmParams:
    k: Optional[int] = None
    max_depth: int = 5
    seed: int = 0
    C: float = 1.0
    merge_threshold: float = 0.5
    holdout: float = 0.2

    def to_dict(self) -> dict:
        return {"k": self.k, "max_depth": self.max_depth, "seed": self.seed, "C": self.C,
                "merge_threshold": self.merge_threshold, "holdout": self.holdout}


def _most_similar(i: int, clusters: list[_Cluster], X) -> int:
    best, best_key = -1, None
    ci = clusters[i].centroid(X)
    for j, other in enumerate(clusters):
        if j == i:
            continue
        key = (cluster_similarity(clusters[i].authors, other.authors), _cosine(ci, other.centroid(X)), -j)
        if best_key is None or key > best_key:
            best, best_key = j, key
    return best


def _merge(clusters: list[_Cluster], keep: int, drop: int) -> list[_Cluster]:
    merged = _Cluster(np.sort(np.concatenate([clusters[keep].members, clusters[drop].members])),
                      clusters[keep].authors | clusters[drop].authors)
    out = [c for j, c in enumerate(clusters) if j not in (keep, drop)]
    out.insert(min(keep, drop), merged)
    return out


def build_clusters(X: np.ndarray, members: np.ndarray, labels: np.ndarray, k: int, seed: int,
                   merge_threshold: float) -> list[_Cluster]:
    """k-means the members, merge clusters sharing authors above the Jaccard
    threshold, then fold every undersized mixed cluster into its most similar
    neighbour until none is left."""
    k = min(k, len(members))
    result = kmeans(X[members], k, seed)
    clusters = []
    for j in range(k):
        rows = members[result.labels == j]
        if len(rows):
            clusters.append(_Cluster(rows, frozenset(labels[rows])))

    merged = True
    while merged and len(clusters) > 1:
        merged = False
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                s = cluster_similarity(clusters[i].authors, clusters[j].authors)
                if s > merge_threshold and (best is None or s > best[0]):
                    best = (s, i, j)
        if best is not None:
            clusters = _merge(clusters, best[1], best[2])
            merged = True

    while len(clusters) > 1:
        small = [i for i, c in enumerate(clusters) if len(c.authors) > 1 and len(c.members) < 2 * len(c.authors)]
        if not small:
            break
        i = small[0]
        clusters = _merge(clusters, i, _most_similar(i, clusters, X))
    return clusters


def _grow(node_id: str, cluster: _Cluster, X, labels, params: CcmParams, depth: int,
          parent: _SvmTask) -> ClusterNode:
    node = ClusterNode(node_id, cluster.centroid(X), tuple(sorted(cluster.authors)), depth,
                       members=cluster.members.tolist())
    if len(cluster.authors) == 1:
        node.kind = PURE
        return node

    rows = cluster.members
    seed = params.seed + 7919 * (depth + 1) + int(rows[0])
    task = _SvmTask(X[rows], labels[rows].tolist(), params.C, None, seed, params.holdout)
    best = task if task.score > parent.score else parent
    if task.score > parent.score or depth >= params.max_depth:
        node.kind = CLASSIFIER
        node.classifier = best.model
        return node

    children = build_clusters(X, rows, labels, choose_k(len(cluster.authors), params.k), seed,
                              params.merge_threshold)
    if len(children) < 2:
        # re-clustering cannot split this node any further
        node.kind = CLASSIFIER
        node.classifier = best.model
        return node
    node.kind = INTERNAL
    node.children = [_grow(f"{node_id}.{j}", c, X, labels, params, depth + 1, best)
                     for j, c in enumerate(children)]
    return node


def fit_tree(X: np.ndarray, labels: Sequence[str], params: CcmParams) -> list[ClusterNode]:
    """Grow the cluster tree over standardized vectors.

    The top-level clusters compete against a flat classifier trained on the
    whole input.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=object)
    authors = sorted(set(labels.tolist()))
    if len(X) == 0:
        raise ModelError("cannot train on an empty corpus")
    everything = np.arange(len(X))
    if len(authors) == 1:
        return [ClusterNode("0", X.mean(axis=0), tuple(authors), 0, PURE, everything.tolist())]
    baseline = _SvmTask(X, labels.tolist(), params.C, None, params.seed, params.holdout)
    k = choose_k(len(authors), params.k)
    clusters = build_clusters(X, everything, labels, k, params.seed, params.merge_threshold)
    if len(clusters) == 1:
        # nothing to route between: the flat classifier is the whole model
        c = clusters[0]
        return [ClusterNode("0", c.centroid(X), tuple(authors), 0, CLASSIFIER, c.members.tolist(), baseline.model)]
    return [_grow(str(j), c, X, labels, params, 0, baseline) for j, c in enumerate(clusters)]


def route(roots: Sequence[ClusterNode], z: np.ndarray) -> ClusterNode:
    """Descend by nearest centroid (Euclidean) to a leaf."""
    nodes = roots
    while True:
        d = [float(((n.centroid - z) ** 2).sum()) for n in nodes]
        node = nodes[int(np.argmin(d))]
        if node.kind != INTERNAL:
            return node
        nodes = node.children


def predict_standardized(roots: Sequence[ClusterNode], z: np.ndarray) -> tuple[str, str, float]:
    leaf = route(roots, z)
    if leaf.kind == PURE:
        return leaf.author_set[0], leaf.node_id, 1.0
    scores = leaf.classifier.decision_function(z[None, :])[0]
    best = int(scores.argmax())
    return leaf.classifier.classes[best], leaf.node_id, float(scores[best])


# -- trained model ------------------------------------------------------------

FORMAT_VERSION = "1.0"


@dataclass
class CcmModel:
    """Everything needed to turn a cleaned email into an author prediction."""

    schema: FeatureSchema
    codebook: Optional[Codebook]
    standardizer: Standardizer
    roots: list[ClusterNode]
    params: CcmParams
    config: StyleConfig
    authors: tuple[str, ...]
    fingerprint: str
    # per author: one (term-index -> count, word count) record per training email
    reference: dict[str, list[tuple[dict[int, int], int]]] = field(default_factory=dict)

    @property
    def width(self) -> int:
        return len(self.schema)

    def vectorize(self, emails: Sequence[CleanedEmail]) -> np.ndarray:
        return feature_matrix(emails, self.schema, self.codebook, self.config)

    def predict_matrix(self, X: np.ndarray) -> list[tuple[str, str, float]]:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.width:
            raise ModelError(f"vector width {X.shape[1]} != schema width {self.width}")
        Z = self.standardizer.transform(X)
        return [predict_standardized(self.roots, z) for z in Z]

    def reference_content(self, author: str) -> np.ndarray:
        """tf-idf rows of the author's training emails over the codebook."""
        if self.codebook is None:
            raise ModelError("model has no content features")
        rows = self.reference.get(author, [])
        idf = self.codebook.idf()
        out = np.zeros((len(rows), len(idf)))
        for i, (counts, length) in enumerate(rows):
            if length:
                for j, n in counts.items():
                    out[i, j] = n / length * idf[j]
        return out

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "schema": self.schema.to_dict(),
            "codebook": self.codebook.to_dict() if self.codebook is not None else None,
            "standardizer": {"mean": self.standardizer.mean.tolist(), "scale": self.standardizer.scale.tolist()},
            "tree": [r.to_dict() for r in self.roots],
            "hyperparameters": self.params.to_dict(),
            "style_config": self.config.to_dict(),
            "authors": list(self.authors),
            "training_fingerprint": self.fingerprint,
            "reference": {a: [[sorted([int(j), int(n)] for j, n in c.items()), int(length)] for c, length in rows]
                          for a, rows in sorted(self.reference.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CcmModel":
        version = str(d.get("format_version", ""))
        if version.split(".")[0] != FORMAT_VERSION.split(".")[0]:
            raise ModelError(f"model format version {version!r} is incompatible with {FORMAT_VERSION}")
        try:
            codebook = Codebook.from_dict(d["codebook"]) if d["codebook"] is not None else None
            std = Standardizer(np.asarray(d["standardizer"]["mean"], dtype=float),
                               np.asarray(d["standardizer"]["scale"], dtype=float))
            reference = {a: [({int(j): int(n) for j, n in c}, int(length)) for c, length in rows]
                         for a, rows in d.get("reference", {}).items()}
            return cls(FeatureSchema.from_dict(d["schema"]), codebook, std,
                       [ClusterNode.from_dict(r) for r in d["tree"]], CcmParams(**d["hyperparameters"]),
                       StyleConfig.from_dict(d["style_config"]), tuple(d["authors"]),
                       d["training_fingerprint"], reference)
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed model file: {exc}") from None


def corpus_fingerprint(emails: Sequence[CleanedEmail]) -> str:
    digest = hashlib.sha256()
    for e in sorted(emails, key=lambda e: e.id):
        digest.update("\0".join((e.id, e.author, e.body)).encode())
        digest.update(b"\1")
    return digest.hexdigest()


def _reference_counts(emails: Sequence[CleanedEmail], codebook: Optional[Codebook]) -> dict:
    if codebook is None:
        return {}
    index = {t: j for j, t in enumerate(codebook.term_list)}
    out: dict[str, list] = {}
    for e in emails:
        counts: dict[int, int] = {}
        for t in e.terms:
            j = index.get(t)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        out.setdefault(e.author, []).append((counts, e.word_count))
    return out


def train_ccm(corpus: Corpus, schema: FeatureSchema, codebook: Optional[Codebook],
              params: CcmParams = CcmParams(), config: Optional[StyleConfig] = None,
              X: Optional[np.ndarray] = None, keep_reference: bool = True) -> CcmModel:
    """Fit standardization and the cluster tree on a corpus.

    ``X`` may carry precomputed raw feature rows for the corpus emails.
    ``keep_reference`` stores each author's training term counts, which the
    unknown-author test needs later.
    """
    if len(corpus) == 0:
        raise ModelError("cannot train on an empty corpus")
    config = config or StyleConfig()
    if X is None:
        X = feature_matrix(corpus.emails, schema, codebook, config)
    X = np.asarray(X, dtype=float)
    if X.shape != (len(corpus), len(schema)):
        raise ModelError(f"feature rows have shape {X.shape}, expected {(len(corpus), len(schema))}")
    standardizer = Standardizer.fit(X)
    roots = fit_tree(standardizer.transform(X), corpus.labels, params)
    return CcmModel(schema, codebook, standardizer, roots, params, config, tuple(corpus.authors),
                    corpus_fingerprint(corpus.emails),
                    _reference_counts(corpus.emails, codebook) if keep_reference else {})


def predict(model: CcmModel, vector) -> tuple[str, str, float]:
    """(author, leaf id, score) for one raw (unstandardized) feature vector."""
    values = vector.values if isinstance(vector, FeatureVector) else vector
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ModelError("predict takes a single vector")
    return model.predict_matrix(values[None, :])[0]


def dumps_model(model: CcmModel) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model: CcmModel, path) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps_model(model))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path) -> CcmModel:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not a model file ({exc.msg})") from None
    if not isinstance(d, dict):
        raise ModelError(f"{path}: not a model file")
    return CcmModel.from_dict(d)

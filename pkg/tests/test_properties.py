"""Randomized checks of the stated invariants."""

import json
import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from emailauthor.ccm import CcmParams, Standardizer, fit_tree, kmeans, predict_standardized
from emailauthor.content import build_codebook, info_gain, inverse_document_frequency
from emailauthor.corpus import (Corpus, RawEmail, ReferenceType, clean_email, is_word, load_corpus, tokenize,
                                write_jsonl)
from emailauthor.evaluation import (ccm_accuracy, kruskal_wallis_h, stratified_folds)
from emailauthor.stylometry import (LAST_PUNCT, StyleConfig, build_schema, extract_extended,
                                    extract_stylometric, feature_matrix, last_punctuation)

from helpers import email
from oracles import brute_force_info_gain, pooled_accuracy

CFG = StyleConfig()
COUNT_FEATURES = {"char_count", "word_count", "avg_word_length", "avg_sentence_length", "paragraph_count",
                  "sentences_per_paragraph", "indent_space_paragraphs", "indent_tab_paragraphs",
                  "repeated_word_runs"}

words = st.sampled_from(["hi", "Hello", "the", "Thanks", "regards", "yes", "me", "2:00", "o'clock", "Bob",
                         "data", "x", "Alice", "Smith", "sent", "from", "my", "iPhone", "don't", "42"])
seps = st.sampled_from([" ", " ", ", ", ". ", "? ", "! ", "; ", "\n", "\n\n", "\t", " - ", ": "])
lines_extra = st.sampled_from(["> quoted", "--", "-----Original Message-----", "On Monday, Bob wrote:",
                               "Alice Smith", "FYI", "   ", "---------- Forwarded message ----------"])


@st.composite
def bodies(draw):
    parts = []
    for _ in range(draw(st.integers(0, 25))):
        parts.append(draw(words))
        parts.append(draw(seps))
    text = "".join(parts)
    lines = text.split("\n")
    for _ in range(draw(st.integers(0, 3))):
        lines.insert(draw(st.integers(0, len(lines))), draw(lines_extra))
    return "\n".join(lines)


any_text = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=80)
SETTINGS = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


# -- corpus --------------------------------------------------------------------------

@SETTINGS
@given(bodies(), st.sampled_from(list(ReferenceType)))
def test_clean_idempotent(body, ref):
    once = clean_email(RawEmail("1", "Alice Smith", body, reference_type=ref))
    assume(once is not None)
    assert clean_email(once.as_raw()) == once


@SETTINGS
@given(bodies(), st.sampled_from(list(ReferenceType)))
def test_no_quote_markers_survive(body, ref):
    out = clean_email(RawEmail("1", "Alice Smith", body, reference_type=ref))
    assume(out is not None)
    for line in out.body.split("\n"):
        s = line.strip()
        assert not s.startswith(">")
        assert "Original Message" not in s
        assert not (s.startswith("On ") and s.endswith("wrote:"))


@SETTINGS
@given(any_text)
def test_tokens_cover_every_visible_character(body):
    tokens = tokenize(body)
    assert "".join(tokens) == "".join(body.split())
    assert tokenize(" ".join(tokens)) == tokens
    assert all(len(t) == 1 for t in tokens if not is_word(t))


@SETTINGS
@given(st.lists(st.tuples(st.sampled_from(["a", "b", "c"]), any_text), max_size=10))
def test_load_preserves_record_order(tmp_path_factory, records):
    path = tmp_path_factory.mktemp("order") / "c.jsonl"
    raws = [RawEmail(str(i), a, b) for i, (a, b) in enumerate(records)]
    write_jsonl(raws, path)
    assert [r.body for r in load_corpus(path)] == [b for _, b in records]


# -- stylometry -----------------------------------------------------------------------

@SETTINGS
@given(st.one_of(bodies(), any_text))
def test_feature_ranges(body):
    values = {**extract_stylometric(email(body), CFG), **extract_extended(email(body), CFG)}
    for name, v in values.items():
        assert math.isfinite(v)
        if name in COUNT_FEATURES:
            assert v >= 0, name
        else:
            assert 0.0 <= v <= 1.0, name
    for prefix in ("last_punct_", "top_punct_", "greeting_punct_", "punct_after_farewell_"):
        assert sum(v for n, v in values.items() if n.startswith(prefix)) <= 1.0


@SETTINGS
@given(st.one_of(bodies(), any_text))
def test_last_punctuation_sum(body):
    out = last_punctuation(body)
    stripped = body.rstrip()
    assert sum(out.values()) == (1 if stripped and stripped[-1] in LAST_PUNCT else 0)


@SETTINGS
@given(st.one_of(bodies(), any_text), st.text(alphabet=" \t\n\r", min_size=1, max_size=5))
def test_trailing_whitespace_changes_nothing(body, tail):
    a = {**extract_stylometric(email(body), CFG), **extract_extended(email(body), CFG)}
    b = {**extract_stylometric(email(body + tail), CFG), **extract_extended(email(body + tail), CFG)}
    assert a == b


@settings(max_examples=30, deadline=None)
@given(st.lists(bodies(), min_size=2, max_size=6), st.randoms(use_true_random=False))
def test_features_independent_of_corpus_order(body_list, rnd):
    emails = [email(b, id=str(i)) for i, b in enumerate(body_list)]
    schema = build_schema(CFG, None, ("lexical", "structural", "syntactic", "extended"))
    X = feature_matrix(emails, schema, None, CFG)
    order = list(range(len(emails)))
    rnd.shuffle(order)
    Y = feature_matrix([emails[i] for i in order], schema, None, CFG)
    assert np.array_equal(X[order], Y)
    assert Y.shape[1] == len(schema)


# -- content --------------------------------------------------------------------------

@SETTINGS
@given(st.integers(1, 500), st.integers(0, 499), st.integers(0, 499))
def test_idf_non_increasing(n, d1, d2):
    lo, hi = sorted((d1 % (n + 1), d2 % (n + 1)))
    assert inverse_document_frequency(n, lo) >= inverse_document_frequency(n, hi)


@st.composite
def small_presence(draw):
    n = draw(st.integers(1, 8))
    labels = draw(st.lists(st.sampled_from(["a", "b", "c"]), min_size=n, max_size=n))
    values = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    return values, labels


@SETTINGS
@given(small_presence())
def test_ig_bounds_and_oracle(data):
    values, labels = data
    m = len(set(labels))
    ig = info_gain(values, labels)
    counts = [labels.count(a) for a in set(labels)]
    h_a = -sum(c / len(labels) * math.log2(c / len(labels)) for c in counts)
    assert -1e-12 <= h_a <= math.log2(m) + 1e-12
    assert 0.0 <= ig <= h_a + 1e-12
    assert abs(ig - brute_force_info_gain(values, labels)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["a", "b", "c"]),
                          st.lists(st.sampled_from(["red", "blue", "green", "gold", "gray", "pink"]),
                                   max_size=8)), min_size=1, max_size=12),
       st.randoms(use_true_random=False))
def test_codebook_permutation_invariant(rows, rnd):
    emails = [email(" ".join(ws), author=a, id=str(i)) for i, (a, ws) in enumerate(rows)]
    authors = tuple(sorted({a for a, _ in rows}))
    shuffled = emails[:]
    rnd.shuffle(shuffled)
    a = build_codebook(Corpus(tuple(emails), authors), top_k=3, min_corpus_freq=1)
    b = build_codebook(Corpus(tuple(shuffled), authors), top_k=3, min_corpus_freq=1)
    assert a == b


# -- ccm ------------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 60), st.integers(1, 5), st.integers(1, 8))
def test_kmeans_sse_non_increasing(seed, n, dim, k):
    assume(k <= n)
    X = np.random.default_rng(seed).normal(size=(n, dim)) * np.random.default_rng(seed + 1).uniform(0.1, 10, dim)
    res = kmeans(X, k, seed=seed)
    hist = res.sse_history
    for a, b in zip(hist, hist[1:]):
        assert b <= a * (1 + 1e-12) + 1e-12
    assert sorted(set(res.labels.tolist())) == list(range(k))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6), st.integers(0, 3))
def test_tree_terminates_within_depth_and_partitions(seed, n_authors, max_depth):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_authors * 12, 4))
    labels = np.repeat([f"a{i}" for i in range(n_authors)], 12)
    roots = fit_tree(Standardizer.fit(X).transform(X), labels, CcmParams(seed=seed, max_depth=max_depth))
    leaves = [l for r in roots for l in r.leaves()]
    assert all(l.depth <= max_depth for l in leaves)
    assert sorted(m for l in leaves for m in l.members) == list(range(len(X)))
    assert predict_standardized(roots, np.zeros(4))[0] in set(labels)


# -- evaluation -----------------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 15), min_size=1, max_size=8), st.integers(2, 10), st.integers(0, 2**31))
def test_fold_properties(sizes, folds, seed):
    labels = [f"a{i}" for i, s in enumerate(sizes) for _ in range(s)]
    assume(folds <= len(labels))
    assignment = stratified_folds(labels, folds, seed)
    assert assignment.shape == (len(labels),)
    assert set(assignment.tolist()) <= set(range(folds))
    for a in set(labels):
        per_fold = np.bincount(assignment[[i for i, l in enumerate(labels) if l == a]], minlength=folds)
        assert per_fold.max() - per_fold.min() <= 1


@SETTINGS
@given(st.lists(st.tuples(st.sampled_from("abcd"), st.sampled_from("abcd"), st.sampled_from(["L1", "L2", "L3"])),
                min_size=1, max_size=40))
def test_cluster_weighted_equals_pooled(rows):
    truth = [t for t, _, _ in rows]
    predicted = [p for _, p, _ in rows]
    groups = {}
    for t, p, leaf in rows:
        groups.setdefault(leaf, []).append(t == p)
    cluster_rows = [(len(v), sum(v) / len(v)) for v in groups.values()]
    assert abs(ccm_accuracy(cluster_rows, len(rows)) - pooled_accuracy(truth, predicted)) <= 1e-9


@SETTINGS
@given(st.lists(st.tuples(st.sampled_from("abcd"), st.sampled_from("abcd")), min_size=1, max_size=30),
       st.permutations("abcd"))
def test_accuracy_invariant_under_relabeling(pairs, perm):
    mapping = dict(zip("abcd", perm))
    truth, pred = zip(*pairs)
    assert pooled_accuracy(truth, pred) == pooled_accuracy([mapping[t] for t in truth], [mapping[p] for p in pred])


@SETTINGS
@given(st.lists(st.floats(0, 5, allow_nan=False), min_size=1, max_size=15),
       st.lists(st.floats(0, 5, allow_nan=False), min_size=1, max_size=15))
def test_h_non_negative(a, b):
    assert kruskal_wallis_h(a, b) >= 0.0
    assert kruskal_wallis_h(a, a) <= 1e-9

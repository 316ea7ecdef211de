import numpy as np
import pytest

from emailauthor.content import Codebook, CodebookTerm, build_codebook
from emailauthor.corpus import Corpus
from emailauthor.stylometry import (LAST_PUNCT, FeatureSchema, SchemaError, StyleConfig, assemble_vector,
                                    build_schema, default_function_words, extract_extended, extract_stylometric,
                                    feature_matrix, last_punctuation)

from helpers import email

CFG = StyleConfig()


def test_function_word_list_is_versioned_and_sized():
    words = default_function_words()
    assert 140 <= len(words) <= 160
    assert len(set(words)) == len(words)
    assert {"the", "of", "and", "to"} <= set(words)


def test_short_word_ratio():
    assert extract_stylometric(email("Hi Bob. See you at 2."), CFG)["short_word_ratio"] == 1.0


def test_digit_density():
    body = "ab12cdefghijklmnopqr"
    assert len(body) == 20
    assert extract_stylometric(email(body), CFG)["digit_ratio"] == pytest.approx(0.1, abs=1e-12)


def test_empty_body_all_zero():
    values = extract_stylometric(email(""), CFG)
    assert all(v == 0 for v in values.values())


def test_counts_and_averages():
    v = extract_stylometric(email("Hello there friend.\n\nSecond para here. Ok"), CFG)
    assert v["word_count"] == 7
    assert v["paragraph_count"] == 2
    assert v["avg_sentence_length"] == pytest.approx(7 / 3)
    assert v["sentences_per_paragraph"] == pytest.approx(3 / 2)
    assert v["avg_word_length"] == pytest.approx(sum(map(len, "Hello there friend Second para here Ok".split())) / 7)


def test_greeting_flags_only_in_first_two_lines():
    v = extract_stylometric(email("Hello Bob,\nhow are you"), CFG)
    assert v["greeting_hello"] == 1.0 and v["greeting_hi"] == 0.0
    v = extract_stylometric(email("a\nb\nhi there"), CFG)
    assert v["greeting_hi"] == 0.0


def test_function_word_frequency():
    v = extract_stylometric(email("the cat and the dog"), CFG)
    assert v["fw_the"] == pytest.approx(2 / 5)
    assert v["fw_and"] == pytest.approx(1 / 5)


def test_indentation_counts():
    v = extract_stylometric(email("  indented para\n\n\ttabbed para\n\nplain"), CFG)
    assert v["indent_space_paragraphs"] == 1 and v["indent_tab_paragraphs"] == 1


# -- ending punctuation --------------------------------------------------------

@pytest.mark.parametrize("body, hot", [
    ("see you at the meeting.", "full_stop"),
    ("is that ok?", "q_mark"),
    ("well,", "comma"),
    ("great!", "exclam"),
    ("one more;", "semicolon"),
    ("thanks", None),
    ("", None),
    ("ends with colon:", None),
    ("trailing space.  \n\n", "full_stop"),
])
def test_last_punctuation(body, hot):
    out = last_punctuation(body)
    assert list(out) == list(LAST_PUNCT.values())
    assert out == {name: int(name == hot) for name in LAST_PUNCT.values()}


# -- extended features -----------------------------------------------------------

def test_repeated_words():
    v = extract_extended(email("yes, yes, yes"), CFG)
    assert v["repeated_word_flag"] == 1.0 and v["repeated_word_runs"] == 1.0
    assert extract_extended(email("me and you"), CFG)["repeated_word_flag"] == 0.0


def test_time_formats():
    v = extract_extended(email("Meet at 2:00"), CFG)
    assert v["time_digital"] == 1.0 and v["time_spelled"] == 0.0
    v = extract_extended(email("Meet at 2 o'clock"), CFG)
    assert v["time_digital"] == 0.0 and v["time_spelled"] == 1.0


def test_single_questioning_email():
    v = extract_extended(email("Where are you?"), CFG)
    assert v["single_sentence"] == 1.0 and v["questioning"] == 1.0
    v = extract_extended(email("Where are you? Call me."), CFG)
    assert v["single_sentence"] == 0.0 and v["questioning"] == 0.0


def test_farewell_and_adjacent_punctuation():
    v = extract_extended(email("Please send it.\n\nThanks,\nJoe"), CFG)
    assert v["farewell_thanks"] == 1.0
    assert v["punct_after_farewell_comma"] == 1.0
    assert v["punct_before_farewell"] == 1.0  # the full stop closing the previous sentence


def test_farewell_must_be_near_the_end():
    body = "Thanks for this.\n" + "\n".join(f"line {i}" for i in range(6))
    assert extract_extended(email(body), CFG)["farewell_thanks"] == 0.0


def test_greeting_punctuation_and_mobile_marker():
    v = extract_extended(email("Hi Bob!\nok\n\nSent from my iPhone"), CFG)
    assert v["greeting_punct_exclam"] == 1.0 and v["greeting_punct_comma"] == 0.0
    assert v["mobile_marker"] == 1.0


def test_top_punctuation_one_hot():
    v = extract_extended(email("a, b, c. d?"), CFG)
    assert v["top_punct_comma"] == 1.0
    assert sum(v[f"top_punct_{n}"] for n in LAST_PUNCT.values()) == 1.0


def test_capitalization_ratio():
    v = extract_extended(email("Good. bad. Fine."), CFG)
    assert v["sentence_initial_cap_ratio"] == pytest.approx(2 / 3)
    assert v["first_char_upper"] == 1.0


def test_extended_names_match_values():
    assert list(extract_extended(email("x"), CFG)) == list(CFG.extended_names)
    assert list(extract_stylometric(email("x"), CFG)) == [n for n, _ in CFG.stylometric_names]


# -- schema and assembly -------------------------------------------------------------

def _codebook(terms):
    return Codebook(tuple(CodebookTerm(t, 1, 0.5) for t in terms), n_documents=4, top_k=len(terms),
                    min_corpus_freq=1, version="v1")


def test_schema_layout_and_width():
    cb = _codebook(["apple", "pear"])
    schema = build_schema(CFG, cb)
    groups = [g for _, g in schema.entries]
    assert groups == sorted(groups, key=["lexical", "structural", "syntactic", "extended", "content"].index)
    assert schema.names[-2:] == ["term_apple", "term_pear"]
    assert schema.codebook_version == "v1"
    assert FeatureSchema.from_dict(schema.to_dict()) == schema


def test_vector_length_five_plus_thousand():
    terms = [f"t{i:04d}" for i in range(1000)]
    entries = tuple((n, g) for n, g in CFG.stylometric_names[:5])
    schema = FeatureSchema(entries + tuple((f"term_{t}", "content") for t in terms), "v1")
    vec = assemble_vector(email("nothing matches here"), schema, _codebook(terms), CFG)
    assert len(vec.values) == 1005
    assert not vec.values[5:].any()
    assert vec.values[:5].any()


def test_identical_bodies_identical_vectors():
    cb = _codebook(["hello"])
    schema = build_schema(CFG, cb)
    a = assemble_vector(email("hello hello world", id="a"), schema, cb, CFG).values
    b = assemble_vector(email("hello hello world", id="b"), schema, cb, CFG).values
    assert np.array_equal(a, b)


def test_content_slots_hold_tfidf():
    cb = _codebook(["hello"])  # |E| = 4, df = 1 -> idf = 1
    schema = build_schema(CFG, cb)
    vec = assemble_vector(email("hello hello world again"), schema, cb, CFG).values
    assert vec[-1] == pytest.approx(0.5)


def test_codebook_version_mismatch_rejected():
    schema = build_schema(CFG, _codebook(["a"]))
    other = Codebook((CodebookTerm("a", 1, 0.1),), 4, 1, 1, "v2")
    with pytest.raises(SchemaError):
        feature_matrix([email("a")], schema, other, CFG)


def test_duplicate_names_rejected():
    with pytest.raises(SchemaError):
        FeatureSchema((("x", "lexical"), ("x", "lexical")))


def test_custom_function_words_config(tmp_path):
    from emailauthor.stylometry import read_lexicon
    p = tmp_path / "fw.txt"
    p.write_text("# my list\nfoo\n\nBar\n")
    cfg = StyleConfig(function_words=read_lexicon(p))
    assert cfg.function_words == ("foo", "bar")
    assert extract_stylometric(email("foo bar baz"), cfg)["fw_bar"] == pytest.approx(1 / 3)
    assert StyleConfig.from_dict(cfg.to_dict()) == cfg

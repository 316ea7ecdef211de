import json

import pytest

from emailauthor.corpus import (CorpusError, RawEmail, ReferenceType, build_corpus, canonical_form, clean_email,
                                content_terms, load_corpus, tokenize, write_jsonl)


def raw(body, author="Alice Smith", ref=ReferenceType.NONE, id="1"):
    return RawEmail(id=id, author=author, body=body, reference_type=ref)


# -- tokenizer ----------------------------------------------------------------

@pytest.mark.parametrize("body, tokens", [
    ("Hello, world!", ["Hello", ",", "world", "!"]),
    ("", []),
    ("2:00 pm", ["2", ":", "00", "pm"]),
    ("don't stop", ["don't", "stop"]),
    ("a_b", ["a", "_", "b"]),
    ("  spaced\tout\n", ["spaced", "out"]),
])
def test_tokenize(body, tokens):
    assert tokenize(body) == tokens


def test_tokens_keep_case():
    assert tokenize("Hi BOB") == ["Hi", "BOB"]


def test_content_terms_are_lowercase_alphabetic():
    assert content_terms(tokenize("Meet Bob at 2:00, ok? x2 'quoted'")) == ["meet", "bob", "at", "ok", "quoted"]


def test_canonical_form():
    assert canonical_form("Hello,   world!\n\nBye") == "Hello , world ! Bye"


# -- cleaning -----------------------------------------------------------------

def test_fwd_fyi_is_deleted():
    body = "FYI\n\n---------- Forwarded message ----------\nFrom: Bob\nthe payload"
    assert clean_email(raw(body, ref=ReferenceType.FWD)) is None


@pytest.mark.parametrize("prefix", ["", "  fyi  ", "Fyi", "\n\n"])
def test_fwd_empty_or_fyi_prefix_deleted(prefix):
    body = prefix + "\n-----Original Message-----\nold text"
    assert clean_email(raw(body, ref=ReferenceType.FWD)) is None


def test_fwd_with_comment_is_kept_without_payload():
    body = "Please look at this.\n\n---------- Forwarded message ----------\nsecret payload"
    out = clean_email(raw(body, ref=ReferenceType.FWD))
    assert out.body == "Please look at this."


def test_re_quoted_block_removed():
    out = clean_email(raw("Thanks!\n> On Mon, Bob wrote:\n> original text", ref=ReferenceType.RE))
    assert out.body == "Thanks!"


def test_original_message_marker_cuts_rest():
    body = "Sounds good.\n\n-----Original Message-----\nFrom: Bob\nSent: Monday\nold"
    assert clean_email(raw(body, ref=ReferenceType.RE)).body == "Sounds good."


def test_on_wrote_marker_cuts_rest():
    body = "Agreed.\n\nOn Tue, Jan 2, 2001 at 10:00, Bob Jones wrote:\nold text"
    assert clean_email(raw(body, ref=ReferenceType.RE)).body == "Agreed."


def test_signature_after_delimiter_removed():
    assert clean_email(raw("See you.\n--\nAlice Smith")).body == "See you."


def test_signature_with_sender_name_removed():
    out = clean_email(raw("Numbers attached.\n\nAlice Smith\nVP Trading\n713-555-0100"))
    assert out.body == "Numbers attached."


def test_name_outside_last_four_lines_is_kept():
    body = "Alice Smith said hi.\nline two\nline three\nline four\nline five"
    assert clean_email(raw(body)).body == body


def test_empty_body_is_retained():
    out = clean_email(raw(""))
    assert out is not None and out.body == "" and out.tokens == () and out.word_count == 0


def test_clean_is_idempotent_on_examples():
    for body in ["Hi\n\n> quoted\n\nok\n--\nme", "Text\nAlice Smith", "a\n\n\nb\n"]:
        once = clean_email(raw(body))
        assert clean_email(once.as_raw()) == once


def test_tokens_match_body():
    out = clean_email(raw("Hello, Bob!  How's it going?"))
    assert list(out.tokens) == tokenize(out.body)
    assert out.word_count == 5


def test_reference_type_parse():
    assert ReferenceType.parse(None) is ReferenceType.NONE
    assert ReferenceType.parse("Fwd:") is ReferenceType.FWD
    assert ReferenceType.parse("RE") is ReferenceType.RE
    with pytest.raises(CorpusError):
        ReferenceType.parse("sideways")


# -- loading ------------------------------------------------------------------

def _write_lines(path, lines):
    path.write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def test_load_jsonl_keeps_order(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"author": a, "body": b}) for a, b in [("x", "1"), ("y", "2"), ("x", "3")]])
    raws = load_corpus(p)
    assert [r.body for r in raws] == ["1", "2", "3"]
    assert [r.id for r in raws] == ["1", "2", "3"]
    assert all(r.reference_type is ReferenceType.NONE for r in raws)


def test_load_empty_file(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text("")
    assert load_corpus(p) == []


def test_missing_author_names_line(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"author": "a", "body": "x"}), json.dumps({"body": "y"})])
    with pytest.raises(CorpusError, match="line 2"):
        load_corpus(p)


def test_bad_json_names_line(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"author": "a", "body": "x"}), "{oops"])
    with pytest.raises(CorpusError, match="line 2"):
        load_corpus(p)


def test_duplicate_ids_rejected(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"id": "a", "author": "a", "body": "x"})] * 2)
    with pytest.raises(CorpusError, match="duplicate"):
        load_corpus(p)


def test_missing_path():
    with pytest.raises(FileNotFoundError):
        load_corpus("/nonexistent/corpus.jsonl")


def test_author_dirs_layout(tmp_path):
    for author, files in {"bob": ["10", "2"], "amy": ["1"]}.items():
        (tmp_path / author).mkdir()
        for f in files:
            (tmp_path / author / f"{f}.txt").write_text(f"body {f}", encoding="utf-8")
    raws = load_corpus(tmp_path, "author-dirs")
    assert [r.id for r in raws] == ["amy/1", "bob/2", "bob/10"]
    assert {r.author for r in raws} == {"amy", "bob"}


def test_unlabelled_input_allowed_for_prediction(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"body": "who wrote this"})])
    assert load_corpus(p, require_author=False)[0].author == ""


def test_write_jsonl_round_trip(tmp_path):
    raws = [RawEmail("a", "x", "hello", "subj", ReferenceType.RE), RawEmail("b", "y", "bye")]
    write_jsonl(raws, tmp_path / "o.jsonl")
    assert load_corpus(tmp_path / "o.jsonl") == raws


def test_build_corpus_drops_deleted_and_sorts_authors():
    corpus = build_corpus([raw("hi", author="zed", id="1"), raw("FYI", author="amy", ref=ReferenceType.FWD, id="2"),
                           raw("yo", author="bob", id="3")])
    assert corpus.authors == ("bob", "zed")
    assert len(corpus) == 2

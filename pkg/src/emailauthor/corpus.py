"""Loading, cleaning and tokenizing raw email records."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""


class ReferenceType(str, enum.Enum):
    NONE = "None"
    RE = "Re"
    FWD = "Fwd"

    @classmethod
    def parse(cls, value) -> "ReferenceType":
        if value is None:
            return cls.NONE
        text = str(value).strip().rstrip(":").lower()
        if text in ("", "none", "null"):
            return cls.NONE
        if text in ("re", "reply"):
            return cls.RE
        if text in ("fwd", "fw", "forward"):
            return cls.FWD
        raise CorpusError(f"unknown reference_type {value!r}")


@dataclass(frozen=True)
class RawEmail:
    id: str
    author: str
    body: str
    subject: Optional[str] = None
    reference_type: ReferenceType = ReferenceType.NONE


@dataclass(frozen=True)
class CleanedEmail:
    id: str
    author: str
    body: str
    tokens: tuple[str, ...] = field(repr=False)

    @cached_property
    def words(self) -> tuple[str, ...]:
        return tuple(t for t in self.tokens if is_word(t))

    @cached_property
    def terms(self) -> tuple[str, ...]:
        """Content-term view of the tokens."""
        return tuple(content_terms(self.words))

    @property
    def word_count(self) -> int:
        return len(self.words)

    def as_raw(self) -> RawEmail:
        return RawEmail(id=self.id, author=self.author, body=self.body)


@dataclass(frozen=True)
class Corpus:
    emails: tuple[CleanedEmail, ...]
    authors: tuple[str, ...]

    def __post_init__(self):
        known = set(self.authors)
        if len(known) != len(self.authors):
            raise CorpusError("author labels must be distinct")
        for email in self.emails:
            if email.author not in known:
                raise CorpusError(f"email {email.id!r} has unlisted author {email.author!r}")

    def __len__(self) -> int:
        return len(self.emails)

    @property
    def labels(self) -> list[str]:
        return [e.author for e in self.emails]

    def subset(self, indices: Iterable[int]) -> "Corpus":
        emails = tuple(self.emails[i] for i in indices)
        return Corpus(emails, tuple(sorted({e.author for e in emails})))


# -- tokenization -------------------------------------------------------------

_TOKEN_RE = re.compile(r"(?:[^\W_]|')+|[^\w\s]|_")
_CONTENT_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)*")


def is_word(token: str) -> bool:
    return bool(token) and (token[0].isalnum() or token[0] == "'" and len(token) > 1)


def tokenize(body: str) -> list[str]:
    """Split on whitespace; letters, digits and apostrophes form word tokens,
    every other visible character is its own punctuation token.

    >>> tokenize("Hello, world!")
    ['Hello', ',', 'world', '!']
    """
    return _TOKEN_RE.findall(body)


def content_terms(tokens: Iterable[str]) -> list[str]:
    """Lowercased purely alphabetic word tokens (the content-term view)."""
    out = []
    for tok in tokens:
        if is_word(tok):
            stripped = tok.strip("'")
            if stripped and _CONTENT_RE.fullmatch(stripped):
                out.append(stripped.lower())
    return out


def canonical_form(body: str) -> str:
    """Whitespace groups joined by single spaces, tokens inside a group by
    single spaces; what a token sequence round-trips to."""
    return " ".join(" ".join(tokenize(group)) for group in body.split() if tokenize(group))


# -- cleaning -----------------------------------------------------------------

_QUOTE_HEADER = [
    re.compile(r"^-{2,}\s*Original Message\s*-{2,}$", re.IGNORECASE),
    re.compile(r"^On\b.*\bwrote:$"),
]
_FORWARD_HEADER = [
    re.compile(r"^-{2,}\s*Forwarded (message|by)\b.*", re.IGNORECASE),
    re.compile(r"^Begin forwarded message:?$", re.IGNORECASE),
]
_SIG_DELIMITERS = ("--", "\u2014")


def _first_marker(lines: list[str], patterns) -> Optional[int]:
    for i, line in enumerate(lines):
        stripped = line.strip()
        if any(p.match(stripped) for p in patterns):
            return i
    return None


def _trim_blank(lines: list[str]) -> list[str]:
    start, end = 0, len(lines)
    while start < end and not lines[start].strip():
        start += 1
    while end > start and not lines[end - 1].strip():
        end -= 1
    return [line.rstrip() for line in lines[start:end]]


def _strip_signature(lines: list[str], sender: str) -> list[str]:
    for i, line in enumerate(lines):
        if line.strip() in _SIG_DELIMITERS:
            return lines[:i]
    name = sender.strip().lower()
    if name:
        # shortest trailing block of at most 4 lines that mentions the sender
        for size in range(1, min(4, len(lines)) + 1):
            if name in " ".join(lines[-size:]).lower():
                return lines[:-size]
    return lines


def clean_email(raw: RawEmail) -> Optional[CleanedEmail]:
    """Keep only the text the sender wrote.

    Returns None when a forwarded email carries no sender text of its own
    (empty or just "FYI"); such emails are dropped from the corpus.
    """
    lines = raw.body.replace("\r\n", "\n").replace("\r", "\n").split("\n")

    fwd_at = _first_marker(lines, _FORWARD_HEADER)
    quote_at = _first_marker(lines, _QUOTE_HEADER)
    if raw.reference_type is ReferenceType.FWD:
        cut = min(i for i in (fwd_at, quote_at, len(lines)) if i is not None)
        prefix = "\n".join(_trim_blank([ln for ln in lines[:cut] if not ln.lstrip().startswith(">")]))
        if prefix.strip().lower() in ("", "fyi"):
            return None
    cut = min(i for i in (fwd_at, quote_at, len(lines)) if i is not None)
    lines = lines[:cut]

    while True:
        before = lines
        lines = _trim_blank(lines)
        while lines and lines[-1].lstrip().startswith(">"):
            lines = _trim_blank(lines[:-1])
        lines = [ln for ln in lines if not ln.lstrip().startswith(">")]
        lines = _trim_blank(_strip_signature(lines, raw.author))
        if lines == before:
            break

    body = "\n".join(lines)
    return CleanedEmail(id=raw.id, author=raw.author, body=body, tokens=tuple(tokenize(body)))


def build_corpus(raws: Iterable[RawEmail]) -> Corpus:
    """Clean every record and assemble a corpus; authors are sorted labels."""
    emails = []
    for raw in raws:
        cleaned = clean_email(raw)
        if cleaned is not None:
            emails.append(cleaned)
    return Corpus(tuple(emails), tuple(sorted({e.author for e in emails})))


# -- loading ------------------------------------------------------------------

def _record_to_raw(record, where: str, default_id: str, require_author: bool = True) -> RawEmail:
    if not isinstance(record, dict):
        raise CorpusError(f"{where}: expected a JSON object")
    author = record.get("author")
    if not require_author and author is None:
        author = ""
    elif not isinstance(author, str) or not author.strip():
        raise CorpusError(f"{where}: missing or empty 'author' field")
    body = record.get("body")
    if not isinstance(body, str):
        raise CorpusError(f"{where}: missing 'body' field")
    subject = record.get("subject")
    try:
        ref = ReferenceType.parse(record.get("reference_type"))
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None
    email_id = record.get("id", default_id)
    return RawEmail(id=str(email_id), author=author, body=body, subject=subject, reference_type=ref)


def _natural_key(path: Path):
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", path.stem)]


def load_corpus(path, format: str = "jsonl", require_author: bool = True) -> list[RawEmail]:
    """Read raw emails from a JSON-lines file or an author-per-directory tree.

    Records keep file order.  JSON-lines records without an ``id`` get their
    1-based line number; directory records get ``<author>/<file stem>``.
    With ``require_author=False`` (emails to be attributed) a missing author
    becomes the empty string.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus path does not exist: {path}")
    raws: list[RawEmail] = []
    if format == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                where = f"{path}: line {lineno}"
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{where}: invalid JSON ({exc.msg})") from None
                raws.append(_record_to_raw(record, where, str(lineno), require_author))
    elif format == "author-dirs":
        if not path.is_dir():
            raise CorpusError(f"{path}: author-dirs layout needs a directory")
        for author_dir in sorted(p for p in path.iterdir() if p.is_dir()):
            for f in sorted(author_dir.glob("*.txt"), key=_natural_key):
                try:
                    body = f.read_text(encoding="utf-8")
                except UnicodeDecodeError as exc:
                    raise CorpusError(f"{f}: not valid UTF-8 ({exc.reason})") from None
                raws.append(RawEmail(id=f"{author_dir.name}/{f.stem}", author=author_dir.name, body=body))
    else:
        raise CorpusError(f"unknown corpus format {format!r}")

    seen = set()
    for raw in raws:
        if raw.id in seen:
            raise CorpusError(f"duplicate email id {raw.id!r}")
        seen.add(raw.id)
    return raws


def write_jsonl(emails: Iterable, path) -> None:
    """Write RawEmail or CleanedEmail records as JSON lines."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for e in emails:
            record = {"id": e.id, "author": e.author, "body": e.body}
            if isinstance(e, RawEmail):
                if e.subject is not None:
                    record["subject"] = e.subject
                record["reference_type"] = e.reference_type.value
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

#!/usr/bin/env python3
"""Convert the sent-mail folders of an Enron maildir tree into corpus JSONL.

Usage:

    python3 scripts/ingest_enron.py --maildir enron/maildir --authors 10 \
        --output enron10.jsonl
    emailauthor evaluate --corpus enron10.jsonl --experiments 5

The tree is the public May 2015 release (one directory per mailbox, each
holding folders such as ``sent``, ``sent_items`` and ``_sent_mail``).  Every
message in those folders is written by the mailbox owner.  The author label is
the owner's most frequent ``X-From`` display name, so signature lines carrying
that name are recognised by the cleaner.  Identical bodies within one mailbox
(the same message filed in two sent folders) are kept once.  Mailboxes are
ranked by the number of distinct messages and the first ``--authors`` with at
least ``--min-emails`` are kept; ``--max-per-author`` samples each mailbox down
with the given seed.
"""

from __future__ import annotations

import argparse
import email
import email.policy
import json
import re
import sys
from collections import Counter
from pathlib import Path

import numpy as np

SENT_FOLDERS = ("sent", "sent_items", "_sent_mail", "sent_mail")
_PREFIX = re.compile(r"^\s*(re|fw|fwd)\s*:", re.IGNORECASE)


def reference_type(subject: str) -> str:
    match = _PREFIX.match(subject or "")
    if not match:
        return "None"
    return "Re" if match.group(1).lower() == "re" else "Fwd"


def display_name(header: str) -> str:
    name = re.sub(r"<[^>]*>", "", header or "").strip().strip('"').strip()
    return re.sub(r"\s+", " ", name)


def read_mailbox(box: Path) -> tuple[str, list[dict]]:
    records, names, seen = [], Counter(), set()
    for folder in SENT_FOLDERS:
        root = box / folder
        if not root.is_dir():
            continue
        for path in sorted(p for p in root.rglob("*") if p.is_file()):
            msg = email.message_from_bytes(path.read_bytes(), policy=email.policy.compat32)
            payload = msg.get_payload(decode=True)
            if payload is None:
                continue
            body = payload.decode("latin-1").replace("\r\n", "\n")
            if body in seen:
                continue
            seen.add(body)
            subject = msg.get("Subject", "")
            name = display_name(msg.get("X-From", ""))
            if name:
                names[name] += 1
            records.append({"id": f"{box.name}/{path.relative_to(box).as_posix()}", "subject": subject,
                            "reference_type": reference_type(subject), "body": body})
    author = names.most_common(1)[0][0] if names else box.name
    for r in records:
        r["author"] = author
    return author, records


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--maildir", required=True, type=Path, help="root of the maildir tree")
    parser.add_argument("--output", required=True, type=Path, help="JSONL file to write")
    parser.add_argument("--authors", type=int, default=10, help="number of mailboxes to keep (default 10)")
    parser.add_argument("--min-emails", type=int, default=50, help="skip mailboxes with fewer messages")
    parser.add_argument("--max-per-author", type=int, default=None, help="sample each mailbox down to this size")
    parser.add_argument("--seed", type=int, default=42, help="sampling seed (default 42)")
    args = parser.parse_args(argv)

    if not args.maildir.is_dir():
        parser.error(f"{args.maildir} is not a directory")
    boxes = []
    for box in sorted(p for p in args.maildir.iterdir() if p.is_dir()):
        author, records = read_mailbox(box)
        if len(records) >= args.min_emails:
            boxes.append((author, records))
    boxes.sort(key=lambda b: (-len(b[1]), b[0]))
    chosen = boxes[:args.authors]
    if len(chosen) < args.authors:
        print(f"only {len(chosen)} mailboxes have {args.min_emails}+ sent messages", file=sys.stderr)

    rng = np.random.default_rng(args.seed)
    with open(args.output, "w", encoding="utf-8") as out:
        for author, records in chosen:
            if args.max_per_author and len(records) > args.max_per_author:
                keep = np.sort(rng.choice(len(records), args.max_per_author, replace=False))
                records = [records[i] for i in keep]
            for r in records:
                out.write(json.dumps(r, ensure_ascii=False) + "\n")
            print(f"{author}\t{len(records)}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Attribute-relation (ARFF) text export of a feature matrix.

Layout written here:

    @RELATION <name>
    <blank line>
    @ATTRIBUTE <feature name> NUMERIC        one line per schema entry
    @ATTRIBUTE author {<label>,<label>,...}  nominal class, last column
    <blank line>
    @DATA
    <v1>,<v2>,...,<author>                   one line per email

Names and labels are single-quoted whenever they contain anything besides
letters, digits, ``_``, ``-`` and ``.``; backslashes and quotes inside them are
backslash-escaped.  Values are written with Python's shortest round-trip
float repr, so reading a file back gives the identical doubles.
"""

from __future__ import annotations

import math
import re
from typing import Sequence

import numpy as np

_BARE = re.compile(r"[A-Za-z0-9_.\-]+")


def quote(token: str) -> str:
    if _BARE.fullmatch(token) and not token.startswith(("{", "%", "@")):
        return token
    return "'" + token.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _value(x: float) -> str:
    if not math.isfinite(x):
        return "?"
    return repr(float(x))


def to_arff(X: np.ndarray, names: Sequence[str], labels: Sequence[str], relation: str = "emails",
            classes: Sequence[str] | None = None) -> str:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(names):
        raise ValueError(f"matrix shape {X.shape} does not match {len(names)} attribute names")
    if len(labels) != X.shape[0]:
        raise ValueError(f"{len(labels)} labels for {X.shape[0]} rows")
    classes = list(classes) if classes is not None else sorted(set(labels))
    lines = [f"@RELATION {quote(relation)}", ""]
    lines += [f"@ATTRIBUTE {quote(n)} NUMERIC" for n in names]
    lines.append("@ATTRIBUTE author {" + ",".join(quote(c) for c in classes) + "}")
    lines += ["", "@DATA"]
    for row, label in zip(X, labels):
        lines.append(",".join([_value(v) for v in row] + [quote(label)]))
    return "\n".join(lines) + "\n"

"""JSON and CSV input/output with deterministic formatting."""
from __future__ import annotations

import csv
import io as _io
import json
import sys
from pathlib import Path
from typing import Iterable

from .algebra import Field
from .boundary import GroupElem
from .dynamics import GeneratorSet
from .errors import FieldMismatchError
from .heisenberg import NPoint
from .similarity import Similarity


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("input document must be a JSON object")
    return doc


def _tidy(obj):
    # -0.0 prints as "-0.0"; fold it into 0.0 so outputs compare cleanly
    if isinstance(obj, float):
        return obj + 0.0
    if isinstance(obj, dict):
        return {k: _tidy(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tidy(v) for v in obj]
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_tidy(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def dumps_csv(header: list[str], rows: Iterable[list[str]]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    """Write to ``out`` (exact bytes, '\\n' endings) or to stdout."""
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _field_and_rank(doc: dict, field: Field | None, n: int | None) -> tuple[Field, int]:
    f = Field.parse(doc["field"]) if "field" in doc else field
    r = int(doc["n"]) if "n" in doc else n
    if f is None or r is None:
        raise ValueError("document needs field and n")
    if r < 2:
        raise FieldMismatchError("n must be at least 2")
    if f is Field.OCTONION and r != 2:
        raise FieldMismatchError("octonionic groups have n = 2")
    return f, r


def parse_generator_set(doc: dict, field: Field | None = None, n: int | None = None) -> GeneratorSet:
    f, r = _field_and_rank(doc, field, n)
    return GeneratorSet.from_json({**doc, "field": f.symbol, "n": r})


def parse_similarity(doc: dict, field: Field | None = None, n: int | None = None, key: str = "similarity") -> Similarity:
    f, r = _field_and_rank(doc, field, n)
    body = doc.get(key, doc)
    return Similarity.from_json(body, f, r)


def parse_group_elem(doc: dict) -> GroupElem:
    return GroupElem.from_json(doc)


def parse_point(doc: dict, field: Field | None = None, n: int | None = None, key: str = "beta") -> NPoint:
    f, r = _field_and_rank(doc, field, n)
    return NPoint.from_json(doc[key], f, r)

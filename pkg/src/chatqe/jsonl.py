"""Newline-delimited JSON helpers.

All corpus files are UTF-8 JSONL, one record per line, with stable field
ordering so that write-then-read is an identity and diffs stay small.
"""

import json
from pathlib import Path

from .errors import ParseError


def read_records(path):
    """Yield (line_no, dict) for each non-blank line; malformed lines raise ParseError."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise ParseError(path, line_no, "expected a JSON object")
            yield line_no, record


def write_records(path, records):
    """Write dicts one per line; key order is whatever the caller built."""
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")

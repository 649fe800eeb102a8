"""CSV emission and parsing.

Emitted files carry one #-prefixed comment line with the configuration hash
and master seed, then a header row, then records; floats are written with 17
significant digits so a parse/emit round trip is exact.
"""
from __future__ import annotations

import io
from pathlib import Path

from .errors import ConfigError


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, int):
        return str(v)
    text = str(v)
    if any(c in text for c in ",\"\n"):
        text = '"' + text.replace('"', '""') + '"'
    return text


def emit_csv(records: list, path, comment: str = "") -> None:
    """Write homogeneous records (same keys, same order) to ``path``."""
    records = list(records)
    if records:
        keys = list(records[0].keys())
        for i, rec in enumerate(records):
            if list(rec.keys()) != keys:
                raise ValueError(f"record {i} keys {list(rec.keys())} differ from {keys}")
    else:
        keys = []
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    buf.write(",".join(keys) + "\n")
    for rec in records:
        buf.write(",".join(_format_value(rec[k]) for k in keys) + "\n")
    out = Path(path)
    try:
        out.write_text(buf.getvalue())
    except OSError as exc:
        raise ConfigError(f"cannot write {path!r}: {exc}")


def _parse_value(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _split_line(line: str) -> list:
    out = []
    cur = []
    quoted = False
    i = 0
    while i < len(line):
        c = line[i]
        if quoted:
            if c == '"':
                if i + 1 < len(line) and line[i + 1] == '"':
                    cur.append('"')
                    i += 1
                else:
                    quoted = False
            else:
                cur.append(c)
        elif c == '"':
            quoted = True
        elif c == ",":
            out.append("".join(cur))
            cur = []
        else:
            cur.append(c)
        i += 1
    out.append("".join(cur))
    return out


def parse_csv(path) -> tuple[list, str]:
    """(records, comment) from a file produced by :func:`emit_csv`."""
    lines = Path(path).read_text().splitlines()
    comment = ""
    idx = 0
    if lines and lines[0].startswith("#"):
        comment = lines[0][1:].strip()
        idx = 1
    if idx >= len(lines):
        return [], comment
    header = _split_line(lines[idx])
    records = []
    for line in lines[idx + 1 :]:
        if not line:
            continue
        values = [_parse_value(v) for v in _split_line(line)]
        records.append(dict(zip(header, values)))
    return records, comment

"""PCM files (alist and dense 0/1 text) and the JSON documents used by the command line."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .gf2 import BitMatrix

__all__ = [
    "PcmFormatError",
    "read_pcm",
    "write_pcm",
    "read_alist",
    "write_alist",
    "read_dense",
    "write_dense",
    "parse_alist",
    "format_alist",
    "parse_dense",
    "format_dense",
    "bits_to_string",
    "string_to_bits",
    "load_json",
    "dump_json",
]


class PcmFormatError(ValueError):
    """Malformed PCM or JSON document."""


def format_dense(h: BitMatrix) -> str:
    return "".join(line + "\n" for line in h.to_strings())


def parse_dense(text: str) -> BitMatrix:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise PcmFormatError("dense PCM is empty")
    width = len(lines[0])
    for i, ln in enumerate(lines):
        if len(ln) != width or set(ln) - {"0", "1"}:
            raise PcmFormatError(f"dense PCM line {i + 1} is not a 0/1 string of length {width}")
    return BitMatrix.from_strings(lines)


def format_alist(h: BitMatrix) -> str:
    d = h.to_dense()
    m, n = d.shape
    cols = [np.flatnonzero(d[:, i]) + 1 for i in range(n)]
    rows = [np.flatnonzero(d[j]) + 1 for j in range(m)]
    max_c = max((c.size for c in cols), default=0)
    max_r = max((r.size for r in rows), default=0)

    def padded(idx, width):
        vals = list(idx) + [0] * (width - len(idx))
        return " ".join(str(int(v)) for v in vals)

    out = [f"{n} {m}", f"{max_c} {max_r}", " ".join(str(c.size) for c in cols), " ".join(str(r.size) for r in rows)]
    # at least one token per line, so empty lists survive as a lone 0
    out += [padded(c, max(max_c, 1)) for c in cols]
    out += [padded(r, max(max_r, 1)) for r in rows]
    return "\n".join(out) + "\n"


def _ints(line: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError as exc:
        raise PcmFormatError(f"non-integer token in alist {what}") from exc


def parse_alist(text: str) -> BitMatrix:
    """Parse alist text; zero padding in the index lists is ignored."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 4:
        raise PcmFormatError("alist needs at least four header lines")
    head = _ints(lines[0], "header")
    if len(head) != 2 or min(head) < 0:
        raise PcmFormatError("alist first line must be 'n m'")
    n, m = head
    col_deg = _ints(lines[2], "column degrees")
    row_deg = _ints(lines[3], "row degrees")
    if len(col_deg) != n or len(row_deg) != m:
        raise PcmFormatError("alist degree lists do not match n and m")
    body = lines[4:]
    if len(body) < n + m:
        raise PcmFormatError("alist is missing index lines")
    dense = np.zeros((m, n), dtype=np.uint8)
    for i in range(n):
        idx = [v for v in _ints(body[i], "column list") if v]
        if len(idx) != col_deg[i] or any(not 1 <= v <= m for v in idx):
            raise PcmFormatError(f"alist column {i + 1} list is inconsistent")
        dense[np.array(idx, dtype=int) - 1, i] = 1
    for j in range(m):
        idx = [v for v in _ints(body[n + j], "row list") if v]
        if len(idx) != row_deg[j] or any(not 1 <= v <= n for v in idx):
            raise PcmFormatError(f"alist row {j + 1} list is inconsistent")
        row = np.zeros(n, dtype=np.uint8)
        row[np.array(idx, dtype=int) - 1] = 1
        if not np.array_equal(row, dense[j]):
            raise PcmFormatError(f"alist row {j + 1} disagrees with the column lists")
    return BitMatrix.from_dense(dense)


def _looks_dense(text: str) -> bool:
    first = next((ln.strip() for ln in text.splitlines() if ln.strip()), "")
    return bool(first) and not set(first) - {"0", "1"}


def read_pcm(path) -> BitMatrix:
    """Read a PCM, telling alist from dense text by the first non-empty line."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PcmFormatError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_dense(text) if _looks_dense(text) else parse_alist(text)


def write_pcm(h: BitMatrix, path) -> None:
    """Write alist for a ``.alist`` suffix, dense text otherwise."""
    path = Path(path)
    path.write_text(format_alist(h) if path.suffix == ".alist" else format_dense(h))


def read_alist(path) -> BitMatrix:
    return parse_alist(Path(path).read_text())


def write_alist(h: BitMatrix, path) -> None:
    Path(path).write_text(format_alist(h))


def read_dense(path) -> BitMatrix:
    return parse_dense(Path(path).read_text())


def write_dense(h: BitMatrix, path) -> None:
    Path(path).write_text(format_dense(h))


def bits_to_string(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def string_to_bits(text: str, n: int | None = None) -> np.ndarray:
    if set(text) - {"0", "1"}:
        raise PcmFormatError(f"bit string {text!r} contains characters other than 0 and 1")
    if n is not None and len(text) != n:
        raise PcmFormatError(f"bit string has length {len(text)}, expected {n}")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def rows_from_strings(rows: Sequence[str], n: int) -> BitMatrix:
    if not rows:
        return BitMatrix(n, ())
    return BitMatrix.from_dense(np.stack([string_to_bits(r, n) for r in rows]))


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise PcmFormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise PcmFormatError(f"{path} is not valid JSON: {exc.msg}") from exc


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")

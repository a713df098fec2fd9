"""Dataset ingestion and dendrogram persistence.

Binary dataset layout (little-endian)::

    b"HACD"  u32 version=1  u64 n  u64 d  f64[n*d] row-major
    u8 has_labels  [u64[n] labels]

Dendrogram TSV: a ``#n=<n>`` header, then one ``left<TAB>right<TAB>cost<TAB>size``
line per merge, costs written with 17 significant digits.
"""

from __future__ import annotations

import csv
import io as _io
import os
import struct
from typing import Optional, Union

import numpy as np

from .dendrogram import Dendrogram
from .geometry import Dataset

__all__ = [
    "FormatError",
    "load_csv", "load_binary", "save_binary", "load_dataset", "load_labels",
    "dendrogram_to_tsv", "dendrogram_from_tsv", "save_dendrogram", "load_dendrogram",
]

MAGIC = b"HACD"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")

PathLike = Union[str, os.PathLike]


class FormatError(ValueError):
    """Malformed input file; the message names the row, line or byte offset."""


def _densify(tokens) -> np.ndarray:
    """Integer labels stay as they are; anything else maps to first-appearance ids."""
    try:
        ints = [int(tok) for tok in tokens]
        if all(v >= 0 for v in ints) and all(str(v) == tok.strip() for v, tok in zip(ints, tokens)):
            return np.asarray(ints, dtype=np.int64)
    except ValueError:
        pass
    ids: dict = {}
    return np.asarray([ids.setdefault(tok, len(ids)) for tok in tokens], dtype=np.int64)


def _parse_csv(text: str, has_header: bool, label_column) -> Dataset:
    rows = [r for r in csv.reader(_io.StringIO(text))]
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    header = None
    start = 0
    if has_header:
        if not rows:
            raise FormatError("row 0: missing header")
        header = [h.strip() for h in rows[0]]
        start = 1
    body = rows[start:]
    if not body:
        raise FormatError("no data rows")
    width = len(body[0])
    lab_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None or label_column not in header:
                raise FormatError(f"label column {label_column!r} not found in header")
            lab_idx = header.index(label_column)
        else:
            lab_idx = int(label_column)
            if lab_idx < 0:
                lab_idx += width
            if not 0 <= lab_idx < width:
                raise FormatError(f"label column {label_column} out of range for width {width}")
    feats, labels = [], []
    for i, row in enumerate(body, start=start):
        if len(row) != width:
            raise FormatError(f"row {i}: expected {width} fields, got {len(row)}")
        vals = []
        for j, cell in enumerate(row):
            if j == lab_idx:
                labels.append(cell.strip())
                continue
            try:
                v = float(cell)
            except ValueError:
                raise FormatError(f"row {i}: non-numeric value {cell!r} in column {j}") from None
            if not np.isfinite(v):
                raise FormatError(f"row {i}: non-finite value {cell!r} in column {j}")
            vals.append(v)
        feats.append(vals)
    points = np.asarray(feats, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] == 0:
        raise FormatError("no feature columns")
    return Dataset(points, _densify(labels) if lab_idx is not None else None)


def load_csv(path: PathLike, has_header: bool = False, label_column=None) -> Dataset:
    """Read a comma-separated file of features with an optional label column.

    ``label_column`` is a column index or, with ``has_header``, a column name.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    ds = _parse_csv(text, has_header, label_column)
    return Dataset(ds.points, ds.labels, name=os.path.basename(str(path)))


def save_binary(ds: Dataset, path: PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, ds.n, ds.d))
        fh.write(np.ascontiguousarray(ds.points, dtype="<f8").tobytes())
        if ds.labels is None:
            fh.write(b"\x00")
        else:
            fh.write(b"\x01")
            fh.write(np.ascontiguousarray(ds.labels, dtype="<u8").tobytes())


def load_binary(path: PathLike) -> Dataset:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _HEADER.size:
        raise FormatError(f"offset {len(buf)}: truncated header")
    magic, version, n, d = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"offset 0: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"offset 4: unsupported version {version}")
    off = _HEADER.size
    need = n * d * 8
    if len(buf) < off + need:
        raise FormatError(f"offset {len(buf)}: truncated point data "
                          f"(need {need} bytes from offset {off})")
    points = np.frombuffer(buf, dtype="<f8", count=n * d, offset=off).reshape(n, d)
    off += need
    if len(buf) < off + 1:
        raise FormatError(f"offset {off}: missing label flag")
    flag = buf[off]
    off += 1
    labels = None
    if flag == 1:
        if len(buf) < off + 8 * n:
            raise FormatError(f"offset {len(buf)}: truncated labels "
                              f"(need {8 * n} bytes from offset {off})")
        labels = np.frombuffer(buf, dtype="<u8", count=n, offset=off).astype(np.int64)
        off += 8 * n
    elif flag != 0:
        raise FormatError(f"offset {off - 1}: bad label flag {flag}")
    if off != len(buf):
        raise FormatError(f"offset {off}: {len(buf) - off} trailing bytes")
    try:
        return Dataset(points.astype(np.float64), labels, name=os.path.basename(str(path)))
    except ValueError as exc:
        raise FormatError(f"offset {_HEADER.size}: {exc}") from None


def load_dataset(path: PathLike, has_header: Optional[bool] = None, label_column=None) -> Dataset:
    """Load by extension: ``.csv``/``.txt`` as text, anything else as binary.

    With ``has_header=None`` a CSV header is assumed when the label column
    is given by name or when a feature cell of the first row is not numeric.
    """
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".csv", ".txt"):
        if has_header is None:
            has_header = _sniff_header(path, label_column)
        return load_csv(path, has_header, label_column)
    return load_binary(path)


def _sniff_header(path: PathLike, label_column=None) -> bool:
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        return True
    with open(path, encoding="utf-8") as fh:
        first = next(csv.reader(fh), [])
    skip = None
    if label_column is not None:
        skip = int(label_column) % max(len(first), 1)
    for j, cell in enumerate(first):
        if j == skip:
            continue
        try:
            float(cell)
        except ValueError:
            return True
    return False


def load_labels(path: PathLike, label_column=None, has_header: bool = False) -> np.ndarray:
    """Ground-truth labels from a binary dataset or a CSV.

    A single-column CSV is read as labels directly; a wider CSV needs
    ``label_column``. Naming the column by header implies ``has_header``.
    """
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in (".csv", ".txt"):
        ds = load_binary(path)
        if ds.labels is None:
            raise FormatError(f"{path}: dataset has no labels")
        return np.asarray(ds.labels)
    with open(path, encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    named = isinstance(label_column, str) and not label_column.lstrip("-").isdigit()
    has_header = has_header or named
    if not rows or (has_header and len(rows) < 2):
        raise FormatError(f"{path}: no label rows")
    header = [h.strip() for h in rows[0]] if has_header else None
    body = rows[1:] if has_header else rows
    if label_column is None:
        if len(rows[0]) != 1:
            raise FormatError(f"{path}: {len(rows[0])} columns; pass a label column")
        idx = 0
    elif named:
        if label_column not in header:
            raise FormatError(f"label column {label_column!r} not found in header")
        idx = header.index(label_column)
    else:
        idx = int(label_column)
    out = []
    for i, row in enumerate(body, start=1 if has_header else 0):
        try:
            out.append(row[idx].strip())
        except IndexError:
            raise FormatError(f"row {i}: no column {idx}") from None
    return _densify(out)


def dendrogram_to_tsv(dg: Dendrogram) -> str:
    """
    >>> from chamfer_hac.dendrogram import Dendrogram
    >>> dendrogram_to_tsv(Dendrogram(3, [(0, 1, 1.0, 2), (3, 2, 9.0, 3)]))
    '#n=3\\n0\\t1\\t1\\t2\\n3\\t2\\t9\\t3\\n'
    """
    parts = [f"#n={dg.n}\n"]
    for m in dg.merges:
        parts.append(f"{m.left}\t{m.right}\t{m.cost:.17g}\t{m.size}\n")
    return "".join(parts)


def dendrogram_from_tsv(text: str) -> Dendrogram:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#n="):
        raise FormatError("line 1: expected header '#n=<n>'")
    try:
        n = int(lines[0][3:])
    except ValueError:
        raise FormatError(f"line 1: bad leaf count {lines[0][3:]!r}") from None
    merges = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise FormatError(f"line {lineno}: expected 4 tab-separated fields, got {len(fields)}")
        try:
            merges.append((int(fields[0]), int(fields[1]), float(fields[2]), int(fields[3])))
        except ValueError:
            raise FormatError(f"line {lineno}: malformed field in {line!r}") from None
    try:
        return Dendrogram(n, merges)
    except ValueError as exc:
        msg = str(exc)
        if msg.startswith("merge "):
            idx = int(msg.split(":")[0].split()[1])
            raise FormatError(f"line {idx + 2}: {msg}") from None
        raise FormatError(msg) from None


def save_dendrogram(dg: Dendrogram, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dendrogram_to_tsv(dg))


def load_dendrogram(path: PathLike) -> Dendrogram:
    with open(path, encoding="utf-8") as fh:
        return dendrogram_from_tsv(fh.read())

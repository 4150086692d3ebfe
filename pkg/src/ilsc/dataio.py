"""Readers and writers for the four on-disk formats.

* feature CSV: ``sample_no,<9 attributes>,class`` with ``\\n`` line endings
* binary PGM (P5, maxval 255) with an optional
  ``# resolution_um_per_px=<float>`` header comment
* corpus manifest: ``<filename>\\t<label>[\\t<seed>]`` per line
* model document: JSON produced by :func:`ilsc.bayes.to_document`

Every writer emits the canonical form its reader accepts, so
``write(read(f))`` reproduces canonical files byte for byte.
"""

from __future__ import annotations

import json
import math
import os
import re
from pathlib import Path

import numpy as np

from .bayes import BayesNet, Dataset, from_document, to_document
from .errors import FormatError, ILSCError, UnsupportedFormatError, ValidationError
from .speckle import DEFAULT_RESOLUTION_UM_PER_PX, Corpus, LabeledImage, SpeckleImage
from .texture import ATTRIBUTE_NAMES

CSV_HEADER = ("sample_no", *ATTRIBUTE_NAMES, "class")
_RESOLUTION_RE = re.compile(rb"#\s*resolution_um_per_px\s*=\s*(\S+)")


class MissingFileError(ILSCError, FileNotFoundError):
    pass


def format_number(value: float) -> str:
    """Shortest round-trip decimal; integral values drop the ``.0``."""
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"cannot serialize non-finite value {value}")
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _parse_number(text: str, path, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"non-numeric value {text!r}", path, f"row {row}, column {column!r}") from None
    if not math.isfinite(value):
        raise FormatError(f"non-finite value {text!r}", path, f"row {row}, column {column!r}")
    return value


def read_feature_csv(path) -> Dataset:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty file", path)
    header = tuple(lines[0].rstrip("\r").split(","))
    if header != CSV_HEADER:
        raise FormatError(f"header mismatch: expected {','.join(CSV_HEADER)!r}, got {lines[0]!r}", path, "row 0")

    ids, values, labels = [], [], []
    for row, line in enumerate(lines[1:], start=1):
        cells = line.rstrip("\r").split(",")
        if len(cells) != len(CSV_HEADER):
            missing = CSV_HEADER[len(cells)] if len(cells) < len(CSV_HEADER) else None
            detail = f" (missing column {missing!r})" if missing else ""
            raise FormatError(f"expected {len(CSV_HEADER)} columns, got {len(cells)}{detail}", path, f"row {row}")
        try:
            sample_no = int(cells[0])
        except ValueError:
            raise FormatError(f"sample_no {cells[0]!r} is not an integer", path, f"row {row}") from None
        if sample_no < 1:
            raise FormatError(f"sample_no must be positive, got {sample_no}", path, f"row {row}")
        if sample_no in ids:
            raise FormatError(f"duplicate sample_no {sample_no}", path, f"row {row}")
        label = cells[-1]
        if not label or label != label.strip():
            raise FormatError(f"malformed class label {label!r}", path, f"row {row}, column 'class'")
        ids.append(sample_no)
        values.append([_parse_number(c, path, row, name) for c, name in zip(cells[1:-1], ATTRIBUTE_NAMES)])
        labels.append(label)

    if len(labels) < 2:
        raise FormatError("fewer than 2 rows", path)
    return Dataset(np.array(values), labels, ATTRIBUTE_NAMES, sample_ids=ids)


def feature_csv_text(dataset: Dataset) -> str:
    if tuple(dataset.attribute_names) != ATTRIBUTE_NAMES:
        raise ValidationError(f"feature CSV needs attributes {list(ATTRIBUTE_NAMES)}")
    out = [",".join(CSV_HEADER)]
    for sid, row, label in zip(dataset.sample_ids, dataset.values, dataset.labels):
        out.append(",".join([str(sid), *map(format_number, row), label]))
    return "\n".join(out) + "\n"


def write_feature_csv(dataset: Dataset, path) -> None:
    text = feature_csv_text(dataset)
    Path(path).write_bytes(text.encode("utf-8"))


def pgm_bytes(image: SpeckleImage) -> bytes:
    if not image.quantized:
        raise ValidationError("only quantized (8-bit) images can be written as PGM")
    header = (f"P5\n# resolution_um_per_px={image.resolution_um_per_px!r}\n"
              f"{image.width} {image.height}\n255\n").encode("ascii")
    return header + np.ascontiguousarray(image.pixels).tobytes()


def write_pgm(image: SpeckleImage, path) -> None:
    Path(path).write_bytes(pgm_bytes(image))


def parse_pgm(data: bytes, path=None) -> SpeckleImage:
    if data[:2] in (b"P2", b"P1", b"P3", b"P4", b"P6"):
        raise UnsupportedFormatError(f"unsupported format {data[:2].decode()}; only binary P5 is read", path)
    if data[:2] != b"P5":
        raise UnsupportedFormatError("not a PGM file (missing P5 magic)", path)

    pos = 2
    tokens = []
    resolution = None
    while len(tokens) < 3:
        if pos >= len(data):
            raise FormatError("unexpected EOF in header", path)
        ch = data[pos:pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise FormatError("unexpected EOF in header", path)
            m = _RESOLUTION_RE.match(data[pos:end])
            if m:
                try:
                    resolution = float(m.group(1))
                except ValueError:
                    raise FormatError(f"bad resolution comment {data[pos:end]!r}", path) from None
            pos = end + 1
        else:
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
                pos += 1
            token = data[start:pos]
            if not token.isdigit():
                raise FormatError(f"bad header token {token!r}", path)
            tokens.append(int(token))
    width, height, maxval = tokens
    if maxval != 255:
        raise UnsupportedFormatError(f"maxval {maxval} unsupported; only 255 is read", path)
    if width < 1 or height < 1:
        raise FormatError(f"invalid size {width}x{height}", path)
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("unexpected EOF", path)
    pos += 1
    payload = data[pos:]
    if len(payload) < width * height:
        raise FormatError("unexpected EOF", path)
    if len(payload) > width * height:
        raise FormatError(f"{len(payload) - width * height} trailing bytes after pixel data", path)
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()
    if resolution is None:
        return SpeckleImage(pixels, DEFAULT_RESOLUTION_UM_PER_PX, resolution_defaulted=True)
    return SpeckleImage(pixels, resolution)


def read_pgm(path) -> SpeckleImage:
    return parse_pgm(Path(path).read_bytes(), path)


def write_manifest(corpus: Corpus, path) -> None:
    lines = [f"{item.name}\t{item.label}\t{item.seed}" for item in corpus]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path) -> list[tuple[str, str, int | None, int]]:
    """Entries ``(filename, label, seed or None, line_number)`` in file order."""
    path = Path(path)
    entries, seen = [], set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) not in (2, 3) or not cells[0] or not cells[1]:
            raise FormatError("expected <filename>\\t<label>[\\t<seed>]", path, f"line {lineno}")
        seed = None
        if len(cells) == 3 and cells[2]:
            try:
                seed = int(cells[2])
            except ValueError:
                raise FormatError(f"seed {cells[2]!r} is not an integer", path, f"line {lineno}") from None
        if cells[0] in seen:
            raise FormatError(f"duplicate filename {cells[0]!r}", path, f"line {lineno}")
        seen.add(cells[0])
        entries.append((cells[0], cells[1], seed, lineno))
    if not entries:
        raise FormatError("empty manifest", path)
    return entries


def ingest_corpus(manifest_path, executor=None) -> Corpus:
    manifest_path = Path(manifest_path)
    entries = read_manifest(manifest_path)
    resolved = []
    for name, label, seed, lineno in entries:
        file = Path(name) if os.path.isabs(name) else manifest_path.parent / name
        if not file.is_file():
            raise MissingFileError(f"{manifest_path}: line {lineno}: image file {name!r} not found")
        resolved.append(file)
    mapper = executor.map if executor is not None else map
    images = list(mapper(read_pgm, resolved))
    return Corpus([LabeledImage(img, label, seed, name)
                   for img, (name, label, seed, _) in zip(images, entries)])


def model_text(net: BayesNet) -> str:
    return json.dumps(to_document(net), indent=2) + "\n"


def save_model(net: BayesNet, path) -> None:
    Path(path).write_text(model_text(net), encoding="utf-8")


def load_model(path) -> BayesNet:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid model document: {exc}", path) from None
    try:
        return from_document(doc)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise FormatError(str(exc), path) from None
        raise FormatError(f"malformed model document ({exc!r})", path) from None

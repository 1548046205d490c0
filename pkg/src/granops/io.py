"""File formats: PGM planes, stack manifests, raw float planes and CSV tables.

A stack on disk is a JSON manifest plus one file per (frame, channel) plane,
listed frame-major::

    {"width": 512, "height": 512, "channels": 2, "frames": 15,
     "dtype": "u16", "planeFiles": ["t000_c0.pgm", "t000_c1.pgm", ...]}

``u8``/``u16`` planes are binary PGM (P5); ``f32`` planes are raw
little-endian float32 with no header.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .errors import FormatError
from .image import Image, TimeLapse
from .measure import MeasurementRow

MANIFEST_NAME = "stack.json"
DTYPES = {"u8": 255, "u16": 65535, "f32": None}
CSV_COLUMNS = ["frame", "area", "mean", "centroid_x", "centroid_y", "perimeter", "circularity", "integrated_density"]
CSV_DECIMALS = 3

_WHITESPACE = b" \t\n\r\v\f"


# ---------------------------------------------------------------------------
# PGM


class _HeaderReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def token(self) -> tuple[bytes, int]:
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos:self.pos + 1]
            if c == b"#":
                while self.pos < n and data[self.pos:self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            elif c in _WHITESPACE:
                self.pos += 1
            else:
                break
        start = self.pos
        while self.pos < n and data[self.pos:self.pos + 1] not in _WHITESPACE and data[self.pos:self.pos + 1] != b"#":
            self.pos += 1
        if start == self.pos:
            raise FormatError("unexpected end of header", offset=start)
        return data[start:self.pos], start

    def integer(self, what, lo, hi) -> int:
        tok, at = self.token()
        if not tok.isdigit():
            raise FormatError(f"{what} is not a decimal integer: {tok[:20]!r}", offset=at)
        value = int(tok)
        if not lo <= value <= hi:
            raise FormatError(f"{what} {value} outside [{lo}, {hi}]", offset=at)
        return value


def decode_pgm(data: bytes) -> np.ndarray:
    """Decode P2 or P5 bytes into a ``uint16`` array of shape (height, width)."""
    hr = _HeaderReader(data)
    magic, _ = hr.token()
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"not a PGM file (magic {magic[:8]!r})", offset=0)
    width = hr.integer("width", 1, 1 << 20)
    height = hr.integer("height", 1, 1 << 20)
    maxval = hr.integer("maxval", 1, 65535)
    if magic == b"P5":
        if hr.pos >= len(data) or data[hr.pos:hr.pos + 1] not in _WHITESPACE:
            raise FormatError("missing whitespace after maxval", offset=hr.pos)
        start = hr.pos + 1
        bpp = 1 if maxval < 256 else 2
        need = width * height * bpp
        if len(data) - start < need:
            raise FormatError(f"truncated pixel data: need {need} bytes, have {len(data) - start}",
                              offset=len(data))
        raw = np.frombuffer(data, dtype=np.uint8 if bpp == 1 else ">u2", count=width * height, offset=start)
        pixels = raw.astype(np.uint16)
    else:
        values = []
        for _ in range(width * height):
            try:
                tok, at = hr.token()
            except FormatError as exc:
                raise FormatError("truncated pixel data", offset=exc.offset) from None
            if not tok.isdigit():
                raise FormatError(f"pixel value is not an integer: {tok[:20]!r}", offset=at)
            values.append(int(tok))
        pixels = np.array(values, dtype=np.int64)
    if pixels.size and pixels.max() > maxval:
        raise FormatError(f"pixel value exceeds maxval {maxval}")
    return pixels.astype(np.uint16).reshape(height, width)


def read_pgm(path) -> Image:
    data = Path(path).read_bytes()
    try:
        return Image(decode_pgm(data))
    except FormatError as exc:
        raise FormatError(str(exc), path=path) from None


def encode_pgm(img: Image, maxval: int | None = None, binary: bool = True) -> bytes:
    if img.depth != 1:
        raise FormatError("PGM holds a single 2D plane")
    plane = img.plane.astype(np.float64)
    if (plane != np.round(plane)).any() or plane.min() < 0 or plane.max() > 65535:
        raise FormatError("PGM needs integer pixel values in [0, 65535]")
    vals = plane.astype(np.uint16)
    if maxval is None:
        maxval = 255 if vals.max() <= 255 else 65535
    if vals.max() > maxval or not 1 <= maxval <= 65535:
        raise FormatError(f"values exceed maxval {maxval}")
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{maxval}\n".encode()
    if not binary:
        body = "\n".join(" ".join(str(v) for v in row) for row in vals).encode() + b"\n"
    elif maxval < 256:
        body = vals.astype(np.uint8).tobytes()
    else:
        body = vals.astype(">u2").tobytes()
    return header + body


def write_pgm(img: Image, path, maxval: int | None = None, binary: bool = True):
    Path(path).write_bytes(encode_pgm(img, maxval, binary))


# ---------------------------------------------------------------------------
# stacks


def _infer_dtype(tl: TimeLapse) -> str:
    arr = tl.to_array()
    if (arr == np.round(arr)).all() and arr.min() >= 0:
        if arr.max() <= 255:
            return "u8"
        if arr.max() <= 65535:
            return "u16"
    return "f32"


def write_stack(tl: TimeLapse, directory, dtype: str | None = None) -> Path:
    """Write planes and manifest into ``directory``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    dtype = dtype or _infer_dtype(tl)
    if dtype not in DTYPES:
        raise FormatError(f"unsupported dtype {dtype!r}")
    files = []
    for t in range(tl.n_frames):
        for c in range(tl.n_channels):
            img = tl.get(t, c)
            if dtype == "f32":
                name = f"t{t:03d}_c{c}.f32"
                (directory / name).write_bytes(img.plane.astype("<f4").tobytes())
            else:
                name = f"t{t:03d}_c{c}.pgm"
                write_pgm(img, directory / name, maxval=DTYPES[dtype])
            files.append(name)
    manifest = {"width": tl.width, "height": tl.height, "channels": tl.n_channels,
                "frames": tl.n_frames, "dtype": dtype, "planeFiles": files}
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2))
    return path


def _manifest_int(m, key):
    v = m.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise FormatError(f"manifest field {key!r} must be a positive integer")
    return v


def read_stack(manifest_path) -> TimeLapse:
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / MANIFEST_NAME
    try:
        m = json.loads(manifest_path.read_text())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}", path=manifest_path) from None
    if not isinstance(m, dict):
        raise FormatError("manifest must be a JSON object", path=manifest_path)
    width, height = _manifest_int(m, "width"), _manifest_int(m, "height")
    channels, frames = _manifest_int(m, "channels"), _manifest_int(m, "frames")
    dtype = m.get("dtype")
    if not isinstance(dtype, str) or dtype not in DTYPES:
        raise FormatError(f"unsupported dtype {dtype!r}", path=manifest_path)
    files = m.get("planeFiles")
    if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
        raise FormatError("planeFiles must be a list of paths", path=manifest_path)
    if len(files) != frames * channels:
        raise FormatError(f"planeFiles lists {len(files)} planes, expected frames*channels = "
                          f"{frames * channels}", path=manifest_path)
    base = manifest_path.parent
    planes = []
    for name in files:
        path = base / name
        if not path.is_file():
            raise FormatError("missing plane file", path=path)
        if dtype == "f32":
            raw = path.read_bytes()
            if len(raw) != width * height * 4:
                raise FormatError(f"plane has {len(raw)} bytes, expected {width * height * 4} "
                                  f"for {width}x{height} f32", path=path)
            arr = np.frombuffer(raw, dtype="<f4").reshape(height, width)
            if not np.isfinite(arr).all():
                raise FormatError("plane contains non-finite values", path=path)
            img = Image(arr)
        else:
            img = read_pgm(path)
            if (img.width, img.height) != (width, height):
                raise FormatError(f"plane is {img.width}x{img.height}, manifest says {width}x{height}",
                                  path=path)
            if img.array.max() > DTYPES[dtype]:
                raise FormatError(f"values exceed {dtype} range", path=path)
        planes.append(img)
    return TimeLapse([planes[t * channels:(t + 1) * channels] for t in range(frames)])


# ---------------------------------------------------------------------------
# CSV


def _fmt(value):
    return f"{value:.{CSV_DECIMALS}f}"


def _write_rows(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.frame, r.area, _fmt(r.mean), _fmt(r.centroid_x), _fmt(r.centroid_y),
                    _fmt(r.perimeter), _fmt(r.circularity), _fmt(r.integrated_density)])


def write_measurements_csv(rows, path):
    """One line per row with the fixed column set; floats at 3 decimals.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(path, rows)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, rows)


def read_measurements_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in ("frame",)):
            raise FormatError("measurement CSV lacks a 'frame' column", path=path)
        out = []
        for lineno, rec in enumerate(reader, start=2):
            try:
                out.append({k: (int(v) if k in ("frame", "area") else float(v)) for k, v in rec.items()})
            except (TypeError, ValueError):
                raise FormatError(f"line {lineno}: non-numeric value", path=path) from None
    return out


def rows_from_csv(path) -> list[MeasurementRow]:
    records = read_measurements_csv(path)
    if records and not set(CSV_COLUMNS) <= set(records[0]):
        raise FormatError(f"measurement CSV needs columns {CSV_COLUMNS}", path=path)
    return [MeasurementRow(frame=d["frame"], area=d["area"], mean=d["mean"], centroid_x=d["centroid_x"],
                           centroid_y=d["centroid_y"], perimeter=d["perimeter"],
                           integrated_density=d["integrated_density"], circularity=d["circularity"],
                           empty=d["area"] == 0)
            for d in records]


def write_pairs_csv(path, header, pairs):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for pair in pairs:
            w.writerow([repr(float(v)) for v in pair])


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return Path(path)

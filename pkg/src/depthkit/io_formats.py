"""Bit-exact file I/O for depth maps, sparse points, and segment maps.

Formats:

* ``pgm16``      binary PGM (P5), maxval 65535, depth_m = pixel / 256.0,
                 pixel 0 = invalid (the de-facto KITTI depth encoding, so
                 real benchmark files load unmodified)
* ``pfm32``      grayscale PFM, little-endian (negative scale header),
                 scanlines bottom-to-top; NaN/Inf and negative depths are
                 rejected on read
* ``csv-points`` text file with header ``row,col,depth_m`` holding only
                 the measured points, written sorted by (row, col);
                 reading needs the target grid shape

Segment maps ride in 16-bit PGM with pixel value = label (0 = gap);
labels are densified on read with a warning when they arrive sparse.

Malformed input of any kind raises :class:`FormatError` naming the byte
offset; readers never raise anything else.
"""

from __future__ import annotations

import warnings

import numpy as np

from .grids import as_depth, as_segments

FORMATS = ("pgm16", "pfm32", "csv-points")

_MAX_TOKEN = 32  # no legitimate header token is longer


class FormatError(ValueError):
    """A file does not conform to its declared format."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class _Tokens:
    """Whitespace-separated header tokens over a byte buffer, tracking the
    read position so errors can name an offset."""

    def __init__(self, buf: bytes, comments: bool):
        self.buf = buf
        self.pos = 0
        self.comments = comments

    def _skip_space(self) -> None:
        while self.pos < len(self.buf):
            ch = self.buf[self.pos : self.pos + 1]
            if ch.isspace():
                self.pos += 1
            elif self.comments and ch == b"#":
                nl = self.buf.find(b"\n", self.pos)
                self.pos = len(self.buf) if nl < 0 else nl + 1
            else:
                return

    def next(self, what: str) -> str:
        self._skip_space()
        start = self.pos
        while self.pos < len(self.buf) and not self.buf[self.pos : self.pos + 1].isspace():
            self.pos += 1
            if self.pos - start > _MAX_TOKEN:
                raise FormatError(f"{what} token too long", start)
        if self.pos == start:
            raise FormatError(f"missing {what}", start)
        try:
            return self.buf[start : self.pos].decode("ascii")
        except UnicodeDecodeError:
            raise FormatError(f"{what} is not ASCII", start) from None

    def next_int(self, what: str, lo: int, hi: int) -> int:
        start_tok = self.pos
        tok = self.next(what)
        try:
            val = int(tok)
        except ValueError:
            raise FormatError(f"{what} is not an integer: {tok!r}", start_tok) from None
        if not (lo <= val <= hi):
            raise FormatError(f"{what} {val} outside [{lo}, {hi}]", start_tok)
        return val

    def raster_start(self) -> int:
        """Consume the single whitespace byte separating header and raster."""
        if self.pos >= len(self.buf) or not self.buf[self.pos : self.pos + 1].isspace():
            raise FormatError("header not terminated by whitespace", self.pos)
        self.pos += 1
        return self.pos


def _read_pgm16_raw(buf: bytes, path: str) -> np.ndarray:
    toks = _Tokens(buf, comments=True)
    magic = buf[:2]
    if magic != b"P5":
        raise FormatError(f"{path}: bad PGM magic {magic!r}", 0)
    toks.pos = 2
    w = toks.next_int("width", 1, 1 << 20)
    h = toks.next_int("height", 1, 1 << 20)
    maxval = toks.next_int("maxval", 1, 65535)
    if maxval != 65535:
        raise FormatError(f"{path}: need 16-bit PGM (maxval 65535), got {maxval}", toks.pos)
    start = toks.raster_start()
    expected = w * h * 2
    got = len(buf) - start
    if got < expected:
        raise FormatError(f"{path}: truncated raster, need {expected} bytes, have {got}", start)
    if got > expected:
        raise FormatError(f"{path}: {got - expected} trailing bytes after raster", start + expected)
    pixels = np.frombuffer(buf, dtype=">u2", count=w * h, offset=start)
    return pixels.reshape(h, w).astype(np.int64)


def _read_pgm16_depth(buf: bytes, path: str) -> np.ndarray:
    return _read_pgm16_raw(buf, path) / 256.0


def _write_pgm16(d: np.ndarray, path: str) -> None:
    pixels = np.clip(np.round(d * 256.0), 0, 65535).astype(">u2")
    with open(path, "wb") as f:
        f.write(f"P5\n{d.shape[1]} {d.shape[0]}\n65535\n".encode("ascii"))
        f.write(pixels.tobytes())


def _read_pfm32(buf: bytes, path: str) -> np.ndarray:
    toks = _Tokens(buf, comments=False)
    magic = toks.next("magic")
    if magic == "PF":
        raise FormatError(f"{path}: color PFM not supported", 0)
    if magic != "Pf":
        raise FormatError(f"{path}: bad PFM magic {magic!r}", 0)
    w = toks.next_int("width", 1, 1 << 20)
    h = toks.next_int("height", 1, 1 << 20)
    scale_pos = toks.pos
    scale_tok = toks.next("scale")
    try:
        scale = float(scale_tok)
    except ValueError:
        raise FormatError(f"{path}: scale is not a number: {scale_tok!r}", scale_pos) from None
    if scale == 0 or not np.isfinite(scale):
        raise FormatError(f"{path}: invalid scale {scale_tok}", scale_pos)
    start = toks.raster_start()
    expected = w * h * 4
    got = len(buf) - start
    if got < expected:
        raise FormatError(f"{path}: truncated raster, need {expected} bytes, have {got}", start)
    if got > expected:
        raise FormatError(f"{path}: {got - expected} trailing bytes after raster", start + expected)
    dtype = "<f4" if scale < 0 else ">f4"
    flat = np.frombuffer(buf, dtype=dtype, count=w * h, offset=start)
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise FormatError(f"{path}: non-finite depth value", start + int(bad[0]) * 4)
    bad = np.flatnonzero(flat < 0)
    if bad.size:
        raise FormatError(f"{path}: negative depth value", start + int(bad[0]) * 4)
    # PFM stores scanlines bottom-to-top
    return np.flipud(flat.reshape(h, w)).astype(np.float64)


def _write_pfm32(d: np.ndarray, path: str) -> None:
    data = np.flipud(d).astype("<f4")
    with open(path, "wb") as f:
        f.write(f"Pf\n{d.shape[1]} {d.shape[0]}\n-1.0\n".encode("ascii"))
        f.write(data.tobytes())


def _read_csv_points(buf: bytes, path: str, shape) -> np.ndarray:
    if shape is None:
        raise ValueError("csv-points needs an explicit shape=(height, width)")
    h, w = int(shape[0]), int(shape[1])
    out = np.zeros((h, w))
    try:
        text = buf.decode("ascii")
    except UnicodeDecodeError as e:
        raise FormatError(f"{path}: not ASCII text", e.start) from None
    offset = 0
    seen: set[tuple[int, int]] = set()
    for lineno, line in enumerate(text.splitlines(keepends=True)):
        stripped = line.strip()
        line_start = offset
        offset += len(line)
        if lineno == 0:
            if stripped != "row,col,depth_m":
                raise FormatError(f"{path}: bad header line {stripped!r}", line_start)
            continue
        if not stripped:
            continue
        parts = stripped.split(",")
        if len(parts) != 3:
            raise FormatError(f"{path}: expected 3 fields, got {len(parts)}", line_start)
        try:
            r, c = int(parts[0]), int(parts[1])
            depth = float(parts[2])
        except ValueError:
            raise FormatError(f"{path}: unparseable point {stripped!r}", line_start) from None
        if not (0 <= r < h and 0 <= c < w):
            raise FormatError(f"{path}: point ({r}, {c}) outside {h}x{w} grid", line_start)
        if not np.isfinite(depth) or depth <= 0:
            raise FormatError(f"{path}: point depth must be finite and > 0", line_start)
        if (r, c) in seen:
            raise FormatError(f"{path}: duplicate point ({r}, {c})", line_start)
        seen.add((r, c))
        out[r, c] = depth
    return out


def _write_csv_points(d: np.ndarray, path: str) -> None:
    rows, cols = np.nonzero(d > 0)
    order = np.lexsort((cols, rows))
    with open(path, "w", encoding="ascii") as f:
        f.write("row,col,depth_m\n")
        for i in order:
            f.write(f"{rows[i]},{cols[i]},{d[rows[i], cols[i]].item()!r}\n")


def detect_format(path: str) -> str:
    """Map a file extension to a depth format name."""
    p = str(path).lower()
    if p.endswith(".pgm"):
        return "pgm16"
    if p.endswith(".pfm"):
        return "pfm32"
    if p.endswith(".csv"):
        return "csv-points"
    raise ValueError(f"cannot infer depth format from {path!r} (use .pgm/.pfm/.csv)")


def read_depth(path, fmt: str, shape=None) -> np.ndarray:
    """Read a depth map; `shape` is required for (and only used by) csv-points."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")
    with open(path, "rb") as f:
        buf = f.read()
    if fmt == "pgm16":
        d = _read_pgm16_depth(buf, str(path))
    elif fmt == "pfm32":
        d = _read_pfm32(buf, str(path))
    else:
        d = _read_csv_points(buf, str(path), shape)
    if shape is not None and d.shape != tuple(shape):
        raise FormatError(f"{path}: shape {d.shape} does not match expected {tuple(shape)}")
    return d


def write_depth(d, path, fmt: str) -> None:
    d = as_depth(d)
    if fmt == "pgm16":
        _write_pgm16(d, path)
    elif fmt == "pfm32":
        _write_pfm32(d, path)
    elif fmt == "csv-points":
        _write_csv_points(d, path)
    else:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")


def read_segments(path) -> np.ndarray:
    """Read a segment map from 16-bit PGM (pixel value = label).

    Labels are densified to 1..K (ascending original order) when the file
    skips values, with a warning.
    """
    with open(path, "rb") as f:
        buf = f.read()
    raw = _read_pgm16_raw(buf, str(path))
    labels = np.unique(raw)
    nonzero = labels[labels > 0]
    dense = np.arange(1, nonzero.size + 1)
    if not np.array_equal(nonzero, dense):
        warnings.warn(
            f"{path}: sparse segment labels densified to 1..{nonzero.size}",
            UserWarning,
            stacklevel=2,
        )
        lut = np.zeros(int(labels.max()) + 1, dtype=np.int64)
        lut[nonzero] = dense
        raw = lut[raw]
    return raw.astype(np.int32)


def write_segments(seg, path) -> None:
    seg = as_segments(seg)
    if seg.max(initial=0) > 65535:
        raise ValueError("segment labels exceed 16-bit PGM range")
    with open(path, "wb") as f:
        f.write(f"P5\n{seg.shape[1]} {seg.shape[0]}\n65535\n".encode("ascii"))
        f.write(seg.astype(">u2").tobytes())

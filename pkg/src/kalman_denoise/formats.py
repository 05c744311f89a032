"""Volume I/O: PGM frame directories, YUV4MPEG2 (luma only), and kvol.

kvol layout (all little-endian)::

    b"KVOL1" | width u32 | height u32 | frames u32 | float32 samples

Samples are row-major within a frame, frames in order. Volumes are held as
float64 in memory, so a kvol round trip is exact for float32-representable
values.
"""

from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np

from .errors import EmptySequenceError, FormatError, MalformedHeaderError, MixedDimensionsError
from .volume import as_volume

FORMATS = ("pgm-dir", "y4m", "kvol")
KVOL_MAGIC = b"KVOL1"
_KVOL_HEADER = struct.Struct("<5sIII")


def quantize(values, maxval: int) -> np.ndarray:
    """Clip to [0, 1] and round half away from zero to integers in [0, maxval]."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0) * maxval
    return np.floor(v + 0.5).astype(np.uint16 if maxval > 255 else np.uint8)


# --- PGM -------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM and return intensities normalized to [0, 1]."""
    data = Path(path).read_bytes()
    pos = 0
    fields = []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise MalformedHeaderError(f"{path}: truncated PGM header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P5":
        raise MalformedHeaderError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError as exc:
        raise MalformedHeaderError(f"{path}: bad PGM header field") from exc
    if not 0 < maxval < 65536 or width <= 0 or height <= 0:
        raise MalformedHeaderError(f"{path}: invalid PGM dimensions or maxval")
    pos += 1  # single whitespace byte before the raster
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    nbytes = width * height * dtype.itemsize
    raster = data[pos:pos + nbytes]
    if len(raster) != nbytes:
        raise MalformedHeaderError(f"{path}: raster is {len(raster)} bytes, expected {nbytes}")
    pixels = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return pixels.astype(np.float64) / maxval


def write_pgm(path, frame, maxval: int = 255) -> None:
    frame = np.asarray(frame)
    h, w = frame.shape
    q = quantize(frame, maxval)
    raster = q.astype(">u2").tobytes() if maxval > 255 else q.tobytes()
    Path(path).write_bytes(b"P5\n%d %d\n%d\n" % (w, h, maxval) + raster)


def _load_pgm_dir(path: Path) -> np.ndarray:
    files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".pgm")
    if not files:
        raise EmptySequenceError(f"{path}: no .pgm files")
    frames = [read_pgm(f) for f in files]
    shapes = {f.shape for f in frames}
    if len(shapes) > 1:
        raise MixedDimensionsError(f"{path}: frames have differing sizes {sorted(shapes)}")
    return np.stack(frames)


def _save_pgm_dir(volume: np.ndarray, path: Path, maxval: int) -> None:
    path.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(volume.shape[0])))
    for t, frame in enumerate(volume, start=1):
        write_pgm(path / f"frame_{t:0{digits}d}.pgm", frame, maxval)


# --- YUV4MPEG2 -------------------------------------------------------------

def _chroma_samples(tag: str, w: int, h: int) -> int:
    base = tag.split("p")[0]
    cw, ch = (w + 1) // 2, (h + 1) // 2
    if base.startswith("420"):
        return 2 * cw * ch
    if base == "422":
        return 2 * cw * h
    if base == "444":
        return 2 * w * h
    if base == "411":
        return 2 * ((w + 3) // 4) * h
    if base == "mono":
        return 0
    raise MalformedHeaderError(f"unsupported Y4M colorspace C{tag}")


def _load_y4m(path: Path) -> np.ndarray:
    data = path.read_bytes()
    nl = data.find(b"\n")
    if nl < 0 or not data.startswith(b"YUV4MPEG2"):
        raise MalformedHeaderError(f"{path}: missing YUV4MPEG2 signature")
    params = {tok[:1]: tok[1:] for tok in data[:nl].split()[1:]}
    try:
        w, h = int(params[b"W"]), int(params[b"H"])
    except (KeyError, ValueError) as exc:
        raise MalformedHeaderError(f"{path}: Y4M header lacks W/H") from exc
    tag = params.get(b"C", b"420jpeg").decode("ascii")
    m = re.search(r"p(\d+)$", tag)
    bits = int(m.group(1)) if m else 8
    itemsize = 1 if bits <= 8 else 2
    luma = w * h
    frame_bytes = (luma + _chroma_samples(tag, w, h)) * itemsize
    dtype = np.dtype("u1") if itemsize == 1 else np.dtype("<u2")
    maxval = (1 << bits) - 1

    frames = []
    pos = nl + 1
    while pos < len(data):
        end = data.find(b"\n", pos)
        if end < 0 or not data.startswith(b"FRAME", pos):
            raise MalformedHeaderError(f"{path}: bad FRAME marker at byte {pos}")
        start = end + 1
        payload = data[start:start + frame_bytes]
        if len(payload) != frame_bytes:
            raise MalformedHeaderError(f"{path}: truncated frame at byte {start}")
        y = np.frombuffer(payload[:luma * itemsize], dtype=dtype).reshape(h, w)
        frames.append(y.astype(np.float64) / maxval)
        pos = start + frame_bytes
    if not frames:
        raise EmptySequenceError(f"{path}: no frames")
    return np.stack(frames)


def _save_y4m(volume: np.ndarray, path: Path) -> None:
    t, h, w = volume.shape
    with open(path, "wb") as fh:
        fh.write(b"YUV4MPEG2 W%d H%d F25:1 Ip A1:1 Cmono\n" % (w, h))
        for frame in volume:
            fh.write(b"FRAME\n")
            fh.write(quantize(frame, 255).tobytes())


# --- kvol ------------------------------------------------------------------

def _load_kvol(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if len(data) < _KVOL_HEADER.size:
        raise MalformedHeaderError(f"{path}: file shorter than kvol header")
    magic, w, h, n = _KVOL_HEADER.unpack_from(data)
    if magic != KVOL_MAGIC:
        raise MalformedHeaderError(f"{path}: bad magic {magic!r}")
    expected = _KVOL_HEADER.size + 4 * w * h * n
    if len(data) != expected:
        raise MalformedHeaderError(f"{path}: {len(data)} bytes, header implies {expected}")
    if n == 0:
        raise EmptySequenceError(f"{path}: no frames")
    samples = np.frombuffer(data, dtype="<f4", offset=_KVOL_HEADER.size)
    return samples.reshape(n, h, w).astype(np.float64)


def _save_kvol(volume: np.ndarray, path: Path) -> None:
    t, h, w = volume.shape
    with open(path, "wb") as fh:
        fh.write(_KVOL_HEADER.pack(KVOL_MAGIC, w, h, t))
        fh.write(np.ascontiguousarray(volume, dtype="<f4").tobytes())


# --- public API ------------------------------------------------------------

def guess_format(path) -> str:
    path = Path(path)
    if path.suffix.lower() == ".y4m":
        return "y4m"
    if path.suffix.lower() == ".kvol":
        return "kvol"
    return "pgm-dir"


def load_volume(path, fmt: str | None = None) -> np.ndarray:
    """Load a ``(T, H, W)`` volume normalized to [0, 1].

    PGM directories are read in lexicographic filename order.
    """
    path = Path(path)
    fmt = fmt or guess_format(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file or directory")
    if fmt == "pgm-dir":
        return _load_pgm_dir(path)
    if fmt == "y4m":
        return _load_y4m(path)
    if fmt == "kvol":
        return _load_kvol(path)
    raise FormatError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def save_volume(volume, path, fmt: str | None = None, maxval: int = 255) -> None:
    """Write ``volume``; integer formats clip to [0, 1] and quantize to ``maxval``."""
    vol = as_volume(volume, min_frames=1)
    path = Path(path)
    fmt = fmt or guess_format(path)
    if fmt == "pgm-dir":
        if maxval not in (255, 65535):
            raise ValueError("PGM maxval must be 255 or 65535")
        _save_pgm_dir(vol, path, maxval)
    elif fmt == "y4m":
        _save_y4m(vol, path)
    elif fmt == "kvol":
        _save_kvol(vol, path)
    else:
        raise FormatError(f"unknown format {fmt!r}; expected one of {FORMATS}")

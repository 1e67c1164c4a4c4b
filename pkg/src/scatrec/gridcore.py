"""Core value types: grids, images, scattered sample sets, parameter bundles.

Conventions used across the package:

* pixel centers sit at integer coordinates ``0 .. width-1`` / ``0 .. height-1``;
* image data is stored row-major with y as the outer axis, i.e. as a numpy
  array of shape ``(height, width)``;
* intensities are 64-bit floats internally; PGM files are normalized to
  ``[0, 1]`` on load with the original maxval recorded on the image.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptySampleSet, FormatError, IoError

__all__ = [
    "GridSpec",
    "Image",
    "SampleSet",
    "RegParams",
    "image_from_array",
    "load_image",
    "save_image",
    "load_samples",
    "save_samples",
]


@dataclass(frozen=True)
class GridSpec:
    """Reconstruction grid extent in pixels."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.width}x{self.height}")

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width) — the numpy array shape for this grid."""
        return (self.height, self.width)

    @property
    def pixels(self) -> int:
        return self.width * self.height


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out is arr:
        out = out.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Image:
    """Dense 2D intensity grid.

    ``data`` has shape ``(height, width)`` and is read-only. ``maxval``
    records the file maxval for images loaded from PGM (None otherwise).
    """

    grid: GridSpec
    data: np.ndarray
    channel: str = ""
    maxval: int | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.shape != self.grid.shape:
            raise ValueError(f"data shape {data.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("image values must be finite")
        object.__setattr__(self, "data", _freeze(data))

    def with_data(self, data: np.ndarray) -> "Image":
        return replace(self, data=data)


def image_from_array(data: np.ndarray, channel: str = "") -> Image:
    """Wrap a 2D array as an Image, deriving the grid from its shape."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {data.shape}")
    h, w = data.shape
    return Image(GridSpec(width=w, height=h), data, channel=channel)


@dataclass(frozen=True)
class SampleSet:
    """Scattered point measurements on a target grid.

    Coordinates are real-valued in the pixel-center frame; every sample must
    satisfy ``0 <= x < width`` and ``0 <= y < height``.
    """

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64).ravel()
        ys = np.asarray(self.ys, dtype=np.float64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if not (xs.size == ys.size == values.size):
            raise ValueError("xs, ys, values must have equal length")
        if xs.size == 0:
            raise EmptySampleSet("sample set is empty")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys)) and np.all(np.isfinite(values))):
            raise ValueError("sample fields must be finite")
        if np.any(xs < 0) or np.any(xs >= self.grid.width) or np.any(ys < 0) or np.any(ys >= self.grid.height):
            raise FormatError("sample coordinates must lie in [0, width) x [0, height)")
        object.__setattr__(self, "xs", _freeze(xs))
        object.__setattr__(self, "ys", _freeze(ys))
        object.__setattr__(self, "values", _freeze(values))

    def __len__(self) -> int:
        return int(self.xs.size)


@dataclass(frozen=True)
class RegParams:
    """Regularization parameter bundle shared by all reconstruction costs.

    lam      weight of the regularizer against the data term
    q        variance exponent of the structure-adaptive weights, in (0, 1]
    r        roughness exponent of the reweighted baseline, in (0, 1]
    p        exponent of the plain roughness penalty, in (0, 2]
    epsilon  smoothing floor added inside |.|^q terms
    bound_m  upper pixel bound; None means 1.05 * max(measurement) at solve time
    """

    lam: float
    q: float = 0.9
    r: float = 0.5
    p: float = 2.0
    epsilon: float = 1e-6
    bound_m: float | None = None

    def __post_init__(self):
        if not (self.lam > 0):
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not (0 < self.q <= 1):
            raise ValueError(f"q must lie in (0, 1], got {self.q}")
        if not (self.r > 0):
            raise ValueError(f"r must be positive, got {self.r}")
        if not (0 < self.p <= 2):
            raise ValueError(f"p must lie in (0, 2], got {self.p}")
        if not (self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.bound_m is not None and not (self.bound_m > 0):
            raise ValueError(f"bound_m must be positive, got {self.bound_m}")


# ---------------------------------------------------------------------------
# image I/O: PGM P5 (8/16 bit) and raw little-endian float32 with JSON sidecar
# ---------------------------------------------------------------------------

_FORMATS = ("pgm8", "pgm16", "f32")


def _infer_format(path: str) -> str:
    lower = path.lower()
    if lower.endswith(".pgm"):
        return "pgm8"  # refined from the header on load
    if lower.endswith(".f32"):
        return "f32"
    raise FormatError(f"cannot infer image format from path {path!r}")


def _sidecar_path(path: str) -> str:
    return path + ".json"


def _read_pgm(path: str) -> Image:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    if len(blob) == 0:
        raise FormatError(f"{path}: empty file")
    # Header: magic, width, height, maxval separated by whitespace; '#' comments.
    pos = 0
    fields = []
    while len(fields) < 4:
        m = re.compile(rb"\s*(#[^\n]*\n)*\s*(\S+)").match(blob, pos)
        if m is None:
            raise FormatError(f"{path}: truncated PGM header")
        fields.append(m.group(2))
        pos = m.end()
    if fields[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric PGM header field") from exc
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise FormatError(f"{path}: bad PGM dimensions {width}x{height} maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = width * height * dtype.itemsize
    payload = blob[pos : pos + need]
    if len(payload) < need:
        raise FormatError(f"{path}: truncated PGM payload ({len(payload)} of {need} bytes)")
    raw = np.frombuffer(payload, dtype=dtype).astype(np.float64).reshape(height, width)
    return Image(GridSpec(width, height), raw / maxval, channel="gray", maxval=maxval)


def _read_f32(path: str) -> Image:
    try:
        with open(_sidecar_path(path), "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except OSError as exc:
        raise IoError(f"missing sidecar for {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad sidecar for {path}: {exc}") from exc
    try:
        width, height = int(meta["width"]), int(meta["height"])
        channel = str(meta.get("channel", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"sidecar for {path} lacks width/height") from exc
    try:
        raw = np.fromfile(path, dtype="<f4")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    if raw.size != width * height:
        raise FormatError(f"{path}: expected {width * height} float32 values, found {raw.size}")
    data = raw.astype(np.float64).reshape(height, width)
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: non-finite float32 payload")
    return Image(GridSpec(width, height), data, channel=channel)


def load_image(path: str, format: str | None = None) -> Image:
    """Load an image file; PGM intensities are normalized to [0, 1].

    ``format`` is one of ``pgm8``, ``pgm16``, ``f32``; None infers it from
    the extension (the PGM bit depth always comes from the header).
    """
    fmt = format or _infer_format(path)
    if fmt not in _FORMATS:
        raise FormatError(f"unknown image format {fmt!r}")
    if fmt in ("pgm8", "pgm16"):
        return _read_pgm(path)
    return _read_f32(path)


def save_image(img: Image, path: str, format: str | None = None) -> None:
    """Write ``img`` as PGM (scaled by maxval, round half up) or raw float32."""
    fmt = format or _infer_format(path)
    if fmt not in _FORMATS:
        raise FormatError(f"unknown image format {fmt!r}")
    try:
        if fmt == "f32":
            img.data.astype("<f4").tofile(path)
            meta = {"width": img.grid.width, "height": img.grid.height, "channel": img.channel}
            with open(_sidecar_path(path), "w", encoding="utf-8") as fh:
                json.dump(meta, fh, sort_keys=True)
                fh.write("\n")
            return
        maxval = 255 if fmt == "pgm8" else 65535
        scaled = np.floor(img.data * maxval + 0.5)  # round half up
        quantized = np.clip(scaled, 0, maxval)
        dtype = np.dtype("u1") if fmt == "pgm8" else np.dtype(">u2")
        header = f"P5\n{img.grid.width} {img.grid.height}\n{maxval}\n".encode("ascii")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(quantized.astype(dtype).tobytes())
    except OSError as exc:
        raise IoError(str(exc)) from exc


# ---------------------------------------------------------------------------
# sample-set I/O: CSV "x,y,value" with a JSON sidecar holding the grid extent
# ---------------------------------------------------------------------------


def save_samples(samples: SampleSet, path: str) -> None:
    """Write samples as CSV with LF endings plus a grid-extent sidecar.

    Floats are formatted with ``repr`` (shortest round-trip form), so a
    load/save cycle is bit-identical.
    """
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("x,y,value\n")
            for x, y, v in zip(samples.xs, samples.ys, samples.values):
                fh.write(f"{float(x)!r},{float(y)!r},{float(v)!r}\n")
        meta = {"width": samples.grid.width, "height": samples.grid.height}
        with open(_sidecar_path(path), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(str(exc)) from exc


def load_samples(path: str, grid: GridSpec | None = None) -> SampleSet:
    """Read a samples CSV; the grid comes from the sidecar unless given."""
    if grid is None:
        try:
            with open(_sidecar_path(path), "r", encoding="utf-8") as fh:
                meta = json.load(fh)
            grid = GridSpec(int(meta["width"]), int(meta["height"]))
        except OSError as exc:
            raise IoError(f"missing sidecar for {path}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad sidecar for {path}: {exc}") from exc
    try:
        with open(path, "r", encoding="ascii", newline="") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    if not lines or lines[0].strip() != "x,y,value":
        raise FormatError(f"{path}: expected header 'x,y,value'")
    xs, ys, vs = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            x, y, v = (float(p) for p in parts)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: non-numeric field") from exc
        xs.append(x)
        ys.append(y)
        vs.append(v)
    if not xs:
        raise FormatError(f"{path}: no samples")
    if not all(np.isfinite(xs)) or not all(np.isfinite(ys)) or not all(np.isfinite(vs)):
        raise FormatError(f"{path}: non-finite sample field")
    arr_x, arr_y = np.array(xs), np.array(ys)
    if np.any(arr_x < 0) or np.any(arr_x >= grid.width) or np.any(arr_y < 0) or np.any(arr_y >= grid.height):
        raise FormatError(f"{path}: sample coordinate outside the {grid.width}x{grid.height} grid")
    return SampleSet(arr_x, arr_y, np.array(vs), grid)

"""Binary images, share sets and PBM (P1/P4) I/O.

Pixel value 1 is black (opaque), 0 is white (transparent), which is also
the PBM convention.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .analytic import SchemeParams, StackOp
from .codec import EncodingPolicy, encode_pixels
from .numeric import Ratio

__all__ = [
    "Bitmap",
    "ShareSet",
    "PBMError",
    "encode_image",
    "reconstruct",
    "measure_transmission",
    "make_test_card",
    "read_pbm",
    "write_pbm",
    "share_filename",
]


class PBMError(ValueError):
    """Malformed PBM data; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True, eq=False)
class Bitmap:
    """Immutable binary image backed by a read-only ``(height, width)`` uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.uint8, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"bitmap needs a 2-D pixel array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"bitmap dimensions must be positive, got {arr.shape[1]}x{arr.shape[0]}")
        if arr.max() > 1:
            raise ValueError("bitmap pixels must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]]) -> "Bitmap":
        return cls(np.array([list(r) for r in rows]))

    @classmethod
    def filled(cls, width: int, height: int, value: int = 0) -> "Bitmap":
        if width < 1 or height < 1:
            raise ValueError(f"bitmap dimensions must be positive, got {width}x{height}")
        return cls(np.full((height, width), value, dtype=np.uint8))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, Bitmap):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"Bitmap({self.width}x{self.height}, black={int(self.pixels.sum())})"


def make_test_card(width: int = 256, height: int = 256) -> Bitmap:
    """Top half white, bottom half black."""
    pixels = np.zeros((height, width), dtype=np.uint8)
    pixels[height // 2 :, :] = 1
    return Bitmap(pixels)


def share_filename(stem: str, i: int) -> str:
    return f"{stem}.share{i}.pbm"


@dataclass(frozen=True)
class ShareSet:
    scheme: SchemeParams
    shares: tuple[Bitmap, ...]
    master_seed: int
    policy: EncodingPolicy
    width: int = field(init=False)
    height: int = field(init=False)

    def __post_init__(self):
        if len(self.shares) != self.scheme.n:
            raise ValueError(f"expected {self.scheme.n} shares, got {len(self.shares)}")
        shapes = {s.shape for s in self.shares}
        if len(shapes) != 1:
            raise ValueError(f"shares differ in size: {sorted(shapes)}")
        (shape,) = shapes
        object.__setattr__(self, "height", shape[0])
        object.__setattr__(self, "width", shape[1])

    def __getitem__(self, i: int) -> Bitmap:
        return self.shares[i]

    def __len__(self):
        return len(self.shares)

    def manifest(self, stem: str = "secret") -> dict:
        return {
            "scheme": {"k": self.scheme.k, "n": self.scheme.n},
            "policy": str(self.policy),
            "seed": self.master_seed,
            "width": self.width,
            "height": self.height,
            "shares": [share_filename(stem, i) for i in range(1, self.scheme.n + 1)],
        }

    def save(self, out_dir: str | os.PathLike, stem: str = "secret", binary: bool = True) -> Path:
        """Write ``<stem>.share<i>.pbm`` for every share plus ``<stem>.manifest.json``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        manifest = self.manifest(stem)
        for name, share in zip(manifest["shares"], self.shares):
            write_pbm(share, out / name, binary=binary)
        path = out / f"{stem}.manifest.json"
        path.write_text(json.dumps(manifest, indent=2) + "\n")
        return path


def encode_image(secret: Bitmap, policy: EncodingPolicy, seed: int) -> ShareSet:
    """Encode every pixel independently; pixel ``i`` (row-major) draws from
    stream ``(seed, i)``, so the result depends only on the inputs."""
    flat = secret.pixels.ravel()
    if flat.size == 0:
        raise ValueError("cannot encode an empty image")
    bits = encode_pixels(flat, policy, seed)
    shares = tuple(Bitmap(bits[:, i].reshape(secret.shape)) for i in range(policy.scheme.n))
    return ShareSet(policy.scheme, shares, seed, policy)


def reconstruct(shares: Sequence[Bitmap], op: StackOp | str) -> Bitmap:
    """Stack shares pixelwise with OR (physical overlay) or XOR."""
    if len(shares) == 0:
        raise ValueError("need at least one share to reconstruct")
    shapes = {s.shape for s in shares}
    if len(shapes) != 1:
        raise ValueError(f"share dimensions differ: {sorted(shapes)}")
    stacked = np.stack([s.pixels for s in shares])
    if StackOp.parse(op) is StackOp.OR:
        return Bitmap(np.bitwise_or.reduce(stacked, axis=0))
    return Bitmap(np.bitwise_xor.reduce(stacked, axis=0))


def measure_transmission(recon: Bitmap, secret: Bitmap, region: int) -> Ratio:
    """Fraction of white pixels in ``recon`` where ``secret`` has color ``region``."""
    if region not in (0, 1):
        raise ValueError(f"region must be 0 or 1, got {region!r}")
    if recon.shape != secret.shape:
        raise ValueError(f"dimension mismatch: {recon.shape} vs {secret.shape}")
    inside = secret.pixels == region
    total = int(inside.sum())
    if total == 0:
        raise ValueError(f"secret has no pixels of color {region}")
    white = int((recon.pixels[inside] == 0).sum())
    return Ratio(white, total)


# -- PBM ---------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\v\f"


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self) -> None:
        data = self.data
        while self.pos < len(data):
            c = data[self.pos : self.pos + 1]
            if c == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif c in _WHITESPACE:
                self.pos += 1
            else:
                return

    def integer(self, what: str) -> int:
        self.skip_space()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1].isdigit():
            self.pos += 1
        if start == self.pos:
            raise PBMError(f"expected {what}", start)
        value = int(self.data[start : self.pos])
        if value <= 0:
            raise PBMError(f"{what} must be positive, got {value}", start)
        return value


def _parse_pbm(data: bytes) -> Bitmap:
    if len(data) < 2:
        raise PBMError("file too short for a PBM header", len(data))
    magic = data[:2]
    if magic not in (b"P1", b"P4"):
        raise PBMError(f"unsupported magic number {magic!r}", 0)
    reader = _Reader(data)
    reader.pos = 2
    if reader.pos < len(data) and data[2:3] not in _WHITESPACE + b"#":
        raise PBMError("missing whitespace after magic number", 2)
    width = reader.integer("width")
    height = reader.integer("height")

    if magic == b"P4":
        if reader.pos >= len(data) or data[reader.pos : reader.pos + 1] not in _WHITESPACE:
            raise PBMError("expected a single whitespace byte before raster", reader.pos)
        start = reader.pos + 1
        row_bytes = (width + 7) // 8
        need = row_bytes * height
        raster = data[start : start + need]
        if len(raster) < need:
            raise PBMError(f"truncated raster: need {need} bytes, found {len(raster)}", len(data))
        packed = np.frombuffer(raster, dtype=np.uint8).reshape(height, row_bytes)
        return Bitmap(np.unpackbits(packed, axis=1, bitorder="big")[:, :width])

    pixels = np.empty(width * height, dtype=np.uint8)
    for i in range(width * height):
        reader.skip_space()
        if reader.pos >= len(data):
            raise PBMError(f"truncated raster: got {i} of {width * height} pixels", reader.pos)
        c = data[reader.pos]
        if c not in (0x30, 0x31):
            raise PBMError(f"invalid pixel character {chr(c)!r}", reader.pos)
        pixels[i] = c - 0x30
        reader.pos += 1
    return Bitmap(pixels.reshape(height, width))


def read_pbm(source: str | os.PathLike | bytes | BinaryIO) -> Bitmap:
    """Read a P1 (ASCII) or P4 (packed) portable bitmap.

    ``source`` may be a path, the raw file bytes, or a binary stream.
    """
    if isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    return _parse_pbm(data)


def _format_pbm(bitmap: Bitmap, binary: bool) -> bytes:
    header = f"{'P4' if binary else 'P1'}\n{bitmap.width} {bitmap.height}\n".encode("ascii")
    if binary:
        # padding bits in the last byte of each row are zero
        return header + np.packbits(bitmap.pixels, axis=1, bitorder="big").tobytes()
    buf = io.StringIO()
    for row in bitmap.pixels:
        # keep lines under the 70 character limit
        for start in range(0, len(row), 35):
            buf.write(" ".join("1" if p else "0" for p in row[start : start + 35]))
            buf.write("\n")
    return header + buf.getvalue().encode("ascii")


def write_pbm(
    bitmap: Bitmap, dest: str | os.PathLike | BinaryIO | None = None, binary: bool = True
) -> bytes:
    """Serialise ``bitmap`` as P4 (default) or P1; writes to ``dest`` if given
    and returns the encoded bytes either way."""
    data = _format_pbm(bitmap, binary)
    if isinstance(dest, (str, os.PathLike)):
        Path(dest).write_bytes(data)
    elif dest is not None:
        dest.write(data)
    return data

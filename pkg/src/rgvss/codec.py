"""Per-pixel share generation and OR/XOR stacking.

Generation for a secret pixel ``s`` under the fixed (j, n) threshold:

1. pick a uniformly random j-subset of the n share positions;
2. fill it with a (j, j) parity core: j - 1 unbiased bits, plus one bit
   chosen so the XOR of all j core bits equals ``s``;
3. fill the remaining n - j positions with unbiased bits.

The averaged policy first draws j uniformly from k..n. Every share on its
own is a fair coin per pixel, whatever ``s`` is.

Randomness comes from a :class:`BitSource`. For images and Monte Carlo
runs the source is :class:`PixelStream`, a counter-based generator: the
w-th 64-bit word used for pixel ``index`` under ``seed`` is::

    key  = mix64(mix64(seed) ^ index)
    word = mix64(key + (w + 1) * 0x9E3779B97F4A7C15)      (mod 2**64)

where ``mix64`` is the SplitMix64 finalizer. ``randbelow(m)`` is
``word % m`` and ``getrandbits(b)`` is the low ``b`` bits of one word, one
word per call. Because each pixel's words depend only on
``(seed, index)``, output does not depend on processing order, and
:func:`encode_pixels` (vectorised) agrees bit for bit with
:func:`encode_pixel` (scalar).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol, Sequence

import numpy as np

from .analytic import SchemeParams, StackOp
from .numeric import binom

__all__ = [
    "BitSource",
    "PixelStream",
    "EncodingPolicy",
    "mix64",
    "pixel_word",
    "encode_kk",
    "encode_pixel_fixed",
    "encode_pixel_averaged",
    "encode_pixel",
    "encode_pixels",
    "encode_masks",
    "stack",
    "combination",
]

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


class BitSource(Protocol):
    def randbelow(self, m: int) -> int: ...

    def getrandbits(self, k: int) -> int: ...


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def pixel_word(seed: int, index: int, counter: int) -> int:
    key = mix64(mix64(seed) ^ (index & MASK64))
    return mix64(key + (counter + 1) * GOLDEN)


class PixelStream:
    """Deterministic bit source for one pixel (or one Monte Carlo trial)."""

    def __init__(self, seed: int, index: int):
        self.seed = seed & MASK64
        self.index = index
        self._counter = 0

    def _next(self) -> int:
        word = pixel_word(self.seed, self.index, self._counter)
        self._counter += 1
        return word

    def randbelow(self, m: int) -> int:
        if m < 1:
            raise ValueError("randbelow needs m >= 1")
        return self._next() % m

    def getrandbits(self, k: int) -> int:
        if not 0 <= k <= 64:
            raise ValueError("getrandbits supports 0..64 bits")
        return self._next() & ((1 << k) - 1)


@dataclass(frozen=True)
class EncodingPolicy:
    """Which threshold sub-scheme produces each pixel.

    ``j=None`` is the averaged policy (j uniform over k..n per pixel);
    otherwise every pixel uses the fixed (j, n) threshold.
    """

    scheme: SchemeParams
    j: int | None = None

    def __post_init__(self):
        if self.j is not None and not self.scheme.k <= self.j <= self.scheme.n:
            raise ValueError(
                f"fixed threshold j={self.j} outside {self.scheme.k}..{self.scheme.n}"
            )

    @classmethod
    def averaged(cls, scheme: SchemeParams) -> "EncodingPolicy":
        return cls(scheme)

    @classmethod
    def fixed(cls, scheme: SchemeParams, j: int) -> "EncodingPolicy":
        return cls(scheme, j)

    @classmethod
    def parse(cls, text: str, scheme: SchemeParams) -> "EncodingPolicy":
        """Parse ``"averaged"`` or ``"fixed:<j>"``."""
        text = text.strip().lower()
        if text == "averaged":
            return cls(scheme)
        name, _, arg = text.partition(":")
        if name == "fixed" and arg.strip().isdigit():
            return cls(scheme, int(arg))
        raise ValueError(f"unknown policy {text!r}; use 'averaged' or 'fixed:<j>'")

    @property
    def is_averaged(self) -> bool:
        return self.j is None

    @property
    def thresholds(self) -> range:
        if self.j is None:
            return range(self.scheme.k, self.scheme.n + 1)
        return range(self.j, self.j + 1)

    def __str__(self):
        return "averaged" if self.j is None else f"fixed:{self.j}"


@lru_cache(maxsize=None)
def _combinations(n: int, j: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(n), j))


def combination(n: int, j: int, rank: int) -> tuple[int, ...]:
    """The ``rank``-th j-subset of ``range(n)`` in lexicographic order."""
    return _combinations(n, j)[rank]


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def encode_kk(s: int, k: int, rand: BitSource) -> list[int]:
    """(k, k) parity core: XOR of the returned bits is ``s``."""
    if k < 2:
        raise ValueError(f"core size must be at least 2, got {k}")
    if s not in (0, 1):
        raise ValueError(f"secret pixel must be 0 or 1, got {s!r}")
    word = rand.getrandbits(k - 1)
    bits = [(word >> i) & 1 for i in range(k - 1)]
    bits.append(_parity(word) ^ s)
    return bits


def encode_pixel_fixed(s: int, j: int, n: int, rand: BitSource) -> list[int]:
    if not 2 <= j <= n:
        raise ValueError(f"need 2 <= j <= n, got j={j}, n={n}")
    positions = combination(n, j, rand.randbelow(binom(n, j)))
    core = encode_kk(s, j, rand)
    filler = rand.getrandbits(n - j)
    out = [0] * n
    for p, bit in zip(positions, core):
        out[p] = bit
    rest = (p for p in range(n) if p not in positions)
    for i, p in enumerate(rest):
        out[p] = (filler >> i) & 1
    return out


def encode_pixel_averaged(s: int, scheme: SchemeParams, rand: BitSource) -> list[int]:
    j = scheme.k + rand.randbelow(scheme.n - scheme.k + 1)
    return encode_pixel_fixed(s, j, scheme.n, rand)


def encode_pixel(s: int, policy: EncodingPolicy, rand: BitSource) -> list[int]:
    if policy.j is None:
        return encode_pixel_averaged(s, policy.scheme, rand)
    return encode_pixel_fixed(s, policy.j, policy.scheme.n, rand)


def stack(bits: Sequence[int], op: StackOp | str) -> int:
    """Combine one pixel from several shares: OR (black if any black) or XOR."""
    if len(bits) == 0:
        raise ValueError("cannot stack an empty set of shares")
    if StackOp.parse(op) is StackOp.OR:
        return int(any(bits))
    return sum(bits) & 1


# -- vectorised path ---------------------------------------------------------
#
# Pixels are handled as bitmasks (bit i = share i). A pixel is first built
# in "slot order" (core bits in slots 0..j-1, filler bits after) and then
# scattered to share positions by the subset chosen for it.

_TABLE_LIMIT = 1 << 22


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class _Layout:
    sizes: np.ndarray  # C(n, j) per j
    offsets: np.ndarray  # first subset id for each j
    positions: np.ndarray  # [subset id, slot] -> share position
    scatter: np.ndarray | None  # [subset id << n | slot word] -> share mask


@lru_cache(maxsize=None)
def _layout(n: int) -> _Layout:
    sizes = np.ones(n + 1, dtype=np.uint64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    rows = []
    for j in range(n + 1):
        offsets[j] = len(rows)
        subsets = _combinations(n, j) if j >= 2 else ()
        if j >= 2:
            sizes[j] = len(subsets)
        for core in subsets:
            rows.append(list(core) + [p for p in range(n) if p not in core])
    positions = np.array(rows, dtype=np.uint64).reshape(len(rows), n)

    scatter = None
    if len(rows) << n <= _TABLE_LIMIT:
        slot_words = np.arange(1 << n, dtype=np.uint64)
        scatter = np.zeros((len(rows), 1 << n), dtype=np.uint64)
        for slot in range(n):
            bit = (slot_words >> np.uint64(slot)) & np.uint64(1)
            scatter |= bit[None, :] << positions[:, slot][:, None]
        scatter = scatter.ravel()
    return _Layout(sizes, offsets, positions, scatter)


def encode_masks(
    secret: np.ndarray,
    policy: EncodingPolicy,
    seed: int,
    indices: np.ndarray | None = None,
) -> np.ndarray:
    """Like :func:`encode_pixels` but returns one ``uint64`` bitmask per pixel
    (bit i set = share i black)."""
    secret = np.asarray(secret).ravel()
    if secret.size and (secret.min() < 0 or secret.max() > 1):
        raise ValueError("secret pixels must be 0 or 1")
    secret = secret.astype(np.uint64)
    if indices is None:
        indices = np.arange(secret.size, dtype=np.uint64)
    else:
        indices = np.asarray(indices, dtype=np.uint64).ravel()
        if indices.shape != secret.shape:
            raise ValueError("indices and secret must have the same length")
    n, k = policy.scheme.n, policy.scheme.k
    if n > 64:
        raise ValueError("at most 64 shares are supported")
    keys = _mix64_array(np.uint64(mix64(seed)) ^ indices)

    def word(counter: int) -> np.ndarray:
        return _mix64_array(keys + np.uint64(((counter + 1) * GOLDEN) & MASK64))

    one = np.uint64(1)
    counter = 0
    if policy.j is None:
        j = np.uint64(k) + word(counter) % np.uint64(n - k + 1)
        counter += 1
        lay = _layout(n)
        rank = word(counter) % lay.sizes[j]
        subset = lay.offsets[j] + rank.astype(np.int64)
    else:
        j = np.uint64(policy.j)
        lay = _layout(n)
        rank = word(counter) % lay.sizes[policy.j]
        subset = lay.offsets[policy.j] + rank.astype(np.int64)

    free = (one << (j - one)) - one
    core = word(counter + 1) & free
    parity = (np.bitwise_count(core) & np.uint8(1)).astype(np.uint64) ^ secret
    filler = word(counter + 2) & ((one << (np.uint64(n) - j)) - one)
    slots = core | (parity << (j - one)) | (filler << j)

    if lay.scatter is not None:
        return lay.scatter[(subset << n) + slots.astype(np.int64)]
    masks = np.zeros(secret.size, dtype=np.uint64)
    for slot in range(n):
        bit = (slots >> np.uint64(slot)) & one
        masks |= bit << lay.positions[subset, slot]
    return masks


def encode_pixels(
    secret: np.ndarray,
    policy: EncodingPolicy,
    seed: int,
    indices: np.ndarray | None = None,
) -> np.ndarray:
    """Encode many pixels at once.

    Parameters
    ----------
    secret : ndarray
        Flat array of 0/1 secret pixels.
    policy : EncodingPolicy
    seed : int
        Master seed of the :class:`PixelStream` family.
    indices : ndarray, optional
        Stream index of each pixel; defaults to ``arange(len(secret))``.

    Returns
    -------
    ndarray
        ``uint8`` array of shape ``(len(secret), n)``; column i is share i.
        Row r equals ``encode_pixel(secret[r], policy, PixelStream(seed, indices[r]))``.
    """
    masks = encode_masks(secret, policy, seed, indices)
    shifts = np.arange(policy.scheme.n, dtype=np.uint64)
    return ((masks[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)

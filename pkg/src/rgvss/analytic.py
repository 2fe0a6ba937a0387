"""Closed-form light transmission and contrast for the averaged (k, n) scheme.

A pixel of the averaged scheme is produced by one of the fixed-threshold
sub-schemes (j, n), j = k..n, picked uniformly. Its expected light
transmission after stacking ``t`` shares is therefore the mean of the
fixed-threshold transmissions. Contrast compares the white-region and
black-region transmissions::

    alpha = (T0 - T1) / (1 + T1)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .numeric import Ratio, as_ratio, binom, ratio

__all__ = [
    "SchemeParams",
    "StackOp",
    "TransmissionSpec",
    "ContrastRow",
    "CorrigendumRow",
    "CLAIMED_CONTRAST",
    "fixed_or_transmission",
    "fixed_xor_transmission",
    "fixed_transmission",
    "avg_transmission",
    "contrast",
    "scheme_contrast",
    "contrast_table",
    "corrigendum_report",
]

HALF = ratio(1, 2)


class StackOp(str, enum.Enum):
    OR = "or"
    XOR = "xor"

    @classmethod
    def parse(cls, value: "StackOp | str") -> "StackOp":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown stacking operation {value!r}; use 'or' or 'xor'") from None


@dataclass(frozen=True, order=True)
class SchemeParams:
    """Threshold ``k`` out of ``n`` shares, ``2 <= k <= n``."""

    k: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and isinstance(self.n, int)):
            raise TypeError("k and n must be integers")
        if self.k < 2:
            raise ValueError(f"threshold k must be at least 2, got k={self.k}")
        if self.n < self.k:
            raise ValueError(f"need k <= n, got k={self.k}, n={self.n}")

    def __str__(self):
        return f"({self.k},{self.n})"


@dataclass(frozen=True)
class TransmissionSpec:
    """One expected transmission: stack shares 1..t of ``scheme`` with ``op``
    over secret pixels of color ``s``."""

    scheme: SchemeParams
    t: int
    op: StackOp
    s: int

    def __post_init__(self):
        object.__setattr__(self, "op", StackOp.parse(self.op))
        if not 1 <= self.t <= self.scheme.n:
            raise ValueError(f"need 1 <= t <= n={self.scheme.n}, got t={self.t}")
        if self.s not in (0, 1):
            raise ValueError(f"secret pixel must be 0 or 1, got {self.s!r}")


@dataclass(frozen=True)
class ContrastRow:
    scheme: SchemeParams
    t: int
    alpha_or: Ratio
    alpha_xor: Ratio
    t0_or: Ratio
    t1_or: Ratio
    t0_xor: Ratio
    t1_xor: Ratio


def _check_fixed(k: int, n: int, t: int, s: int) -> None:
    SchemeParams(k, n)
    if not 1 <= t <= n:
        raise ValueError(f"need 1 <= t <= n={n}, got t={t}")
    if s not in (0, 1):
        raise ValueError(f"secret pixel must be 0 or 1, got {s!r}")


def fixed_or_transmission(k: int, n: int, t: int, s: int) -> Ratio:
    """White probability of OR-stacking shares 1..t of the fixed (k, n) scheme.

    With ``p = C(t,k)/C(n,k)`` (chance that all k correlated positions are
    among the stacked ones) the result is ``p/2**(t-1) + (1-p)/2**t`` for a
    white secret pixel and ``(1-p)/2**t`` for a black one. Below threshold
    both collapse to ``1/2**t``.
    """
    _check_fixed(k, n, t, s)
    if t < k:
        return HALF**t
    p = ratio(binom(t, k), binom(n, k))
    if s == 0:
        return p * HALF ** (t - 1) + (1 - p) * HALF**t
    return (1 - p) * HALF**t


def fixed_xor_transmission(k: int, n: int, t: int, s: int) -> Ratio:
    """White probability of XOR-stacking shares 1..t of the fixed (k, n) scheme."""
    _check_fixed(k, n, t, s)
    if t != k:
        return HALF
    q = ratio(1, binom(n, k))
    return HALF * (1 + q) if s == 0 else HALF * (1 - q)


def fixed_transmission(k: int, n: int, t: int, op: StackOp | str, s: int) -> Ratio:
    if StackOp.parse(op) is StackOp.OR:
        return fixed_or_transmission(k, n, t, s)
    return fixed_xor_transmission(k, n, t, s)


def avg_transmission(spec: TransmissionSpec) -> Ratio:
    """Mean of the fixed (j, n) transmissions over j = k..n."""
    k, n = spec.scheme.k, spec.scheme.n
    total = sum(
        (fixed_transmission(j, n, spec.t, spec.op, spec.s) for j in range(k, n + 1)),
        Ratio(0),
    )
    return total / (n - k + 1)


def contrast(t0: Ratio, t1: Ratio) -> Ratio:
    """``(t0 - t1) / (1 + t1)``; raises if the black region is lighter."""
    t0, t1 = as_ratio(t0), as_ratio(t1)
    if t0 < t1:
        raise ValueError(f"white-region transmission {t0} is below black-region {t1}")
    return (t0 - t1) / (1 + t1)


def scheme_contrast(scheme: SchemeParams, t: int, op: StackOp | str) -> Ratio:
    t0 = avg_transmission(TransmissionSpec(scheme, t, op, 0))
    t1 = avg_transmission(TransmissionSpec(scheme, t, op, 1))
    return contrast(t0, t1)


def contrast_table(scheme: SchemeParams) -> list[ContrastRow]:
    rows = []
    for t in range(scheme.k, scheme.n + 1):
        tr = {
            (op, s): avg_transmission(TransmissionSpec(scheme, t, op, s))
            for op in StackOp
            for s in (0, 1)
        }
        rows.append(
            ContrastRow(
                scheme=scheme,
                t=t,
                alpha_or=contrast(tr[StackOp.OR, 0], tr[StackOp.OR, 1]),
                alpha_xor=contrast(tr[StackOp.XOR, 0], tr[StackOp.XOR, 1]),
                t0_or=tr[StackOp.OR, 0],
                t1_or=tr[StackOp.OR, 1],
                t0_xor=tr[StackOp.XOR, 0],
                t1_xor=tr[StackOp.XOR, 1],
            )
        )
    return rows


# Contrast values (alpha_OR, alpha_XOR) as originally published for the
# OR/XOR random-grid scheme, before correction. Static reference data:
# nothing in this package can or should reproduce them.
CLAIMED_CONTRAST: dict[tuple[int, int, int], tuple[Ratio, Ratio]] = {
    (2, 3, 2): (ratio(1, 10), ratio(1, 6)),
    (2, 3, 3): (ratio(5, 17), ratio(2, 5)),
    (2, 4, 2): (ratio(1, 15), ratio(1, 9)),
    (2, 4, 3): (ratio(14, 107), ratio(2, 57)),
    (2, 4, 4): (ratio(11, 49), ratio(3, 8)),
    (3, 5, 3): (ratio(2, 269), ratio(2, 89)),
    (3, 5, 4): (ratio(3, 126), ratio(1, 27)),
    (3, 5, 5): (ratio(1, 16), ratio(1, 4)),
    (4, 5, 4): (ratio(2, 169), ratio(1, 29)),
    (4, 5, 5): (ratio(1, 16), ratio(2, 5)),
}


@dataclass(frozen=True)
class CorrigendumRow:
    scheme: SchemeParams
    t: int
    claimed_or: Ratio
    claimed_xor: Ratio
    corrected_or: Ratio
    corrected_xor: Ratio

    @property
    def or_match(self) -> bool:
        return self.claimed_or == self.corrected_or

    @property
    def xor_match(self) -> bool:
        return self.claimed_xor == self.corrected_xor


def corrigendum_report() -> list[CorrigendumRow]:
    """Published contrast values next to the recomputed ones, row by row."""
    tables: dict[SchemeParams, dict[int, ContrastRow]] = {}
    report = []
    for (k, n, t), (claimed_or, claimed_xor) in CLAIMED_CONTRAST.items():
        scheme = SchemeParams(k, n)
        if scheme not in tables:
            tables[scheme] = {row.t: row for row in contrast_table(scheme)}
        row = tables[scheme][t]
        report.append(
            CorrigendumRow(scheme, t, claimed_or, claimed_xor, row.alpha_or, row.alpha_xor)
        )
    return report

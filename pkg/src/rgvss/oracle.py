"""Ground truth for the generator: exhaustive enumeration and Monte Carlo.

Enumeration runs the scalar encoder against a scripted bit source that
walks every possible answer to every random request, weighting each
execution path by the product of ``1/m`` over its ``randbelow(m)`` calls.
It never consults the closed-form formulas, so agreement between the two
is a real check of the generator.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterator, Sequence

import numpy as np

from .analytic import (
    SchemeParams,
    StackOp,
    TransmissionSpec,
    avg_transmission,
    contrast,
    fixed_transmission,
)
from .codec import EncodingPolicy, encode_masks, encode_pixel, mix64, stack
from .numeric import Ratio, binom

__all__ = [
    "DEFAULT_ENUM_CAP",
    "CHUNK_SIZE",
    "EnumerationCapError",
    "EnumerationResult",
    "McEstimate",
    "CheckResult",
    "VerificationReport",
    "enum_cap",
    "share_distribution",
    "enumerate_transmission",
    "enumerate_all_subsets_check",
    "monte_carlo_counts",
    "monte_carlo_transmission",
    "closed_form",
    "verify_scheme",
]

DEFAULT_ENUM_CAP = 8
CHUNK_SIZE = 1 << 16


class EnumerationCapError(ValueError):
    pass


def enum_cap() -> int:
    """Largest ``n`` that may be enumerated; ``RGVSS_ENUM_CAP`` overrides."""
    raw = os.environ.get("RGVSS_ENUM_CAP")
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"RGVSS_ENUM_CAP must be an integer, got {raw!r}") from None


def path_count(policy: EncodingPolicy) -> int:
    n = policy.scheme.n
    return sum(binom(n, j) for j in policy.thresholds) * 2 ** (n - 1)


def _check_cap(policy: EncodingPolicy, cap: int | None) -> None:
    cap = enum_cap() if cap is None else cap
    n = policy.scheme.n
    if n > cap:
        raise EnumerationCapError(
            f"n={n} exceeds enumeration cap {cap} "
            f"({path_count(policy)} execution paths per secret pixel)"
        )


# -- enumeration -------------------------------------------------------------


class _ScriptedSource:
    """Bit source that replays ``script`` and extends it with zeros.

    Each entry is ``[answer, radix]``; ``getrandbits(b)`` is one request
    with radix ``2**b``.
    """

    def __init__(self, script: list[list[int]]):
        self.script = script
        self.pos = 0

    def _draw(self, radix: int) -> int:
        if radix == 1:
            return 0
        if self.pos < len(self.script):
            answer, expected = self.script[self.pos]
            if expected != radix:
                raise RuntimeError("encoder made data-dependent request sizes out of order")
        else:
            answer = 0
            self.script.append([0, radix])
        self.pos += 1
        return answer

    def randbelow(self, m: int) -> int:
        return self._draw(m)

    def getrandbits(self, k: int) -> int:
        return self._draw(1 << k)


def execution_paths(fn: Callable[[_ScriptedSource], object]) -> Iterator[tuple[Ratio, object]]:
    """Yield ``(probability, result)`` for every way ``fn`` can consume randomness."""
    script: list[list[int]] = []
    while True:
        source = _ScriptedSource(script)
        result = fn(source)
        del script[source.pos :]
        weight = Ratio(1, math.prod(radix for _, radix in script))
        yield weight, result
        while script and script[-1][0] == script[-1][1] - 1:
            script.pop()
        if not script:
            return
        script[-1][0] += 1


@lru_cache(maxsize=256)
def share_distribution(policy: EncodingPolicy, s: int) -> tuple[dict[tuple[int, ...], Ratio], int]:
    """Exact distribution of the n-bit share vector for secret pixel ``s``.

    Returns ``(probabilities, number_of_execution_paths)``.
    """
    dist: dict[tuple[int, ...], Ratio] = {}
    paths = 0
    for weight, bits in execution_paths(lambda src: tuple(encode_pixel(s, policy, src))):
        dist[bits] = dist.get(bits, Ratio(0)) + weight
        paths += 1
    return dist, paths


@dataclass(frozen=True)
class EnumerationResult:
    spec: TransmissionSpec
    policy: EncodingPolicy
    exact: Ratio
    outcome_count: int
    shares: tuple[int, ...] = ()


def enumerate_transmission(
    policy: EncodingPolicy,
    spec: TransmissionSpec,
    shares: Sequence[int] | None = None,
    cap: int | None = None,
) -> EnumerationResult:
    """Exact white probability after stacking ``shares`` (default: the first
    ``spec.t``, zero-based) over every execution path of the encoder."""
    if spec.scheme != policy.scheme:
        raise ValueError(f"spec scheme {spec.scheme} does not match policy scheme {policy.scheme}")
    _check_cap(policy, cap)
    chosen = tuple(range(spec.t)) if shares is None else tuple(shares)
    if len(chosen) != spec.t or len(set(chosen)) != spec.t:
        raise ValueError(f"need {spec.t} distinct share indices, got {chosen}")
    if not all(0 <= i < policy.scheme.n for i in chosen):
        raise ValueError(f"share indices must lie in 0..{policy.scheme.n - 1}")
    dist, paths = share_distribution(policy, spec.s)
    white = Ratio(0)
    for bits, p in dist.items():
        if stack([bits[i] for i in chosen], spec.op) == 0:
            white += p
    return EnumerationResult(spec, policy, white, paths, chosen)


def enumerate_all_subsets_check(
    policy: EncodingPolicy, t: int, op: StackOp | str, s: int, cap: int | None = None
) -> bool:
    """True iff every t-subset of the shares has the same enumerated transmission."""
    spec = TransmissionSpec(policy.scheme, t, op, s)
    values = {
        enumerate_transmission(policy, spec, subset, cap).exact
        for subset in combinations(range(policy.scheme.n), t)
    }
    return len(values) == 1


# -- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class McEstimate:
    spec: TransmissionSpec
    trials: int
    white_count: int
    estimate: float = field(init=False)
    stderr: float = field(init=False)

    def __post_init__(self):
        p = self.white_count / self.trials
        object.__setattr__(self, "estimate", p)
        object.__setattr__(self, "stderr", math.sqrt(p * (1 - p) / self.trials))

    def deviation(self, exact: Ratio) -> float:
        """Distance from ``exact`` in standard errors (inf if stderr is 0 and they differ)."""
        diff = abs(self.estimate - float(exact))
        if self.stderr == 0:
            return 0.0 if self.white_count * exact.denominator == exact.numerator * self.trials else math.inf
        return diff / self.stderr


def _trial_seed(seed: int, s: int) -> int:
    # white and black pixels use disjoint trial streams
    return mix64(seed * 2 + s)


def _count_chunk(policy: EncodingPolicy, s: int, seed: int, start: int, stop: int, masks_t):
    idx = np.arange(start, stop, dtype=np.uint64)
    masks = encode_masks(np.full(idx.size, s, dtype=np.uint8), policy, seed, idx)
    counts = {}
    for t, tmask in masks_t:
        hit = masks & np.uint64(tmask)
        counts[t, StackOp.OR] = int(np.count_nonzero(hit == 0))
        counts[t, StackOp.XOR] = int(np.count_nonzero((np.bitwise_count(hit) & np.uint8(1)) == 0))
    return counts


def monte_carlo_counts(
    policy: EncodingPolicy,
    s: int,
    trials: int,
    seed: int,
    ts: Sequence[int] | None = None,
    workers: int = 1,
) -> dict[tuple[int, StackOp], int]:
    """White counts for stacking shares 1..t, for every ``t`` in ``ts`` and both ops.

    Trial ``i`` encodes with stream index ``i`` of a seed derived from
    ``(seed, s)``; trials are processed in chunks of :data:`CHUNK_SIZE`,
    so the counts do not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if s not in (0, 1):
        raise ValueError(f"secret pixel must be 0 or 1, got {s!r}")
    n = policy.scheme.n
    ts = tuple(range(1, n + 1)) if ts is None else tuple(ts)
    masks_t = [(t, (1 << t) - 1) for t in ts]
    trial_seed = _trial_seed(seed, s)
    bounds = [(a, min(a + CHUNK_SIZE, trials)) for a in range(0, trials, CHUNK_SIZE)]

    def run(b):
        return _count_chunk(policy, s, trial_seed, b[0], b[1], masks_t)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    total = {key: 0 for key in parts[0]}
    for part in parts:
        for key, value in part.items():
            total[key] += value
    return total


def monte_carlo_transmission(
    policy: EncodingPolicy, spec: TransmissionSpec, trials: int, seed: int, workers: int = 1
) -> McEstimate:
    if spec.scheme != policy.scheme:
        raise ValueError(f"spec scheme {spec.scheme} does not match policy scheme {policy.scheme}")
    counts = monte_carlo_counts(policy, spec.s, trials, seed, ts=(spec.t,), workers=workers)
    return McEstimate(spec, trials, counts[spec.t, spec.op])


# -- orchestration -----------------------------------------------------------


def closed_form(policy: EncodingPolicy, spec: TransmissionSpec) -> Ratio:
    if policy.j is None:
        return avg_transmission(spec)
    return fixed_transmission(policy.j, spec.scheme.n, spec.t, spec.op, spec.s)


@dataclass(frozen=True)
class CheckResult:
    spec: TransmissionSpec
    closed_form: Ratio
    enumerated: Ratio
    mc: McEstimate
    sigma: float

    @property
    def exact_ok(self) -> bool:
        return self.closed_form == self.enumerated

    @property
    def mc_ok(self) -> bool:
        return self.mc.deviation(self.closed_form) <= self.sigma

    @property
    def passed(self) -> bool:
        return self.exact_ok and self.mc_ok

    def to_json(self) -> dict:
        return {
            "t": self.spec.t,
            "op": self.spec.op.value,
            "s": self.spec.s,
            "closed_form": self.closed_form.to_json(),
            "enumerated": self.enumerated.to_json(),
            "mc_estimate": self.mc.estimate,
            "mc_stderr": self.mc.stderr,
            "mc_trials": self.mc.trials,
            "exact_ok": self.exact_ok,
            "mc_ok": self.mc_ok,
        }


@dataclass(frozen=True)
class VerificationReport:
    policy: EncodingPolicy
    checks: tuple[CheckResult, ...]
    contrasts: dict[tuple[int, StackOp], Ratio]

    @property
    def scheme(self) -> SchemeParams:
        return self.policy.scheme

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "scheme": {"k": self.scheme.k, "n": self.scheme.n},
            "policy": str(self.policy),
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "contrast": [
                {"t": t, "op": op.value, "alpha": a.to_json()}
                for (t, op), a in sorted(self.contrasts.items(), key=lambda kv: (kv[0][0], kv[0][1].value))
            ],
        }


def verify_scheme(
    scheme: SchemeParams,
    trials: int = 100_000,
    seed: int = 0,
    policy: EncodingPolicy | None = None,
    sigma: float = 5.0,
    cap: int | None = None,
) -> VerificationReport:
    """Compare closed form, enumeration and Monte Carlo for every t, op and s."""
    policy = EncodingPolicy.averaged(scheme) if policy is None else policy
    if policy.scheme != scheme:
        raise ValueError("policy belongs to a different scheme")
    _check_cap(policy, cap)
    counts = {s: monte_carlo_counts(policy, s, trials, seed) for s in (0, 1)}
    checks = []
    enumerated = {}
    for t in range(1, scheme.n + 1):
        for op in StackOp:
            for s in (0, 1):
                spec = TransmissionSpec(scheme, t, op, s)
                exact = enumerate_transmission(policy, spec, cap=cap).exact
                enumerated[t, op, s] = exact
                mc = McEstimate(spec, trials, counts[s][t, op])
                checks.append(CheckResult(spec, closed_form(policy, spec), exact, mc, sigma))
    contrasts = {}
    for t in range(1, scheme.n + 1):
        for op in StackOp:
            t0, t1 = enumerated[t, op, 0], enumerated[t, op, 1]
            if t0 >= t1:
                contrasts[t, op] = contrast(t0, t1)
    return VerificationReport(policy, tuple(checks), contrasts)

"""Probability distributions over fixed-length bitstrings.

Three representations: explicit weight tables, uniform distributions over a
support set, and distributions induced by stretching a short uniform seed
through a pseudorandom generator. The first two (and seed-enumerable
generator outputs) are exactly enumerable, which the entropy and oracle
layers rely on.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

from .gf2 import BitString

__all__ = [
    "DistributionSpec",
    "Explicit",
    "UniformSupport",
    "UniformAll",
    "PrgInduced",
    "ENUMERATION_SEED_CAP",
]

ENUMERATION_SEED_CAP = 20
_WEIGHT_SUM_TOL = 1e-12


class DistributionSpec:
    """Common surface for distributions over {0,1}^n."""

    n: int

    def sample(self, rng) -> BitString:
        raise NotImplementedError

    @property
    def enumerable(self) -> bool:
        raise NotImplementedError

    def weight_table(self) -> dict[BitString, float]:
        """Exact weights over the support; errors when not enumerable."""
        raise NotImplementedError

    def entropy_nats(self) -> float:
        table = self.weight_table()
        return -math.fsum(w * math.log(w) for w in table.values() if w > 0.0)


@dataclass(frozen=True)
class Explicit(DistributionSpec):
    """Arbitrary weights; stored order fixes the sampling inversion."""

    n: int
    weights: tuple[tuple[BitString, float], ...]
    _cdf: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValueError("weight table must be nonempty")
        seen = set()
        total = 0.0
        cdf = []
        for bits, w in self.weights:
            if bits.n != self.n:
                raise ValueError(f"weight key length {bits.n} != {self.n}")
            if bits in seen:
                raise ValueError(f"duplicate weight key {bits}")
            seen.add(bits)
            if w < 0.0:
                raise ValueError("weights must be >= 0")
            total += w
            cdf.append(total)
        if abs(total - 1.0) > max(_WEIGHT_SUM_TOL, 1e-14 * len(cdf)):
            raise ValueError(f"weights sum to {total}, expected 1")
        object.__setattr__(self, "_cdf", tuple(cdf))

    @classmethod
    def from_dict(cls, n: int, table: dict[BitString, float]) -> "Explicit":
        return cls(n, tuple(table.items()))

    @classmethod
    def point_mass(cls, bits: BitString) -> "Explicit":
        return cls(bits.n, ((bits, 1.0),))

    def sample(self, rng) -> BitString:
        u = float(rng.random())
        i = bisect.bisect_right(self._cdf, u)
        return self.weights[min(i, len(self.weights) - 1)][0]

    @property
    def enumerable(self) -> bool:
        return True

    def weight_table(self) -> dict[BitString, float]:
        return {bits: w for bits, w in self.weights if w > 0.0}


@dataclass(frozen=True)
class UniformSupport(DistributionSpec):
    """Uniform over an ordered set of distinct strings."""

    n: int
    support: tuple[BitString, ...]

    def __post_init__(self) -> None:
        if not self.support:
            raise ValueError("support must be nonempty")
        if any(b.n != self.n for b in self.support):
            raise ValueError("support elements must all have the declared length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support elements must be distinct")

    @classmethod
    def full(cls, n: int) -> "UniformSupport":
        return cls(n, tuple(BitString(n, v) for v in range(1 << n)))

    def sample(self, rng) -> BitString:
        return self.support[int(rng.integers(len(self.support)))]

    @property
    def enumerable(self) -> bool:
        return True

    def weight_table(self) -> dict[BitString, float]:
        w = 1.0 / len(self.support)
        return {bits: w for bits in self.support}

    def entropy_nats(self) -> float:
        return math.log(len(self.support))


@dataclass(frozen=True)
class UniformAll(DistributionSpec):
    """Uniform over all 2^n strings, without materializing the support."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("length must be >= 1")

    def sample(self, rng) -> BitString:
        return BitString.random(self.n, rng)

    @property
    def enumerable(self) -> bool:
        return self.n <= ENUMERATION_SEED_CAP

    def weight_table(self) -> dict[BitString, float]:
        if not self.enumerable:
            raise ValueError(f"2^{self.n} strings exceed the enumeration cap")
        w = 2.0 ** -self.n
        return {BitString(self.n, v): w for v in range(1 << self.n)}

    def entropy_nats(self) -> float:
        return self.n * math.log(2.0)


@dataclass(frozen=True)
class PrgInduced(DistributionSpec):
    """Output of a deterministic stretch applied to a uniform seed.

    When seed_len <= ENUMERATION_SEED_CAP the constructor may attach the
    exhaustive image table, enabling exact entropy; otherwise only the
    upper bound seed_len * log 2 is available.
    """

    n: int
    owf_id: str
    seed_len: int
    stretch_fn: Callable[[BitString], BitString] = field(compare=False, repr=False)
    params: tuple[tuple[str, object], ...] = ()
    image_table: tuple[tuple[BitString, float], ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.seed_len < 1:
            raise ValueError("seed length must be >= 1")
        if self.n < self.seed_len:
            raise ValueError("output length must be >= seed length")
        if self.image_table is not None and any(b.n != self.n for b, _ in self.image_table):
            raise ValueError("image table entries must have the output length")

    def sample(self, rng) -> BitString:
        seed = BitString.random(self.seed_len, rng)
        out = self.stretch_fn(seed)
        if out.n != self.n:
            raise ValueError(f"stretch produced {out.n} bits, expected {self.n}")
        return out

    @property
    def enumerable(self) -> bool:
        return self.image_table is not None

    def weight_table(self) -> dict[BitString, float]:
        if self.image_table is None:
            raise ValueError(
                f"seed length {self.seed_len} exceeds the enumeration cap; "
                "only the entropy bound is available"
            )
        return dict(self.image_table)

    def entropy_bound_nats(self) -> float:
        """Upper bound on the output entropy: one nat of log 2 per seed bit."""
        return self.seed_len * math.log(2.0)

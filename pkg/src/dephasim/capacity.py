"""Closed-form capacity and entropy accounting for dephasing channels.

The unbounded two-way capacity of a generalized dephasing channel equals
the divergence of its label distribution from uniform, n log 2 - S(p),
which also equals the coherent-information lower bound. Computational
capacities are reported as bounds with provenance notes, never as single
numbers: only regime-specific arguments give values, and one of them is
conditional on a cryptographic hardness assumption.

All values are held in nats; rendered reports carry both nats and bits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .channel import GeneralizedDephasingChannel
from .distributions import DistributionSpec, Explicit, PrgInduced, UniformAll, UniformSupport

__all__ = [
    "CapacityReport",
    "shannon_entropy",
    "divergence_to_uniform",
    "capacity_report",
]

LN2 = math.log(2.0)


def shannon_entropy(dist: DistributionSpec) -> float:
    """Exact -sum p log p in nats; requires an enumerable distribution."""
    if isinstance(dist, PrgInduced) and not dist.enumerable:
        raise ValueError(
            "distribution is not enumerable; use its entropy bound seed_len * log 2"
        )
    return dist.entropy_nats()


def divergence_to_uniform(dist: DistributionSpec) -> float:
    """D(p || u) = n log 2 - S(p) in nats."""
    return dist.n * LN2 - shannon_entropy(dist)


@dataclass(frozen=True)
class CapacityReport:
    """Capacity summary for one channel.

    ``divergence_to_uniform`` is the unbounded two-way capacity and always
    equals ``coherent_info_lower``; computational bounds are present only
    in regimes where an argument supplies them.
    """

    n: int
    regime: str
    entropy_p: float
    entropy_is_bound: bool
    divergence_to_uniform: float
    coherent_info_lower: float
    computational_lower: float | None
    computational_upper: float | None
    assumption_conditional: bool
    provenance_notes: tuple[str, ...]

    def to_dict(self) -> dict:
        both = lambda v: None if v is None else {"nats": v, "bits": v / LN2}
        return {
            "n": self.n,
            "regime": self.regime,
            "entropy": both(self.entropy_p),
            "entropy_is_bound": self.entropy_is_bound,
            "two_way_capacity": both(self.divergence_to_uniform),
            "coherent_info_lower": both(self.coherent_info_lower),
            "computational_lower": both(self.computational_lower),
            "computational_upper": both(self.computational_upper),
            "assumption_conditional": self.assumption_conditional,
            "provenance_notes": list(self.provenance_notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def capacity_report(channel: GeneralizedDephasingChannel, delta: float = 1e-3) -> CapacityReport:
    """Fill the unbounded quantities exactly and the computational bounds
    by regime.

    Uniform-support channels get an achievable rate (n - m) log 2 from the
    support-identification protocol with the failure budget ``delta``;
    generator-induced channels get a conditional zero upper bound; explicit
    weight tables get no computational bounds at all.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    dist = channel.dist
    n = channel.n
    notes: list[str] = []

    entropy_is_bound = False
    if isinstance(dist, PrgInduced) and not dist.enumerable:
        entropy = dist.entropy_bound_nats()
        entropy_is_bound = True
        notes.append(
            "seed space too large to enumerate: entropy is the upper bound "
            "seed_len * log 2, so the divergence value is a lower bound"
        )
    else:
        entropy = shannon_entropy(dist)
    divergence = n * LN2 - entropy

    lower: float | None = None
    upper: float | None = None
    conditional = False

    if isinstance(dist, (UniformSupport, UniformAll)):
        regime = "poly-support"
        size = (1 << n) if isinstance(dist, UniformAll) else len(dist.support)
        if size == 1:
            rate_m = 0
        else:
            raw = math.ceil(math.log2(size * size / delta))
            rate_m = min(raw, n - 1)
            if raw > n - 1:
                notes.append(
                    f"syndrome size clamped from {raw} to {n - 1}; the failure budget "
                    f"{delta} is not met at this block size"
                )
        lower = (n - rate_m) * LN2
        if lower > divergence:
            lower = divergence
            notes.append("achievable rate clamped by the unbounded capacity")
        upper = divergence
        notes.append(
            "computational_lower: achievable rate of the support-identification "
            "protocol; computational_upper: the unbounded capacity"
        )
    elif isinstance(dist, PrgInduced):
        regime = "prg-induced"
        upper = 0.0
        conditional = True
        notes.append(
            "assumption-conditional: computational_upper = 0 holds if the "
            "generator's core function is a quantum-secure one-to-one one-way "
            "function; reported as a cited claim, not a computed fact"
        )
    else:
        regime = "explicit"
        notes.append(
            "no general algorithm bounds the computational capacity of an "
            "arbitrary explicit weight table; bounds omitted"
        )

    return CapacityReport(
        n=n,
        regime=regime,
        entropy_p=entropy,
        entropy_is_bound=entropy_is_bound,
        divergence_to_uniform=divergence,
        coherent_info_lower=divergence,
        computational_lower=lower,
        computational_upper=upper,
        assumption_conditional=conditional,
        provenance_notes=tuple(notes),
    )

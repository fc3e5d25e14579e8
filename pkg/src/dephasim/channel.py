"""Generalized dephasing channels and their Choi mixtures.

A channel is specified by a distribution p over n-bit strings and acts as
rho -> sum_x p(x) Z^x rho Z^x. Its Choi state is the classical mixture of
Pauli-corrected maximally entangled states indexed by x; the production
representation is just (distribution, correction basis), and a dense
matrix is materialized only on explicit oracle request.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import dense_oracle, prg
from .dense_oracle import DenseState
from .distributions import DistributionSpec, Explicit, PrgInduced, UniformSupport
from .gf2 import BitString, PauliString

__all__ = [
    "GeneralizedDephasingChannel",
    "ChoiMixture",
    "sample_x",
    "choi_syndrome_sample",
    "apply_dense",
    "teleport_simulate",
    "channel_to_spec",
    "channel_from_spec",
    "load_channel_spec",
    "save_channel_spec",
]

TELEPORT_QUBIT_CAP = 3


@dataclass(frozen=True)
class GeneralizedDephasingChannel:
    """Applies Z^x with probability p(x) to an n-qubit input."""

    n: int
    dist: DistributionSpec

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("channel needs at least one qubit")
        if self.dist.n != self.n:
            raise ValueError(f"distribution length {self.dist.n} != channel size {self.n}")

    def choi(self) -> "ChoiMixture":
        return ChoiMixture(self.n, self.dist, basis="phase-flip")


@dataclass(frozen=True)
class ChoiMixture:
    """Choi state of a dephasing channel as a classical Pauli mixture.

    ``basis`` records whether corrections are phase flips Z^x or, after a
    Hadamard frame change on both halves, bit flips X^x.
    """

    n: int
    dist: DistributionSpec
    basis: str = "phase-flip"

    def __post_init__(self) -> None:
        if self.basis not in ("phase-flip", "bit-flip"):
            raise ValueError("basis must be 'phase-flip' or 'bit-flip'")
        if self.dist.n != self.n:
            raise ValueError("distribution length mismatch")

    def hadamard_frame(self) -> "ChoiMixture":
        """Toggle between phase-flip and bit-flip correction frames."""
        other = "bit-flip" if self.basis == "phase-flip" else "phase-flip"
        return replace(self, basis=other)

    def correction(self, x: BitString) -> PauliString:
        return PauliString.from_z(x) if self.basis == "phase-flip" else PauliString.from_x(x)

    def sample_label(self, rng) -> BitString:
        return self.dist.sample(rng)

    def to_dense(self) -> DenseState:
        """Oracle render: sum_x p(x) (P^x (x) I) gamma (P^x (x) I)."""
        gamma = dense_oracle.max_entangled(self.n)
        acc = np.zeros_like(gamma.matrix)
        for x, w in self.dist.weight_table().items():
            acc = acc + w * dense_oracle.apply_pauli(gamma, self.correction(x), side="left").matrix
        return DenseState(acc)


def sample_x(dist: DistributionSpec, rng) -> BitString:
    """Draw a correction label x with probability p(x)."""
    return dist.sample(rng)


def choi_syndrome_sample(channel: GeneralizedDephasingChannel, rng) -> BitString:
    """Statistics of a Bell-basis measurement of the Choi state.

    The mixture components are orthogonal Bell-type states labelled by x,
    so the measurement reveals exactly the mixture label: the output is
    distributed identically to sample_x.
    """
    return channel.dist.sample(rng)


def apply_dense(channel: GeneralizedDephasingChannel, rho: DenseState, side: str = "left") -> DenseState:
    """Exact dense action of the channel on one tensor factor of rho."""
    table = channel.dist.weight_table()
    acc = np.zeros_like(rho.matrix)
    for x, w in table.items():
        acc = acc + w * dense_oracle.apply_pauli(rho, PauliString.from_z(x), side=side).matrix
    return DenseState(acc)


def teleport_simulate(channel: GeneralizedDephasingChannel, rho: DenseState) -> DenseState:
    """Simulate the channel by teleporting through its Choi state.

    Standard teleportation with the resource replaced by the Choi state:
    Bell measurement on (input, resource left half), Pauli correction on
    the right half per outcome. Must agree with apply_dense exactly.
    """
    if channel.n > TELEPORT_QUBIT_CAP:
        raise ValueError(f"dense teleportation capped at n <= {TELEPORT_QUBIT_CAP}")
    if rho.qubit_count != channel.n:
        raise ValueError("input register must match the channel size")
    resource = channel.choi().to_dense()
    return dense_oracle.teleport_with_resource(rho, resource)


# ---------------------------------------------------------------------------
# channel spec files: {"n": int, "kind": ..., kind-specific payload}
# BitStrings are hex-packed per the gf2 byte convention.


def channel_to_spec(channel: GeneralizedDephasingChannel) -> dict:
    dist = channel.dist
    if isinstance(dist, Explicit):
        return {
            "n": channel.n,
            "kind": "explicit",
            "weights": {bits.to_hex(): w for bits, w in dist.weights},
        }
    if isinstance(dist, UniformSupport):
        return {
            "n": channel.n,
            "kind": "uniform_support",
            "support": [bits.to_hex() for bits in dist.support],
        }
    if isinstance(dist, PrgInduced):
        return {
            "n": channel.n,
            "kind": "prg",
            "prg": {"owf_id": dist.owf_id, "seed_len": dist.seed_len},
        }
    raise ValueError(f"unsupported distribution type {type(dist).__name__}")


def channel_from_spec(spec: dict) -> GeneralizedDephasingChannel:
    if not isinstance(spec, dict):
        raise ValueError("channel spec must be a JSON object")
    try:
        n = int(spec["n"])
    except (KeyError, TypeError, ValueError):
        raise ValueError("channel spec field 'n' must be an integer") from None
    kind = spec.get("kind")
    if kind == "explicit":
        raw = spec.get("weights")
        if not isinstance(raw, dict) or not raw:
            raise ValueError("channel spec field 'weights' must be a nonempty object")
        weights = tuple(
            (BitString.from_hex(n, hex_str), float(w)) for hex_str, w in raw.items()
        )
        return GeneralizedDephasingChannel(n, Explicit(n, weights))
    if kind == "uniform_support":
        raw = spec.get("support")
        if not isinstance(raw, list) or not raw:
            raise ValueError("channel spec field 'support' must be a nonempty list")
        support = tuple(BitString.from_hex(n, h) for h in raw)
        return GeneralizedDephasingChannel(n, UniformSupport(n, support))
    if kind == "prg":
        raw = spec.get("prg")
        if not isinstance(raw, dict):
            raise ValueError("channel spec field 'prg' must be an object")
        try:
            owf_id = raw["owf_id"]
            seed_len = int(raw["seed_len"])
        except (KeyError, TypeError, ValueError):
            raise ValueError("channel spec field 'prg' needs 'owf_id' and integer 'seed_len'") from None
        owf = prg.build_owf(owf_id, seed_len // 2)
        cfg = prg.PrgConfig(owf=owf, seed_len=seed_len, out_len=n)
        return GeneralizedDephasingChannel(n, prg.induced_distribution(cfg))
    raise ValueError(f"channel spec field 'kind' must be explicit|uniform_support|prg, got {kind!r}")


def load_channel_spec(path) -> GeneralizedDephasingChannel:
    with open(path, "r", encoding="utf-8") as fh:
        return channel_from_spec(json.load(fh))


def save_channel_spec(channel: GeneralizedDephasingChannel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_spec(channel), fh, indent=2, sort_keys=True)
        fh.write("\n")

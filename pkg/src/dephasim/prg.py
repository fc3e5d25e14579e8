"""Pseudorandom-generator construction and statistical distinguishers.

The generator extends a one-way-function stand-in by one hardcore bit per
step (inner-product predicate) and iterates the step to stretch a short
seed to any longer output. Two stand-in functions ship:

* ``toyexp``  -- f(x) = g**x mod p for a Fermat prime p = 2**L + 1 with
  primitive root g, encoded back into L bits as (g**x mod p) - 1. This is
  one-to-one on all L-bit inputs.
* ``keyedperm`` -- a fixed-key invertible bit-mixing permutation.

Both are desk-scale stand-ins and are NOT cryptographically secure; the
package claims construction mechanics only, never security. A third id,
``identity``, exists solely for degenerate no-stretch configurations.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .distributions import ENUMERATION_SEED_CAP, DistributionSpec, PrgInduced, UniformSupport
from .gf2 import BitString, Gf2Matrix

__all__ = [
    "OwfSpec",
    "PrgConfig",
    "TestResult",
    "AdvantageReport",
    "build_owf",
    "gl_extend",
    "stretch",
    "induced_distribution",
    "distinguisher_battery",
    "OWF_IDS",
]

# Fermat primes 2**L + 1 with a fixed primitive root; the only moduli for
# which exponentiation is a bijection on exact bit-lengths.
_FERMAT = {1: (3, 2), 2: (5, 2), 4: (17, 3), 8: (257, 3), 16: (65537, 3)}

_KEYEDPERM_DEFAULT_KEY = 0x9E3779B97F4A7C15

OWF_IDS = ("toyexp", "keyedperm", "identity")


@dataclass(frozen=True)
class OwfSpec:
    """Deterministic length-preserving function used as the stretch core."""

    owf_id: str
    input_len: int
    output_len: int
    params: tuple[tuple[str, int], ...] = ()
    _fn: Callable[[int], int] = field(compare=False, repr=False, default=None)

    def evaluate(self, x: BitString) -> BitString:
        if x.n != self.input_len:
            raise ValueError(f"input length {x.n}, expected {self.input_len}")
        return BitString(self.output_len, self._fn(x.value))


def build_owf(owf_id: str, input_len: int) -> OwfSpec:
    """Construct a stand-in one-way function by id."""
    if input_len < 1:
        raise ValueError("input length must be >= 1")
    if owf_id == "toyexp":
        if input_len not in _FERMAT:
            raise ValueError(
                f"toyexp supports input lengths {sorted(_FERMAT)}; "
                f"got {input_len} (use keyedperm for other lengths)"
            )
        p, g = _FERMAT[input_len]
        # generator order check: the group order p - 1 = 2**L is a power of
        # two, so g generates iff g**((p-1)/2) != 1.
        if pow(g, (p - 1) // 2, p) == 1 or pow(g, p - 1, p) != 1:
            raise ValueError(f"{g} does not generate the units mod {p}")
        fn = lambda v: pow(g, v, p) - 1
        return OwfSpec("toyexp", input_len, input_len, (("modulus", p), ("generator", g)), fn)
    if owf_id == "keyedperm":
        key = _KEYEDPERM_DEFAULT_KEY
        fn = lambda v: _keyedperm(v, input_len, key)
        return OwfSpec("keyedperm", input_len, input_len, (("key", key),), fn)
    if owf_id == "identity":
        return OwfSpec("identity", input_len, input_len, (), lambda v: v)
    raise ValueError(f"unknown owf id {owf_id!r}; known: {OWF_IDS}")


def _keyedperm(v: int, nbits: int, key: int) -> int:
    # every round is a bijection on nbits-bit words: xor constant,
    # multiply by an odd constant mod 2**nbits, xorshift down.
    mask = (1 << nbits) - 1
    shift = max(1, nbits // 2)
    for r in range(4):
        v ^= (key >> (16 * r)) & mask
        v = (v * 0xC2B2AE3D) & mask
        v ^= v >> shift
    return v & mask


@dataclass(frozen=True)
class PrgConfig:
    """Stretch parameters: seed_len -> out_len, one output bit per step."""

    owf: OwfSpec
    seed_len: int
    out_len: int
    mode: str = "sequential-stretch"

    def __post_init__(self) -> None:
        if self.mode != "sequential-stretch":
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.seed_len < 2 or self.seed_len % 2:
            raise ValueError("seed length must be even and >= 2")
        if self.owf.input_len != self.seed_len // 2:
            raise ValueError(
                f"owf input length {self.owf.input_len} must be half the seed length {self.seed_len}"
            )
        if self.out_len < self.seed_len:
            raise ValueError("output length must be >= seed length")


def gl_extend(owf: OwfSpec, x: BitString, r: BitString) -> BitString:
    """One-bit extension f(x) || r || <x, r> with the inner-product hardcore bit."""
    if x.n != owf.input_len:
        raise ValueError(f"x has {x.n} bits, owf expects {owf.input_len}")
    if r.n != x.n:
        raise ValueError(f"r has {r.n} bits, expected {x.n}")
    hardcore = BitString(1, x.inner(r))
    return owf.evaluate(x).concat(r).concat(hardcore)


def stretch(cfg: PrgConfig, seed: BitString) -> BitString:
    """Deterministic stretch of a seed to exactly cfg.out_len bits.

    State starts at the seed; each step splits the state into halves
    (x, r), emits the hardcore bit of gl_extend, and keeps the first
    seed_len bits of f(x) || r as the next state. Output is the emitted
    bits followed by the final state. (The loop runs on raw ints; it is
    bit-identical to iterating gl_extend.)
    """
    if seed.n != cfg.seed_len:
        raise ValueError(f"seed has {seed.n} bits, expected {cfg.seed_len}")
    half = cfg.seed_len // 2
    half_mask = (1 << half) - 1
    steps = cfg.out_len - cfg.seed_len
    fn = cfg.owf._fn
    state = seed.value
    emitted = 0
    for i in range(steps):
        x = state & half_mask
        r = state >> half
        emitted |= ((x & r).bit_count() & 1) << i
        state = fn(x) | (r << half)
    return BitString(cfg.out_len, emitted | (state << steps))


def induced_distribution(cfg: PrgConfig) -> PrgInduced:
    """Distribution of stretch(cfg, seed) under a uniform seed.

    Attaches the exhaustive image table when the seed space is small
    enough to enumerate, enabling exact entropy downstream.
    """
    table = None
    if cfg.seed_len <= ENUMERATION_SEED_CAP:
        counts: Counter[BitString] = Counter()
        for v in range(1 << cfg.seed_len):
            counts[stretch(cfg, BitString(cfg.seed_len, v))] += 1
        total = float(1 << cfg.seed_len)
        table = tuple((bits, c / total) for bits, c in sorted(counts.items(), key=lambda kv: kv[0].value))
    return PrgInduced(
        n=cfg.out_len,
        owf_id=cfg.owf.owf_id,
        seed_len=cfg.seed_len,
        stretch_fn=lambda s: stretch(cfg, s),
        params=cfg.owf.params,
        image_table=table,
    )


# ---------------------------------------------------------------------------
# distinguisher battery


@dataclass(frozen=True)
class TestResult:
    name: str
    advantage: float
    threshold: float
    passed: bool
    kind: str = "advantage"
    skipped: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "advantage": self.advantage,
            "threshold": self.threshold,
            "pass": self.passed,
            "kind": self.kind,
            "skipped": self.skipped,
            "note": self.note,
        }


@dataclass(frozen=True)
class AdvantageReport:
    n: int
    samples: int
    seed: int
    tests: tuple[TestResult, ...]

    def all_below_threshold(self) -> bool:
        return all(t.passed for t in self.tests if not t.skipped)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "tests": [t.to_dict() for t in self.tests],
        }


_BATTERY = ("monobit", "position_bias", "serial_pairs", "byte_histogram", "gf2_rank")

# two-sided tail mass of a 3 sigma normal deviation; per-test thresholds
# are Bonferroni-corrected from this base level.
_BASE_ALPHA = 0.002699796063


def _norm_ppf(p: float) -> float:
    """Inverse standard normal CDF by bisection on erf."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    lo, hi = -12.0, 12.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1.0 + math.erf(mid / math.sqrt(2.0))) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _chi2_critical(dof: int, alpha: float) -> float:
    """Upper-alpha chi-square quantile (Wilson-Hilferty approximation)."""
    z = _norm_ppf(1.0 - alpha)
    a = 2.0 / (9.0 * dof)
    return dof * (1.0 - a + z * math.sqrt(a)) ** 3


def _binary_advantage(name, va, vb, z, note=""):
    pa, pb = float(np.mean(va)), float(np.mean(vb))
    pooled = 0.5 * (pa + pb)
    sigma = math.sqrt(max(pooled * (1.0 - pooled), 0.0) * (1.0 / len(va) + 1.0 / len(vb)))
    adv = abs(pa - pb)
    thr = z * sigma
    return TestResult(name, adv, thr, adv <= thr, note=note)


def _bits_array(samples: list[BitString], n: int) -> np.ndarray:
    arr = np.zeros((len(samples), n), dtype=np.uint8)
    for i, s in enumerate(samples):
        v = s.value
        for j in range(n):
            arr[i, j] = (v >> j) & 1
    return arr


def distinguisher_battery(
    dist_a: DistributionSpec,
    dist_b: DistributionSpec,
    samples: int,
    rng,
) -> AdvantageReport:
    """Run a fixed battery of efficient classical tests on two sample sets.

    Each test reports an empirical advantage and a sampling-noise threshold
    at the 3 sigma level, Bonferroni-corrected across the battery. Both
    sides of a test draw from the same derived stream (common random
    numbers), so identical distributions score exactly zero advantage.
    """
    if dist_a.n != dist_b.n:
        raise ValueError("distributions must have equal output length")
    if samples < 1000:
        raise ValueError("at least 1000 samples are required")
    n = dist_a.n
    base_seed = int(rng.integers(0, 1 << 63))
    z_single = _norm_ppf(1.0 - _BASE_ALPHA / (2 * len(_BATTERY)))
    results = []

    for t_idx, name in enumerate(_BATTERY):
        rng_a = np.random.default_rng(np.random.SeedSequence([base_seed, t_idx]))
        rng_b = np.random.default_rng(np.random.SeedSequence([base_seed, t_idx]))
        sa = [dist_a.sample(rng_a) for _ in range(samples)]
        sb = [dist_b.sample(rng_b) for _ in range(samples)]

        if name == "monobit":
            va = np.array([s.weight() > n / 2 for s in sa])
            vb = np.array([s.weight() > n / 2 for s in sb])
            results.append(_binary_advantage(name, va, vb, z_single))
        elif name == "position_bias":
            aa, ab = _bits_array(sa, n), _bits_array(sb, n)
            diffs = np.abs(aa.mean(axis=0) - ab.mean(axis=0))
            adv = float(diffs.max())
            # conservative sigma bound p(1-p) <= 1/4, corrected across positions
            z_pos = _norm_ppf(1.0 - _BASE_ALPHA / (2 * len(_BATTERY) * n))
            thr = z_pos * math.sqrt(0.25 * (2.0 / samples))
            results.append(TestResult(name, adv, thr, adv <= thr, note="max over positions"))
        elif name == "serial_pairs":
            if n < 2:
                results.append(TestResult(name, 0.0, 0.0, True, skipped=True, note="needs n >= 2"))
                continue
            pair_mask = (1 << (n - 1)) - 1
            count_eq = lambda s: (n - 1) - ((s.value ^ (s.value >> 1)) & pair_mask).bit_count()
            va = np.array([count_eq(s) > (n - 1) / 2 for s in sa])
            vb = np.array([count_eq(s) > (n - 1) / 2 for s in sb])
            results.append(_binary_advantage(name, va, vb, z_single))
        elif name == "byte_histogram":
            width = min(n, 8)
            chunks = n // width
            symbols_a = Counter()
            symbols_b = Counter()
            mask = (1 << width) - 1
            for s in sa:
                for c in range(chunks):
                    symbols_a[(s.value >> (c * width)) & mask] += 1
            for s in sb:
                for c in range(chunks):
                    symbols_b[(s.value >> (c * width)) & mask] += 1
            keys = sorted(set(symbols_a) | set(symbols_b))
            if len(keys) < 2:
                results.append(
                    TestResult(name, 0.0, 0.0, True, kind="statistic", skipped=True, note="degenerate histogram")
                )
                continue
            oa = np.array([symbols_a[k] for k in keys], dtype=float)
            ob = np.array([symbols_b[k] for k in keys], dtype=float)
            ta, tb = oa.sum(), ob.sum()
            expected_a = (oa + ob) * ta / (ta + tb)
            expected_b = (oa + ob) * tb / (ta + tb)
            if expected_a.min() < 1.0:
                results.append(
                    TestResult(name, 0.0, 0.0, True, kind="statistic", skipped=True, note="expected counts too small")
                )
                continue
            stat = float(np.sum((oa - expected_a) ** 2 / expected_a + (ob - expected_b) ** 2 / expected_b))
            crit = _chi2_critical(len(keys) - 1, _BASE_ALPHA / len(_BATTERY))
            results.append(
                TestResult(name, stat, crit, stat <= crit, kind="statistic", note="two-sample chi-square")
            )
        elif name == "gf2_rank":
            batches = samples // n
            if batches < 30:
                results.append(TestResult(name, 0.0, 0.0, True, skipped=True, note="needs >= 30n samples"))
                continue
            full_rank = lambda block: Gf2Matrix(n, n, tuple(s.value for s in block)).rank() == n
            va = np.array([full_rank(sa[i * n : (i + 1) * n]) for i in range(batches)])
            vb = np.array([full_rank(sb[i * n : (i + 1) * n]) for i in range(batches)])
            results.append(_binary_advantage(name, va, vb, z_single, note="full-rank rate of n-sample blocks"))

    return AdvantageReport(n=n, samples=samples, seed=base_seed, tests=tuple(results))

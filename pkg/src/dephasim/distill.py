"""Support-identification distillation engine.

One protocol run, tracked entirely in the Pauli frame: a hidden bit-flip
label x (uniform over a known support S) rides on n entangled pairs; both
parties scramble with a shared uniformly random invertible GF(2) matrix M,
measure the first m pairs, and XOR their raw outcomes into the syndrome
(M x)|_m. If exactly one support element matches the syndrome, the sender
undoes its image and the remaining n - m pairs are exact ebits; ambiguous
syndromes abort the run and score as failures. Monte Carlo aggregation
compares the empirical failure rate with the analytic collision bounds.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import dense_oracle
from .channel import GeneralizedDephasingChannel
from .dense_oracle import DenseState
from .distributions import UniformSupport
from .gf2 import BitString, Gf2Matrix, PauliString, cnot_count, mat_vec_mul, sample_invertible

__all__ = [
    "ComplexityAudit",
    "DistillConfig",
    "TrialOutcome",
    "DistillReport",
    "TransmitTranscript",
    "choose_m",
    "collision_probability",
    "trial_streams",
    "run_trial",
    "run_trial_from_seed",
    "run_monte_carlo",
    "end_to_end_transmit",
]

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ComplexityAudit:
    """Per-run gate and communication counters.

    Caps: hadamards <= 2n, cnot_gates <= n^2 (scramble circuit, per party),
    measurements <= 2m, corrections <= n, comparisons <= |S|, communicated
    bits <= n^2 + 2m + framing slack.
    """

    hadamards: int
    cnot_gates: int
    measurements: int
    corrections: int
    classical_comparisons: int
    classical_bits_communicated: int

    def within_caps(self, n: int, m: int, support_size: int) -> bool:
        return (
            self.hadamards <= 2 * n
            and self.cnot_gates <= n * n
            and self.measurements <= 2 * m
            and self.corrections <= n
            and self.classical_comparisons <= support_size
            and self.classical_bits_communicated <= n * n + 2 * m + 128
        )

    def to_dict(self) -> dict:
        return {
            "hadamards": self.hadamards,
            "cnot_gates": self.cnot_gates,
            "measurements": self.measurements,
            "corrections": self.corrections,
            "classical_comparisons": self.classical_comparisons,
            "classical_bits_communicated": self.classical_bits_communicated,
        }


def _merge_max(a: ComplexityAudit, b: ComplexityAudit) -> ComplexityAudit:
    return ComplexityAudit(
        max(a.hadamards, b.hadamards),
        max(a.cnot_gates, b.cnot_gates),
        max(a.measurements, b.measurements),
        max(a.corrections, b.corrections),
        max(a.classical_comparisons, b.classical_comparisons),
        max(a.classical_bits_communicated, b.classical_bits_communicated),
    )


def _merge_sum(a: ComplexityAudit, b: ComplexityAudit) -> ComplexityAudit:
    return ComplexityAudit(
        a.hadamards + b.hadamards,
        a.cnot_gates + b.cnot_gates,
        a.measurements + b.measurements,
        a.corrections + b.corrections,
        a.classical_comparisons + b.classical_comparisons,
        a.classical_bits_communicated + b.classical_bits_communicated,
    )


_ZERO_AUDIT = ComplexityAudit(0, 0, 0, 0, 0, 0)


@dataclass(frozen=True)
class DistillConfig:
    """Protocol parameters; m=None selects the syndrome size automatically."""

    n: int
    support: tuple[BitString, ...]
    m: int | None = None
    delta: float = 1e-3
    trials: int = 1
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.support:
            raise ValueError("support must be nonempty")
        if any(b.n != self.n for b in self.support):
            raise ValueError("support elements must have length n")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support elements must be distinct")
        if self.m is not None and not 0 <= self.m <= self.n:
            raise ValueError("m must satisfy 0 <= m <= n")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.master_seed <= _SEED_MASK:
            raise ValueError("master_seed must fit in 64 bits")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def effective_m(self) -> int:
        if self.m is not None:
            return self.m
        return choose_m(len(self.support), self.n, self.delta)

    @property
    def m_was_clamped(self) -> bool:
        if self.m is not None or len(self.support) == 1:
            return False
        raw = math.ceil(math.log2(len(self.support) ** 2 / self.delta))
        return raw > self.n


@dataclass(frozen=True)
class TrialOutcome:
    """Full record of one protocol run.

    On an aborted (ambiguous) run no correction is applied, so ``residual``
    holds the uncorrected pending frame; success additionally requires a
    unique identification, which forces the residual to the identity.
    """

    hidden_x: BitString
    scramble: Gf2Matrix
    syndrome: BitString
    y_a: BitString
    y_b: BitString
    identified_x: BitString | None
    residual: PauliString
    success: bool
    ebits_out: int
    audit: ComplexityAudit
    trial_seed: int


def choose_m(support_size: int, n: int, delta: float) -> int:
    """Syndrome size meeting a per-run failure budget, clamped to n.

    For support size s >= 2 returns min(n, ceil(log2(s^2 / delta))); the
    union bound s^2 * 2^-m then stays below delta whenever no clamp was
    needed. A singleton support needs no syndrome at all.
    """
    if support_size < 1:
        raise ValueError("support size must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if support_size == 1:
        return 0
    return min(n, math.ceil(math.log2(support_size * support_size / delta)))


def collision_probability(n: int, m: int) -> Fraction:
    """Exact probability that two fixed distinct labels share the first m
    scrambled bits under a uniform invertible scramble: (2^(n-m) - 1) / (2^n - 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= m <= n:
        raise ValueError("m must satisfy 0 <= m <= n")
    return Fraction((1 << (n - m)) - 1, (1 << n) - 1)


def _splitmix64(x: int) -> int:
    """One splitmix64 output step; bijective 64-bit mixer."""
    x = (x + 0x9E3779B97F4A7C15) & _SEED_MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _SEED_MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _SEED_MASK
    return x ^ (x >> 31)


def trial_streams(trial_seed: int):
    """Derive the (frame, scramble, outcome) rng streams of one run.

    Child seeds come from successive splitmix64 outputs of the trial seed,
    so both protocol parties reconstruct identical streams from the seed
    alone; the receiver instantiates only the scramble and outcome streams.
    """
    c1 = _splitmix64(int(trial_seed) & _SEED_MASK)
    c2 = _splitmix64(c1)
    c3 = _splitmix64(c2)
    return (
        np.random.default_rng(c1),
        np.random.default_rng(c2),
        np.random.default_rng(c3),
    )


def _prefix_image(prefix_rows: tuple[int, ...], v: int) -> int:
    out = 0
    for i, row in enumerate(prefix_rows):
        out |= ((row & v).bit_count() & 1) << i
    return out


def run_trial_from_seed(cfg: DistillConfig, trial_seed: int) -> TrialOutcome:
    """One protocol run with all randomness derived from a 64-bit seed."""
    frame_rng, scramble_rng, outcome_rng = trial_streams(trial_seed)
    n = cfg.n
    m = cfg.effective_m
    support = cfg.support

    hidden = support[int(frame_rng.integers(len(support)))]
    scramble = sample_invertible(n, scramble_rng)
    image = mat_vec_mul(scramble, hidden)
    syndrome = image.take(m)
    # both raw outcomes are simulated; their XOR is the syndrome
    y_b = BitString.random(m, outcome_rng)
    y_a = y_b ^ syndrome

    prefix_rows = scramble.row_bits[:m]
    syndrome_val = syndrome.value
    candidates = [
        c
        for c in support
        if _prefix_image(prefix_rows, c.value) == syndrome_val
    ]
    if len(candidates) == 1:
        identified = candidates[0]
        correction = mat_vec_mul(scramble, identified).drop(m)
        residual = PauliString.from_x(image.drop(m) ^ correction)
        success = identified == hidden
        corrections = correction.weight()
    else:
        identified = None
        residual = PauliString.from_x(image.drop(m))
        success = False
        corrections = 0

    audit = ComplexityAudit(
        hadamards=2 * n,
        cnot_gates=cnot_count(scramble),
        measurements=2 * m,
        corrections=corrections,
        classical_comparisons=len(support),
        classical_bits_communicated=64 + 2 * m + n + 2,
    )
    return TrialOutcome(
        hidden_x=hidden,
        scramble=scramble,
        syndrome=syndrome,
        y_a=y_a,
        y_b=y_b,
        identified_x=identified,
        residual=residual,
        success=success,
        ebits_out=(n - m) if success else 0,
        audit=audit,
        trial_seed=int(trial_seed) & _SEED_MASK,
    )


def run_trial(cfg: DistillConfig, rng) -> TrialOutcome:
    """One protocol run drawing its seed from the caller's stream."""
    return run_trial_from_seed(cfg, int(rng.integers(0, 1 << 64, dtype=np.uint64)))


def _trial_seed_for(master_seed: int, index: int) -> int:
    return _splitmix64((_splitmix64(master_seed & _SEED_MASK) + index) & _SEED_MASK)


def _chunk_stats(cfg: DistillConfig, start: int, count: int):
    failures = 0
    ebits_total = 0
    audit_max = _ZERO_AUDIT
    audit_sum = _ZERO_AUDIT
    for i in range(start, start + count):
        out = run_trial_from_seed(cfg, _trial_seed_for(cfg.master_seed, i))
        if not out.success:
            failures += 1
        ebits_total += out.ebits_out
        audit_max = _merge_max(audit_max, out.audit)
        audit_sum = _merge_sum(audit_sum, out.audit)
    return failures, ebits_total, audit_max, audit_sum


@dataclass(frozen=True)
class DistillReport:
    """Monte Carlo aggregate; deterministic given the master seed."""

    n: int
    m: int
    m_requested: int | None
    support: tuple[BitString, ...]
    delta: float
    trials: int
    master_seed: int
    failures: int
    empirical_failure_rate: float
    union_bound: float
    pairwise_bound: float
    mean_ebits: float
    audit_max: ComplexityAudit
    audit_total: ComplexityAudit
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "config": {
                "n": self.n,
                "m": self.m,
                "m_requested": "auto" if self.m_requested is None else self.m_requested,
                "support": [b.to_hex() for b in self.support],
                "delta": self.delta,
                "trials": self.trials,
                "master_seed": self.master_seed,
            },
            "trials": self.trials,
            "failures": self.failures,
            "empirical_failure_rate": self.empirical_failure_rate,
            "union_bound": self.union_bound,
            "pairwise_bound": self.pairwise_bound,
            "mean_ebits": self.mean_ebits,
            "complexity_audit": {
                "per_trial_max": self.audit_max.to_dict(),
                "totals": self.audit_total.to_dict(),
            },
            "master_seed": self.master_seed,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def run_monte_carlo(cfg: DistillConfig) -> DistillReport:
    """Aggregate cfg.trials independent runs.

    Trial i derives its randomness from (master_seed, i), so reports are
    reproducible regardless of worker scheduling; aggregation uses sums,
    counts, and maxima only.
    """
    m = cfg.effective_m
    s = len(cfg.support)
    if cfg.workers == 1 or cfg.trials < 4 * cfg.workers:
        parts = [_chunk_stats(cfg, 0, cfg.trials)]
    else:
        chunk = (cfg.trials + cfg.workers - 1) // cfg.workers
        ranges = [
            (start, min(chunk, cfg.trials - start))
            for start in range(0, cfg.trials, chunk)
        ]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_chunk_stats, *zip(*[(cfg, a, c) for a, c in ranges])))

    failures = sum(p[0] for p in parts)
    ebits_total = sum(p[1] for p in parts)
    audit_max = _ZERO_AUDIT
    audit_sum = _ZERO_AUDIT
    for p in parts:
        audit_max = _merge_max(audit_max, p[2])
        audit_sum = _merge_sum(audit_sum, p[3])

    notes = ["delta is a per-run failure budget"]
    if cfg.m is None and cfg.m_was_clamped:
        notes.append(f"auto-selected m clamped to n={cfg.n}; yield is zero at m == n")

    return DistillReport(
        n=cfg.n,
        m=m,
        m_requested=cfg.m,
        support=cfg.support,
        delta=cfg.delta,
        trials=cfg.trials,
        master_seed=cfg.master_seed,
        failures=failures,
        empirical_failure_rate=failures / cfg.trials,
        union_bound=float(s * s) * 2.0 ** (-m),
        pairwise_bound=float(s * (s - 1) * collision_probability(cfg.n, m)),
        mean_ebits=ebits_total / cfg.trials,
        audit_max=audit_max,
        audit_total=audit_sum,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class TransmitTranscript:
    """Event log of one end-to-end transmission attempt."""

    events: tuple[str, ...]
    outcome: TrialOutcome
    aborted: bool
    payload_qubits: int


def end_to_end_transmit(
    channel: GeneralizedDephasingChannel,
    payload: DenseState,
    cfg: DistillConfig,
    rng,
) -> tuple[DenseState | None, TransmitTranscript]:
    """Distill through the channel, then teleport the payload densely.

    Pipeline: render the bit-flip-frame Choi component selected by the run,
    scramble both halves, project both parties' measurements onto the run's
    outcomes, apply the identified correction, and teleport the payload
    through the distilled pairs. On a failed run the transcript records the
    abort and no state is returned.
    """
    n = cfg.n
    if channel.n != n:
        raise ValueError("channel size must match the config")
    if not isinstance(channel.dist, UniformSupport) or set(channel.dist.support) != set(cfg.support):
        raise ValueError("channel must be uniform over the configured support")
    if n > 3:
        raise ValueError("dense verification is capped at n <= 3")
    m = cfg.effective_m
    k = payload.qubit_count
    if k < 1:
        raise ValueError("payload must hold at least one qubit")
    if k > n - m:
        raise ValueError(f"payload of {k} qubits exceeds the distilled ebit count {n - m}")

    outcome = run_trial(cfg, rng)
    events = [
        f"hidden label sampled ({outcome.hidden_x})",
        "scramble matrix agreed",
        f"syndrome measured ({outcome.syndrome})" if m else "no syndrome measured (m = 0)",
    ]
    if not outcome.success:
        events.append("identification ambiguous; run aborted")
        return None, TransmitTranscript(tuple(events), outcome, True, k)
    events.append(f"label identified ({outcome.identified_x}); correction applied")

    # dense realization of the run
    state = dense_oracle.apply_pauli(
        dense_oracle.max_entangled(n), PauliString.from_x(outcome.hidden_x), side="left"
    )
    u = _basis_map_unitary(outcome.scramble)
    state = dense_oracle.apply_unitary(state, u, 0)
    state = dense_oracle.apply_unitary(state, u, n)

    prob_a, state = dense_oracle.project_prefix(state, outcome.y_a)
    if state is None:
        raise AssertionError("frame simulation predicted an impossible outcome")
    if m:
        order = list(range(n - m, n)) + list(range(0, n - m)) + list(range(n, 2 * n - m))
        prob_b, state = dense_oracle.project_prefix(
            dense_oracle.permute_qubits(state, order), outcome.y_b
        )
        if state is None:
            raise AssertionError("frame simulation predicted an impossible outcome")

    correction = mat_vec_mul(outcome.scramble, outcome.identified_x).drop(m)
    state = dense_oracle.apply_pauli(state, PauliString.from_x(correction), side="left")

    q = n - m
    if k < q:
        order = list(range(0, k)) + list(range(q, q + k)) + list(range(k, q)) + list(range(q + k, 2 * q))
        state = dense_oracle.trace_out_suffix(
            dense_oracle.permute_qubits(state, order), 2 * (q - k)
        )
    events.append(f"payload teleported through {k} distilled pair(s)")
    output = dense_oracle.teleport_with_resource(payload, state)
    return output, TransmitTranscript(tuple(events), outcome, False, k)


def _basis_map_unitary(m: Gf2Matrix) -> np.ndarray:
    """Permutation matrix of the computational-basis map |z> -> |Mz>."""
    n = m.rows
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for v in range(dim):
        z = BitString(n, v)
        u[dense_oracle.computational_index(mat_vec_mul(m, z)), dense_oracle.computational_index(z)] = 1.0
    return u

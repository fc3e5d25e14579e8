"""Exact density-matrix computations for small qubit registers.

This module is the ground-truth oracle for everything the rest of the
package computes symbolically. It is deliberately dense and slow, with a
hard dimension cap of 2**10.

Index convention: a register of q qubits is indexed with qubit 0 as the
most significant bit, so a composite A (x) B state has index
idx_A * dim_B + idx_B and numpy.kron(P, I) acts on the A factor. All
entropic quantities are returned in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gf2 import BitString, PauliString

__all__ = [
    "DIM_CAP",
    "DenseState",
    "max_entangled",
    "von_neumann_entropy",
    "relative_entropy",
    "fidelity",
    "apply_pauli",
    "apply_unitary",
    "pauli_matrix",
    "computational_index",
    "basis_state",
    "bell_vector",
    "permute_qubits",
    "measure_prefix",
    "project_prefix",
    "trace_out_suffix",
    "trace_distance",
    "purity",
    "teleport_with_resource",
]

DIM_CAP = 1 << 10

_HERMITIAN_TOL = 1e-12
_TRACE_TOL = 1e-12
_EIG_CLIP = 1e-12
_SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class DenseState:
    """Validated density operator on a register of qubits."""

    matrix: np.ndarray
    dim: int = field(init=False)
    qubit_count: int = field(init=False)

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        dim = m.shape[0]
        if dim > DIM_CAP:
            raise ValueError(f"dimension {dim} exceeds oracle cap {DIM_CAP}")
        q = dim.bit_length() - 1
        if 1 << q != dim:
            raise ValueError(f"dimension {dim} is not a power of two")
        if np.max(np.abs(m - m.conj().T)) > _HERMITIAN_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > max(_TRACE_TOL, 1e-12 * dim):
            raise ValueError(f"trace is {np.trace(m).real}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "qubit_count", q)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def assert_positive(self, tol: float = 1e-9) -> None:
        lo = float(self.eigenvalues()[0])
        if lo < -tol:
            raise ValueError(f"negative eigenvalue {lo} beyond tolerance")


def computational_index(bits: BitString) -> int:
    """Hilbert index of |bits>: qubit 0 is the most significant bit."""
    n = bits.n
    return sum(bits.bit(i) << (n - 1 - i) for i in range(n))


def basis_state(bits: BitString) -> DenseState:
    dim = 1 << bits.n
    m = np.zeros((dim, dim), dtype=complex)
    k = computational_index(bits)
    m[k, k] = 1.0
    return DenseState(m)


def max_entangled(n: int) -> DenseState:
    """Projector onto 2^{-n/2} sum_z |z, z> over two n-qubit halves."""
    if not 1 <= n <= 5:
        raise ValueError(f"supported range is 1 <= n <= 5, got {n}")
    return DenseState(np.outer(_max_entangled_vector(n), _max_entangled_vector(n).conj()))


def _max_entangled_vector(n: int) -> np.ndarray:
    d = 1 << n
    v = np.zeros(d * d, dtype=complex)
    amp = 1.0 / math.sqrt(d)
    for z in range(d):
        v[z * d + z] = amp
    return v


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of i^phase * prod_i X^{x_i} Z^{z_i}."""
    n = p.n
    dim = 1 << n
    x_idx = computational_index(p.x_part)
    z_idx = computational_index(p.z_part)
    phase = 1j ** p.phase_exp
    m = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sign = -1.0 if (z_idx & col).bit_count() & 1 else 1.0
        m[col ^ x_idx, col] = phase * sign
    return m


def _expand(op: np.ndarray, total_qubits: int, start: int) -> np.ndarray:
    """Embed op acting on qubits [start, start + k) into the full register."""
    k = op.shape[0].bit_length() - 1
    pre = 1 << start
    post = 1 << (total_qubits - start - k)
    full = op
    if pre > 1:
        full = np.kron(np.eye(pre), full)
    if post > 1:
        full = np.kron(full, np.eye(post))
    return full


def apply_unitary(rho: DenseState, u: np.ndarray, start: int = 0) -> DenseState:
    """Conjugate rho by a unitary acting on a contiguous qubit range."""
    k = u.shape[0].bit_length() - 1
    if (1 << k) != u.shape[0] or u.shape[0] != u.shape[1]:
        raise ValueError("operator must be square with power-of-two dimension")
    if start < 0 or start + k > rho.qubit_count:
        raise ValueError("operator does not fit the register")
    full = _expand(u, rho.qubit_count, start)
    return DenseState(full @ rho.matrix @ full.conj().T)


def apply_pauli(rho: DenseState, p: PauliString, side: str = "left") -> DenseState:
    """Conjugate rho by a Pauli string on the left or right tensor factor."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if p.n > rho.qubit_count:
        raise ValueError(f"Pauli on {p.n} qubits does not fit {rho.qubit_count}-qubit state")
    start = 0 if side == "left" else rho.qubit_count - p.n
    return apply_unitary(rho, pauli_matrix(p), start)


def von_neumann_entropy(rho: DenseState) -> float:
    """-sum lambda log lambda over eigenvalues above 1e-12, in nats."""
    lam = rho.eigenvalues()
    if float(lam[0]) < -_SUPPORT_TOL:
        raise ValueError(f"negative eigenvalue {float(lam[0])} beyond tolerance")
    lam = lam[lam > _EIG_CLIP]
    return float(-np.sum(lam * np.log(lam)))


def relative_entropy(rho: DenseState, sigma: DenseState) -> float:
    """D(rho || sigma) in nats; +inf when supp(rho) leaks out of supp(sigma)."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    s_lam, s_vec = np.linalg.eigh(sigma.matrix)
    weights = np.einsum("ji,jk,ki->i", s_vec.conj(), rho.matrix, s_vec).real
    for lam, w in zip(s_lam, weights):
        if lam < _EIG_CLIP and w > _SUPPORT_TOL:
            return math.inf
    r_lam = rho.eigenvalues()
    r_lam = r_lam[r_lam > _EIG_CLIP]
    tr_rho_log_rho = float(np.sum(r_lam * np.log(r_lam)))
    keep = s_lam > _EIG_CLIP
    tr_rho_log_sigma = float(np.sum(weights[keep] * np.log(s_lam[keep])))
    return tr_rho_log_rho - tr_rho_log_sigma


def fidelity(rho: DenseState, sigma: DenseState) -> float:
    """Squared trace norm of sqrt(rho) sqrt(sigma)."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    sr = _psd_sqrt(rho.matrix)
    ss = _psd_sqrt(sigma.matrix)
    sv = np.linalg.svd(sr @ ss, compute_uv=False)
    val = float(np.sum(sv)) ** 2
    return min(max(val, 0.0), 1.0) if val < 1.0 + 1e-9 else val


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(m)
    lam = np.clip(lam, 0.0, None)
    return (vec * np.sqrt(lam)) @ vec.conj().T


def trace_distance(rho: DenseState, sigma: DenseState) -> float:
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    lam = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return 0.5 * float(np.sum(np.abs(lam)))


def purity(rho: DenseState) -> float:
    return float(np.trace(rho.matrix @ rho.matrix).real)


def permute_qubits(rho: DenseState, new_order: list[int]) -> DenseState:
    """Reorder qubits so position k holds the qubit formerly at new_order[k]."""
    q = rho.qubit_count
    if sorted(new_order) != list(range(q)):
        raise ValueError("new_order must be a permutation of all qubit positions")
    t = rho.matrix.reshape((2,) * (2 * q))
    axes = list(new_order) + [q + i for i in new_order]
    return DenseState(t.transpose(axes).reshape(rho.dim, rho.dim))


def _condition_on_vector(rho: DenseState, vec: np.ndarray) -> tuple[float, np.ndarray]:
    """Contract the first k qubits with vec; returns (probability, raw block)."""
    d_head = vec.shape[0]
    k = d_head.bit_length() - 1
    if (1 << k) != d_head or k > rho.qubit_count:
        raise ValueError("vector does not match a qubit prefix")
    d_tail = rho.dim // d_head
    t = rho.matrix.reshape(d_head, d_tail, d_head, d_tail)
    block = np.einsum("a,abcd,c->bd", vec.conj(), t, vec)
    prob = float(np.trace(block).real)
    return prob, block


def project_prefix(rho: DenseState, outcome: BitString) -> tuple[float, DenseState | None]:
    """Project the first len(outcome) qubits onto a computational outcome.

    Returns the outcome probability and the normalized post-measurement
    state on the remaining qubits (None when the probability vanishes).
    """
    vec = np.zeros(1 << outcome.n, dtype=complex)
    vec[computational_index(outcome)] = 1.0
    prob, block = _condition_on_vector(rho, vec)
    if prob <= 1e-15:
        return 0.0, None
    return prob, DenseState(block / prob)


def measure_prefix(rho: DenseState, width: int, rng) -> tuple[BitString, float, DenseState]:
    """Sample a computational measurement of the first `width` qubits."""
    if not 0 <= width <= rho.qubit_count:
        raise ValueError("measurement width out of range")
    d_head = 1 << width
    d_tail = rho.dim // d_head
    diag = rho.matrix.diagonal().real.reshape(d_head, d_tail)
    probs = np.clip(diag.sum(axis=1), 0.0, None)
    probs = probs / probs.sum()
    idx = int(rng.choice(d_head, p=probs))
    bits = BitString.from_bits(((idx >> (width - 1 - i)) & 1) for i in range(width))
    prob, post = project_prefix(rho, bits)
    assert post is not None
    return bits, prob, post


def trace_out_suffix(rho: DenseState, width: int) -> DenseState:
    """Partial trace over the last `width` qubits."""
    if not 0 <= width <= rho.qubit_count:
        raise ValueError("trace width out of range")
    d_out = 1 << width
    d_keep = rho.dim // d_out
    t = rho.matrix.reshape(d_keep, d_out, d_keep, d_out)
    return DenseState(np.einsum("ajbj->ab", t))


def bell_vector(a: BitString, b: BitString) -> np.ndarray:
    """State vector (X^a Z^b (x) I)|gamma> on 2n qubits."""
    if a.n != b.n:
        raise ValueError("correction labels must have equal length")
    n = a.n
    d = 1 << n
    a_idx = computational_index(a)
    b_idx = computational_index(b)
    v = np.zeros(d * d, dtype=complex)
    amp = 1.0 / math.sqrt(d)
    for z in range(d):
        sign = -1.0 if (b_idx & z).bit_count() & 1 else 1.0
        v[(z ^ a_idx) * d + z] = amp * sign
    return v


def teleport_with_resource(payload: DenseState, resource: DenseState) -> DenseState:
    """Teleport payload through a bipartite resource state.

    The resource lives on two k-qubit halves (sender's half first). A Bell
    measurement on (payload, sender half) with outcome (a, b) triggers the
    correction X^a Z^b on the receiver half; the returned state averages
    over all outcomes.
    """
    k = payload.qubit_count
    if resource.qubit_count != 2 * k:
        raise ValueError("resource must hold one pair per payload qubit")
    joint = DenseState(np.kron(payload.matrix, resource.matrix))
    d = 1 << k
    out = np.zeros((d, d), dtype=complex)
    for a_idx in range(d):
        a = BitString.from_bits(((a_idx >> (k - 1 - i)) & 1) for i in range(k))
        for b_idx in range(d):
            b = BitString.from_bits(((b_idx >> (k - 1 - i)) & 1) for i in range(k))
            _, block = _condition_on_vector(joint, bell_vector(a, b))
            corr = pauli_matrix(PauliString(a, b))
            out += corr @ block @ corr.conj().T
    return DenseState(out)

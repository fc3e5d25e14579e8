"""Shared test utilities: independent brute-force oracles and state builders."""

import numpy as np

from dephasim.dense_oracle import DenseState
from dephasim.gf2 import BitString, Gf2Matrix

# upper 0.001 chi-square quantiles, frozen from an independent evaluation
CHI2_CRIT_999 = {
    3: 16.26623619623813,
    5: 20.515005652432873,
    6: 22.457744484825323,
    7: 24.321886347856854,
    167: 229.21461647327854,
}


def random_density(n_qubits, rng):
    d = 1 << n_qubits
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ a.conj().T
    return DenseState(m / np.trace(m).real)


def random_pure(n_qubits, rng):
    d = 1 << n_qubits
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v = v / np.linalg.norm(v)
    return DenseState(np.outer(v, v.conj()))


def brute_mat_vec(m: Gf2Matrix, x: BitString) -> BitString:
    """Row-by-row dot products straight off the entry table."""
    ent = m.entries()
    out = []
    for i in range(m.rows):
        acc = 0
        for j in range(m.cols):
            acc ^= ent[i][j] & x.bit(j)
        out.append(acc)
    return BitString.from_bits(out)


def enumerate_square_matrices(n):
    """All 2^(n*n) binary n x n matrices; practical for n <= 3."""
    for code in range(1 << (n * n)):
        rows = tuple((code >> (n * i)) & ((1 << n) - 1) for i in range(n))
        yield Gf2Matrix(n, n, rows)


def chi_square_stat(counts, expected):
    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(expected, dtype=float)
    return float(np.sum((counts - expected) ** 2 / expected))

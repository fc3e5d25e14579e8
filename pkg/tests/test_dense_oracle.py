import math

import numpy as np
import pytest

from dephasim import dense_oracle as do
from dephasim.gf2 import BitString, PauliString
from helpers import random_density, random_pure


@pytest.fixture
def rng():
    return np.random.default_rng(42)


class TestDenseState:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            do.DenseState(np.array([[0.5, 1.0], [0.0, 0.5]], dtype=complex))

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError):
            do.DenseState(np.eye(2, dtype=complex))

    def test_rejects_above_dimension_cap(self):
        dim = do.DIM_CAP * 2
        with pytest.raises(ValueError):
            do.DenseState(np.eye(dim, dtype=complex) / dim)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            do.DenseState(np.eye(3, dtype=complex) / 3)

    def test_positive_check(self, rng):
        rho = random_density(2, rng)
        rho.assert_positive()


class TestMaxEntangled:
    def test_n1_matrix_entries(self):
        g = do.max_entangled(1)
        expected = np.zeros((4, 4), dtype=complex)
        for i in (0, 3):
            for j in (0, 3):
                expected[i, j] = 0.5
        assert np.allclose(g.matrix, expected)

    def test_trace_and_purity(self):
        for n in (1, 2, 3):
            g = do.max_entangled(n)
            assert abs(np.trace(g.matrix).real - 1.0) < 1e-12
            assert abs(do.purity(g) - 1.0) < 1e-12

    def test_pure_state_entropy_zero(self):
        assert do.von_neumann_entropy(do.max_entangled(2)) < 1e-9

    def test_range_check(self):
        with pytest.raises(ValueError):
            do.max_entangled(0)
        with pytest.raises(ValueError):
            do.max_entangled(6)


class TestVonNeumannEntropy:
    def test_pure_state(self, rng):
        assert do.von_neumann_entropy(random_pure(2, rng)) <= 1e-9

    def test_maximally_mixed(self):
        for n in (1, 2, 3):
            d = 1 << n
            rho = do.DenseState(np.eye(d, dtype=complex) / d)
            assert abs(do.von_neumann_entropy(rho) - math.log(d)) < 1e-9

    def test_binary_mixture_pinned(self):
        # mixture (0.75, 0.25) of two orthogonal Bell-type states: entropy
        # equals the binary entropy computed by direct summation
        g = do.max_entangled(1)
        flip = do.apply_pauli(g, PauliString.from_z(BitString.from_str("1")), side="left")
        rho = do.DenseState(0.75 * g.matrix + 0.25 * flip.matrix)
        direct = -0.75 * math.log(0.75) - 0.25 * math.log(0.25)
        assert abs(direct - 0.5623351446188083) < 1e-12
        assert abs(do.von_neumann_entropy(rho) - direct) < 1e-9

    def test_pauli_conjugation_invariance(self, rng):
        for _ in range(20):
            rho = random_density(2, rng)
            p = PauliString(BitString.random(2, rng), BitString.random(2, rng))
            conj = do.apply_pauli(rho, p, side="left")
            assert abs(do.von_neumann_entropy(conj) - do.von_neumann_entropy(rho)) < 1e-9


class TestRelativeEntropy:
    def test_self_is_zero(self, rng):
        rho = random_density(2, rng)
        assert abs(do.relative_entropy(rho, rho)) < 1e-9

    def test_bell_support_pair(self):
        # p uniform on {00, 11} against uniform over all 4 labels: both
        # states are diagonal in the same basis, D = sum p log(p/u) = log 2
        g = do.max_entangled(2)
        z11 = do.apply_pauli(g, PauliString.from_z(BitString.from_str("11")), side="left")
        rho = do.DenseState(0.5 * g.matrix + 0.5 * z11.matrix)
        acc = np.zeros_like(g.matrix)
        for v in range(4):
            pz = PauliString.from_z(BitString(2, v))
            acc = acc + 0.25 * do.apply_pauli(g, pz, side="left").matrix
        sigma = do.DenseState(acc)
        direct = sum(0.5 * math.log(0.5 / 0.25) for _ in range(2))
        assert abs(direct - math.log(2)) < 1e-12
        assert abs(do.relative_entropy(rho, sigma) - math.log(2)) < 1e-9

    def test_pure_vs_maximally_mixed(self, rng):
        for n in (1, 2):
            d = 1 << n
            rho = random_pure(n, rng)
            sigma = do.DenseState(np.eye(d, dtype=complex) / d)
            assert abs(do.relative_entropy(rho, sigma) - math.log(d)) < 1e-9

    def test_support_violation_is_infinite(self):
        rho = do.DenseState(np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex))
        sigma = do.DenseState(np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex))
        assert do.relative_entropy(rho, sigma) == math.inf

    def test_nonnegative_and_matches_classical_kl(self, rng):
        for _ in range(100):
            d = 4
            p = rng.dirichlet(np.ones(d))
            q = rng.dirichlet(np.ones(d))
            rho = do.DenseState(np.diag(p).astype(complex))
            sigma = do.DenseState(np.diag(q).astype(complex))
            dval = do.relative_entropy(rho, sigma)
            kl = float(np.sum(p * np.log(p / q)))
            assert dval >= -1e-12
            assert abs(dval - kl) < 1e-9

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            do.relative_entropy(random_density(1, rng), random_density(2, rng))


class TestFidelity:
    def test_self_fidelity_one(self, rng):
        rho = random_density(2, rng)
        assert abs(do.fidelity(rho, rho) - 1.0) < 1e-9

    def test_orthogonal_pure_states(self):
        a = do.DenseState(np.diag([1.0, 0.0]).astype(complex))
        b = do.DenseState(np.diag([0.0, 1.0]).astype(complex))
        assert do.fidelity(a, b) < 1e-9

    def test_bell_states_orthogonal(self):
        g = do.max_entangled(1)
        flipped = do.apply_pauli(g, PauliString.from_x(BitString.from_str("1")), side="left")
        assert do.fidelity(flipped, g) < 1e-9

    def test_symmetry_and_pauli_invariance(self, rng):
        for _ in range(20):
            rho, sigma = random_density(2, rng), random_density(2, rng)
            f = do.fidelity(rho, sigma)
            assert abs(f - do.fidelity(sigma, rho)) < 1e-9
            p = PauliString(BitString.random(2, rng), BitString.random(2, rng))
            fp = do.fidelity(do.apply_pauli(rho, p), do.apply_pauli(sigma, p))
            assert abs(f - fp) < 1e-9


class TestApplyPauli:
    def test_identity_pauli_is_noop(self, rng):
        rho = random_density(2, rng)
        out = do.apply_pauli(rho, PauliString.identity(2), side="left")
        assert np.allclose(out.matrix, rho.matrix)

    def test_involution(self, rng):
        rho = random_density(2, rng)
        p = PauliString(BitString.random(2, rng), BitString.random(2, rng))
        assert np.allclose(do.apply_pauli(do.apply_pauli(rho, p), p).matrix, rho.matrix)

    def test_x_on_left_half_of_pair(self):
        # (X (x) I) applied to the n=1 pair gives the projector onto
        # sum_z |z xor 1, z>
        out = do.apply_pauli(do.max_entangled(1), PauliString.from_x(BitString.from_str("1")), side="left")
        vec = np.zeros(4, dtype=complex)
        vec[2] = vec[1] = 1 / math.sqrt(2)  # |10> and |01>
        assert np.allclose(out.matrix, np.outer(vec, vec.conj()))

    def test_side_selects_factor(self, rng):
        rho = random_density(2, rng)
        p = PauliString.from_x(BitString.from_str("1"))
        left = do.apply_pauli(rho, p, side="left")
        right = do.apply_pauli(rho, p, side="right")
        full_left = np.kron(do.pauli_matrix(p), np.eye(2))
        full_right = np.kron(np.eye(2), do.pauli_matrix(p))
        assert np.allclose(left.matrix, full_left @ rho.matrix @ full_left.conj().T)
        assert np.allclose(right.matrix, full_right @ rho.matrix @ full_right.conj().T)

    def test_oversized_pauli_rejected(self, rng):
        with pytest.raises(ValueError):
            do.apply_pauli(random_density(1, rng), PauliString.identity(2))


class TestRegisterUtilities:
    def test_permute_roundtrip(self, rng):
        rho = random_density(3, rng)
        perm = [2, 0, 1]
        back = [perm.index(i) for i in range(3)]
        again = do.permute_qubits(do.permute_qubits(rho, perm), back)
        assert np.allclose(again.matrix, rho.matrix)

    def test_project_prefix_on_basis_state(self):
        bits = BitString.from_str("10")
        rho = do.basis_state(bits)
        prob, rest = do.project_prefix(rho, BitString.from_str("1"))
        assert abs(prob - 1.0) < 1e-12
        assert np.allclose(rest.matrix, do.basis_state(BitString.from_str("0")).matrix)
        prob0, rest0 = do.project_prefix(rho, BitString.from_str("0"))
        assert prob0 == 0.0 and rest0 is None

    def test_measure_prefix_statistics(self, rng):
        rho = do.DenseState(np.diag([0.25, 0.25, 0.5, 0.0]).astype(complex))
        counts = {0: 0, 1: 0}
        for _ in range(2000):
            bits, prob, _ = do.measure_prefix(rho, 1, rng)
            counts[bits.value] += 1
        assert abs(counts[0] / 2000 - 0.5) < 0.05

    def test_trace_out_suffix(self, rng):
        a = random_density(1, rng)
        b = random_density(1, rng)
        joint = do.DenseState(np.kron(a.matrix, b.matrix))
        assert np.allclose(do.trace_out_suffix(joint, 1).matrix, a.matrix)

    def test_bell_vectors_orthonormal(self):
        vecs = [
            do.bell_vector(BitString(1, a), BitString(1, b))
            for a in (0, 1)
            for b in (0, 1)
        ]
        gram = np.array([[abs(np.vdot(u, v)) for v in vecs] for u in vecs])
        assert np.allclose(gram, np.eye(4), atol=1e-12)

    def test_teleport_identity_resource(self, rng):
        # teleporting through the perfect pair returns the payload
        payload = random_density(1, rng)
        out = do.teleport_with_resource(payload, do.max_entangled(1))
        assert do.trace_distance(out, payload) < 1e-9

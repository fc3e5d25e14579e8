import math

import numpy as np
import pytest

from dephasim import dense_oracle as do
from dephasim.capacity import capacity_report, divergence_to_uniform, shannon_entropy
from dephasim.channel import GeneralizedDephasingChannel
from dephasim.distributions import Explicit, UniformAll, UniformSupport
from dephasim.gf2 import BitString
from dephasim.prg import PrgConfig, build_owf, induced_distribution

LN2 = math.log(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(99)


def random_explicit(n, rng):
    weights = rng.dirichlet(np.ones(1 << n))
    return Explicit(n, tuple((BitString(n, v), float(w)) for v, w in enumerate(weights)))


class TestShannonEntropy:
    def test_point_mass(self):
        assert shannon_entropy(Explicit.point_mass(BitString(5, 9))) == 0.0

    def test_uniform_support(self):
        dist = UniformSupport(6, tuple(BitString(6, v) for v in range(12)))
        assert abs(shannon_entropy(dist) - math.log(12)) < 1e-12

    def test_binary_pinned_and_oracle_checked(self):
        dist = Explicit(1, ((BitString(1, 0), 0.75), (BitString(1, 1), 0.25)))
        h = shannon_entropy(dist)
        assert abs(h - 0.5623351446188083) < 1e-12
        choi = GeneralizedDephasingChannel(1, dist).choi().to_dense()
        assert abs(h - do.von_neumann_entropy(choi)) < 1e-9

    def test_non_enumerable_rejected(self):
        cfg = PrgConfig(owf=build_owf("keyedperm", 11), seed_len=22, out_len=30)
        with pytest.raises(ValueError):
            shannon_entropy(induced_distribution(cfg))


class TestDivergenceToUniform:
    def test_uniform_is_zero(self):
        assert abs(divergence_to_uniform(UniformAll(5))) < 1e-12
        assert abs(divergence_to_uniform(UniformSupport.full(3))) < 1e-12

    def test_point_mass(self):
        assert abs(divergence_to_uniform(Explicit.point_mass(BitString(4, 3))) - 4 * LN2) < 1e-12

    def test_small_support_pinned(self):
        # uniform over 4 of 2^8 strings: direct summation of p log(p/u)
        dist = UniformSupport(8, tuple(BitString(8, v) for v in (1, 2, 4, 8)))
        direct = sum(0.25 * math.log(0.25 / (1 / 256.0)) for _ in range(4))
        assert abs(direct - 6 * LN2) < 1e-12
        assert abs(divergence_to_uniform(dist) - 6 * LN2) < 1e-12
        assert abs(6 * LN2 - 4.1588830833596715) < 1e-12

    def test_bounds_and_uniqueness_of_zero(self, rng):
        for n in (1, 2, 3):
            for _ in range(20):
                dist = random_explicit(n, rng)
                d = divergence_to_uniform(dist)
                assert -1e-12 <= d <= n * LN2 + 1e-12
        assert divergence_to_uniform(UniformAll(3)) < 1e-12
        skew = Explicit(1, ((BitString(1, 0), 0.6), (BitString(1, 1), 0.4)))
        assert divergence_to_uniform(skew) > 1e-3

    def test_additive_over_products(self, rng):
        for _ in range(10):
            p = random_explicit(2, rng)
            q = random_explicit(1, rng)
            joint = Explicit(
                3,
                tuple(
                    (a.concat(b), wa * wb)
                    for a, wa in p.weights
                    for b, wb in q.weights
                ),
            )
            assert abs(
                divergence_to_uniform(joint)
                - (divergence_to_uniform(p) + divergence_to_uniform(q))
            ) < 1e-9

    def test_oracle_agreement_small_n(self, rng):
        for n in (1, 2, 3):
            for _ in range(5):
                dist = random_explicit(n, rng)
                ch = GeneralizedDephasingChannel(n, dist)
                choi = ch.choi().to_dense()
                uniform_choi = GeneralizedDephasingChannel(n, UniformAll(n)).choi().to_dense()
                assert abs(shannon_entropy(dist) - do.von_neumann_entropy(choi)) < 1e-9
                assert abs(
                    divergence_to_uniform(dist) - do.relative_entropy(choi, uniform_choi)
                ) < 1e-9


class TestCapacityReport:
    def test_fully_dephasing_all_zero(self):
        report = capacity_report(GeneralizedDephasingChannel(4, UniformAll(4)))
        assert report.regime == "poly-support"
        assert abs(report.divergence_to_uniform) < 1e-12
        assert abs(report.coherent_info_lower) < 1e-12
        assert abs(report.computational_lower) < 1e-12
        assert abs(report.computational_upper) < 1e-12

    def test_poly_support_clamped_rate(self):
        support = tuple(BitString(16, v) for v in range(64))
        ch = GeneralizedDephasingChannel(16, UniformSupport(16, support))
        report = capacity_report(ch, delta=1e-3)
        # raw syndrome demand ceil(log2(64^2 / 1e-3)) = 22 exceeds n - 1 = 15
        assert abs(report.divergence_to_uniform - 10 * LN2) < 1e-12
        assert abs(report.computational_lower - LN2) < 1e-12
        assert report.computational_upper == report.divergence_to_uniform
        assert any("clamped" in note for note in report.provenance_notes)

    def test_poly_support_comfortable_rate(self):
        support = (BitString.zeros(64), BitString(64, (1 << 64) - 1))
        ch = GeneralizedDephasingChannel(64, UniformSupport(64, support))
        report = capacity_report(ch, delta=1e-3)
        # ceil(log2(4 / 1e-3)) = 12 syndrome bits, 52 remain
        assert abs(report.computational_lower - 52 * LN2) < 1e-12
        assert not any("clamped" in note for note in report.provenance_notes)

    def test_invariants_hold(self, rng):
        support = tuple(BitString(8, v) for v in range(8))
        for ch in (
            GeneralizedDephasingChannel(8, UniformSupport(8, support)),
            GeneralizedDephasingChannel(3, random_explicit(3, rng)),
        ):
            report = capacity_report(ch)
            assert abs(report.divergence_to_uniform - (report.n * LN2 - report.entropy_p)) < 1e-12
            assert report.coherent_info_lower == report.divergence_to_uniform
            if report.computational_lower is not None and report.computational_upper is not None:
                assert report.computational_lower <= report.computational_upper + 1e-12

    def test_prg_regime_conditional_flag(self):
        cfg = PrgConfig(owf=build_owf("toyexp", 4), seed_len=8, out_len=16)
        ch = GeneralizedDephasingChannel(16, induced_distribution(cfg))
        report = capacity_report(ch)
        assert report.regime == "prg-induced"
        assert report.divergence_to_uniform >= 8 * LN2 - 1e-9
        assert report.computational_upper == 0.0
        assert report.computational_lower is None
        assert report.assumption_conditional
        assert any(note.startswith("assumption-conditional") for note in report.provenance_notes)

    def test_explicit_regime_omits_bounds(self, rng):
        report = capacity_report(GeneralizedDephasingChannel(2, random_explicit(2, rng)))
        assert report.regime == "explicit"
        assert report.computational_lower is None
        assert report.computational_upper is None
        assert not report.assumption_conditional

    def test_json_shape(self):
        report = capacity_report(GeneralizedDephasingChannel(4, UniformAll(4)))
        doc = report.to_dict()
        assert doc["two_way_capacity"] == {"nats": 0.0, "bits": 0.0}
        assert doc["entropy"]["bits"] == pytest.approx(4.0)
        assert isinstance(doc["provenance_notes"], list)

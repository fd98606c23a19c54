import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixed_platoon.composition import (
    SegmentKind,
    Topology,
    TrafficComposition,
    VehicleClass,
    partition,
    sample_composition,
    segment_probabilities,
)

MP, ICAV, IHDV = SegmentKind.MIXED_PLATOON, SegmentKind.INDEPENDENT_CAV, SegmentKind.INDEPENDENT_HDV

compositions = st.text(alphabet="CH", min_size=1, max_size=40).map(TrafficComposition.from_string)


def summary(part):
    return [(s.kind, s.members) for s in part.segments]


class TestSample:
    def test_extremes(self):
        assert set(sample_composition(5, 0.0, 1).classes) == {VehicleClass.HDV}
        assert set(sample_composition(5, 1.0, 1).classes) == {VehicleClass.CAV}

    def test_reproducible(self):
        assert sample_composition(50, 0.3, 7) == sample_composition(50, 0.3, 7)

    def test_law_of_large_numbers(self):
        c = sample_composition(100_000, 0.3, 123)
        frac = sum(x is VehicleClass.CAV for x in c.classes) / len(c)
        assert abs(frac - 0.3) < 0.01

    @pytest.mark.parametrize("p", [-0.1, 1.1])
    def test_bad_rate(self, p):
        with pytest.raises(ValueError):
            sample_composition(5, p, 0)


class TestPartition:
    def test_mpf_full_platoon(self):
        part = partition(TrafficComposition.from_string("HHHC"), Topology.MPF, 4)
        assert summary(part) == [(MP, (1, 2, 3, 4))]

    def test_mpf_overflow_hdv(self):
        part = partition(TrafficComposition.from_string("HHHHC"), Topology.MPF, 4)
        assert summary(part) == [(IHDV, (1,)), (MP, (2, 3, 4, 5))]

    def test_msl_cav_neighbour(self):
        part = partition(TrafficComposition.from_string("CCH"), Topology.MSL, 4)
        assert summary(part) == [(ICAV, (1,)), (MP, (2, 3))]

    def test_mpf_front_cav_is_independent(self):
        part = partition(TrafficComposition.from_string("CHC"), Topology.MPF, 4)
        assert summary(part) == [(ICAV, (1,)), (MP, (2, 3))]

    def test_cacc_has_no_platoons(self):
        part = partition(TrafficComposition.from_string("HCHHC"), Topology.CACC, 4)
        assert part.platoons() == []
        assert [s.kind for s in part.segments] == [IHDV, ICAV, IHDV, IHDV, ICAV]

    def test_m_max_too_small(self):
        with pytest.raises(ValueError):
            partition(TrafficComposition.from_string("HC"), Topology.MPF, 1)

    @given(c=compositions, topo=st.sampled_from([Topology.MPF, Topology.MSL]), m_max=st.integers(2, 8))
    def test_coverage_and_structure(self, c, topo, m_max):
        part = partition(c, topo, m_max)
        flat = [i for s in part.segments for i in s.members]
        assert flat == list(range(1, len(c) + 1))
        for s in part.platoons():
            cavs = [i for i in s.members if c.cls(i) is VehicleClass.CAV]
            assert len(cavs) == 1
            assert 2 <= s.size <= m_max
            assert cavs[0] == (s.members[-1] if topo is Topology.MPF else s.members[0])

    @given(c=compositions, m_max=st.integers(2, 8))
    def test_mpf_msl_duality(self, c, m_max):
        n = len(c)
        rev = TrafficComposition(c.classes[::-1])
        msl = partition(c, Topology.MSL, m_max)
        mpf_rev = partition(rev, Topology.MPF, m_max)
        mirrored = [(s.kind, tuple(sorted(n + 1 - i for i in s.members))) for s in reversed(mpf_rev.segments)]
        assert summary(msl) == mirrored


class TestSegmentProbabilities:
    def test_hdv_value(self):
        assert segment_probabilities(0.2, 6).p_hdv == pytest.approx(0.262144, abs=1e-15)

    def test_half(self):
        sp = segment_probabilities(0.5, 4)
        assert sp.p_size_M == pytest.approx(0.0625)
        assert sp.p_cav == pytest.approx(0.25)
        assert set(sp.p_size_m) == {2, 3}

    @pytest.mark.parametrize("m_max", [2, 4, 8])
    def test_no_cavs(self, m_max):
        sp = segment_probabilities(0.0, m_max)
        assert sp.p_hdv == 1.0
        assert sp.p_size_M == 0.0 and sp.p_cav == 0.0
        assert all(v == 0.0 for v in sp.p_size_m.values())

    @given(p=st.floats(0.001, 0.999), m_max=st.integers(3, 10))
    def test_bounds_and_monotone(self, p, m_max):
        sp = segment_probabilities(p, m_max)
        vals = [sp.p_size_M, sp.p_cav, sp.p_hdv, *sp.p_size_m.values()]
        assert all(0.0 <= v <= 1.0 for v in vals)
        seq = [sp.p_size_m[m] for m in sorted(sp.p_size_m)]
        assert all(a > b for a, b in zip(seq, seq[1:]))

    def test_empirical_sizes_occur(self):
        c = sample_composition(100_000, 0.3, 5)
        for topo in (Topology.MPF, Topology.MSL):
            part = partition(c, topo, 6)
            sizes = part.platoon_sizes()
            sp = segment_probabilities(0.3, 6)
            assert all(m in sizes for m, v in sp.p_size_m.items() if v > 0)
            assert 6 in sizes
            kinds = {s.kind for s in part.segments}
            assert {ICAV, IHDV} <= kinds

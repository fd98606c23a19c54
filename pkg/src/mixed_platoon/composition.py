"""Random CAV/HDV sequences and their decomposition into mixed platoons."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class VehicleClass(str, Enum):
    CAV = "CAV"
    HDV = "HDV"


class Topology(str, Enum):
    MPF = "MPF"  # CAV at the platoon tail, looks ahead
    MSL = "MSL"  # CAV at the platoon head, looks behind
    CACC = "CACC"  # baseline: every CAV runs CACC independently


class SegmentKind(str, Enum):
    MIXED_PLATOON = "MixedPlatoon"
    INDEPENDENT_CAV = "IndependentCAV"
    INDEPENDENT_HDV = "IndependentHDV"


@dataclass(frozen=True)
class TrafficComposition:
    """Vehicle classes for indices 1..N (the head vehicle 0 is not included)."""

    classes: tuple[VehicleClass, ...]
    seed: int | None = None

    def __len__(self):
        return len(self.classes)

    def cls(self, index: int) -> VehicleClass:
        return self.classes[index - 1]

    @classmethod
    def from_string(cls, text: str, seed: int | None = None) -> "TrafficComposition":
        """Build from a compact string such as ``"HHHC"``."""
        lookup = {"C": VehicleClass.CAV, "H": VehicleClass.HDV}
        return cls(tuple(lookup[ch] for ch in text.upper()), seed)


@dataclass(frozen=True)
class Segment:
    kind: SegmentKind
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class PlatoonPartition:
    segments: tuple[Segment, ...]
    topology: Topology
    m_max: int

    def platoons(self) -> list[Segment]:
        return [s for s in self.segments if s.kind is SegmentKind.MIXED_PLATOON]

    def platoon_sizes(self) -> set[int]:
        return {s.size for s in self.platoons()}


@dataclass(frozen=True)
class SegmentProbabilities:
    p_size_M: float
    p_size_m: dict[int, float] = field(default_factory=dict)
    p_cav: float = 0.0
    p_hdv: float = 0.0


def sample_composition(n: int, p: float, seed: int) -> TrafficComposition:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"penetration rate must lie in [0, 1], got {p}")
    if n < 1:
        raise ValueError("need at least one vehicle")
    draws = np.random.default_rng(seed).random(n)
    classes = tuple(VehicleClass.CAV if d < p else VehicleClass.HDV for d in draws)
    return TrafficComposition(classes, seed)


def partition(c: TrafficComposition, topology: Topology | str, m_max: int) -> PlatoonPartition:
    """Group each CAV with up to ``m_max - 1`` adjacent HDVs.

    MPF platoons take HDVs immediately ahead of the CAV, MSL platoons take
    HDVs immediately behind. A CAV with a CAV neighbour on that side, or with
    no vehicle there at all, is independent. Claims are made front to back.
    """
    topology = Topology(topology)
    if m_max < 2:
        raise ValueError("maximum platoon size must be at least 2")
    n = len(c)
    claimed = [False] * (n + 1)
    segments: list[Segment] = []

    if topology is not Topology.CACC:
        step = -1 if topology is Topology.MPF else 1
        for j in range(1, n + 1):
            if c.cls(j) is not VehicleClass.CAV:
                continue
            hdvs = []
            k = j + step
            while 1 <= k <= n and len(hdvs) < m_max - 1:
                if c.cls(k) is not VehicleClass.HDV or claimed[k]:
                    break
                hdvs.append(k)
                k += step
            claimed[j] = True
            if not hdvs:
                segments.append(Segment(SegmentKind.INDEPENDENT_CAV, (j,)))
                continue
            for h in hdvs:
                claimed[h] = True
            segments.append(Segment(SegmentKind.MIXED_PLATOON, tuple(sorted(hdvs + [j]))))

    for j in range(1, n + 1):
        if not claimed[j]:
            kind = SegmentKind.INDEPENDENT_CAV if c.cls(j) is VehicleClass.CAV else SegmentKind.INDEPENDENT_HDV
            segments.append(Segment(kind, (j,)))

    segments.sort(key=lambda s: s.members[0])
    return PlatoonPartition(tuple(segments), topology, m_max)


def segment_probabilities(p: float, m_max: int) -> SegmentProbabilities:
    """Occurrence weights of each transfer-function type.

    These are the closed forms used as exponent weights in the mixed-traffic
    criterion; they are deliberately not normalized.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"penetration rate must lie in [0, 1], got {p}")
    if m_max < 2:
        raise ValueError("maximum platoon size must be at least 2")
    q = 1.0 - p
    return SegmentProbabilities(
        p_size_M=p * q ** (m_max - 1),
        p_size_m={m: p * p * q ** (m - 1) for m in range(2, m_max)},
        p_cav=p * p,
        p_hdv=q**m_max,
    )

"""Block state-space model of one linearized mixed platoon.

Each vehicle contributes a 2-block ``[spacing deviation, velocity deviation]``.
Blocks are ordered front to back, so under MPF the CAV is the last block and
under MSL it is the first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .composition import Topology
from .models import LinearCoeffs


@dataclass(frozen=True, eq=False)
class PlatoonModel:
    a_mat: np.ndarray
    b_vec: np.ndarray
    h_vec: np.ndarray
    c_vec: np.ndarray
    m: int
    topology: Topology

    @property
    def cav_block(self) -> int:
        return self.m - 1 if self.topology is Topology.MPF else 0


def sub_blocks(coeffs: LinearCoeffs) -> dict[str, np.ndarray]:
    a1, a2, a3 = coeffs.a1, coeffs.a2, coeffs.a3
    return {
        "A1": np.array([[0.0, -1.0], [a1, -a2]]),  # own HDV dynamics
        "A2": np.array([[0.0, 1.0], [0.0, a3]]),  # coupling to predecessor
        "A3": np.array([[0.0, -1.0], [0.0, 0.0]]),  # MPF CAV: double integrator
        "A4": np.array([[0.0, 1.0], [0.0, 0.0]]),  # MPF CAV coupling
        "B2": np.array([0.0, 1.0]),
        "H1": np.array([1.0, a3]),
        "C2": np.array([0.0, 1.0]),
    }


def build_platoon_model(coeffs: LinearCoeffs, m: int, topology: Topology | str) -> PlatoonModel:
    topology = Topology(topology)
    if topology is Topology.CACC:
        raise ValueError("CACC vehicles are independent, not platoon members")
    if m < 2:
        raise ValueError(f"platoon size must be at least 2, got {m}")
    blk = sub_blocks(coeffs)
    n = 2 * m
    a = np.zeros((n, n))
    for k in range(m):
        a[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = blk["A1"]
        if k > 0:
            a[2 * k : 2 * k + 2, 2 * k - 2 : 2 * k] = blk["A2"]
    if topology is Topology.MPF:
        a[n - 2 :, n - 2 :] = blk["A3"]
        a[n - 2 :, n - 4 : n - 2] = blk["A4"]

    cav = m - 1 if topology is Topology.MPF else 0
    b = np.zeros((n, 1))
    b[2 * cav : 2 * cav + 2, 0] = blk["B2"]
    h = np.zeros((n, 1))
    h[:2, 0] = blk["H1"]
    c = np.zeros((1, n))
    c[0, n - 2 :] = blk["C2"]
    return PlatoonModel(a, b, h, c, m, topology)

"""Transfer-function magnitudes and the probabilistic string-stability test.

The mixed-traffic product of transfer functions raised to ``N * probability``
overflows in linear scale for ``N ~ 1000``, so everything is accumulated as a
weighted sum of log-magnitudes ``L(w)``; the traffic is string stable iff
``max_w L(w) <= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .composition import SegmentProbabilities, Topology, segment_probabilities
from .lqr import LqrWeights, synthesize
from .models import CaccParams, LinearCoeffs, OvmParams, equilibrium_from_velocity, linearize

MAG_FLOOR = 1e-300
STABILITY_TOL = 1e-9


@dataclass(frozen=True)
class FrequencyGrid:
    omega_lo: float = 1e-2
    omega_hi: float = 1e2
    n_freq: int = 2000

    def __post_init__(self):
        if not 0 < self.omega_lo < self.omega_hi or self.n_freq < 2:
            raise ValueError(f"invalid frequency grid {self}")

    @cached_property
    def omegas(self) -> np.ndarray:
        return np.logspace(np.log10(self.omega_lo), np.log10(self.omega_hi), self.n_freq)


def hdv_transfer_mag(coeffs: LinearCoeffs, omega):
    s = 1j * np.asarray(omega, dtype=float)
    return np.abs((coeffs.a3 * s + coeffs.a1) / (s * s + coeffs.a2 * s + coeffs.a1))


def cav_transfer_mag(p: CaccParams, omega):
    s = 1j * np.asarray(omega, dtype=float)
    kd = p.k_d / p.denom
    kp = p.k_p / p.denom
    kpt = p.k_p * p.t_h / p.denom
    return np.abs((kd * s + kp) / (s * s + (kd + kpt) * s + kp))


def platoon_transfer_mag(a_cl, h_vec, c_vec, omega):
    """``|C (jwI - A_cl)^-1 H|`` by batched complex solves."""
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega)
    n = a_cl.shape[0]
    shifted = 1j * w[:, None, None] * np.eye(n) - a_cl[None, :, :]
    rhs = np.broadcast_to(np.asarray(h_vec, dtype=complex).reshape(1, n, 1), (w.size, n, 1))
    try:
        x = np.linalg.solve(shifted, rhs)
    except np.linalg.LinAlgError as exc:
        raise FloatingPointError("shifted closed-loop matrix is singular") from exc
    mags = np.abs(np.einsum("j,wjk->w", np.asarray(c_vec, dtype=float).ravel(), x))
    return float(mags[0]) if scalar else mags


def mixed_traffic_log_magnitude(mags: dict, probs: SegmentProbabilities, n: int, omega=None):
    """Weighted log-magnitude of the mixed-traffic transfer-function product.

    ``mags`` maps ``"HDV"``, ``"CAV"`` and each platoon size ``m`` (int) to
    magnitude arrays on a common grid. ``omega`` is accepted for symmetry with
    the other evaluators and is not used.
    """
    m_max = max(probs.p_size_m, default=1) + 1
    terms = [(probs.p_cav, "CAV"), (probs.p_hdv, "HDV"), (probs.p_size_M, m_max)]
    terms += [(w, m) for m, w in probs.p_size_m.items()]
    total = 0.0
    for weight, key in terms:
        if weight == 0.0:
            continue
        total = total + weight * np.log(np.maximum(mags[key], MAG_FLOOR))
    return n * np.asarray(total, dtype=float)


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    p: float
    m_max: int
    n: int = 1000
    ovm: OvmParams = OvmParams()
    cacc: CaccParams = CaccParams()
    weights: LqrWeights = LqrWeights()
    v_star: float = 15.0

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))

    def coeffs(self) -> LinearCoeffs:
        return linearize(self.ovm, equilibrium_from_velocity(self.ovm, self.v_star))

    def with_p(self, p: float) -> "Scenario":
        return Scenario(self.topology, p, self.m_max, self.n, self.ovm, self.cacc, self.weights, self.v_star)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    omegas: np.ndarray
    log_mag: np.ndarray
    segment_mags: dict = field(repr=False)
    probs: SegmentProbabilities = field(repr=False)
    tolerance: float = STABILITY_TOL

    @property
    def peak(self) -> float:
        return float(np.max(self.log_mag))

    @property
    def argmax_omega(self) -> float:
        return float(self.omegas[int(np.argmax(self.log_mag))])

    @property
    def stable(self) -> bool:
        return self.peak <= self.tolerance


def segment_magnitudes(scenario: Scenario, omegas) -> dict:
    """Magnitudes of every transfer function the criterion needs.

    For the CACC baseline a "platoon" of size m is its members in series:
    one CACC vehicle and m-1 HDVs.
    """
    coeffs = scenario.coeffs()
    g_hdv = hdv_transfer_mag(coeffs, omegas)
    g_cav = cav_transfer_mag(scenario.cacc, omegas)
    mags = {"HDV": g_hdv, "CAV": g_cav}
    for m in range(2, scenario.m_max + 1):
        if scenario.topology is Topology.CACC:
            mags[m] = g_cav * g_hdv ** (m - 1)
        else:
            plant = synthesize(coeffs, m, scenario.topology, scenario.weights)
            mags[m] = platoon_transfer_mag(plant.a_cl, plant.model.h_vec, plant.model.c_vec, omegas)
    return mags


def string_stability(scenario: Scenario, grid: FrequencyGrid = FrequencyGrid()) -> StabilityReport:
    omegas = grid.omegas
    mags = segment_magnitudes(scenario, omegas)
    probs = segment_probabilities(scenario.p, scenario.m_max)
    log_mag = mixed_traffic_log_magnitude(mags, probs, scenario.n, omegas)
    return StabilityReport(omegas, log_mag, mags, probs)


def find_critical_penetration(scenario: Scenario, grid: FrequencyGrid = FrequencyGrid(), step: float = 0.1):
    """Smallest penetration rate on the ``step`` lattice that is string stable, or None."""
    if step <= 0:
        raise ValueError("step must be positive")
    n_steps = int(np.floor(1.0 / step + 1e-9))
    mags = segment_magnitudes(scenario, grid.omegas)
    for k in range(1, n_steps + 1):
        p = round(k * step, 12)
        probs = segment_probabilities(p, scenario.m_max)
        if np.max(mixed_traffic_log_magnitude(mags, probs, scenario.n)) <= STABILITY_TOL:
            return p
    return None

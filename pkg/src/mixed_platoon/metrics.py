"""Velocity-dispersion indices over a simulated trajectory.

SD and MAD sum over every recorded step without dividing by the number of
steps, so they grow with the horizon; the ``*_normalized`` variants divide
by the step count for comparisons across horizons or step sizes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sim import Trajectory


@dataclass(frozen=True, eq=False)
class MetricsReport:
    sd: float
    mad: float
    sd_normalized: float
    mad_normalized: float
    peak_deviation: np.ndarray  # index 0 is the head vehicle


def _followers(velocities) -> np.ndarray:
    if isinstance(velocities, Trajectory):
        return velocities.velocity[:, 1:]
    v = np.atleast_2d(np.asarray(velocities, dtype=float))
    if v.size == 0:
        raise ValueError("empty trajectory")
    return v


def sd(velocities) -> float:
    """Accepts a :class:`Trajectory` (head excluded) or a (steps, N) velocity array."""
    v = _followers(velocities)
    n = v.shape[1]
    if n < 2:
        raise ValueError("SD needs at least two vehicles")
    dev = v - v.mean(axis=1, keepdims=True)
    return float(np.sqrt(np.sum(dev**2) / (n - 1)))


def mad(velocities) -> float:
    v = _followers(velocities)
    dev = v - v.mean(axis=1, keepdims=True)
    return float(np.sum(np.abs(dev)) / v.shape[1])


def peak_deviation_profile(traj: Trajectory, v_star: float | None = None) -> np.ndarray:
    """Per-vehicle ``max_t |v_i(t) - v*|`` for vehicles 0..N."""
    if traj.velocity.size == 0:
        raise ValueError("empty trajectory")
    if v_star is None:
        v_star = traj.config.v_star
    return np.max(np.abs(traj.velocity - v_star), axis=0)


def evaluate(traj: Trajectory) -> MetricsReport:
    steps = traj.velocity.shape[0]
    s, m = sd(traj), mad(traj)
    return MetricsReport(s, m, s / np.sqrt(steps), m / steps, peak_deviation_profile(traj))

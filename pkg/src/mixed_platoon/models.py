"""Car-following laws: nonlinear OVM for HDVs, CACC for independent CAVs.

Spacing ``s`` is always the bumper-to-bumper gap to the predecessor.
Accelerations are returned unsaturated; actuation limits belong to the
simulator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OvmParams:
    alpha: float = 0.6
    beta: float = 0.9
    s_min: float = 2.0
    s_max: float = 32.0
    v_max: float = 30.0  # m/s

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not 0 <= self.s_min < self.s_max:
            raise ValueError("need 0 <= s_min < s_max")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")


@dataclass(frozen=True)
class CaccParams:
    t_h: float = 1.0
    s_0: float = 2.0
    k_p: float = 0.45
    k_d: float = 0.25
    dt: float = 0.1

    def __post_init__(self):
        if self.t_h <= 0 or self.s_0 < 0 or self.k_p <= 0 or self.k_d <= 0 or self.dt <= 0:
            raise ValueError(f"invalid CACC parameters: {self}")

    @property
    def denom(self) -> float:
        return self.k_d * self.t_h + self.dt


@dataclass(frozen=True)
class Equilibrium:
    s_star: float
    v_star: float
    v_prime: float


@dataclass(frozen=True)
class LinearCoeffs:
    """Partial derivatives of the HDV law at equilibrium.

    ``a1`` multiplies the spacing deviation, ``a2`` the (negated) own-velocity
    deviation and ``a3`` the predecessor-velocity deviation.
    """

    a1: float
    a2: float
    a3: float


def desired_velocity(p: OvmParams, s: float) -> float:
    if s < 0:
        raise ValueError(f"spacing must be non-negative, got {s}")
    if s <= p.s_min:
        return 0.0
    if s >= p.s_max:
        return p.v_max
    return 0.5 * p.v_max * (1.0 - math.cos(math.pi * (s - p.s_min) / (p.s_max - p.s_min)))


def desired_velocity_array(p: OvmParams, s: np.ndarray) -> np.ndarray:
    """Vectorized :func:`desired_velocity` without the sign check."""
    frac = np.clip((s - p.s_min) / (p.s_max - p.s_min), 0.0, 1.0)
    return 0.5 * p.v_max * (1.0 - np.cos(np.pi * frac))


def desired_velocity_slope(p: OvmParams, s: float) -> float:
    if s <= p.s_min or s >= p.s_max:
        return 0.0
    width = p.s_max - p.s_min
    return 0.5 * p.v_max * math.pi / width * math.sin(math.pi * (s - p.s_min) / width)


def ovm_accel(p: OvmParams, s: float, s_dot: float, v: float) -> float:
    return p.alpha * (desired_velocity(p, s) - v) + p.beta * s_dot


def equilibrium_from_velocity(p: OvmParams, v_star: float) -> Equilibrium:
    """Invert the raised-cosine desired-velocity map at ``v_star``."""
    if not 0 < v_star < p.v_max:
        raise ValueError(f"no interior equilibrium for v_star={v_star} (v_max={p.v_max})")
    frac = math.acos(1.0 - 2.0 * v_star / p.v_max) / math.pi
    s_star = p.s_min + frac * (p.s_max - p.s_min)
    return Equilibrium(s_star=s_star, v_star=v_star, v_prime=desired_velocity_slope(p, s_star))


def linearize(p: OvmParams, eq: Equilibrium) -> LinearCoeffs:
    return LinearCoeffs(a1=p.alpha * eq.v_prime, a2=p.alpha + p.beta, a3=p.beta)


def cacc_accel(p: CaccParams, s: float, v: float, v_prev: float) -> float:
    return (p.k_p * (s - p.s_0 - p.t_h * v) + p.k_d * (v_prev - v)) / p.denom

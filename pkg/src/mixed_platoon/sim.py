"""Nonlinear single-lane simulation of mixed traffic behind a perturbed head vehicle.

Vehicle 0 is the head; vehicles 1..N follow it. HDVs run the nonlinear OVM,
independent CAVs run CACC, platoon CAVs apply ``u = -K x`` computed from
the stacked deviations of their platoon (MSL CAVs add it on top of OVM).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .composition import (
    PlatoonPartition,
    SegmentKind,
    Topology,
    TrafficComposition,
    VehicleClass,
    partition,
    sample_composition,
)
from .lqr import LqrWeights, SynthesizedPlatoon, synthesize
from .models import (
    CaccParams,
    Equilibrium,
    OvmParams,
    desired_velocity_array,
    equilibrium_from_velocity,
    linearize,
)

PERTURB_START = 10.0
PERTURB_END = 16.0


class CollisionError(RuntimeError):
    def __init__(self, t: float, index: int, gap: float, partial: "Trajectory | None" = None):
        super().__init__(f"collision at t={t:.2f} s: vehicle {index} gap {gap:.3f} m")
        self.t = t
        self.index = index
        self.gap = gap
        self.partial = partial


@dataclass(frozen=True)
class SimConfig:
    n: int = 100
    p: float = 0.2
    m_max: int = 6
    topology: Topology = Topology.MSL
    seed: int = 1
    dt: float = 0.1
    t_end: float = 150.0
    v_star: float = 15.0
    accel_limit: float = 2.0
    vehicle_length: float = 5.0
    perturbation_scale: float = 1.0  # 0 disables the head perturbation
    ovm: OvmParams = OvmParams()
    cacc: CaccParams = CaccParams()
    weights: LqrWeights = LqrWeights()

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= PERTURB_END:
            raise ValueError(f"t_end must exceed the perturbation end ({PERTURB_END} s)")
        if self.n < 2:
            raise ValueError("need at least two following vehicles")
        if self.m_max < 2:
            raise ValueError("maximum platoon size must be at least 2")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def head_velocity(t: float, v_star: float, scale: float = 1.0) -> float:
    """Decelerate at 1 m/s^2 for 3 s from t=10 s, then recover over 3 s."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if t <= PERTURB_START or t >= PERTURB_END:
        dev = 0.0
    elif t <= 13.0:
        dev = -(t - PERTURB_START)
    else:
        dev = t - PERTURB_END
    return v_star + scale * dev


@dataclass
class SimState:
    """Positions, velocities and last applied accelerations of vehicles 0..N."""

    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray

    def copy(self) -> "SimState":
        return SimState(self.position.copy(), self.velocity.copy(), self.acceleration.copy())


@dataclass(frozen=True)
class VehicleState:
    position: float
    velocity: float
    acceleration: float
    cls: VehicleClass | None  # None for the head vehicle
    segment: SegmentKind | None


@dataclass(eq=False)
class SimSetup:
    config: SimConfig
    composition: TrafficComposition
    partition: PlatoonPartition
    equilibrium: Equilibrium
    gains: dict[int, SynthesizedPlatoon]
    initial: SimState
    ovm_mask: np.ndarray = field(repr=False)  # OVM term applies (HDVs and MSL platoon CAVs)
    cacc_mask: np.ndarray = field(repr=False)
    gain_matrix: np.ndarray = field(repr=False)  # u = -gain_matrix @ deviations
    segment_of: list = field(repr=False)


@dataclass(eq=False)
class Trajectory:
    """Snapshots at ``t = 0, dt, ..., t_end``; arrays are (steps, N + 1) with column 0 the head."""

    t: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    classes: tuple[VehicleClass, ...]
    config: SimConfig
    partition: PlatoonPartition | None = None

    @property
    def n(self) -> int:
        return self.velocity.shape[1] - 1

    def vehicle_state(self, k: int, i: int) -> VehicleState:
        seg = None
        if i > 0 and self.partition is not None:
            seg = next(s.kind for s in self.partition.segments if i in s.members)
        return VehicleState(
            float(self.position[k, i]),
            float(self.velocity[k, i]),
            float(self.acceleration[k, i]),
            self.classes[i - 1] if i > 0 else None,
            seg,
        )


def initialize(config: SimConfig, composition: TrafficComposition | None = None) -> SimSetup:
    eq = equilibrium_from_velocity(config.ovm, config.v_star)
    if composition is None:
        composition = sample_composition(config.n, config.p, config.seed)
    elif len(composition) != config.n:
        raise ValueError(f"composition has {len(composition)} vehicles, config says {config.n}")
    part = partition(composition, config.topology, config.m_max)
    n = config.n

    ovm_mask = np.zeros(n + 1, dtype=bool)
    cacc_mask = np.zeros(n + 1, dtype=bool)
    gain_matrix = np.zeros((n + 1, 2 * (n + 1)))
    segment_of: list = [None] * (n + 1)
    gains: dict[int, SynthesizedPlatoon] = {}
    coeffs = linearize(config.ovm, eq)

    for seg in part.segments:
        for i in seg.members:
            segment_of[i] = seg
        if seg.kind is SegmentKind.INDEPENDENT_HDV:
            ovm_mask[seg.members[0]] = True
        elif seg.kind is SegmentKind.INDEPENDENT_CAV:
            cacc_mask[seg.members[0]] = True
        else:
            if seg.size not in gains:
                gains[seg.size] = synthesize(coeffs, seg.size, config.topology, config.weights)
            k_vec = gains[seg.size].gain.k_vec.ravel()
            cav = seg.members[-1] if config.topology is Topology.MPF else seg.members[0]
            for i in seg.members:
                if i != cav or config.topology is Topology.MSL:
                    ovm_mask[i] = True
            lo = 2 * seg.members[0]
            gain_matrix[cav, lo : lo + 2 * seg.size] = k_vec

    pos = -np.arange(n + 1) * (eq.s_star + config.vehicle_length)
    vel = np.full(n + 1, config.v_star)
    initial = SimState(pos, vel, np.zeros(n + 1))
    return SimSetup(config, composition, part, eq, gains, initial, ovm_mask, cacc_mask, gain_matrix, segment_of)


def _gaps(state: SimState, length: float) -> np.ndarray:
    return state.position[:-1] - state.position[1:] - length


def accelerations(state: SimState, setup: SimSetup) -> np.ndarray:
    """Saturated accelerations of vehicles 1..N (entry 0 is left at zero)."""
    cfg = setup.config
    eq = setup.equilibrium
    v = state.velocity
    gaps = np.empty_like(v)
    gaps[0] = eq.s_star
    gaps[1:] = _gaps(state, cfg.vehicle_length)
    s_dot = np.zeros_like(v)
    s_dot[1:] = v[:-1] - v[1:]

    acc = np.zeros_like(v)
    o = cfg.ovm
    acc += np.where(setup.ovm_mask, o.alpha * (desired_velocity_array(o, gaps) - v) + o.beta * s_dot, 0.0)
    c = cfg.cacc
    acc += np.where(setup.cacc_mask, (c.k_p * (gaps - c.s_0 - c.t_h * v) + c.k_d * s_dot) / c.denom, 0.0)
    dev = np.empty(2 * v.size)
    dev[0::2] = gaps - eq.s_star
    dev[1::2] = v - eq.v_star
    acc -= setup.gain_matrix @ dev
    acc[0] = 0.0
    return np.clip(acc, -cfg.accel_limit, cfg.accel_limit)


def step(state: SimState, t: float, setup: SimSetup) -> SimState:
    """Advance one step of ``dt``: velocities first, then positions with the new velocities."""
    cfg = setup.config
    dt = cfg.dt
    gaps = _gaps(state, cfg.vehicle_length)
    bad = np.flatnonzero(gaps <= 0.0)
    if bad.size:
        raise CollisionError(t, int(bad[0]) + 1, float(gaps[bad[0]]))

    acc = accelerations(state, setup)
    vel = np.maximum(state.velocity + acc * dt, 0.0)
    vel[0] = head_velocity(t + dt, cfg.v_star, cfg.perturbation_scale)
    applied = (vel - state.velocity) / dt
    return SimState(state.position + vel * dt, vel, applied)


def run(config: SimConfig, composition: TrafficComposition | None = None, setup: SimSetup | None = None) -> Trajectory:
    if setup is None:
        setup = initialize(config, composition)
    n_steps = config.n_steps
    shape = (n_steps + 1, config.n + 1)
    pos = np.empty(shape)
    vel = np.empty(shape)
    acc = np.empty(shape)
    t = np.arange(n_steps + 1) * config.dt

    state = setup.initial.copy()
    pos[0], vel[0], acc[0] = state.position, state.velocity, state.acceleration
    for k in range(n_steps):
        try:
            state = step(state, t[k], setup)
        except CollisionError as err:
            err.partial = Trajectory(
                t[: k + 1], pos[: k + 1], vel[: k + 1], acc[: k + 1],
                setup.composition.classes, config, setup.partition,
            )
            raise
        pos[k + 1], vel[k + 1] = state.position, state.velocity
        # the acceleration recorded at step k is the one applied over [t_k, t_k+1]
        acc[k] = state.acceleration
    gaps = _gaps(state, config.vehicle_length)
    if np.any(gaps <= 0.0):
        i = int(np.flatnonzero(gaps <= 0.0)[0])
        raise CollisionError(t[n_steps], i + 1, float(gaps[i]),
                             Trajectory(t, pos, vel, acc, setup.composition.classes, config, setup.partition))
    acc[n_steps] = accelerations(state, setup)
    acc[n_steps, 0] = 0.0
    return Trajectory(t, pos, vel, acc, setup.composition.classes, config, setup.partition)

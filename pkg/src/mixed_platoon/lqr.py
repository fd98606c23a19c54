"""Continuous-time LQR synthesis for mixed platoons.

The control law is ``u = -K x`` so the closed loop is ``A - B K``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .composition import Topology
from .models import LinearCoeffs
from .statespace import PlatoonModel, build_platoon_model


class SynthesisError(RuntimeError):
    """Raised when no stabilizing controller can be produced."""


@dataclass(frozen=True)
class LqrWeights:
    q_diag: tuple[float, ...] | None = None  # None -> q_scale * identity of the right size
    r: float = 1.0
    q_scale: float = 1.0

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("control penalty r must be positive")
        if self.q_scale <= 0:
            raise ValueError("state penalty scale must be positive")
        if self.q_diag is not None:
            q = np.asarray(self.q_diag, dtype=float)
            if np.any(q < 0) or not np.any(q > 0):
                raise ValueError("state penalties must be >= 0 with at least one positive")

    def q_matrix(self, n: int) -> np.ndarray:
        if self.q_diag is None:
            return self.q_scale * np.eye(n)
        if len(self.q_diag) != n:
            raise ValueError(f"q_diag has {len(self.q_diag)} entries, model has {n} states")
        return np.diag(np.asarray(self.q_diag, dtype=float))


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    p_mat: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class Gain:
    k_vec: np.ndarray  # shape (1, n)


def care_residual(a, b, q, r, p) -> float:
    r = np.atleast_2d(r)
    res = a.T @ p + p @ a - p @ b @ np.linalg.solve(r, b.T @ p) + q
    return float(np.linalg.norm(res, "fro"))


def spectral_abscissa(a: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(a).real))


def _hamiltonian_solution(a, b, q, r_inv):
    n = a.shape[0]
    ham = np.block([[a, -b @ r_inv @ b.T], [-q, -a.T]])
    _, z, sdim = linalg.schur(ham, output="real", sort="lhp")
    if sdim != n:
        raise SynthesisError(f"Hamiltonian has {sdim} stable eigenvalues, expected {n}")
    x1, x2 = z[:n, :n], z[n:, :n]
    if np.linalg.cond(x1) > 1e12:
        raise SynthesisError("stable invariant subspace is not a graph; pair is not stabilizable")
    p = np.linalg.solve(x1.T, x2.T).T
    return 0.5 * (p + p.T)


def solve_care(a, b, q, r, *, max_newton: int = 20) -> RiccatiSolution:
    """Stabilizing solution of ``A'P + PA - P B R^-1 B' P + Q = 0``.

    An ordered Schur basis of the Hamiltonian gives the initial guess, then
    Newton-Kleinman steps polish the residual.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = np.atleast_2d(np.asarray(r, dtype=float))
    r_inv = np.linalg.inv(r)

    p = _hamiltonian_solution(a, b, q, r_inv)
    tol = 1e-8 * max(1.0, np.linalg.norm(q, "fro"))
    res = care_residual(a, b, q, r, p)
    for _ in range(max_newton):
        if res <= 0.01 * tol:
            break
        k = r_inv @ b.T @ p
        a_cl = a - b @ k
        if spectral_abscissa(a_cl) >= 0:
            raise SynthesisError("Newton-Kleinman iterate lost stability")
        p_new = linalg.solve_continuous_lyapunov(a_cl.T, -(q + k.T @ r @ k))
        p_new = 0.5 * (p_new + p_new.T)
        res_new = care_residual(a, b, q, r, p_new)
        if res_new >= res:
            break
        p, res = p_new, res_new

    if not np.all(np.isfinite(p)) or res > tol:
        raise SynthesisError(f"CARE residual {res:.3e} exceeds tolerance {tol:.3e}")
    if np.min(np.linalg.eigvalsh(p)) < -1e-8 * max(1.0, np.linalg.norm(p)):
        raise SynthesisError("Riccati solution is not positive semi-definite")
    return RiccatiSolution(p, res)


def feedback_gain(sol: RiccatiSolution, b, r, a=None) -> Gain:
    """``K = R^-1 B' P``; if ``a`` is given the closed loop is checked Hurwitz."""
    b = np.asarray(b, dtype=float).reshape(sol.p_mat.shape[0], -1)
    k = np.linalg.solve(np.atleast_2d(r), b.T @ sol.p_mat)
    if a is not None and spectral_abscissa(np.asarray(a) - b @ k) >= 0:
        raise SynthesisError("closed loop A - BK is not Hurwitz")
    return Gain(k)


def closed_loop(model: PlatoonModel, k: Gain) -> np.ndarray:
    k_vec = np.atleast_2d(k.k_vec)
    if k_vec.shape != (1, model.a_mat.shape[0]):
        raise ValueError(f"gain shape {k_vec.shape} does not match model with {model.m} vehicles")
    return model.a_mat - model.b_vec @ k_vec


@dataclass(frozen=True, eq=False)
class SynthesizedPlatoon:
    model: PlatoonModel
    riccati: RiccatiSolution
    gain: Gain
    a_cl: np.ndarray


def synthesize(coeffs: LinearCoeffs, m: int, topology: Topology | str, weights: LqrWeights = LqrWeights()) -> SynthesizedPlatoon:
    return _synthesize_cached(coeffs, m, Topology(topology), weights)


@lru_cache(maxsize=256)
def _synthesize_cached(coeffs, m, topology, weights):
    model = build_platoon_model(coeffs, m, topology)
    q = weights.q_matrix(2 * m)
    sol = solve_care(model.a_mat, model.b_vec, q, weights.r)
    gain = feedback_gain(sol, model.b_vec, weights.r, a=model.a_mat)
    a_cl = closed_loop(model, gain)
    for arr in (model.a_mat, model.b_vec, model.h_vec, model.c_vec, sol.p_mat, gain.k_vec, a_cl):
        arr.setflags(write=False)
    return SynthesizedPlatoon(model, sol, gain, a_cl)

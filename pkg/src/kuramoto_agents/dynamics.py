"""Amplitude-phase Kuramoto dynamics and the generic networked-ODE right-hand side.

Each agent i carries a phase theta_i and an amplitude r_i::

    dtheta_i/dt = omega_i + (eps/N) sum_j A_ij r_j sin(theta_j - theta_i)
    dr_i/dt     = r_i (lam - r_i**2) + (eps/N) sum_j A_ij r_j cos(theta_j - theta_i)

The 1/N prefactor always uses the total node count, never the node degree,
and the adjacency is taken without self-loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, NonFiniteError
from .topology import Adjacency, as_adjacency

TWO_PI = 2.0 * np.pi


def _frozen_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_finite(arr: np.ndarray, name: str) -> None:
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteError(f"{name}[{bad[0]}] is not finite ({arr[bad[0]]})", int(bad[0]))


@dataclass(frozen=True, eq=False)
class SystemState:
    """Phases (radians, possibly unwrapped) and amplitudes of all N agents.

    Negative amplitudes are representable because the raw dynamics may cross
    zero; :func:`check_initial_state` enforces ``r >= 0`` on user input.
    """

    phases: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        ph = _frozen_vector(self.phases, "phases")
        amp = _frozen_vector(self.amplitudes, "amplitudes")
        if ph.size < 1:
            raise DimensionError("state needs at least one agent")
        if ph.size != amp.size:
            raise DimensionError(f"{ph.size} phases but {amp.size} amplitudes")
        _check_finite(ph, "phases")
        _check_finite(amp, "amplitudes")
        object.__setattr__(self, "phases", ph)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n(self) -> int:
        return self.phases.size

    def __eq__(self, other):
        if not isinstance(other, SystemState):
            return NotImplemented
        return np.array_equal(self.phases, other.phases) and np.array_equal(
            self.amplitudes, other.amplitudes
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ModelParams:
    """``lam`` drives the intrinsic amplitude, ``epsilon`` is the global coupling."""

    lam: float
    epsilon: float
    omega: np.ndarray

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise NonFiniteError(f"lambda must be finite, got {self.lam}")
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        omega = _frozen_vector(self.omega, "omega")
        _check_finite(omega, "omega")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "omega", omega)

    @property
    def n(self) -> int:
        return self.omega.size


@dataclass(frozen=True)
class StateDerivative:
    dphases: np.ndarray
    damplitudes: np.ndarray


@dataclass(frozen=True)
class GeneralNodeSystem:
    """Networked system x_i' = F_i(x_i) + (eps/N) sum_j A_ij H_ij(x_i, x_j).

    ``node_dynamics[i]`` maps a d-vector to a d-vector. ``pair_coupling`` is
    called as ``pair_coupling(i, j, x_i, x_j)`` for every nonzero A_ij.
    """

    node_dynamics: Sequence[Callable[[np.ndarray], np.ndarray]]
    pair_coupling: Callable[[int, int, np.ndarray, np.ndarray], np.ndarray]
    dim: int


def check_consistent(state: SystemState, params: ModelParams, adjacency: Adjacency) -> None:
    if params.n != state.n:
        raise DimensionError(f"omega has {params.n} entries but state has {state.n} agents")
    if adjacency.n != state.n:
        raise DimensionError(f"adjacency has {adjacency.n} nodes but state has {state.n} agents")


def check_initial_state(state: SystemState) -> None:
    neg = np.flatnonzero(state.amplitudes < 0)
    if neg.size:
        raise ValueError(f"amplitudes[{neg[0]}] is negative ({state.amplitudes[neg[0]]})")


def eval_general_rhs(
    system: GeneralNodeSystem,
    states,
    adjacency,
    epsilon: float,
) -> np.ndarray:
    """Evaluate the generic coupled system node by node, summing j in order."""
    adjacency = as_adjacency(adjacency)
    x = np.asarray(states, dtype=np.float64)
    n = len(system.node_dynamics)
    if x.ndim != 2:
        raise DimensionError(f"states must be an (N, d) array, got shape {x.shape}")
    if x.shape[0] != n:
        raise DimensionError(f"{x.shape[0]} node states for a system of {n} nodes")
    if adjacency.n != n:
        raise DimensionError(f"adjacency has {adjacency.n} nodes, system has {n}")
    if x.shape[1] != system.dim:
        raise DimensionError(f"states have dimension {x.shape[1]}, system expects {system.dim}")

    a = adjacency.matrix
    scale = epsilon / n
    out = np.empty_like(x)
    for i in range(n):
        fi = np.asarray(system.node_dynamics[i](x[i]), dtype=np.float64)
        if fi.shape != (system.dim,):
            raise DimensionError(f"node_dynamics[{i}] returned shape {fi.shape}", i)
        acc = np.zeros(system.dim)
        for j in range(n):
            if a[i, j] != 0:
                h = np.asarray(system.pair_coupling(i, j, x[i], x[j]), dtype=np.float64)
                if h.shape != (system.dim,):
                    raise DimensionError(f"pair_coupling({i}, {j}) returned shape {h.shape}", i)
                acc = acc + a[i, j] * h
        out[i] = fi + scale * acc
    return out


def kuramoto_system(params: ModelParams) -> GeneralNodeSystem:
    """The amplitude-phase model as a generic system with node state (theta, r)."""
    lam = params.lam

    def make_node(w: float):
        return lambda x: np.array([w, x[1] * (lam - x[1] ** 2)])

    def coupling(i, j, xi, xj):
        d = xj[0] - xi[0]
        return np.array([xj[1] * math.sin(d), xj[1] * math.cos(d)])

    return GeneralNodeSystem([make_node(float(w)) for w in params.omega], coupling, dim=2)


def rhs_batch(
    theta: np.ndarray,
    r: np.ndarray,
    omega: np.ndarray,
    lam: float,
    coupling: np.ndarray | float,
    adjacency: Adjacency,
) -> tuple[np.ndarray, np.ndarray]:
    """Kuramoto derivative for a batch of independent systems sharing one graph.

    ``theta``, ``r`` and ``omega`` have shape (B, N); ``coupling`` is eps/N,
    either a scalar or a (B, 1) column. The pair sums use
    sin(tj - ti) = sin tj cos ti - cos tj sin ti, so only per-node trig is
    needed; every row is computed with the same operation sequence whatever B
    is, so a system gives identical bits alone or inside a batch.
    """
    sn = np.sin(theta)
    cs = np.cos(theta)
    ys = r * sn
    yc = r * cs
    a = adjacency.csr
    s_sum = (a @ ys.T).T
    c_sum = (a @ yc.T).T
    dtheta = omega + coupling * (cs * s_sum - sn * c_sum)
    dr = r * (lam - r * r) + coupling * (cs * c_sum + sn * s_sum)
    return dtheta, dr


def eval_kuramoto_rhs(state: SystemState, params: ModelParams, adjacency) -> StateDerivative:
    adjacency = as_adjacency(adjacency)
    check_consistent(state, params, adjacency)
    with np.errstate(over="ignore", invalid="ignore"):
        dth, dr = rhs_batch(
            state.phases[None, :],
            state.amplitudes[None, :],
            params.omega[None, :],
            params.lam,
            params.epsilon / state.n,
            adjacency,
        )
    _check_finite(dth[0], "dphases")
    _check_finite(dr[0], "damplitudes")
    return StateDerivative(dth[0], dr[0])


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    out = np.mod(theta, TWO_PI)
    # mod of a tiny negative angle can round up to exactly 2*pi
    out[out >= TWO_PI] = 0.0
    return out


def wrap_phases(state: SystemState) -> SystemState:
    """Map every phase into [0, 2*pi); amplitudes are untouched."""
    return SystemState(wrap_angles(np.array(state.phases)), state.amplitudes)


def sync_amplitude_fixed_point(lam: float, epsilon: float, n: int) -> float:
    """Common amplitude of the phase-locked, identical-frequency all-to-all state.

    With all phases equal, r' = r(lam - r^2) + eps (n-1)/n r, so
    r* = sqrt(lam + eps (n-1)/n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    radicand = lam + epsilon * (n - 1) / n
    if radicand < 0:
        raise ValueError(f"no real fixed point: lam + eps(n-1)/n = {radicand} < 0")
    return math.sqrt(radicand)

"""Fixed-step Euler / RK4 integration with trajectory recording.

The work horse is :func:`integrate_batch`, which advances B independent
systems on a shared graph in lock-step. Single trajectories run through it
with B = 1, so a run produces the same bits alone or as part of a sweep.
Phases are integrated unwrapped and only wrapped into [0, 2*pi) when recorded.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from .dynamics import (
    ModelParams,
    SystemState,
    check_consistent,
    check_initial_state,
    rhs_batch,
    wrap_angles,
)
from .errors import DivergenceError, NonFiniteError
from .observables import order_values
from .topology import Adjacency, as_adjacency

DIVERGENCE_LIMIT = 1e6
METHODS = ("euler", "rk4")


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float = 0.01
    t_end: float = 100.0
    record_stride: int = 10
    method: str = "rk4"

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if self.dt > self.t_end:
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be an integer >= 1, got {self.record_stride}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.t_end / self.dt > 2**62:
            raise ValueError("too many steps")

    @property
    def n_steps(self) -> int:
        # tolerate t_end/dt landing a hair above an integer
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))

    def step_sizes(self) -> tuple[float, float]:
        """Regular step and the (possibly shortened) final step that lands on t_end."""
        n = self.n_steps
        return self.dt, self.t_end - (n - 1) * self.dt

    def recorded_steps(self) -> np.ndarray:
        n = self.n_steps
        steps = np.arange(0, n + 1, self.record_stride)
        if steps[-1] != n:
            steps = np.append(steps, n)
        return steps

    def times(self) -> np.ndarray:
        steps = self.recorded_steps()
        t = steps * self.dt
        t[-1] = self.t_end
        return t


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded snapshots; ``phases`` are wrapped, shape (T, N) like ``amplitudes``."""

    times: np.ndarray
    phases: np.ndarray
    amplitudes: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int) -> SystemState:
        return SystemState(self.phases[k], self.amplitudes[k])

    @property
    def states(self) -> tuple[SystemState, ...]:
        return tuple(self.state(k) for k in range(len(self)))

    @property
    def final_state(self) -> SystemState:
        return self.state(-1)


Rhs = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _euler(theta, r, h, f: Rhs):
    dth, dr = f(theta, r)
    return theta + h * dth, r + h * dr


def _rk4(theta, r, h, f: Rhs):
    half = 0.5 * h
    k1t, k1r = f(theta, r)
    k2t, k2r = f(theta + half * k1t, r + half * k1r)
    k3t, k3r = f(theta + half * k2t, r + half * k2r)
    k4t, k4r = f(theta + h * k3t, r + h * k3r)
    sixth = h / 6.0
    return (
        theta + sixth * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
        r + sixth * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
    )


_STEPPERS = {"euler": _euler, "rk4": _rk4}


def _single_step(stepper, state: SystemState, params: ModelParams, adjacency, dt: float) -> SystemState:
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    adjacency = as_adjacency(adjacency)
    check_consistent(state, params, adjacency)
    omega = params.omega[None, :]
    coupling = params.epsilon / state.n

    def f(th, r):
        return rhs_batch(th, r, omega, params.lam, coupling, adjacency)

    with np.errstate(over="ignore", invalid="ignore"):
        th, r = stepper(state.phases[None, :], state.amplitudes[None, :], dt, f)
    for name, arr in (("phases", th[0]), ("amplitudes", r[0])):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise NonFiniteError(f"step produced non-finite {name}[{bad[0]}]", int(bad[0]))
    return SystemState(th[0], r[0])


def step_euler(state: SystemState, params: ModelParams, adjacency, dt: float) -> SystemState:
    return _single_step(_euler, state, params, adjacency, dt)


def step_rk4(state: SystemState, params: ModelParams, adjacency, dt: float) -> SystemState:
    """One classical fourth-order Runge-Kutta step."""
    return _single_step(_rk4, state, params, adjacency, dt)


@dataclass
class BatchResult:
    times: np.ndarray
    r_raw: np.ndarray  # (B, T)
    r_norm: np.ndarray  # (B, T)
    negative: np.ndarray  # (B,) any r_i < 0 seen
    failures: list  # per row: None or (step, node, value)
    phases: np.ndarray | None = None  # (T, B, N), wrapped
    amplitudes: np.ndarray | None = None


def integrate_batch(
    theta0: np.ndarray,
    r0: np.ndarray,
    omega: np.ndarray,
    lam: float,
    coupling,
    adjacency: Adjacency,
    config: IntegrationConfig,
    keep_states: bool = False,
) -> BatchResult:
    """Advance B systems from (theta0, r0), all arrays shaped (B, N).

    ``coupling`` is eps/N as a scalar or a (B, 1) column. A row whose state
    becomes non-finite or exceeds ``DIVERGENCE_LIMIT`` in magnitude is marked
    failed and parked at the origin; the remaining rows are unaffected.
    """
    theta = np.array(theta0, dtype=np.float64)
    r = np.array(r0, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    b, n = theta.shape
    stepper = _STEPPERS[config.method]

    def f(th, rr):
        return rhs_batch(th, rr, omega, lam, coupling, adjacency)

    times = config.times()
    rec_steps = config.recorded_steps()
    n_rec = len(rec_steps)
    r_raw = np.empty((b, n_rec))
    r_norm = np.empty((b, n_rec))
    if keep_states:
        ph_rec = np.empty((n_rec, b, n))
        amp_rec = np.empty((n_rec, b, n))
    negative = r < 0
    negative = negative.any(axis=1)
    failures: list = [None] * b
    alive = np.ones(b, dtype=bool)

    def record(slot):
        wrapped = wrap_angles(theta)
        raw, norm = order_values(wrapped, r)
        raw[~alive] = np.nan
        norm[~alive] = np.nan
        r_raw[:, slot] = raw
        r_norm[:, slot] = norm
        if keep_states:
            ph_rec[slot] = wrapped
            amp_rec[slot] = r

    record(0)
    slot = 1
    n_steps = config.n_steps
    h, h_last = config.step_sizes()
    # overflow in a diverging row is caught by the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            theta, r = stepper(theta, r, h if step < n_steps else h_last, f)
            bad = ~np.isfinite(theta) | ~np.isfinite(r) | (np.abs(r) > DIVERGENCE_LIMIT)
            if bad.any():
                for row in np.flatnonzero(bad.any(axis=1) & alive):
                    node = int(np.flatnonzero(bad[row])[0])
                    failures[row] = (step, node, float(r[row, node]))
                    alive[row] = False
                theta[~alive] = 0.0
                r[~alive] = 0.0
            negative |= (r < 0).any(axis=1) & alive
            if slot < n_rec and rec_steps[slot] == step:
                record(slot)
                slot += 1

    out = BatchResult(times, r_raw, r_norm, negative, failures)
    if keep_states:
        out.phases = ph_rec
        out.amplitudes = amp_rec
    return out


def simulate(
    initial: SystemState,
    params: ModelParams,
    adjacency,
    config: IntegrationConfig | None = None,
    seed: int | None = None,
) -> Trajectory:
    """Integrate one system from ``initial`` and record every ``record_stride`` steps.

    Raises DivergenceError naming the step and node when an amplitude
    exceeds 1e6 in magnitude (or stops being finite).
    """
    config = config or IntegrationConfig()
    adjacency = as_adjacency(adjacency)
    check_consistent(initial, params, adjacency)
    check_initial_state(initial)

    res = integrate_batch(
        initial.phases[None, :],
        initial.amplitudes[None, :],
        params.omega[None, :],
        params.lam,
        params.epsilon / initial.n,
        adjacency,
        config,
        keep_states=True,
    )
    if res.failures[0] is not None:
        step, node, value = res.failures[0]
        raise DivergenceError(
            f"amplitude of node {node} diverged at step {step} (t={step * config.dt:g}, r={value:g})",
            step=step,
            node=node,
            value=value,
        )
    metadata = {
        "lambda": params.lam,
        "epsilon": params.epsilon,
        "omega": params.omega.tolist(),
        "adjacency": adjacency.describe(),
        "seed": seed,
        "config": asdict(config),
        "negative_amplitude": bool(res.negative[0]),
    }
    return Trajectory(res.times, res.phases[:, 0, :], res.amplitudes[:, 0, :], metadata)

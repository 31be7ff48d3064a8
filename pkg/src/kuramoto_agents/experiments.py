"""Seeded initial conditions, single runs, (sigma, epsilon) sweeps and CSV tables.

Sub-stream splitting: a run seed ``s`` yields natural frequencies from
``mix_seed(s, STREAM_FREQUENCIES)`` and the initial state from
``mix_seed(s, STREAM_INITIAL_STATE)``. In a sweep, the run seed of grid point
(sigma index a, epsilon index b, replicate k) is ``mix_seed(base_seed, a, b, k)``,
so every grid point draws its own frequencies and initial state.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from . import rng
from .dynamics import TWO_PI, ModelParams, SystemState
from .errors import DivergenceError
from .integrate import IntegrationConfig, integrate_batch, simulate
from .observables import DEFAULT_TRANSIENT_FRACTION, mean_order_parameter, tail_mean
from .topology import Adjacency, all_to_all, deterministic_scale_free, load_adjacency

TOPOLOGY_KINDS = ("all-to-all", "scale-free", "file")

CSV_HEADER = (
    "sigma",
    "epsilon",
    "replicate",
    "seed",
    "mean_R_raw",
    "mean_R_normalized",
    "negative_amplitude_flag",
    "status",
)


@dataclass(frozen=True)
class TopologySpec:
    """``kind`` is all-to-all (``size`` = n), scale-free (``size`` = iterations) or file."""

    kind: str = "all-to-all"
    size: int | None = 10
    path: str | None = None

    def __post_init__(self):
        if self.kind not in TOPOLOGY_KINDS:
            raise ValueError(f"unknown topology kind {self.kind!r}; expected one of {TOPOLOGY_KINDS}")
        if self.kind == "file" and not self.path:
            raise ValueError("file topology needs a path")
        if self.kind != "file" and self.size is None:
            raise ValueError(f"{self.kind} topology needs a size")

    def build(self) -> Adjacency:
        if self.kind == "all-to-all":
            return all_to_all(int(self.size))
        if self.kind == "scale-free":
            return deterministic_scale_free(int(self.size))
        return load_adjacency(self.path)


@dataclass(frozen=True)
class ExperimentSpec:
    topology: TopologySpec
    lam: float
    epsilon_grid: tuple[float, ...]
    sigma_list: tuple[float, ...]
    mu: float = 0.0
    replicates: int = 10
    base_seed: int = 0
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    transient_fraction: float = DEFAULT_TRANSIENT_FRACTION

    def __post_init__(self):
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        object.__setattr__(self, "sigma_list", tuple(float(s) for s in self.sigma_list))
        if not self.epsilon_grid or not self.sigma_list:
            raise ValueError("epsilon grid and sigma list must be non-empty")
        if any(not math.isfinite(e) or e < 0 for e in self.epsilon_grid):
            raise ValueError("epsilon values must be finite and >= 0")
        if any(not math.isfinite(s) or s < 0 for s in self.sigma_list):
            raise ValueError("sigma values must be finite and >= 0")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not 0 <= self.base_seed <= rng.MASK64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        if not 0.0 <= self.transient_fraction < 1.0:
            raise ValueError("transient_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class SweepRecord:
    sigma: float
    epsilon: float
    replicate: int
    seed: int
    mean_R_raw: float
    mean_R_normalized: float
    negative_amplitude_flag: bool
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def sample_frequencies(mu: float, sigma: float, n: int, seed: int) -> np.ndarray:
    """n draws from N(mu, sigma**2) on the frequency sub-stream of ``seed``."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    z = rng.normals(rng.mix_seed(seed, rng.STREAM_FREQUENCIES), n)
    return mu + sigma * z


def initial_state(n: int, seed: int) -> SystemState:
    """Phases uniform on [0, 2*pi), amplitudes uniform on [0.5, 1.5)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = rng.uniforms(rng.mix_seed(seed, rng.STREAM_INITIAL_STATE), 2 * n)
    return SystemState(TWO_PI * u[:n], 0.5 + u[n:])


def run_seed(base_seed: int, sigma_index: int, epsilon_index: int, replicate: int) -> int:
    return rng.mix_seed(base_seed, sigma_index, epsilon_index, replicate)


def _as_adjacency(topology) -> Adjacency:
    return topology if isinstance(topology, Adjacency) else topology.build()


def run_single(
    topology,
    lam: float,
    epsilon: float,
    sigma: float,
    seed: int,
    integration: IntegrationConfig | None = None,
    transient_fraction: float = DEFAULT_TRANSIENT_FRACTION,
    mu: float = 0.0,
    replicate: int = 0,
) -> SweepRecord:
    """Simulate one seeded realisation and summarise it as a sweep record."""
    integration = integration or IntegrationConfig()
    adjacency = _as_adjacency(topology)
    n = adjacency.n
    params = ModelParams(lam, epsilon, sample_frequencies(mu, sigma, n, seed))
    try:
        traj = simulate(initial_state(n, seed), params, adjacency, integration, seed=seed)
    except DivergenceError as exc:
        raise DivergenceError(
            f"{exc} [seed={seed} lambda={lam} epsilon={epsilon} sigma={sigma} mu={mu}]",
            exc.step,
            exc.node,
            exc.value,
        ) from exc
    return SweepRecord(
        sigma=float(sigma),
        epsilon=float(epsilon),
        replicate=replicate,
        seed=seed,
        mean_R_raw=mean_order_parameter(traj, transient_fraction),
        mean_R_normalized=mean_order_parameter(traj, transient_fraction, normalized=True),
        negative_amplitude_flag=traj.metadata["negative_amplitude"],
    )


@dataclass(frozen=True)
class _Point:
    sigma: float
    epsilon: float
    replicate: int
    seed: int


def sweep_points(spec: ExperimentSpec) -> list[_Point]:
    """Grid points in canonical (sigma, epsilon, replicate) order."""
    return [
        _Point(sigma, eps, k, run_seed(spec.base_seed, a, b, k))
        for a, sigma in enumerate(spec.sigma_list)
        for b, eps in enumerate(spec.epsilon_grid)
        for k in range(spec.replicates)
    ]


def _run_chunk(args) -> list[SweepRecord]:
    spec, adjacency, points = args
    n = adjacency.n
    theta0 = np.empty((len(points), n))
    r0 = np.empty((len(points), n))
    omega = np.empty((len(points), n))
    for row, p in enumerate(points):
        init = initial_state(n, p.seed)
        theta0[row], r0[row] = init.phases, init.amplitudes
        omega[row] = sample_frequencies(spec.mu, p.sigma, n, p.seed)
    coupling = np.array([[p.epsilon] for p in points]) / n
    res = integrate_batch(theta0, r0, omega, spec.lam, coupling, adjacency, spec.integration)

    records = []
    for row, p in enumerate(points):
        fail = res.failures[row]
        if fail is None:
            raw = tail_mean(res.times, res.r_raw[row], spec.transient_fraction)
            norm = tail_mean(res.times, res.r_norm[row], spec.transient_fraction)
            status = "ok"
        else:
            raw = norm = math.nan
            step, node, value = fail
            status = f"failed: node {node} diverged at step {step} (r={value:g})"
        records.append(
            SweepRecord(p.sigma, p.epsilon, p.replicate, p.seed, raw, norm, bool(res.negative[row]), status)
        )
    return records


def run_sweep(spec: ExperimentSpec, workers: int = 1, chunk_size: int = 512) -> list[SweepRecord]:
    """One record per (sigma, epsilon, replicate), in that order.

    Points are integrated in vectorised chunks; a chunk gives the same bits
    for a point regardless of its neighbours, so ``workers`` and
    ``chunk_size`` never change the output. A diverging run becomes a
    ``failed`` row instead of aborting the sweep.
    """
    adjacency = _as_adjacency(spec.topology)
    points = sweep_points(spec)
    chunks = [(spec, adjacency, points[i : i + chunk_size]) for i in range(0, len(points), chunk_size)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, chunks))
    else:
        parts = [_run_chunk(c) for c in chunks]
    return [rec for part in parts for rec in part]


def curve_summary(records: Iterable[SweepRecord]) -> dict[float, list[tuple[float, float, float, int]]]:
    """Replicate averages per sigma: ``{sigma: [(epsilon, <R_norm>, <R_raw>, n_ok), ...]}``.

    Failed rows are excluded from the averages.
    """
    groups: dict[float, dict[float, list[SweepRecord]]] = {}
    for rec in records:
        groups.setdefault(rec.sigma, {}).setdefault(rec.epsilon, []).append(rec)
    out = {}
    for sigma, by_eps in groups.items():
        rows = []
        for eps in sorted(by_eps):
            good = [r for r in by_eps[eps] if r.ok]
            if good:
                norm = float(np.mean([r.mean_R_normalized for r in good]))
                raw = float(np.mean([r.mean_R_raw for r in good]))
            else:
                norm = raw = math.nan
            rows.append((eps, norm, raw, len(good)))
        out[sigma] = rows
    return out


# -- CSV output -------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_table(records: Sequence[SweepRecord], destination) -> None:
    """Write the sweep CSV to a path or a text/binary sink.

    Floats use ``repr`` so parsing them back gives the identical double.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(
            [
                _fmt(r.sigma),
                _fmt(r.epsilon),
                r.replicate,
                r.seed,
                _fmt(r.mean_R_raw),
                _fmt(r.mean_R_normalized),
                "true" if r.negative_amplitude_flag else "false",
                r.status,
            ]
        )
    _emit(buf.getvalue(), destination)


def read_table(source) -> list[SweepRecord]:
    text = _slurp(source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise ValueError(f"unexpected sweep CSV header: {header}")
    out = []
    for row in reader:
        out.append(
            SweepRecord(
                float(row[0]),
                float(row[1]),
                int(row[2]),
                int(row[3]),
                float(row[4]),
                float(row[5]),
                row[6] == "true",
                row[7],
            )
        )
    return out


def write_trajectory(trajectory, destination) -> None:
    """Trajectory CSV: t, theta_0..theta_{N-1}, r_0..r_{N-1}, R_raw, R_normalized."""
    from .observables import order_series

    series = order_series(trajectory)
    n = trajectory.phases.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"theta_{i}" for i in range(n)] + [f"r_{i}" for i in range(n)] + ["R_raw", "R_normalized"])
    for k, t in enumerate(trajectory.times):
        w.writerow(
            [_fmt(t)]
            + [_fmt(v) for v in trajectory.phases[k]]
            + [_fmt(v) for v in trajectory.amplitudes[k]]
            + [_fmt(series.raw[k]), _fmt(series.normalized[k])]
        )
    _emit(buf.getvalue(), destination)


def _emit(text: str, destination) -> None:
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    elif isinstance(destination, io.TextIOBase):
        destination.write(text)
    else:
        destination.write(text.encode("utf-8"))


def _slurp(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return fh.read()
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data

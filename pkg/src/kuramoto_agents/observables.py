"""Order parameter of the amplitude-weighted phasor mean and its time averages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .dynamics import SystemState

if TYPE_CHECKING:
    from .integrate import Trajectory

DEFAULT_TRANSIENT_FRACTION = 0.5


@dataclass(frozen=True)
class OrderSeries:
    times: np.ndarray
    raw: np.ndarray
    normalized: np.ndarray


def order_values(theta: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw and normalized order parameter along the last axis.

    raw = |sum_j r_j exp(i theta_j)| / N and
    normalized = |sum_j r_j exp(i theta_j)| / sum_j |r_j|, NaN where all
    amplitudes vanish. Each row is reduced independently, so a state gives
    the same bits whether evaluated alone or stacked with others.
    """
    n = theta.shape[-1]
    x = np.sum(r * np.cos(theta), axis=-1)
    y = np.sum(r * np.sin(theta), axis=-1)
    mag = np.hypot(x, y)
    total = np.sum(np.abs(r), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        norm = np.where(total > 0, np.minimum(mag / total, 1.0), np.nan)
    return mag / n, norm


def order_parameter(state: SystemState) -> float:
    raw, _ = order_values(state.phases[None, :], state.amplitudes[None, :])
    return float(raw[0])


def normalized_order_parameter(state: SystemState) -> float:
    """Order parameter divided by the mean amplitude; always within [0, 1]."""
    if not np.any(state.amplitudes != 0):
        raise ValueError("normalized order parameter undefined for all-zero amplitudes")
    _, norm = order_values(state.phases[None, :], state.amplitudes[None, :])
    return float(norm[0])


def tail_mean(times: np.ndarray, values: np.ndarray, transient_fraction: float) -> float:
    """Mean of ``values`` over samples with t >= transient_fraction * t_final."""
    if not 0.0 <= transient_fraction < 1.0:
        raise ValueError(f"transient_fraction must lie in [0, 1), got {transient_fraction}")
    times = np.asarray(times)
    if times.size == 0:
        raise ValueError("cannot average an empty series")
    keep = times >= transient_fraction * times[-1]
    if not keep.any():
        raise ValueError("transient cut leaves no samples")
    return float(np.mean(np.asarray(values)[keep]))


def order_series(trajectory: Trajectory) -> OrderSeries:
    raw, norm = order_values(trajectory.phases, trajectory.amplitudes)
    return OrderSeries(trajectory.times.copy(), raw, norm)


def mean_order_parameter(
    trajectory: Trajectory,
    transient_fraction: float = DEFAULT_TRANSIENT_FRACTION,
    normalized: bool = False,
) -> float:
    """Time average of R over the recorded snapshots after the transient cut.

    The raw (amplitude-weighted) quantity by default; ``normalized=True``
    averages the [0, 1] variant instead.
    """
    if len(trajectory.times) == 0:
        raise ValueError("empty trajectory")
    series = order_series(trajectory)
    values = series.normalized if normalized else series.raw
    return tail_mean(series.times, values, transient_fraction)

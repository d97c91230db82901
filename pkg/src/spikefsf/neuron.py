"""Leaky-integrate-and-fire dynamics with time-varying synaptic weights.

A synapse's weight is a sampled function of time; the effective weight of a
spike is that function evaluated at the spike's arrival time. The postsynaptic
potential is the weighted sum of spike-response kernels

    eps(t) = (t / tau) * exp(1 - t / tau)   for t >= 0, else 0

and an output neuron fires when its potential first crosses threshold on the
simulation grid. A neuron that never crosses is assigned the grid end time as
a "no fire" sentinel so late/no spikes stay comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .encoding import SpikePattern

if TYPE_CHECKING:
    from .learning import Model

__all__ = [
    "TimeGrid",
    "NeuronParams",
    "make_grid",
    "spike_response",
    "sample_weight",
    "sample_weights_at",
    "psp",
    "potential_on_grid",
    "fire_time",
    "fire_times_all",
    "predict_time_domain",
]

DEFAULT_DT = 0.01


@dataclass(frozen=True)
class TimeGrid:
    """Uniform simulation grid over [0, t_end] inclusive."""

    t_end: float
    dt: float
    times: np.ndarray = field(repr=False)

    @property
    def points(self) -> int:
        return len(self.times)


def make_grid(t_end: float, dt: float = DEFAULT_DT) -> TimeGrid:
    if t_end <= 0 or dt <= 0:
        raise ValueError(f"need positive t_end and dt, got {t_end}, {dt}")
    points = int(round(t_end / dt)) + 1
    times = np.arange(points) * dt
    return TimeGrid(t_end=float(times[-1]), dt=dt, times=times)


@dataclass(frozen=True)
class NeuronParams:
    """Firing threshold and spike-response time constant of one output neuron."""

    theta: float
    tau_eps: float


def spike_response(t, tau_eps: float):
    """Causal spike-response kernel; peaks at exactly 1 when t == tau_eps."""
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 0.0, (t / tau_eps) * np.exp(1.0 - t / tau_eps), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def sample_weight(samples: np.ndarray, t: float, grid: TimeGrid) -> float:
    """Momentary weight: linear interpolation of a weight function at time t."""
    if not 0.0 <= t <= grid.t_end:
        raise ValueError(f"t={t} outside grid [0, {grid.t_end}]")
    pos = t / grid.dt
    k = min(int(pos), grid.points - 2)
    frac = pos - k
    return float(samples[k] * (1.0 - frac) + samples[k + 1] * frac)


def sample_weights_at(weights: np.ndarray, times: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Vectorised momentary-weight lookup.

    weights has shape (..., K, P) with P grid samples per function; times has
    shape (K,). Returns shape (..., K): each weight function interpolated at
    its own spike time.
    """
    pos = times / grid.dt
    k = np.minimum(pos.astype(int), grid.points - 2)
    frac = pos - k
    sel = np.arange(len(times))
    lo = weights[..., sel, k]
    hi = weights[..., sel, k + 1]
    return lo * (1.0 - frac) + hi * frac


def psp(t: float, pattern: SpikePattern, weights_j: np.ndarray, grid: TimeGrid, tau_eps: float) -> float:
    """Postsynaptic potential at time t, summed term by term.

    weights_j has shape (m, q, P): one sampled weight function per synapse.
    Spikes arriving after t contribute nothing (Heaviside factor).
    """
    if not 0.0 <= t <= grid.t_end:
        raise ValueError(f"t={t} outside grid [0, {grid.t_end}]")
    s = pattern.flat()
    w_flat = weights_j.reshape(-1, weights_j.shape[-1])
    w_at = sample_weights_at(w_flat[np.newaxis], s, grid)[0]
    eps = spike_response(t - s, tau_eps)
    return float(np.sum(w_at * eps * (t >= s)))


def potential_on_grid(w_at: np.ndarray, spike_times: np.ndarray, grid: TimeGrid, tau_eps: float) -> np.ndarray:
    """Potential of one or more neurons at every grid point.

    w_at has shape (..., K): momentary weights already sampled at the K spike
    times. Exploits eps(t - s) = (e / tau) * exp(-t/tau) * (t - s) * exp(s/tau)
    so the sum over spikes reduces to two prefix sums over time-sorted spikes,
    which is exact and avoids the dense (K x points) kernel.
    """
    order = np.argsort(spike_times, kind="stable")
    s = spike_times[order]
    growth = np.exp(s / tau_eps)
    a = w_at[..., order] * growth
    cum_a = np.cumsum(a, axis=-1)
    cum_b = np.cumsum(a * s, axis=-1)
    # number of spikes arrived by each grid time; index -1 means "none yet"
    arrived = np.searchsorted(s, grid.times, side="right") - 1
    t = grid.times
    a_t = np.where(arrived >= 0, cum_a[..., arrived], 0.0)
    b_t = np.where(arrived >= 0, cum_b[..., arrived], 0.0)
    return (np.e / tau_eps) * np.exp(-t / tau_eps) * (t * a_t - b_t)


def fire_time(pattern: SpikePattern, weights_j: np.ndarray, params: NeuronParams, grid: TimeGrid) -> float:
    """First grid time where the potential reaches threshold, else t_end."""
    s = pattern.flat()
    w_flat = weights_j.reshape(-1, weights_j.shape[-1])
    w_at = sample_weights_at(w_flat[np.newaxis], s, grid)[0]
    v = potential_on_grid(w_at, s, grid, params.tau_eps)
    crossed = v >= params.theta
    if not crossed.any():
        return grid.t_end
    return float(grid.times[int(np.argmax(crossed))])


def fire_times_all(pattern: SpikePattern, weights: np.ndarray, thetas: np.ndarray, grid: TimeGrid, tau_eps: float) -> np.ndarray:
    """Fire times of all n output neurons for one spike pattern.

    weights has shape (n, m, q, P). Returns shape (n,), with the t_end
    sentinel for neurons that never cross their threshold.
    """
    n = weights.shape[0]
    s = pattern.flat()
    w_flat = weights.reshape(n, -1, weights.shape[-1])
    w_at = sample_weights_at(w_flat, s, grid)
    v = potential_on_grid(w_at, s, grid, tau_eps)
    crossed = v >= thetas[:, np.newaxis]
    idx = np.argmax(crossed, axis=1)
    fired = crossed.any(axis=1)
    return np.where(fired, grid.times[idx], grid.t_end)


def predict_time_domain(pattern: SpikePattern, model: "Model") -> tuple[int, np.ndarray]:
    """Classify by earliest output spike; ties go to the lowest class index."""
    times = fire_times_all(pattern, model.weights, model.thetas, model.grid, model.tau_eps)
    return int(np.argmin(times)), times

"""Population encoding: real-valued features to single-spike latency patterns.

Each feature in [0, 1] is projected through q Gaussian receptive fields with
evenly spaced centres. RF activation phi in (0, 1] maps to a presynaptic spike
time s = T * (1 - phi), so strong activation fires early. The map is invertible
on [0, 1] given the full q-vector of spike times, which is what the knowledge
extraction relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EncodingConfig",
    "SpikePattern",
    "make_config",
    "rf_activation",
    "encode",
    "encode_feature",
    "inverse_encode",
]


@dataclass(frozen=True)
class EncodingConfig:
    """Receptive-field layout for one feature dimension.

    The same layout is applied to every feature, so a config plus a feature
    count fully determines the encoder.
    """

    q: int
    gamma: float
    T: float
    centers: np.ndarray = field(repr=False)
    width: float = 0.0


def make_config(q: int, gamma: float, T: float) -> EncodingConfig:
    """Build an RF layout over the normalised feature range [0, 1].

    Centres sit at ((2r - 3) / 2) / (q - 2) for r = 1..q, which places the
    outermost fields slightly outside [0, 1]; the shared Gaussian width is
    (1 / gamma) / (q - 2). gamma controls how strongly neighbouring fields
    overlap.
    """
    if q < 3:
        raise ValueError(f"need at least 3 RF neurons, got q={q}")
    if gamma <= 0:
        raise ValueError(f"overlap constant must be positive, got {gamma}")
    if T <= 0:
        raise ValueError(f"spike interval limit must be positive, got {T}")
    r = np.arange(1, q + 1)
    centers = ((2 * r - 3) / 2) / (q - 2)
    width = (1.0 / gamma) / (q - 2)
    return EncodingConfig(q=q, gamma=gamma, T=T, centers=centers, width=width)


@dataclass(frozen=True)
class SpikePattern:
    """Presynaptic spike times, one per (feature, RF neuron) pair.

    times has shape (m, q) with every entry in [0, T].
    """

    times: np.ndarray

    @property
    def m(self) -> int:
        return self.times.shape[0]

    @property
    def q(self) -> int:
        return self.times.shape[1]

    def flat(self) -> np.ndarray:
        return self.times.reshape(-1)


def rf_activation(x: float, r: int, cfg: EncodingConfig) -> float:
    """Gaussian firing strength of RF neuron r (0-based) for feature value x."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"feature value {x} outside [0, 1]")
    d = x - cfg.centers[r]
    return float(np.exp(-(d * d) / (2.0 * cfg.width**2)))


def encode_feature(x, cfg: EncodingConfig) -> np.ndarray:
    """Spike times for one feature value (or a vector of values).

    Returns shape (q,) for a scalar x, or (len(x), q) for a vector. Values
    must already be normalised into [0, 1].
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        bad = x[(x < 0.0) | (x > 1.0)]
        raise ValueError(f"feature values outside [0, 1]: {bad[:5]}")
    d = x[..., np.newaxis] - cfg.centers
    phi = np.exp(-(d * d) / (2.0 * cfg.width**2))
    return cfg.T * (1.0 - phi)


def encode(x, cfg: EncodingConfig) -> SpikePattern:
    """Encode a length-m feature vector into an (m, q) spike pattern."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return SpikePattern(times=encode_feature(x, cfg))


def _objective(x_cand: np.ndarray, spikes: np.ndarray, cfg: EncodingConfig) -> np.ndarray:
    """Sum of squared spike-time residuals for candidate preimages."""
    pred = encode_feature(x_cand, cfg)
    return np.sum((pred - spikes) ** 2, axis=-1)


_INV_GRID = 1001
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def inverse_encode(spikes: np.ndarray, cfg: EncodingConfig, tol: float = 1e-6) -> float:
    """Recover the feature value whose encoding best matches `spikes`.

    The residual has a unique global minimiser for patterns produced by the
    encoder, so a coarse scan over [0, 1] followed by golden-section
    refinement around the best grid cell is sufficient.
    """
    spikes = np.asarray(spikes, dtype=float)
    if spikes.shape != (cfg.q,):
        raise ValueError(f"expected {cfg.q} spike times, got shape {spikes.shape}")
    grid = np.linspace(0.0, 1.0, _INV_GRID)
    vals = _objective(grid, spikes, cfg)
    k = int(np.argmin(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, _INV_GRID - 1)]

    # golden-section search on the bracketing cell
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _objective(np.array([c]), spikes, cfg)[0]
    fd = _objective(np.array([d]), spikes, cfg)[0]
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _objective(np.array([c]), spikes, cfg)[0]
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _objective(np.array([d]), spikes, cfg)[0]
    return float((a + b) / 2.0)

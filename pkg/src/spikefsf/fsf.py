"""Feature strength functions: the classifier's knowledge in feature space.

A trained model's weighted potential contribution of feature i to class j,
evaluated at a fixed extraction time t_o, is re-expressed over the feature
domain by composing it with the population encoder. The resulting per-
(class, feature) curves are sampled on a dense grid of [0, 1]; summing the
sampled strengths over features and taking the argmax class reproduces the
time-domain classification up to the choice of t_o.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoding import encode_feature
from .learning import Model, model_digest
from .neuron import spike_response

__all__ = [
    "FsfSet",
    "Explanation",
    "extract_fsf",
    "sample_fsf",
    "strengths_for",
    "classify_fsf",
    "classify_dataset",
    "select_t_o",
    "default_candidates",
    "heatmap",
    "HEATMAP_LIMIT",
]

X_GRID_POINTS = 1001
HEATMAP_LIMIT = 0.05


@dataclass(frozen=True)
class FsfSet:
    """Sampled feature strength functions of a trained model.

    psi has shape (n, m, G): strength of feature value x for class j, sampled
    on x_grid. thetas are carried over from the source model for provenance,
    as is its content digest.
    """

    t_o: float
    x_grid: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)
    source_digest: str = ""

    @property
    def n(self) -> int:
        return self.psi.shape[0]

    @property
    def m(self) -> int:
        return self.psi.shape[1]


@dataclass(frozen=True)
class Explanation:
    """Per-feature strengths and per-class aggregates for one input."""

    per_feature: np.ndarray
    aggregates: np.ndarray
    predicted: int


def extract_fsf(model: Model, t_o: float, points: int = X_GRID_POINTS) -> FsfSet:
    """Sample every class/feature strength function on a dense [0, 1] grid.

    For grid value x the strength of feature i for class j is the sum over
    that feature's RF neurons of momentary weight at the encoded spike time,
    times the causal response kernel at t_o, scaled by 1 / theta_j.
    """
    if not model.class_initialized.all():
        missing = np.flatnonzero(~model.class_initialized)
        raise ValueError(f"model has uninitialized classes: {missing.tolist()}")
    if not 0.0 < t_o <= model.grid.t_end:
        raise ValueError(f"extraction time {t_o} outside (0, {model.grid.t_end}]")
    x_grid = np.linspace(0.0, 1.0, points)
    spikes = encode_feature(x_grid, model.enc_cfg)          # (G, q)
    eps = spike_response(t_o - spikes, model.tau_eps)       # causal: 0 after t_o
    pos = spikes / model.grid.dt
    k = np.minimum(pos.astype(int), model.grid.points - 2)
    frac = pos - k

    n, m, q = model.n, model.m, model.q
    psi = np.empty((n, m, points))
    for j in range(n):
        acc = np.zeros((m, points))
        for r in range(q):
            w_r = model.weights[j, :, r, :]                 # (m, P)
            w_at = w_r[:, k[:, r]] * (1.0 - frac[:, r]) + w_r[:, k[:, r] + 1] * frac[:, r]
            acc += w_at * eps[:, r]
        psi[j] = acc / model.thetas[j]
    return FsfSet(
        t_o=float(t_o),
        x_grid=x_grid,
        psi=psi,
        thetas=model.thetas.copy(),
        source_digest=model_digest(model),
    )


def sample_fsf(fsf: FsfSet, i: int, j: int, x: float) -> float:
    """Strength of feature i for class j at value x (linear interpolation)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"feature value {x} outside [0, 1]")
    pos = x * (len(fsf.x_grid) - 1)
    k = min(int(pos), len(fsf.x_grid) - 2)
    frac = pos - k
    row = fsf.psi[j, i]
    return float(row[k] * (1.0 - frac) + row[k + 1] * frac)


def strengths_for(x: np.ndarray, fsf: FsfSet) -> np.ndarray:
    """Per-feature strength table for one input, shape (m, n)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (fsf.m,):
        raise ValueError(f"expected {fsf.m} features, got shape {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("feature values outside [0, 1]")
    pos = x * (len(fsf.x_grid) - 1)
    k = np.minimum(pos.astype(int), len(fsf.x_grid) - 2)
    frac = pos - k
    feat = np.arange(fsf.m)
    lo = fsf.psi[:, feat, k]
    hi = fsf.psi[:, feat, k + 1]
    return (lo * (1.0 - frac) + hi * frac).T


def classify_fsf(x: np.ndarray, fsf: FsfSet) -> Explanation:
    """Classify one input from its aggregated feature strengths."""
    per_feature = strengths_for(x, fsf)
    aggregates = per_feature.sum(axis=0)
    return Explanation(
        per_feature=per_feature,
        aggregates=aggregates,
        predicted=int(np.argmax(aggregates)),
    )


def classify_dataset(features: np.ndarray, fsf: FsfSet) -> np.ndarray:
    """Predicted classes for a whole feature matrix, shape (N,)."""
    X = np.asarray(features, dtype=float)
    pos = np.clip(X, 0.0, 1.0) * (len(fsf.x_grid) - 1)
    k = np.minimum(pos.astype(int), len(fsf.x_grid) - 2)
    frac = pos - k
    feat = np.arange(fsf.m)
    scores = np.empty((X.shape[0], fsf.n))
    for j in range(fsf.n):
        table = fsf.psi[j]
        vals = table[feat, k] * (1.0 - frac) + table[feat, k + 1] * frac
        scores[:, j] = vals.sum(axis=1)
    return np.argmax(scores, axis=1)


def default_candidates(t_end: float, step: float = 0.05) -> np.ndarray:
    """Candidate extraction times: step, 2*step, ... up to t_end."""
    count = int(round(t_end / step))
    return np.round(np.arange(1, count + 1) * step, 10)


def select_t_o(model: Model, features: np.ndarray, labels: np.ndarray, candidates) -> float:
    """Pick the extraction time whose strength-based accuracy is highest.

    Ties go to the smallest candidate, so the scan runs in ascending order
    and only strictly better accuracy replaces the incumbent.
    """
    candidates = np.sort(np.asarray(candidates, dtype=float))
    if candidates.size == 0:
        raise ValueError("no extraction-time candidates given")
    if len(labels) == 0:
        raise ValueError("empty validation set")
    bad = candidates[(candidates <= 0) | (candidates > model.grid.t_end)]
    if bad.size:
        raise ValueError(f"candidates outside (0, {model.grid.t_end}]: {bad.tolist()}")
    best_t, best_acc = None, -1.0
    labels = np.asarray(labels)
    for t_o in candidates:
        fsf = extract_fsf(model, float(t_o))
        acc = float(np.mean(classify_dataset(features, fsf) == labels))
        if acc > best_acc:
            best_acc, best_t = acc, float(t_o)
    return best_t


def heatmap(source, shape: tuple[int, int], class_j: int | None = None, limit: float = HEATMAP_LIMIT) -> np.ndarray:
    """Reshape one class's per-feature strengths into an image-shaped map.

    Accepts an Explanation (class_j selects the column) or a flat strength
    vector. Values are clamped to [-limit, limit] to match the rendering
    scale used for the exported maps.
    """
    if isinstance(source, Explanation):
        if class_j is None:
            raise ValueError("class index required when passing an Explanation")
        values = source.per_feature[:, class_j]
    else:
        values = np.asarray(source, dtype=float)
    h, w = shape
    if h * w != values.size:
        raise ValueError(f"shape {shape} incompatible with {values.size} features")
    return np.clip(values.reshape(h, w), -limit, limit)

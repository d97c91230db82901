"""Supervised training of the time-varying-weight spiking classifier.

Every synapse carries a weight *function* sampled on the simulation grid.
Training is margin-driven: a sample whose correct output neuron fires at
least t_m earlier than every other neuron is left alone. Otherwise each
offending neuron gets a weight update whose per-synapse share is the
normalised STDP fraction u, embedded back into the weight function as a
Gaussian bump centred at the presynaptic spike time.

Thresholds are fixed at initialisation (from the first sample of each class)
and never change afterwards; only the weight functions learn.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, replace

import numpy as np

from .encoding import EncodingConfig, SpikePattern, encode
from .neuron import TimeGrid, fire_times_all, make_grid, spike_response

logger = logging.getLogger(__name__)

__all__ = [
    "LearningConfig",
    "Model",
    "UpdateReport",
    "TrainResult",
    "new_model",
    "normalized_stdp",
    "init_class",
    "weight_update_delta",
    "apply_update",
    "train_sample",
    "encode_all",
    "train",
    "evaluate_time_domain",
    "model_digest",
]

DENOM_GUARD = 1e-9


@dataclass(frozen=True)
class LearningConfig:
    """Hyperparameters of the learning rule.

    sigma_init defaults to sigma when left as None.

    Two switches select between published variants of the update rule whose
    sources disagree; the defaults are the variants that measurably train
    better (see README):
      - update_eps_at_desired: evaluate the response kernel in the update's
        first denominator at the desired postsynaptic time instead of the
        per-update reference time (they coincide for correct-class updates).
      - pull_only_when_late: only correct-class neurons firing *after* the
        desired time get pulled toward it; the default also pulls back
        neurons that fire too early, which anchors fire times at the desired
        time instead of letting them drift early.
    """

    lam: float = 1.0
    t_d: float = 2.0
    t_m: float = 0.05
    sigma: float = 0.5
    sigma_init: float | None = None
    tau_stdp: float = 3.0
    epochs: int = 100
    seed: int = 42
    delta_T: float = 1.0
    dt: float = 0.01
    tau_eps: float = 3.0
    update_eps_at_desired: bool = False
    pull_only_when_late: bool = False

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"learning rate must be positive, got {self.lam}")
        if self.t_d <= 0:
            raise ValueError(f"desired fire time must be positive, got {self.t_d}")
        if self.t_m <= 0:
            raise ValueError(f"margin time must be positive, got {self.t_m}")
        if self.sigma <= 0:
            raise ValueError(f"update range must be positive, got {self.sigma}")
        if self.tau_stdp <= 0:
            raise ValueError(f"STDP time constant must be positive, got {self.tau_stdp}")
        if self.tau_eps <= 0:
            raise ValueError(f"response time constant must be positive, got {self.tau_eps}")
        if self.epochs < 1:
            raise ValueError(f"need at least one epoch, got {self.epochs}")

    @property
    def sigma_init_value(self) -> float:
        return self.sigma if self.sigma_init is None else self.sigma_init


@dataclass
class Model:
    """Trained classifier state.

    weights has shape (n, m, q, P): one sampled weight function per
    (class, feature, RF neuron). thetas holds the n firing thresholds.
    """

    weights: np.ndarray
    thetas: np.ndarray
    enc_cfg: EncodingConfig
    grid: TimeGrid
    tau_eps: float
    class_initialized: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.weights.shape[1]

    @property
    def q(self) -> int:
        return self.weights.shape[2]

    def snapshot(self) -> "Model":
        return replace(
            self,
            weights=self.weights.copy(),
            thetas=self.thetas.copy(),
            class_initialized=self.class_initialized.copy(),
        )


@dataclass(frozen=True)
class UpdateReport:
    """What one training sample did to the model."""

    predicted: int
    fire_times: np.ndarray
    touched: bool
    updated_classes: tuple[int, ...]


@dataclass(frozen=True)
class TrainResult:
    model: Model
    train_accuracy: list[float]
    best_epoch: int


def new_model(n: int, m: int, enc_cfg: EncodingConfig, cfg: LearningConfig) -> Model:
    grid = make_grid(enc_cfg.T + cfg.delta_T, cfg.dt)
    if not 0.0 < cfg.t_d < grid.t_end:
        raise ValueError(f"desired fire time {cfg.t_d} outside (0, {grid.t_end})")
    return Model(
        weights=np.zeros((n, m, enc_cfg.q, grid.points)),
        thetas=np.zeros(n),
        enc_cfg=enc_cfg,
        grid=grid,
        tau_eps=cfg.tau_eps,
        class_initialized=np.zeros(n, dtype=bool),
    )


def normalized_stdp(pattern: SpikePattern, t_hat: float, tau_stdp: float) -> np.ndarray:
    """Per-synapse contribution fractions relative to postsynaptic time t_hat.

    Spikes at or before t_hat share +1 between them, spikes after share -1,
    each weighted by exp(-|t_hat - s| / tau) and normalised within its own
    group. With no spike before t_hat there is nothing to potentiate: the
    result is the all-negative matrix summing to -1 and a warning is logged.
    """
    s = pattern.times
    kernel = np.exp(-np.abs(t_hat - s) / tau_stdp)
    before = s <= t_hat
    u = np.zeros_like(s)
    if before.any():
        u[before] = kernel[before] / kernel[before].sum()
    else:
        logger.warning("no presynaptic spike at or before t=%g; sample is degenerate", t_hat)
    after = ~before
    if after.any():
        u[after] = -kernel[after] / kernel[after].sum()
    return u


def init_class(pattern: SpikePattern, j: int, cfg: LearningConfig, model: Model) -> None:
    """Initialise class j's weight functions and threshold from one sample.

    The weight function of each synapse is the STDP fraction at the desired
    fire time, spread as a Gaussian around the sample's spike time. The
    threshold is set so this very sample's potential reaches it exactly at
    the desired time.
    """
    if model.class_initialized[j]:
        raise ValueError(f"class {j} already initialized")
    u = normalized_stdp(pattern, cfg.t_d, cfg.tau_stdp)
    s = pattern.times
    t = model.grid.times
    bump = np.exp(-((t - s[..., np.newaxis]) ** 2) / (2.0 * cfg.sigma_init_value**2))
    model.weights[j] = u[..., np.newaxis] * bump
    theta = float(np.sum(u * spike_response(cfg.t_d - s, cfg.tau_eps)))
    if theta <= 0.0:
        logger.warning("class %d initialized with non-positive threshold %g", j, theta)
    model.thetas[j] = theta
    model.class_initialized[j] = True


def weight_update_delta(
    pattern: SpikePattern,
    t_ref: float,
    t_actual: float,
    theta_j: float,
    cfg: LearningConfig,
) -> np.ndarray:
    """Per-synapse weight change moving a neuron's fire time toward t_ref.

    Both denominators are causal sums of STDP fractions weighted by the
    response kernel; if either collapses below the guard the update is
    skipped (zero matrix) and logged rather than letting the division blow up.
    """
    s = pattern.times
    u_ref = normalized_stdp(pattern, t_ref, cfg.tau_stdp)
    u_act = normalized_stdp(pattern, t_actual, cfg.tau_stdp)
    t_eval = cfg.t_d if cfg.update_eps_at_desired else t_ref
    d_ref = float(np.sum(u_ref * spike_response(t_eval - s, cfg.tau_eps)))
    d_act = float(np.sum(u_act * spike_response(t_actual - s, cfg.tau_eps)))
    if abs(d_ref) < DENOM_GUARD or abs(d_act) < DENOM_GUARD:
        logger.warning(
            "skipping update (denominators %g / %g below guard %g)", d_ref, d_act, DENOM_GUARD
        )
        return np.zeros_like(s)
    return cfg.lam * u_ref * theta_j * (1.0 / d_ref - 1.0 / d_act)


def apply_update(model: Model, j: int, delta: np.ndarray, pattern: SpikePattern, sigma: float) -> None:
    """Embed per-synapse weight changes as Gaussian bumps at the spike times."""
    if not model.class_initialized[j]:
        raise ValueError(f"class {j} not initialized")
    t = model.grid.times
    s = pattern.times
    bump = np.exp(-((t - s[..., np.newaxis]) ** 2) / (2.0 * sigma**2))
    model.weights[j] += delta[..., np.newaxis] * bump


def train_sample(model: Model, pattern: SpikePattern, true_class: int, cfg: LearningConfig) -> UpdateReport:
    """One margin-driven training step.

    No neuron is touched when the correct class fires at least t_m before all
    others. Otherwise the correct class is pulled toward the desired fire
    time (by default whenever it missed it; only when late under
    pull_only_when_late) and every wrong class firing inside the margin is
    pushed to just after the correct class.
    """
    times = fire_times_all(pattern, model.weights, model.thetas, model.grid, model.tau_eps)
    predicted = int(np.argmin(times))
    t_j = times[true_class]
    others = np.delete(times, true_class)
    if t_j + cfg.t_m <= others.min():
        return UpdateReport(predicted, times, touched=False, updated_classes=())

    updated: list[int] = []
    deltas: list[tuple[int, np.ndarray]] = []
    pull = t_j > cfg.t_d if cfg.pull_only_when_late else t_j != cfg.t_d
    if pull:
        delta = weight_update_delta(pattern, cfg.t_d, t_j, model.thetas[true_class], cfg)
        deltas.append((true_class, delta))
    t_push = min(t_j + cfg.t_m, model.grid.t_end)
    for h in range(model.n):
        if h == true_class:
            continue
        if times[h] < t_j + cfg.t_m:
            delta = weight_update_delta(pattern, t_push, times[h], model.thetas[h], cfg)
            deltas.append((h, delta))
    for j, delta in deltas:
        apply_update(model, j, delta, pattern, cfg.sigma)
        updated.append(j)
    return UpdateReport(predicted, times, touched=True, updated_classes=tuple(updated))


def encode_all(features: np.ndarray, enc_cfg: EncodingConfig) -> list[SpikePattern]:
    return [encode(x, enc_cfg) for x in features]


def evaluate_time_domain(model: Model, patterns: list[SpikePattern], labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Accuracy and predictions of first-spike classification."""
    preds = np.empty(len(patterns), dtype=int)
    for k, p in enumerate(patterns):
        times = fire_times_all(p, model.weights, model.thetas, model.grid, model.tau_eps)
        preds[k] = int(np.argmin(times))
    return float(np.mean(preds == labels)), preds


def train(dataset, cfg: LearningConfig, enc_cfg: EncodingConfig) -> TrainResult:
    """Full training loop.

    Each class is initialised from its first sample in dataset order, then
    `epochs` shuffled passes run over all samples. The returned model is the
    snapshot from the epoch with the highest training accuracy (earliest such
    epoch on ties).
    """
    features = np.asarray(dataset.features, dtype=float)
    labels = np.asarray(dataset.labels, dtype=int)
    n = int(dataset.n)
    if n < 2:
        raise ValueError(f"need at least 2 classes, got {n}")
    counts = np.bincount(labels, minlength=n)
    if (counts == 0).any():
        missing = np.flatnonzero(counts == 0)
        raise ValueError(f"classes with zero samples: {missing.tolist()}")

    patterns = encode_all(features, enc_cfg)
    model = new_model(n, features.shape[1], enc_cfg, cfg)
    for k, label in enumerate(labels):
        if not model.class_initialized[label]:
            init_class(patterns[k], int(label), cfg, model)
        if model.class_initialized.all():
            break

    rng = np.random.default_rng(cfg.seed)
    trace: list[float] = []
    best_acc = -1.0
    best_epoch = -1
    best: Model | None = None
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(patterns))
        for k in order:
            train_sample(model, patterns[k], int(labels[k]), cfg)
        acc, _ = evaluate_time_domain(model, patterns, labels)
        trace.append(acc)
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best = model.snapshot()
    assert best is not None
    return TrainResult(model=best, train_accuracy=trace, best_epoch=best_epoch)


def model_digest(model: Model) -> str:
    """Stable content hash of a model, used to stamp derived artifacts."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(model.weights).tobytes())
    h.update(np.ascontiguousarray(model.thetas).tobytes())
    h.update(np.ascontiguousarray(model.enc_cfg.centers).tobytes())
    for v in (model.enc_cfg.q, model.enc_cfg.gamma, model.enc_cfg.T, model.grid.t_end, model.grid.dt, model.tau_eps):
        h.update(repr(v).encode())
    return h.hexdigest()

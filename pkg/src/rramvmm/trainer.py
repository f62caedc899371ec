"""Ex-situ training of a binarized ADALINE.

Inputs are the 8-bit quantized features (non-negative integers), weights are
constrained to {-1, +1} in the forward pass, and real-valued latent weights
are updated with ADAM on a squared-hinge loss through a straight-through
estimator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoder import LEVELS, NormalizationStats, fit_normalization, quantize
from .errors import ParameterError
from .rng import substream

# Training length is not reported for the reference experiment; 10 epochs of
# batch 16 lands on its reported software accuracy (longer runs reach ~88%).
DEFAULT_EPOCHS = 10
DEFAULT_BATCH = 16


def one_hot_encode(labels, n_classes):
    """Targets in {-1, +1}: +1 for the true class, -1 elsewhere."""
    labels = np.asarray(labels, dtype=np.int64)
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise ParameterError(f"labels must lie in [0, {n_classes})")
    t = -np.ones((labels.size, n_classes))
    t[np.arange(labels.size), labels] = 1.0
    return t


def binarize(latent):
    """Elementwise sign with sign(0) = +1."""
    return np.where(np.asarray(latent) >= 0, 1.0, -1.0)


def forward(x, binary_weights):
    """Class scores ``x @ W.T`` for a batch of quantized inputs."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    w = np.asarray(binary_weights, dtype=float)
    if x.shape[1] != w.shape[1]:
        raise ParameterError(f"input has {x.shape[1]} features, weights expect {w.shape[1]}")
    return x @ w.T


def predict(scores):
    """Argmax over classes; ties go to the lowest class index."""
    return np.argmax(scores, axis=1)


def binary_tanh(scores):
    """Hard-limiting quantizer output in {-1, +1}."""
    return binarize(scores)


def squared_hinge_grad(scores, targets):
    """Mean squared-hinge loss and its gradient with respect to ``scores``."""
    scores = np.asarray(scores, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if scores.shape != targets.shape:
        raise ParameterError(f"shape mismatch {scores.shape} vs {targets.shape}")
    margin = np.maximum(0.0, 1.0 - targets * scores)
    n = scores.size
    loss = float(np.sum(margin**2) / n)
    grad = -2.0 * targets * margin / n
    return loss, grad


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, shape, **hyper):
        return cls(np.zeros(shape), np.zeros(shape), **hyper)


def adam_step(latent, grad, state):
    """One bias-corrected ADAM update followed by clamping to [-1, 1].

    Elements already saturated (``|latent| >= 1``) receive no gradient and no
    update; this is the straight-through estimator's cancellation region.
    Mutates ``state`` and returns ``(new_latent, state)``.
    """
    latent = np.asarray(latent, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if latent.shape != grad.shape or latent.shape != state.first_moment.shape:
        raise ParameterError("latent, gradient and moment shapes must agree")
    active = np.abs(latent) < 1.0
    g = np.where(active, grad, 0.0)
    state.step += 1
    state.first_moment = state.beta1 * state.first_moment + (1 - state.beta1) * g
    state.second_moment = state.beta2 * state.second_moment + (1 - state.beta2) * g * g
    m_hat = state.first_moment / (1 - state.beta1**state.step)
    v_hat = state.second_moment / (1 - state.beta2**state.step)
    update = np.where(active, state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon), 0.0)
    return np.clip(latent - update, -1.0, 1.0), state


@dataclass
class TrainedModel:
    latent_weights: np.ndarray
    binary_weights: np.ndarray
    stats: NormalizationStats
    classes: int
    epochs_run: int
    batch_size: int
    seed: int
    hyperparameters: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    @property
    def bias(self):
        return bool(self.hyperparameters.get("bias", False))

    def encode(self, x):
        """Quantize raw features and append the bias input if enabled."""
        q = np.atleast_2d(quantize(x, self.stats))
        return augment(q, self.bias)

    def predict(self, x):
        return predict(forward(self.encode(x), self.binary_weights))

    def to_dict(self):
        return {
            "latent_weights": self.latent_weights.tolist(),
            "binary_weights": self.binary_weights.astype(int).tolist(),
            "stats": self.stats.to_dict(),
            "classes": self.classes,
            "epochs_run": self.epochs_run,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "hyperparameters": dict(self.hyperparameters),
            "metrics": dict(self.metrics),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["latent_weights"], dtype=float),
            np.asarray(d["binary_weights"], dtype=float),
            NormalizationStats.from_dict(d["stats"]),
            int(d["classes"]),
            int(d["epochs_run"]),
            int(d["batch_size"]),
            int(d["seed"]),
            dict(d["hyperparameters"]),
            dict(d.get("metrics", {})),
        )

    def __eq__(self, other):
        return (
            isinstance(other, TrainedModel)
            and np.array_equal(self.latent_weights, other.latent_weights)
            and np.array_equal(self.binary_weights, other.binary_weights)
            and self.stats == other.stats
            and (self.classes, self.epochs_run, self.batch_size, self.seed)
            == (other.classes, other.epochs_run, other.batch_size, other.seed)
            and self.hyperparameters == other.hyperparameters
            and self.metrics == other.metrics
        )


def augment(q, bias):
    """Append a constant full-scale input column when ``bias`` is set."""
    q = np.atleast_2d(q)
    if not bias:
        return q
    return np.hstack([q, np.full((q.shape[0], 1), LEVELS, dtype=q.dtype)])


def train(
    x,
    y,
    epochs=DEFAULT_EPOCHS,
    batch_size=DEFAULT_BATCH,
    seed=0,
    *,
    n_classes=None,
    lr=1e-3,
    beta1=0.9,
    beta2=0.999,
    epsilon=1e-8,
    init_scale=0.1,
    bias=False,
):
    """Train a binarized ADALINE on raw features ``x`` and integer labels ``y``.

    Normalization statistics are fitted on ``x``. Randomness comes from two
    substreams of ``seed`` (weight init and batch order).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if epochs < 1:
        raise ParameterError("epochs must be >= 1")
    if not 1 <= batch_size <= len(x):
        raise ParameterError(f"batch_size must lie in [1, {len(x)}]")
    if len(x) != len(y):
        raise ParameterError("x and y lengths differ")
    k = int(n_classes if n_classes is not None else y.max() + 1)

    stats = fit_normalization(x)
    xq = augment(quantize(x, stats), bias).astype(float)
    targets = one_hot_encode(y, k)

    init_rng = substream(seed, "init")
    order_rng = substream(seed, "batches")
    latent = init_rng.uniform(-init_scale, init_scale, size=(k, xq.shape[1]))
    w = binarize(latent)
    adam = AdamState.zeros(latent.shape, lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)

    history = []
    for _ in range(epochs):
        perm = order_rng.permutation(len(xq))
        epoch_loss = 0.0
        for start in range(0, len(xq), batch_size):
            idx = perm[start : start + batch_size]
            xb = xq[idx]
            loss, g_scores = squared_hinge_grad(forward(xb, w), targets[idx])
            # straight-through: d loss / d latent := d loss / d binary
            latent, adam = adam_step(latent, g_scores.T @ xb, adam)
            w = binarize(latent)
            epoch_loss += loss * len(idx)
        history.append(epoch_loss / len(xq))

    hyper = {
        "lr": lr,
        "beta1": beta1,
        "beta2": beta2,
        "epsilon": epsilon,
        "init_scale": init_scale,
        "bias": bias,
    }
    model = TrainedModel(latent, w, stats, k, epochs, batch_size, int(seed), hyper)
    model.metrics["final_loss"] = history[-1]
    return model


def evaluate(model, x, y):
    """Fraction of samples classified correctly."""
    y = np.asarray(y)
    return float(np.mean(model.predict(x) == y))

"""GIN training: Adam on softmax cross-entropy with seeded determinism.

Reverse-mode gradients come from model.backward, which differentiates the
exact forward pass (including the seeded dropout masks), so a fixed seed
makes the whole loss a deterministic function of the parameters; finite
differences can check it directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, DivergenceError
from .model import GinModel, backward, forward_cached, init_model, softmax


@dataclass
class GinTrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs: int = 50
    batch_size: int = 32
    validation_fraction: float = 0.1
    early_stop_patience: int = 5
    seed: int = 42
    class_weights: tuple | None = None  # optional (w0, w1)

    def validate(self):
        if self.learning_rate <= 0 or self.epochs <= 0 or self.batch_size <= 0:
            raise DataError("learning_rate, epochs, batch_size must be positive")
        if not (0.0 <= self.validation_fraction < 1.0):
            raise DataError("validation_fraction must be in [0, 1)")


def sample_loss_and_grads(model: GinModel, graph, features, label: int,
                          training: bool, rng_seed: int, weight: float = 1.0):
    """Cross-entropy loss and parameter gradients for one labeled graph."""
    logits, state = forward_cached(model, graph, features, training=training,
                                   rng_seed=rng_seed)
    probs = softmax(logits)
    loss = -float(np.log(max(probs[label], 1e-300))) * weight
    dlogits = probs.copy()
    dlogits[label] -= 1.0
    dlogits *= weight
    grads = backward(model, state, dlogits)
    return loss, grads, probs


class _Adam:
    def __init__(self, params, config: GinTrainConfig):
        self.config = config
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        cfg = self.config
        self.t += 1
        correction1 = 1.0 - cfg.beta1 ** self.t
        correction2 = 1.0 - cfg.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * (g * g)
            m_hat = m / correction1
            v_hat = v / correction2
            p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)


def _evaluate(model: GinModel, data, indices):
    total_loss = 0.0
    correct = 0
    for i in indices:
        graph, features, label = data[i]
        logits, _ = forward_cached(model, graph, features, training=False)
        probs = softmax(logits)
        total_loss += -float(np.log(max(probs[label], 1e-300)))
        correct += int(np.argmax(probs) == label)
    n = len(indices)
    return total_loss / n, correct / n


def train(data: list, config: GinTrainConfig | None = None) -> dict:
    """Train a fresh model on (graph, features, label) triples.

    Returns {"model": GinModel, "history": [{train_loss, val_loss,
    val_accuracy}, ...]}. Early stopping restores the best-validation
    parameters. Fully deterministic for a fixed config.seed.
    """
    config = config or GinTrainConfig()
    config.validate()
    if len(data) < 2:
        raise DataError("need at least 2 training samples")
    labels = {label for _, _, label in data}
    if labels != {0, 1}:
        raise DataError(f"both classes required, got labels {sorted(labels)}")

    weights = {0: 1.0, 1: 1.0}
    if config.class_weights is not None:
        weights = {0: float(config.class_weights[0]), 1: float(config.class_weights[1])}

    model = init_model(seed=config.seed)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, 1))))

    order = rng.permutation(len(data))
    n_val = int(config.validation_fraction * len(data))
    val_idx = order[:n_val].tolist()
    train_idx = order[n_val:].tolist()
    if not train_idx:
        raise DataError("validation split leaves no training samples")

    adam = _Adam(model.parameters(), config)
    history = []
    best_val = np.inf
    best_params = None
    stale = 0

    for epoch in range(config.epochs):
        perm = rng.permutation(len(train_idx))
        epoch_loss = 0.0
        for start in range(0, len(perm), config.batch_size):
            batch = [train_idx[i] for i in perm[start:start + config.batch_size]]
            params = model.parameters()
            acc_grads = [np.zeros_like(p) for p in params]
            batch_loss = 0.0
            for i in batch:
                graph, features, label = data[i]
                step_seed = int(rng.integers(0, 2**63 - 1))
                loss, grads, _ = sample_loss_and_grads(
                    model, graph, features, label,
                    training=True, rng_seed=step_seed, weight=weights[label])
                batch_loss += loss
                for acc, g in zip(acc_grads, grads):
                    acc += g
            scale = 1.0 / len(batch)
            for acc in acc_grads:
                acc *= scale
            batch_loss *= scale
            if not np.isfinite(batch_loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            adam.step(params, acc_grads)
            epoch_loss += batch_loss * len(batch)
        epoch_loss /= len(train_idx)

        record = {"train_loss": epoch_loss, "val_loss": None, "val_accuracy": None}
        if val_idx:
            val_loss, val_acc = _evaluate(model, data, val_idx)
            record["val_loss"] = val_loss
            record["val_accuracy"] = val_acc
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                best_params = [p.copy() for p in model.parameters()]
                stale = 0
            else:
                stale += 1
        history.append(record)
        if val_idx and stale >= config.early_stop_patience:
            break

    if best_params is not None:
        for p, best in zip(model.parameters(), best_params):
            p[...] = best
    return {"model": model, "history": history}

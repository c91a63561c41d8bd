"""Normalization, logistic regression, Monte Carlo CV, and ablation presets.

Training minimizes the L2-regularized mean negative log-likelihood by
full-batch gradient descent from zero initialization, so a trained model is a
pure function of its inputs. Feature masks zero out columns before training
and the corresponding weights stay exactly 0.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TrainingError
from .featureset import FEATURE_NAMES, N_FEATURES

_IDX = {name: i for i, name in enumerate(FEATURE_NAMES)}


@dataclass(frozen=True)
class Hyper:
    learning_rate: float = 0.1
    epochs: int = 500
    l2_lambda: float = 0.01

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.l2_lambda < 0:
            raise ConfigError("l2_lambda must be non-negative")


@dataclass(frozen=True)
class NormalizationStats:
    mean: np.ndarray
    std: np.ndarray  # zero-variance columns carry std 1 (pass-through centering)


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    bias: float
    feature_mask: np.ndarray
    hyper: Hyper

    def predict_proba(self, X):
        z = X @ self.weights + self.bias
        return 1.0 / (1.0 + np.exp(-z))

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


@dataclass(frozen=True)
class AblationPreset:
    name: str
    feature_mask: np.ndarray


@dataclass(frozen=True)
class EvalReport:
    model_name: str
    repeats: int
    precision: float
    recall: float
    f_measure: float
    train_accuracy: float
    precision_std: float
    recall_std: float
    f_measure_std: float
    train_accuracy_std: float


def normalize_fit(X):
    """Per-feature mean/std (population) from a training split."""
    if X.shape[0] == 0:
        raise ConfigError("cannot fit normalization on an empty training split")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return NormalizationStats(mean=mean, std=std)


def normalize_apply(stats, X):
    return (X - stats.mean) / stats.std


def loss_and_gradient(weights, bias, X, y, l2_lambda):
    """Regularized mean NLL and its gradient (bias unregularized)."""
    m = X.shape[0]
    z = X @ weights + bias
    p = 1.0 / (1.0 + np.exp(-z))
    eps = 1e-12
    nll = -np.mean(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps))
    loss = nll + (l2_lambda / (2.0 * m)) * np.dot(weights, weights)
    err = p - y
    grad_w = X.T @ err / m + (l2_lambda / m) * weights
    grad_b = float(err.mean())
    return loss, grad_w, grad_b


def train(X, y, mask=None, hyper=Hyper(), seed=0):
    """Full-batch gradient descent from zero init; deterministic given inputs.

    The seed parameter is part of the contract for forward compatibility;
    zero-initialized full-batch descent does not consume randomness.
    """
    del seed
    if mask is None:
        mask = np.ones(X.shape[1], dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    pos = int((y == 1).sum())
    neg = int((y == 0).sum())
    if pos == 0 or neg == 0:
        raise TrainingError(f"need both classes to train, got {pos} positive / {neg} negative")
    Xm = X * mask
    w = np.zeros(X.shape[1])
    b = 0.0
    for epoch in range(hyper.epochs):
        loss, grad_w, grad_b = loss_and_gradient(w, b, Xm, y, hyper.l2_lambda)
        if not np.isfinite(loss):
            raise TrainingError(f"loss diverged to {loss} at epoch {epoch}")
        w = w - hyper.learning_rate * grad_w
        b = b - hyper.learning_rate * grad_b
    w = w * mask
    if not np.all(np.isfinite(w)) or not np.isfinite(b):
        raise TrainingError("non-finite weights after training")
    return LogisticModel(weights=w, bias=b, feature_mask=mask, hyper=hyper)


def evaluate(model, X, y):
    """Precision/recall/F/accuracy at threshold 0.5, zero-denominator safe."""
    pred = model.predict(X)
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f_measure = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    accuracy = (tp + tn) / len(y)
    return {"precision": precision, "recall": recall,
            "f_measure": f_measure, "accuracy": accuracy}


def _stratified_split(y, train_fraction, rng):
    train_idx = []
    test_idx = []
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(len(members))]
        k = int(round(train_fraction * len(members)))
        k = min(max(k, 1), len(members) - 1)
        train_idx.extend(members[:k])
        test_idx.extend(members[k:])
    return np.sort(np.array(train_idx)), np.sort(np.array(test_idx))


def _downsample_majority(idx, y, rng):
    pos = [i for i in idx if y[i] == 1]
    neg = [i for i in idx if y[i] == 0]
    small, large = (pos, neg) if len(pos) <= len(neg) else (neg, pos)
    keep = rng.choice(len(large), size=len(small), replace=False)
    balanced = np.array(small + [large[i] for i in sorted(keep)])
    return np.sort(balanced)


def monte_carlo_cv(X, y, preset, repeats=20, train_fraction=0.7, hyper=Hyper(),
                   seed=0, balance=False):
    """Repeated stratified random splits; metric means and std-devs.

    Each repeat derives its own generator from (seed, repeat index), so the
    report is identical under any evaluation order. A split that collapses to
    a single class is re-drawn, up to 100 times.
    """
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    if not 0 < train_fraction < 1:
        raise ConfigError("train_fraction must lie in (0, 1)")
    if (y == 1).sum() < 2 or (y == 0).sum() < 2:
        raise TrainingError("each class needs at least 2 examples for CV")
    metrics = {"precision": [], "recall": [], "f_measure": [], "train_accuracy": []}
    for rep in range(repeats):
        rng = np.random.default_rng([seed, rep])
        for attempt in range(100):
            train_idx, test_idx = _stratified_split(y, train_fraction, rng)
            if balance:
                train_idx = _downsample_majority(list(train_idx), y, rng)
            y_train = y[train_idx]
            if 0 < y_train.sum() < len(y_train):
                break
        else:
            raise TrainingError("could not draw a two-class training split in 100 attempts")
        stats = normalize_fit(X[train_idx])
        model = train(normalize_apply(stats, X[train_idx]), y_train,
                      mask=preset.feature_mask, hyper=hyper)
        train_metrics = evaluate(model, normalize_apply(stats, X[train_idx]), y_train)
        test_metrics = evaluate(model, normalize_apply(stats, X[test_idx]), y[test_idx])
        metrics["precision"].append(test_metrics["precision"])
        metrics["recall"].append(test_metrics["recall"])
        metrics["f_measure"].append(test_metrics["f_measure"])
        metrics["train_accuracy"].append(train_metrics["accuracy"])
    mean = {k: float(np.mean(v)) for k, v in metrics.items()}
    std = {k: float(np.std(v)) for k, v in metrics.items()}
    return EvalReport(
        model_name=preset.name,
        repeats=repeats,
        precision=mean["precision"], precision_std=std["precision"],
        recall=mean["recall"], recall_std=std["recall"],
        f_measure=mean["f_measure"], f_measure_std=std["f_measure"],
        train_accuracy=mean["train_accuracy"], train_accuracy_std=std["train_accuracy"],
    )


def _mask(excluded):
    mask = np.ones(N_FEATURES, dtype=bool)
    for name in excluded:
        mask[_IDX[name]] = False
    return mask


_TEXT_CURRENT = ["sentiment", "cognition", "intent"]
_TEXT_HISTORY = ["avg_sentiment_before", "avg_cognition_before", "avg_intent_before",
                 "last_sentiment", "last_cognition", "last_intent"]


def table2_presets():
    """The five ablation presets: all features, two text ablations, and two
    structure ablations."""
    return [
        AblationPreset("M1: all features", _mask([])),
        AblationPreset("M2: M1 without current sentiment, cognition, intent",
                       _mask(_TEXT_CURRENT)),
        AblationPreset("M3: M1 without any sentiment, cognition, intent",
                       _mask(_TEXT_CURRENT + _TEXT_HISTORY)),
        AblationPreset("M1 without modularity", _mask(["modularity"])),
        AblationPreset("M3 without avgconnectiveness and avgbetweenness",
                       _mask(_TEXT_CURRENT + _TEXT_HISTORY
                             + ["avg_connectiveness", "avg_betweenness"])),
    ]


PRESET_KEYS = ["m1", "m2", "m3", "m1_no_modularity", "m3_no_avg_centrality"]


def report_json(report):
    """Stable JSON for one preset's CV report."""
    payload = {
        "model_name": report.model_name,
        "repeats": report.repeats,
        "metrics": {
            "precision": {"mean": report.precision, "std": report.precision_std},
            "recall": {"mean": report.recall, "std": report.recall_std},
            "f_measure": {"mean": report.f_measure, "std": report.f_measure_std},
        },
        "train_accuracy": {"mean": report.train_accuracy, "std": report.train_accuracy_std},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_table(reports):
    """Plain-text table with Model / Precision / Recall / F-measure columns."""
    buf = io.StringIO()
    name_width = max(len("Model"), max((len(r.model_name) for r in reports), default=0))
    buf.write(f"{'Model':<{name_width}}  {'Precision':>9}  {'Recall':>9}  {'F-measure':>9}\n")
    for r in reports:
        buf.write(f"{r.model_name:<{name_width}}  {r.precision:>9.4f}  "
                  f"{r.recall:>9.4f}  {r.f_measure:>9.4f}\n")
    return buf.getvalue()

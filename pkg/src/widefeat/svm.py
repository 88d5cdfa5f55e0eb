"""Soft-margin binary SVM trained with sequential pairwise dual updates.

Training standardizes features on the given rows, then optimizes the dual
with simplified SMO: sweep the examples, pick a KKT violator, pair it with a
randomly drawn partner (seeded, so runs are reproducible) and solve the
two-variable subproblem analytically.  Per-sample box constraints carry the
class weights, so imbalanced data can penalize minority errors harder.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import TrainingError

KERNEL_KINDS = ("linear", "rbf", "poly")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float | None = None  # None resolves to 1 / n_features at fit time
    degree: int = 3
    coef0: float = 1.0

    def resolve(self, n_features: int) -> "KernelSpec":
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.gamma is None and self.kind in ("rbf", "poly"):
            return replace(self, gamma=1.0 / n_features)
        return self


def kernel_matrix(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if spec.kind == "linear":
        return a @ b.T
    if spec.kind == "rbf":
        sq = (np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :]
              - 2.0 * (a @ b.T))
        return np.exp(-spec.gamma * np.maximum(sq, 0.0))
    if spec.kind == "poly":
        return (spec.gamma * (a @ b.T) + spec.coef0) ** spec.degree
    raise ValueError(f"unknown kernel {spec.kind!r}")


@dataclass(frozen=True)
class SvmModel:
    kernel: KernelSpec
    c: float
    class_weights: dict[int, float]
    support_vectors: np.ndarray  # standardized rows
    alphas: np.ndarray
    sv_labels: np.ndarray  # +/-1
    sv_box: np.ndarray  # per-support-vector upper bound w_i * C
    bias: float
    feature_mean: np.ndarray
    feature_std: np.ndarray
    negative_label: int
    positive_label: int

    @property
    def n_features(self) -> int:
        return self.feature_mean.size

    def standardize(self, rows: np.ndarray) -> np.ndarray:
        return (rows - self.feature_mean) / self.feature_std


def _resolve_class_weights(labels: np.ndarray, mode) -> dict[int, float]:
    classes, counts = np.unique(labels, return_counts=True)
    if mode is None or mode == "none":
        return {int(c): 1.0 for c in classes}
    if mode == "balanced":
        n = labels.size
        return {int(c): n / (classes.size * cnt) for c, cnt in zip(classes, counts)}
    if isinstance(mode, dict):
        return {int(c): float(mode.get(int(c), 1.0)) for c in classes}
    raise ValueError(f"unsupported class weight mode {mode!r}")


def svm_train(rows, labels, kernel: KernelSpec = KernelSpec(), c: float = 1.0,
              class_weights="balanced", positive_label: int | None = None,
              tol: float = 1e-3, max_passes: int = 10, max_sweeps: int = 500,
              seed: int = 0) -> SvmModel:
    """Fit a binary SVM on ``rows`` (records x features).

    Standardization statistics come from these rows only; zero-variance
    columns standardize to constant 0.  Raises :class:`TrainingError` when
    only one class is present.
    """
    x = np.asarray(rows, dtype=float)
    labels = np.asarray(labels)
    if x.ndim != 2 or x.shape[0] != labels.size:
        raise ValueError("rows must be 2-D with one label per row")
    classes = np.unique(labels)
    if classes.size != 2:
        raise TrainingError(f"need exactly two classes in training rows, got {classes.tolist()}")
    if c <= 0:
        raise ValueError(f"C must be positive, got {c}")
    if positive_label is None:
        positive_label = int(classes.max())
    elif positive_label not in classes:
        raise ValueError(f"positive label {positive_label} not present in training labels")
    negative_label = int(classes[classes != positive_label][0])

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    xs = (x - mean) / std

    weights = _resolve_class_weights(labels, class_weights)
    y = np.where(labels == positive_label, 1.0, -1.0)
    box = np.asarray([c * weights[int(l)] for l in labels])

    n = xs.shape[0]
    spec = kernel.resolve(xs.shape[1])
    gram = kernel_matrix(spec, xs, xs)
    alphas = np.zeros(n)
    bias = 0.0
    rng = np.random.default_rng(seed)

    def decision(i: int) -> float:
        return float((alphas * y) @ gram[:, i] + bias)

    passes = 0
    sweeps = 0
    while passes < max_passes and sweeps < max_sweeps:
        changed = 0
        for i in range(n):
            e_i = decision(i) - y[i]
            if not ((y[i] * e_i < -tol and alphas[i] < box[i])
                    or (y[i] * e_i > tol and alphas[i] > 0)):
                continue
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            e_j = decision(j) - y[j]
            a_i, a_j = alphas[i], alphas[j]
            if y[i] == y[j]:
                lo = max(0.0, a_i + a_j - box[i])
                hi = min(box[j], a_i + a_j)
            else:
                lo = max(0.0, a_j - a_i)
                hi = min(box[j], box[i] + a_j - a_i)
            if hi - lo < 1e-12:
                continue
            eta = 2.0 * gram[i, j] - gram[i, i] - gram[j, j]
            if eta >= 0:
                continue
            a_j_new = np.clip(a_j - y[j] * (e_i - e_j) / eta, lo, hi)
            if abs(a_j_new - a_j) < 1e-7:
                continue
            a_i_new = a_i + y[i] * y[j] * (a_j - a_j_new)
            alphas[i], alphas[j] = a_i_new, a_j_new
            b1 = bias - e_i - y[i] * (a_i_new - a_i) * gram[i, i] \
                - y[j] * (a_j_new - a_j) * gram[i, j]
            b2 = bias - e_j - y[i] * (a_i_new - a_i) * gram[i, j] \
                - y[j] * (a_j_new - a_j) * gram[j, j]
            if 0 < a_i_new < box[i]:
                bias = b1
            elif 0 < a_j_new < box[j]:
                bias = b2
            else:
                bias = 0.5 * (b1 + b2)
            changed += 1
        sweeps += 1
        passes = passes + 1 if changed == 0 else 0

    keep = alphas > 1e-10
    return SvmModel(
        kernel=spec, c=c, class_weights=weights,
        support_vectors=xs[keep], alphas=alphas[keep], sv_labels=y[keep],
        sv_box=box[keep], bias=float(bias),
        feature_mean=mean, feature_std=std,
        negative_label=negative_label, positive_label=positive_label)


def decision_function(model: SvmModel, rows) -> np.ndarray:
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValueError(
            f"expected rows with {model.n_features} features, got shape {x.shape}")
    if x.shape[0] == 0:
        return np.zeros(0)
    xs = model.standardize(x)
    if model.support_vectors.shape[0] == 0:
        return np.full(x.shape[0], model.bias)
    k = kernel_matrix(model.kernel, xs, model.support_vectors)
    return k @ (model.alphas * model.sv_labels) + model.bias


def svm_predict(model: SvmModel, rows) -> np.ndarray:
    """Predicted class labels (the model's original label values)."""
    scores = decision_function(model, rows)
    return np.where(scores >= 0.0, model.positive_label, model.negative_label)

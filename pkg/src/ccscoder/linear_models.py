"""Bag-of-words classifiers: multinomial naive Bayes and a linear squared-hinge SVM.

The naive Bayes model uses uniform class priors and Lidstone smoothing with
alpha = 1.0. The SVM trains one binary separator per class (one-vs-rest) by
deterministic epoch-ordered coordinate descent on the dual of the L2-regularized
squared-hinge problem, with the bias folded in as a constant unit feature.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCorpus
from .features import DocTermMatrix

SparseRow = list[tuple[int, int]]


@dataclass
class MnbModel:
    classes: list[int]
    log_prior: np.ndarray  # (K,), constant -ln K
    log_likelihood: np.ndarray  # (K, V), ln theta[c, w]
    alpha: float = 1.0


@dataclass
class SvmModel:
    classes: list[int]
    weights: np.ndarray  # (K, V)
    biases: np.ndarray  # (K,)
    C: float = 1.0
    trace: list[dict] = field(default_factory=list)


def fit_mnb(dtm: DocTermMatrix, labels: np.ndarray, classes: list[int], alpha: float = 1.0) -> MnbModel:
    """Fit smoothed per-class token distributions with uniform priors.

    theta[c, w] = (count of w in class c + alpha) / (tokens in class c + alpha*V).
    An empty class is fine: smoothing leaves it at the uniform distribution.
    """
    if len(dtm) == 0:
        raise EmptyCorpus("cannot fit on an empty document-term matrix")
    if len(dtm.rows) != len(labels):
        raise ValueError("document count does not match label count")
    k = len(classes)
    v = dtm.cols
    counts = np.zeros((k, v), dtype=np.float64)
    for row, label in zip(dtm.rows, labels):
        for idx, cnt in row:
            counts[label, idx - 1] += cnt
    totals = counts.sum(axis=1, keepdims=True)
    log_likelihood = np.log(counts + alpha) - np.log(totals + alpha * v)
    log_prior = np.full(k, -math.log(k), dtype=np.float64)
    return MnbModel(classes=list(classes), log_prior=log_prior, log_likelihood=log_likelihood, alpha=alpha)


def mnb_scores(model: MnbModel, bow_row: SparseRow) -> np.ndarray:
    scores = model.log_prior.copy()
    for idx, cnt in bow_row:
        scores += cnt * model.log_likelihood[:, idx - 1]
    return scores


def predict_mnb(model: MnbModel, bow_row: SparseRow) -> tuple[int, np.ndarray]:
    """Highest-scoring class index; ties go to the lowest index."""
    scores = mnb_scores(model, bow_row)
    return int(np.argmax(scores)), scores


def _row_sq_norm(row: SparseRow) -> float:
    return float(sum(v * v for _, v in row))


def fit_binary_svm(
    rows: list[SparseRow],
    y: np.ndarray,
    n_features: int,
    C: float = 1.0,
    tol: float = 1e-4,
    max_iter: int = 1000,
) -> tuple[np.ndarray, float, list[float]]:
    """One binary separator by dual coordinate descent on the squared hinge.

    Minimizes 0.5*(||w||^2 + b^2) + C * sum_i max(0, 1 - y_i (w.x_i + b))^2,
    the bias entering as an augmented constant feature. Samples are visited in
    a fixed order each epoch; the dual objective is recorded per epoch and the
    solver stops once its per-epoch improvement drops below tol. Returns the
    augmented weight vector (bias last), the final primal objective, and the
    per-epoch dual objective trace.
    """
    n = len(rows)
    d_diag = 1.0 / (2.0 * C)
    w = np.zeros(n_features + 1, dtype=np.float64)
    alpha = np.zeros(n, dtype=np.float64)
    # Augmented feature adds 1.0 to every squared row norm.
    q_diag = np.array([_row_sq_norm(r) + 1.0 + d_diag for r in rows], dtype=np.float64)
    bias_idx = n_features

    dual_trace: list[float] = []
    prev_dual = 0.0  # dual objective at alpha = 0
    converged = False
    for _ in range(max_iter):
        for i in range(n):
            row = rows[i]
            yi = float(y[i])
            wx = w[bias_idx]
            for idx, val in row:
                wx += w[idx - 1] * val
            g = yi * wx - 1.0 + alpha[i] * d_diag
            if alpha[i] == 0.0 and g >= 0.0:
                continue
            new_alpha = alpha[i] - g / q_diag[i]
            if new_alpha < 0.0:
                new_alpha = 0.0
            delta = new_alpha - alpha[i]
            if delta != 0.0:
                step = delta * yi
                for idx, val in row:
                    w[idx - 1] += step * val
                w[bias_idx] += step
                alpha[i] = new_alpha
        dual = 0.5 * float(w @ w) + 0.25 / C * float(alpha @ alpha) - float(alpha.sum())
        dual_trace.append(dual)
        if prev_dual - dual < tol:
            converged = True
            break
        prev_dual = dual

    primal = svm_objective(w[:n_features], float(w[bias_idx]), rows, y, C)
    if not converged:
        warnings.warn(
            f"SVM subproblem hit max_iter={max_iter} (objective {primal:.6g})",
            RuntimeWarning,
            stacklevel=2,
        )
    return w, primal, dual_trace


def svm_objective(weights: np.ndarray, bias: float, rows: list[SparseRow], y: np.ndarray, C: float) -> float:
    """Primal squared-hinge objective with the bias regularized as a feature."""
    total = 0.5 * (float(weights @ weights) + bias * bias)
    for row, yi in zip(rows, y):
        margin = bias
        for idx, val in row:
            margin += weights[idx - 1] * val
        slack = 1.0 - float(yi) * margin
        if slack > 0.0:
            total += C * slack * slack
    return total


def fit_svm(
    dtm: DocTermMatrix,
    labels: np.ndarray,
    classes: list[int],
    C: float = 1.0,
    tol: float = 1e-4,
    max_iter: int = 1000,
) -> SvmModel:
    """One-vs-rest squared-hinge SVM over the sparse count matrix."""
    if len(dtm) == 0:
        raise EmptyCorpus("cannot fit on an empty document-term matrix")
    if len(dtm.rows) != len(labels):
        raise ValueError("document count does not match label count")
    k = len(classes)
    v = dtm.cols
    weights = np.zeros((k, v), dtype=np.float64)
    biases = np.zeros(k, dtype=np.float64)
    trace = []
    for c in range(k):
        y = np.where(labels == c, 1.0, -1.0)
        w_aug, primal, dual_trace = fit_binary_svm(dtm.rows, y, v, C=C, tol=tol, max_iter=max_iter)
        weights[c] = w_aug[:v]
        biases[c] = w_aug[v]
        trace.append({"class": classes[c], "epochs": len(dual_trace), "objective": primal})
    return SvmModel(classes=list(classes), weights=weights, biases=biases, C=C, trace=trace)


def svm_scores(model: SvmModel, bow_row: SparseRow) -> np.ndarray:
    scores = model.biases.copy()
    for idx, cnt in bow_row:
        scores += cnt * model.weights[:, idx - 1]
    return scores


def predict_svm(model: SvmModel, bow_row: SparseRow) -> tuple[int, np.ndarray]:
    """Class with the highest decision value; ties go to the lowest index."""
    scores = svm_scores(model, bow_row)
    return int(np.argmax(scores)), scores


def save_model(model: MnbModel | SvmModel, path: str | Path, extra: dict | None = None) -> None:
    """Write a model as JSON with row-major float arrays."""
    if isinstance(model, MnbModel):
        payload = {
            "type": "mnb",
            "classes": model.classes,
            "params": {
                "log_prior": model.log_prior.tolist(),
                "log_likelihood": model.log_likelihood.tolist(),
            },
            "hyperparams": {"alpha": model.alpha},
        }
    else:
        payload = {
            "type": "svm",
            "classes": model.classes,
            "params": {
                "weights": model.weights.tolist(),
                "biases": model.biases.tolist(),
            },
            "hyperparams": {"C": model.C},
        }
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> MnbModel | SvmModel:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data["type"] == "mnb":
        return MnbModel(
            classes=list(data["classes"]),
            log_prior=np.array(data["params"]["log_prior"], dtype=np.float64),
            log_likelihood=np.array(data["params"]["log_likelihood"], dtype=np.float64),
            alpha=data["hyperparams"]["alpha"],
        )
    if data["type"] == "svm":
        return SvmModel(
            classes=list(data["classes"]),
            weights=np.array(data["params"]["weights"], dtype=np.float64),
            biases=np.array(data["params"]["biases"], dtype=np.float64),
            C=data["hyperparams"]["C"],
        )
    raise ValueError(f"unknown model type {data['type']!r} in {path}")

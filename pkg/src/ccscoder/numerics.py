"""Shared numeric substrate: seeded RNG, softmax, cross-entropy, Adam, matrix ops.

Everything runs in 64-bit floats on the single-threaded numpy reference path,
so results are reproducible bit-for-bit for a fixed seed on a given machine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, NonFiniteInput, ShapeMismatch

CROSS_ENTROPY_CLIP = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator on the Philox 4x64 counter-based algorithm.

    Philox is a documented, portable algorithm: two generators built from the
    same seed produce identical streams.
    """
    return np.random.Generator(np.random.Philox(seed))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Probability vector(s) from logits, computed with max-subtraction.

    Works on a 1-d vector or row-wise on a 2-d array. Raises NonFiniteInput
    when any entry is NaN or infinite.
    """
    x = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("softmax input contains non-finite values")
    shifted = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(probs: np.ndarray, target_index: int) -> float:
    """Negative log-likelihood of the target class, clipped at 1e-12."""
    p = np.asarray(probs, dtype=np.float64)
    if target_index < 0 or target_index >= p.shape[-1]:
        raise IndexOutOfRange(f"target index {target_index} outside [0, {p.shape[-1]})")
    return float(-np.log(max(float(p[target_index]), CROSS_ENTROPY_CLIP)))


@dataclass
class AdamState:
    """First/second moment buffers and step counter for a named parameter set."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One Adam update with bias correction, applied in place to `params`.

    Moment buffers are created lazily on the first call; afterwards every
    gradient must match its parameter's shape.
    """
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeMismatch(f"grad shape {g.shape} != param shape {theta.shape} for {name!r}")
        if name not in state.m:
            state.m[name] = np.zeros_like(theta)
            state.v[name] = np.zeros_like(theta)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        m_hat = m / (1.0 - b1**state.t)
        v_hat = v / (1.0 - b2**state.t)
        theta -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params, state


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"cannot add {a.shape} and {b.shape}")
    return a + b


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of same-shape arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"cannot multiply elementwise {a.shape} and {b.shape}")
    return a * b

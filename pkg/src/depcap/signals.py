"""Scalar signal math: KL influence, entropy, smoothing, dependency scores.

Everything here operates on plain probability vectors and is pure. Logs are
natural; probabilities inside logarithms are floored at ``PROB_FLOOR`` (no
renormalization) so that zero-probability predictions yield large-but-finite
scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NonpositiveLambda

PROB_FLOOR = 1e-12

# Degenerate-range windows (max - min below this) normalize to a flat 0.5.
_FLAT_EPS = 1e-12


@dataclass(frozen=True)
class SignalRow:
    """Per-position signals inside one candidate window."""

    influence: float
    entropy: float
    influence_norm: float
    entropy_norm: float
    score: float


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) in nats, with q floored at PROB_FLOOR and 0*log(0/q) = 0."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise LengthMismatch(f"dists of length {p.shape} vs {q.shape}")
    support = p > 0
    ps = p[support]
    qs = np.maximum(q[support], PROB_FLOOR)
    val = float(np.sum(ps * np.log(ps / qs)))
    return max(val, 0.0)


def shannon_entropy(p: np.ndarray) -> float:
    """-sum p log p in nats, with 0*log(0) = 0."""
    p = np.asarray(p, dtype=np.float64)
    ps = p[p > 0]
    return max(float(-np.sum(ps * np.log(ps))), 0.0)


def normalize_and_smooth(values: np.ndarray) -> np.ndarray:
    """Radius-1 moving average (edge replication), then min-max to [0, 1].

    A flat window (range below 1e-12) maps to all 0.5, which with the default
    uncertainty weight makes uninformative windows score negative.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a non-empty 1-D vector")
    padded = np.concatenate([v[:1], v, v[-1:]])
    smoothed = (padded[:-2] + padded[1:-1] + padded[2:]) / 3.0
    lo = smoothed.min()
    span = smoothed.max() - lo
    if span < _FLAT_EPS:
        return np.full(v.shape, 0.5)
    return (smoothed - lo) / span


def dependency_scores(i_norm: np.ndarray, h_norm: np.ndarray, lam: float) -> np.ndarray:
    """Score = normalized influence minus lam * normalized entropy."""
    if lam <= 0:
        raise NonpositiveLambda(f"uncertainty weight must be > 0, got {lam}")
    i_norm = np.asarray(i_norm, dtype=np.float64)
    h_norm = np.asarray(h_norm, dtype=np.float64)
    if i_norm.shape != h_norm.shape:
        raise LengthMismatch(f"signal vectors of length {i_norm.shape} vs {h_norm.shape}")
    return i_norm - lam * h_norm


def confidence_and_argmax(p: np.ndarray) -> tuple[float, int]:
    """Max probability and its token id; ties break to the lowest id."""
    p = np.asarray(p, dtype=np.float64)
    idx = int(np.argmax(p))
    return float(p[idx]), idx

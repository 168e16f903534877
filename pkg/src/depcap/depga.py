"""Dependency-guided adaptive block partitioning (DepGA-Block).

The next block length is read off the per-position dependency score
S_k = norm(influence_k) - lam * norm(entropy_k), where influence is the KL
shift of each future position's predictive dist caused by the last decoded
block. The block ends immediately before the first position whose score
turns negative; the result is clipped to [L_min, window]. The first block
has no pre-block predictions and uses the conservative cold-start length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyWindow, MissingPosition
from .signals import (
    SignalRow,
    dependency_scores,
    kl_divergence,
    normalize_and_smooth,
    shannon_entropy,
)
from .types import BlockSpan


@dataclass(frozen=True)
class PartitionConfig:
    lam: float = 1.2
    L_min: int = 8
    L_max: int = 128

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.L_min < 1:
            raise ValueError(f"L_min must be >= 1, got {self.L_min}")
        if self.L_max < self.L_min:
            raise ValueError(f"L_max ({self.L_max}) must be >= L_min ({self.L_min})")


def last_block_influence(
    p_prev: Mapping[int, np.ndarray],
    p_curr: Mapping[int, np.ndarray],
    window: Sequence[int],
) -> np.ndarray:
    """Influence at each window position: KL(current dist || pre-block dist)."""
    out = np.empty(len(window))
    for idx, pos in enumerate(window):
        if pos not in p_prev or pos not in p_curr:
            raise MissingPosition(f"position {pos} missing from prediction maps")
        out[idx] = kl_divergence(p_curr[pos], p_prev[pos])
    return out


def score_window(
    p_prev: Mapping[int, np.ndarray],
    p_curr: Mapping[int, np.ndarray],
    window: Sequence[int],
    lam: float,
) -> list[SignalRow]:
    """Per-position signal rows over the window, normalized independently."""
    influence = last_block_influence(p_prev, p_curr, window)
    entropy = np.empty(len(window))
    for idx, pos in enumerate(window):
        entropy[idx] = shannon_entropy(p_curr[pos])
    i_norm = normalize_and_smooth(influence)
    h_norm = normalize_and_smooth(entropy)
    scores = dependency_scores(i_norm, h_norm, lam)
    return [
        SignalRow(
            influence=float(influence[k]),
            entropy=float(entropy[k]),
            influence_norm=float(i_norm[k]),
            entropy_norm=float(h_norm[k]),
            score=float(scores[k]),
        )
        for k in range(len(window))
    ]


def partition_frontier(
    p_prev: Optional[Mapping[int, np.ndarray]],
    p_curr: Mapping[int, np.ndarray],
    frontier: int,
    remaining: int,
    cfg: PartitionConfig,
) -> tuple[BlockSpan, Optional[list[SignalRow]]]:
    """Choose the next block and return the signal rows backing the choice."""
    if remaining < 1:
        raise EmptyWindow("no masked positions remain after the frontier")
    if p_prev is None:
        # Cold start: nothing decoded yet, so no influence signal exists.
        return BlockSpan(frontier, min(cfg.L_min, remaining)), None

    window_len = min(cfg.L_max, remaining)
    window = range(frontier, frontier + window_len)
    rows = score_window(p_prev, p_curr, window, cfg.lam)
    scores = np.array([row.score for row in rows])
    negative = np.flatnonzero(scores < 0)
    raw_len = window_len if negative.size == 0 else int(negative[0])
    # Clip floor drops to the remaining length when the tail is shorter than
    # L_min; the sequence must finish.
    length = max(min(cfg.L_min, remaining), min(raw_len, window_len))
    return BlockSpan(frontier, length), rows


def choose_next_block(
    p_prev: Optional[Mapping[int, np.ndarray]],
    p_curr: Mapping[int, np.ndarray],
    frontier: int,
    remaining: int,
    cfg: PartitionConfig,
) -> BlockSpan:
    return partition_frontier(p_prev, p_curr, frontier, remaining, cfg)[0]

"""Conflict-aware parallel decoding (CAP): safe-subset selection in a block.

Candidates are masked block positions with confidence >= tau_low. A pair
conflicts when the symmetric cross log-probability score exceeds gamma.
Selection runs in two phases: all candidates at or above tau_high enter the
safe set first (their conflicts are evicted from the pool), then the pool is
drained greedily by descending confidence, evicting each pick's conflicts.
If nothing survives, the single highest-confidence masked position in the
block is decoded, so the step always makes progress.

High-confidence picks are not filtered against each other; in particular two
positions confidently predicting the same token score near 0 (> gamma) and
count as a conflicting pair, which only matters for phase-2 eviction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Set

import numpy as np

from . import signals
from .errors import EmptyBlock, SamePosition
from .signals import confidence_and_argmax
from .types import BlockSpan


@dataclass(frozen=True)
class SelectConfig:
    tau_low: float = 0.8
    tau_high: float = 0.95
    gamma: float = -16.0

    def __post_init__(self):
        if not 0 < self.tau_low <= 1:
            raise ValueError(f"tau_low must be in (0, 1], got {self.tau_low}")
        if not 0 < self.tau_high <= 1:
            raise ValueError(f"tau_high must be in (0, 1], got {self.tau_high}")
        if self.tau_high < self.tau_low:
            raise ValueError(
                f"tau_high ({self.tau_high}) must be >= tau_low ({self.tau_low})"
            )


@dataclass(frozen=True)
class Candidate:
    pos: int
    conf: float
    pred: int
    dist: np.ndarray

    @classmethod
    def from_dist(cls, pos: int, dist: np.ndarray) -> "Candidate":
        conf, pred = confidence_and_argmax(dist)
        return cls(pos=pos, conf=conf, pred=pred, dist=np.asarray(dist, dtype=np.float64))


def conflict_score(cand_i: Candidate, cand_j: Candidate) -> float:
    """Symmetric cross log-probability: log p_i(y_j) + log p_j(y_i), floored."""
    if cand_i.pos == cand_j.pos:
        raise SamePosition(f"conflict score of position {cand_i.pos} against itself")
    a = np.log(max(float(cand_i.dist[cand_j.pred]), signals.PROB_FLOOR))
    b = np.log(max(float(cand_j.dist[cand_i.pred]), signals.PROB_FLOOR))
    return float(a + b)


def is_conflict(score: float, gamma: float) -> bool:
    """Strict comparison: a score exactly at gamma is safe."""
    return score > gamma


def _conflict_sets(cands: list[Candidate], gamma: float) -> Dict[int, Set[int]]:
    """Pairwise conflict adjacency over the pool (vectorized score matrix)."""
    n = len(cands)
    adjacency: Dict[int, Set[int]] = {c.pos: set() for c in cands}
    if n < 2:
        return adjacency
    dists = np.stack([c.dist for c in cands])
    preds = np.array([c.pred for c in cands])
    cross = np.log(np.maximum(dists[:, preds], signals.PROB_FLOOR))
    score = cross + cross.T
    for i in range(n):
        for j in range(i + 1, n):
            if is_conflict(float(score[i, j]), gamma):
                adjacency[cands[i].pos].add(cands[j].pos)
                adjacency[cands[j].pos].add(cands[i].pos)
    return adjacency


def select_safe_subset(
    block: BlockSpan,
    masked: Iterable[int],
    dists: Mapping[int, np.ndarray],
    cfg: SelectConfig,
) -> Set[int]:
    """Positions safe to decode in parallel this step; never empty."""
    in_block = sorted(p for p in masked if block.contains(p))
    if not in_block:
        raise EmptyBlock(f"no masked positions inside block [{block.start}, {block.stop})")
    cands = {p: Candidate.from_dist(p, dists[p]) for p in in_block}

    pool = [cands[p] for p in in_block if cands[p].conf >= cfg.tau_low]
    conflicts = _conflict_sets(pool, cfg.gamma)

    # Phase 1: high-confidence priority.
    safe = {c.pos for c in pool if c.conf >= cfg.tau_high}
    remaining = [
        c
        for c in pool
        if c.pos not in safe and not (conflicts[c.pos] & safe)
    ]

    # Phase 2: greedy completion by descending confidence, lowest position first.
    remaining.sort(key=lambda c: (-c.conf, c.pos))
    while remaining:
        head = remaining.pop(0)
        safe.add(head.pos)
        remaining = [c for c in remaining if c.pos not in conflicts[head.pos]]

    if not safe:
        best = max(in_block, key=lambda p: (cands[p].conf, -p))
        safe = {best}
    return safe

"""Core domain types and the monotone sequence-update rule.

All probability vectors ("dists") in this package are plain float64 numpy
arrays of length V that sum to 1. All log and entropy quantities are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import CommitToDecodedSlot, MaskTokenCommit

DIST_ATOL = 1e-9


@dataclass(frozen=True)
class Vocabulary:
    """Token id space 0..size-1 plus a reserved mask sentinel.

    The mask id sits outside the real-token range (it equals ``size``), so
    dists never carry mask probability and no selector can ever commit it.
    """

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"vocabulary size must be >= 2, got {self.size}")

    @property
    def mask_id(self) -> int:
        return self.size


def validate_dist(probs: np.ndarray, atol: float = DIST_ATOL) -> np.ndarray:
    """Check non-negativity and normalization; returns the array as float64."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"dist must be 1-D, got shape {p.shape}")
    if np.any(p < 0):
        raise ValueError("dist has a negative entry")
    total = float(p.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"dist sums to {total}, expected 1 within {atol}")
    return p


@dataclass(eq=False)
class SequenceState:
    """Prompt plus partially decoded target; a value type.

    ``target`` holds committed token ids or the vocabulary mask sentinel.
    Committed slots are never overwritten: every update goes through
    :func:`apply_commit`, which returns a fresh state.
    """

    vocab: Vocabulary
    prompt: np.ndarray
    target: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, vocab: Vocabulary, prompt, gen_len: int) -> "SequenceState":
        if gen_len < 1:
            raise ValueError(f"generation length must be >= 1, got {gen_len}")
        prompt_arr = np.asarray(prompt, dtype=np.int64).reshape(-1)
        target = np.full(gen_len, vocab.mask_id, dtype=np.int64)
        return cls(vocab=vocab, prompt=prompt_arr, target=target, t=0)

    @property
    def gen_len(self) -> int:
        return int(self.target.shape[0])

    def masked_positions(self) -> np.ndarray:
        return np.flatnonzero(self.target == self.vocab.mask_id)

    def is_complete(self) -> bool:
        return not np.any(self.target == self.vocab.mask_id)


def apply_commit(state: SequenceState, decisions: Mapping[int, int]) -> SequenceState:
    """Commit tokens at masked positions; returns a new state with t+1.

    An empty decision map is a legal no-progress step (used only internally;
    the engine treats it as a bug at the step level).
    """
    mask_id = state.vocab.mask_id
    new_target = state.target.copy()
    for pos, tok in decisions.items():
        if not 0 <= pos < new_target.shape[0]:
            raise IndexError(f"position {pos} outside target of length {new_target.shape[0]}")
        if new_target[pos] != mask_id:
            raise CommitToDecodedSlot(f"position {pos} already holds token {new_target[pos]}")
        if tok == mask_id:
            raise MaskTokenCommit(f"cannot commit the mask sentinel at position {pos}")
        if not 0 <= tok < state.vocab.size:
            raise ValueError(f"token id {tok} outside vocabulary of size {state.vocab.size}")
        new_target[pos] = tok
    return SequenceState(vocab=state.vocab, prompt=state.prompt, target=new_target, t=state.t + 1)


def frontier(state: SequenceState) -> Optional[int]:
    """Lowest masked index, or None once decoding is complete."""
    masked = state.masked_positions()
    if masked.size == 0:
        return None
    return int(masked[0])


@dataclass(frozen=True)
class BlockSpan:
    """Contiguous half-open span [start, start+length) of target positions."""

    start: int
    length: int

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"block start must be >= 0, got {self.start}")
        if self.length < 1:
            raise ValueError(f"block length must be >= 1, got {self.length}")

    @property
    def stop(self) -> int:
        return self.start + self.length

    def positions(self) -> range:
        return range(self.start, self.stop)

    def contains(self, pos: int) -> bool:
        return self.start <= pos < self.stop


@dataclass
class RunMetrics:
    """Per-run accounting: denoiser passes, commit rounds, quality."""

    nfe: int
    steps: int
    tokens_per_step: list = field(default_factory=list)
    block_lengths: list = field(default_factory=list)
    quality_loglik: float = float("nan")
    agreement_vs_vanilla: float = float("nan")
    wall_ms: float = 0.0

    @property
    def n_blocks(self) -> int:
        return len(self.block_lengths)

    @property
    def mean_tokens_per_step(self) -> float:
        return sum(self.tokens_per_step) / max(self.steps, 1)

    @property
    def mean_block_len(self) -> float:
        return sum(self.block_lengths) / max(self.n_blocks, 1)

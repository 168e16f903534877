"""Denoiser backends: exact HMM oracles and scripted replay fixtures.

The denoiser contract is: given a :class:`~depcap.types.SequenceState`,
return one predictive dist per masked target position, conditioning on the
prompt and every committed token (masked positions marginalized out). Both
backends implement it as ``model.predict(state)``; models are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import EmptyMaskSet, ParseError, StochasticityViolation, ZeroLikelihood
from .types import SequenceState, validate_dist

GAP = -1

_ROW_SUM_TOL = 1e-6


def _check_stochastic(name: str, mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    rows = mat.reshape(-1, mat.shape[-1])
    if np.any(rows < 0):
        raise StochasticityViolation(f"{name} has a negative entry")
    sums = rows.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > _ROW_SUM_TOL)
    if bad.size:
        raise StochasticityViolation(f"{name} row {int(bad[0])} sums to {sums[bad[0]]:.9f}")
    return mat


@dataclass(eq=False)
class HmmModel:
    """K-state hidden chain with V-token emissions; the exact oracle denoiser."""

    pi: np.ndarray
    A: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        self.pi = _check_stochastic("pi", np.atleast_1d(self.pi))
        self.A = _check_stochastic("A", self.A)
        self.E = _check_stochastic("E", self.E)
        K = self.pi.shape[0]
        if self.A.shape != (K, K):
            raise ParseError(f"A must be {K}x{K}, got {self.A.shape}")
        if self.E.ndim != 2 or self.E.shape[0] != K:
            raise ParseError(f"E must have {K} rows, got shape {self.E.shape}")
        if self.E.shape[1] < 2:
            raise ParseError("vocabulary size must be >= 2")

    @property
    def K(self) -> int:
        return int(self.pi.shape[0])

    @property
    def V(self) -> int:
        return int(self.E.shape[1])

    def predict(self, state: SequenceState) -> Dict[int, np.ndarray]:
        """Posterior token dists at masked target positions given all observed tokens."""
        masked = state.masked_positions()
        if masked.size == 0:
            raise EmptyMaskSet("state has no masked positions")
        obs = np.concatenate([state.prompt, state.target]).astype(np.int64)
        obs[len(state.prompt) + masked] = GAP
        token_post = self._token_posteriors(obs)
        offset = len(state.prompt)
        return {int(i): token_post[offset + i] for i in masked}

    def _token_posteriors(self, obs: np.ndarray) -> np.ndarray:
        gamma, loglik = kernels.forward_backward(self.pi, self.A, self.E, obs)
        if loglik == -np.inf:
            raise ZeroLikelihood("observed sequence has probability 0 under the model")
        post = gamma @ self.E
        post /= post.sum(axis=1, keepdims=True)
        return post

    def log_likelihood(self, observed: Sequence[Optional[int]]) -> float:
        """log P of the observed (possibly gapped) sequence, in nats."""
        obs = encode_observations(observed)
        ll = kernels.forward_loglik(self.pi, self.A, self.E, obs)
        if ll == -np.inf:
            raise ZeroLikelihood("observed sequence has probability 0 under the model")
        return float(ll)

    def conditional_log_likelihood(self, prompt, target) -> float:
        """log P(target | prompt): joint forward pass minus prompt-only pass."""
        prompt = np.asarray(prompt, dtype=np.int64).reshape(-1)
        target = np.asarray(target, dtype=np.int64).reshape(-1)
        full = self.log_likelihood(np.concatenate([prompt, target]))
        if prompt.size == 0:
            return full
        return full - self.log_likelihood(prompt)


def encode_observations(observed: Sequence[Optional[int]]) -> np.ndarray:
    """Encode a gapped sequence as int64 with -1 at gaps (None or -1 in)."""
    out = np.empty(len(observed), dtype=np.int64)
    for i, tok in enumerate(observed):
        out[i] = GAP if tok is None else int(tok)
    return out


def hmm_posterior_marginals(
    model: HmmModel, observed: Sequence[Optional[int]]
) -> Dict[int, np.ndarray]:
    """P(token at each gap | all observed tokens), by scaled forward-backward."""
    obs = encode_observations(observed)
    if obs.shape[0] < 1:
        raise ValueError("observed sequence must have length >= 1")
    token_post = model._token_posteriors(obs)
    return {int(i): token_post[i] for i in np.flatnonzero(obs == GAP)}


def sample_reference_sequence(model: HmmModel, length: int, seed: int) -> np.ndarray:
    """Draw one token sequence from the HMM joint; deterministic given seed."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    states = np.empty(length, dtype=np.int64)
    states[0] = rng.choice(model.K, p=model.pi)
    for t in range(1, length):
        states[t] = rng.choice(model.K, p=model.A[states[t - 1]])
    tokens = np.empty(length, dtype=np.int64)
    for t in range(length):
        tokens[t] = rng.choice(model.V, p=model.E[states[t]])
    return tokens


def stationary_distribution(model: HmmModel) -> np.ndarray:
    """Stationary state distribution of the transition matrix (power iteration)."""
    d = np.full(model.K, 1.0 / model.K)
    for _ in range(10_000):
        nxt = d @ model.A
        if np.max(np.abs(nxt - d)) < 1e-13:
            return nxt
        d = nxt
    return d


def random_hmm(K: int, V: int, seed: int, concentration: float = 1.0) -> HmmModel:
    """Seeded random model with symmetric-Dirichlet rows.

    Concentration 1.0 gives uniform draws over the simplex; small values give
    near-deterministic rows (confident denoisers).
    """
    if K < 1 or V < 2:
        raise ValueError(f"need K >= 1 and V >= 2, got K={K}, V={V}")
    if concentration <= 0:
        raise ValueError(f"concentration must be > 0, got {concentration}")
    rng = np.random.default_rng(seed)
    pi = rng.dirichlet(np.full(K, concentration))
    A = rng.dirichlet(np.full(K, concentration), size=K)
    E = rng.dirichlet(np.full(V, concentration), size=K)
    return HmmModel(pi=pi, A=A, E=E)


def load_hmm(path) -> HmmModel:
    """Load and validate an HMM model file (JSON: K, V, pi, A, E)."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse HMM file {path}: {exc}") from exc
    try:
        K, V = int(raw["K"]), int(raw["V"])
        pi = np.asarray(raw["pi"], dtype=np.float64)
        A = np.asarray(raw["A"], dtype=np.float64)
        E = np.asarray(raw["E"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"HMM file {path} missing or malformed field: {exc}") from exc
    if pi.shape != (K,) or A.shape != (K, K) or E.shape != (K, V):
        raise ParseError(
            f"HMM file {path} shape mismatch: K={K}, V={V}, "
            f"pi{pi.shape}, A{A.shape}, E{E.shape}"
        )
    return HmmModel(pi=pi, A=A, E=E)


def save_hmm(model: HmmModel, path) -> None:
    payload = {
        "K": model.K,
        "V": model.V,
        "pi": model.pi.tolist(),
        "A": model.A.tolist(),
        "E": model.E.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


@dataclass(eq=False)
class ScriptedModel:
    """Deterministic replay fixture: (step, position) -> dist, with a default."""

    V: int
    default: np.ndarray
    script: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.default = validate_dist(self.default)
        if self.default.shape[0] != self.V:
            raise ValueError("default dist length does not match V")
        checked = {}
        for key, probs in self.script.items():
            p = validate_dist(probs)
            if p.shape[0] != self.V:
                raise ValueError(f"scripted dist at {key} has wrong length")
            checked[(int(key[0]), int(key[1]))] = p
        self.script = checked

    def predict(self, state: SequenceState) -> Dict[int, np.ndarray]:
        masked = state.masked_positions()
        if masked.size == 0:
            raise EmptyMaskSet("state has no masked positions")
        return {int(i): self.script.get((state.t, int(i)), self.default) for i in masked}


def load_scripted(path) -> ScriptedModel:
    """Load a scripted model file (JSON: default_probs plus step/pos/probs records)."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        default = np.asarray(raw["default_probs"], dtype=np.float64)
        script = {
            (int(rec["step"]), int(rec["pos"])): np.asarray(rec["probs"], dtype=np.float64)
            for rec in raw.get("records", [])
        }
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"cannot parse scripted model file {path}: {exc}") from exc
    return ScriptedModel(V=default.shape[0], default=default, script=script)

"""Hidden-chain smoothing kernels: the hot inner loops of every denoiser pass.

Two interchangeable implementations are provided:

* a numba ``@njit`` version (default whenever numba imports), and
* a pure-numpy version, forced by setting ``DEPCAP_PURE_NUMPY=1``.

Both compute the scaled (per-position renormalized) forward-backward
recursion over a K-state chain with observation gaps; log-likelihood is
accumulated as the sum of log normalizers, so sequences up to several
hundred positions stay far from underflow. Gap positions contribute an
all-ones emission likelihood, which keeps a single code path and exact
conditional semantics.

Observation encoding: int64 array, token id >= 0 observed, -1 = gap.
A zero-probability observation sequence is signalled by loglik == -inf.
"""

from __future__ import annotations

import os

import numpy as np

PURE_NUMPY_ENV = "DEPCAP_PURE_NUMPY"


def _emission_column(E: np.ndarray, obs_t: int) -> np.ndarray:
    if obs_t < 0:
        return np.ones(E.shape[0])
    return E[:, obs_t]


def forward_loglik_numpy(pi: np.ndarray, A: np.ndarray, E: np.ndarray, obs: np.ndarray):
    """Scaled forward pass; returns log P(observed positions)."""
    T = obs.shape[0]
    if T == 0:
        return 0.0
    alpha = pi * _emission_column(E, obs[0])
    total = alpha.sum()
    if total <= 0.0:
        return -np.inf
    alpha /= total
    loglik = np.log(total)
    for t in range(1, T):
        alpha = (alpha @ A) * _emission_column(E, obs[t])
        total = alpha.sum()
        if total <= 0.0:
            return -np.inf
        alpha /= total
        loglik += np.log(total)
    return float(loglik)


def forward_backward_numpy(pi: np.ndarray, A: np.ndarray, E: np.ndarray, obs: np.ndarray):
    """Scaled forward-backward; returns (state posteriors (T,K), loglik)."""
    T = obs.shape[0]
    K = pi.shape[0]
    alpha = np.zeros((T, K))
    scale = np.zeros(T)

    alpha[0] = pi * _emission_column(E, obs[0])
    scale[0] = alpha[0].sum()
    if scale[0] <= 0.0:
        return np.zeros((T, K)), -np.inf
    alpha[0] /= scale[0]
    for t in range(1, T):
        alpha[t] = (alpha[t - 1] @ A) * _emission_column(E, obs[t])
        scale[t] = alpha[t].sum()
        if scale[t] <= 0.0:
            return np.zeros((T, K)), -np.inf
        alpha[t] /= scale[t]
    loglik = float(np.log(scale).sum())

    gamma = np.zeros((T, K))
    beta = np.ones(K)
    gamma[T - 1] = alpha[T - 1]
    gamma[T - 1] /= gamma[T - 1].sum()
    for t in range(T - 2, -1, -1):
        beta = (A @ (_emission_column(E, obs[t + 1]) * beta)) / scale[t + 1]
        gamma[t] = alpha[t] * beta
        gamma[t] /= gamma[t].sum()
    return gamma, loglik


try:
    from numba import njit

    @njit(cache=True)
    def forward_loglik_numba(pi, A, E, obs):  # pragma: no cover - exercised via dispatch
        T = obs.shape[0]
        K = pi.shape[0]
        if T == 0:
            return 0.0
        alpha = np.empty(K)
        nxt = np.empty(K)
        for k in range(K):
            e = 1.0 if obs[0] < 0 else E[k, obs[0]]
            alpha[k] = pi[k] * e
        total = 0.0
        for k in range(K):
            total += alpha[k]
        if total <= 0.0:
            return -np.inf
        for k in range(K):
            alpha[k] /= total
        loglik = np.log(total)
        for t in range(1, T):
            for k in range(K):
                acc = 0.0
                for j in range(K):
                    acc += alpha[j] * A[j, k]
                e = 1.0 if obs[t] < 0 else E[k, obs[t]]
                nxt[k] = acc * e
            total = 0.0
            for k in range(K):
                total += nxt[k]
            if total <= 0.0:
                return -np.inf
            for k in range(K):
                alpha[k] = nxt[k] / total
            loglik += np.log(total)
        return loglik

    @njit(cache=True)
    def forward_backward_numba(pi, A, E, obs):  # pragma: no cover - exercised via dispatch
        T = obs.shape[0]
        K = pi.shape[0]
        alpha = np.zeros((T, K))
        scale = np.zeros(T)
        gamma = np.zeros((T, K))

        for k in range(K):
            e = 1.0 if obs[0] < 0 else E[k, obs[0]]
            alpha[0, k] = pi[k] * e
        total = 0.0
        for k in range(K):
            total += alpha[0, k]
        if total <= 0.0:
            return gamma, -np.inf
        for k in range(K):
            alpha[0, k] /= total
        scale[0] = total
        for t in range(1, T):
            for k in range(K):
                acc = 0.0
                for j in range(K):
                    acc += alpha[t - 1, j] * A[j, k]
                e = 1.0 if obs[t] < 0 else E[k, obs[t]]
                alpha[t, k] = acc * e
            total = 0.0
            for k in range(K):
                total += alpha[t, k]
            if total <= 0.0:
                return gamma, -np.inf
            for k in range(K):
                alpha[t, k] /= total
            scale[t] = total
        loglik = 0.0
        for t in range(T):
            loglik += np.log(scale[t])

        beta = np.ones(K)
        nxt = np.empty(K)
        total = 0.0
        for k in range(K):
            gamma[T - 1, k] = alpha[T - 1, k]
            total += gamma[T - 1, k]
        for k in range(K):
            gamma[T - 1, k] /= total
        for t in range(T - 2, -1, -1):
            for j in range(K):
                acc = 0.0
                for k in range(K):
                    e = 1.0 if obs[t + 1] < 0 else E[k, obs[t + 1]]
                    acc += A[j, k] * e * beta[k]
                nxt[j] = acc / scale[t + 1]
            total = 0.0
            for k in range(K):
                beta[k] = nxt[k]
                gamma[t, k] = alpha[t, k] * beta[k]
                total += gamma[t, k]
            for k in range(K):
                gamma[t, k] /= total
        return gamma, loglik

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    forward_loglik_numba = None
    forward_backward_numba = None
    HAVE_NUMBA = False


def _pure_numpy_requested() -> bool:
    return os.environ.get(PURE_NUMPY_ENV, "").strip() not in ("", "0")


if HAVE_NUMBA and not _pure_numpy_requested():
    BACKEND = "numba"
    forward_backward = forward_backward_numba
    forward_loglik = forward_loglik_numba
else:
    BACKEND = "numpy"
    forward_backward = forward_backward_numpy
    forward_loglik = forward_loglik_numpy

"""Numba kernels for the log-space dynamic-programming recursions.

These are the hot loops of both likelihood evaluation and its gradient
(forward, backward, posterior accumulation) and of Viterbi decoding.  All
recursions stay in log space with inline log-sum-exp; -inf entries (zero
probabilities) propagate correctly.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def forward_log(log_s, log_a, log_b):
    """Log-space forward recursion.

    Parameters: log initial distribution (Z,), log transition matrix (Z, Z),
    log emission densities (T, Z).  Returns (log_alpha (T, Z), loglik).
    """
    t_len, z_len = log_b.shape
    log_alpha = np.empty((t_len, z_len))
    for j in range(z_len):
        log_alpha[0, j] = log_s[j] + log_b[0, j]
    for t in range(1, t_len):
        for j in range(z_len):
            m = -np.inf
            for i in range(z_len):
                v = log_alpha[t - 1, i] + log_a[i, j]
                if v > m:
                    m = v
            if m == -np.inf:
                log_alpha[t, j] = -np.inf
            else:
                acc = 0.0
                for i in range(z_len):
                    acc += np.exp(log_alpha[t - 1, i] + log_a[i, j] - m)
                log_alpha[t, j] = m + np.log(acc) + log_b[t, j]
    m = -np.inf
    for j in range(z_len):
        if log_alpha[t_len - 1, j] > m:
            m = log_alpha[t_len - 1, j]
    if m == -np.inf:
        return log_alpha, -np.inf
    acc = 0.0
    for j in range(z_len):
        acc += np.exp(log_alpha[t_len - 1, j] - m)
    return log_alpha, m + np.log(acc)


@njit(cache=True)
def backward_log(log_a, log_b):
    """Log-space backward recursion; returns log_beta (T, Z) with last row 0."""
    t_len, z_len = log_b.shape
    log_beta = np.empty((t_len, z_len))
    for j in range(z_len):
        log_beta[t_len - 1, j] = 0.0
    for t in range(t_len - 2, -1, -1):
        for i in range(z_len):
            m = -np.inf
            for j in range(z_len):
                v = log_a[i, j] + log_b[t + 1, j] + log_beta[t + 1, j]
                if v > m:
                    m = v
            if m == -np.inf:
                log_beta[t, i] = -np.inf
            else:
                acc = 0.0
                for j in range(z_len):
                    acc += np.exp(log_a[i, j] + log_b[t + 1, j] + log_beta[t + 1, j] - m)
                log_beta[t, i] = m + np.log(acc)
    return log_beta


@njit(cache=True)
def smoothed_and_pair_counts(log_alpha, log_beta, log_a, log_b, loglik):
    """State posteriors gamma (T, Z) and expected transition counts (Z, Z).

    pair_counts[i, j] = sum over t >= 1 of p(z_{t-1}=i, z_t=j | y), the
    sufficient statistic of the transition matrix in the marginal-likelihood
    gradient.
    """
    t_len, z_len = log_b.shape
    gamma = np.empty((t_len, z_len))
    for t in range(t_len):
        # normalize against the row max, not loglik: immune to underflow of
        # alpha*beta at extreme parameter values
        m = -np.inf
        for j in range(z_len):
            v = log_alpha[t, j] + log_beta[t, j]
            if v > m:
                m = v
        s = 0.0
        for j in range(z_len):
            gamma[t, j] = np.exp(log_alpha[t, j] + log_beta[t, j] - m)
            s += gamma[t, j]
        for j in range(z_len):
            gamma[t, j] /= s
    pair = np.zeros((z_len, z_len))
    for t in range(1, t_len):
        for i in range(z_len):
            for j in range(z_len):
                v = (
                    log_alpha[t - 1, i]
                    + log_a[i, j]
                    + log_b[t, j]
                    + log_beta[t, j]
                    - loglik
                )
                pair[i, j] += np.exp(v)
    return gamma, pair


@njit(cache=True)
def viterbi_log(log_s, log_a, log_b):
    """Max-product recursion with backpointers; ties resolve to the lowest index.

    Returns (path (T,), log_delta (T, Z), backpointers (T, Z)).  Row 0 of the
    backpointer matrix is unused and filled with zeros.
    """
    t_len, z_len = log_b.shape
    log_delta = np.empty((t_len, z_len))
    back = np.zeros((t_len, z_len), dtype=np.int64)
    for j in range(z_len):
        log_delta[0, j] = log_s[j] + log_b[0, j]
    for t in range(1, t_len):
        for j in range(z_len):
            best = -np.inf
            arg = 0
            for i in range(z_len):
                v = log_delta[t - 1, i] + log_a[i, j]
                if v > best:
                    best = v
                    arg = i
            log_delta[t, j] = best + log_b[t, j]
            back[t, j] = arg
    path = np.empty(t_len, dtype=np.int64)
    best = -np.inf
    arg = 0
    for j in range(z_len):
        if log_delta[t_len - 1, j] > best:
            best = log_delta[t_len - 1, j]
            arg = j
    path[t_len - 1] = arg
    for t in range(t_len - 2, -1, -1):
        path[t] = back[t + 1, path[t + 1]]
    return path, log_delta, back

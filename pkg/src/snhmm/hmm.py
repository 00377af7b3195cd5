"""Hidden Markov model core: model container, likelihoods, smoothing, simulation.

States are indexed 0-based everywhere in this package; report/CSV layers add
1 when writing output.  All recursions run in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigurationError
from .mixture import MixtureEmission, sample_mixture

# Transition matrices transcribed from published tables often have row sums
# like 0.9999; rows within this slack of 1 are renormalized, others rejected.
_ROW_SLACK = 1e-2


def _clean_simplex(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ConfigurationError(f"{what} must be finite and >= 0, got {v}")
    total = v.sum()
    if abs(total - 1.0) > _ROW_SLACK:
        raise ConfigurationError(f"{what} sums to {total}, too far from 1")
    return v / total


@dataclass(frozen=True)
class HmmModel:
    """Row-stochastic transition matrix, initial distribution, per-state emissions."""

    transition: np.ndarray
    initial: np.ndarray
    emissions: tuple[MixtureEmission, ...]

    def __post_init__(self) -> None:
        a = np.asarray(self.transition, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigurationError(f"transition must be square, got shape {a.shape}")
        z = a.shape[0]
        if z < 2:
            raise ConfigurationError("need at least 2 states")
        a = np.vstack([_clean_simplex(a[i], f"transition row {i}") for i in range(z)])
        s = _clean_simplex(self.initial, "initial distribution")
        if s.size != z:
            raise ConfigurationError(f"initial has length {s.size}, expected {z}")
        emissions = tuple(self.emissions)
        if len(emissions) != z:
            raise ConfigurationError(f"{len(emissions)} emissions for {z} states")
        object.__setattr__(self, "transition", a)
        object.__setattr__(self, "initial", s)
        object.__setattr__(self, "emissions", emissions)

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    def emission_log_densities(self, values: np.ndarray) -> np.ndarray:
        """Matrix of log p(y_t | z_t = j), shape (T, Z)."""
        from scipy.special import logsumexp

        values = np.asarray(values, dtype=float)
        out = np.empty((values.size, self.n_states))
        for j, e in enumerate(self.emissions):
            with np.errstate(divide="ignore"):
                logs = e.component_log_pdfs(values) + np.log(e.weights)
            out[:, j] = logsumexp(logs, axis=-1)
        return out


@dataclass(frozen=True)
class ObservedSeries:
    """Observation vector with optional per-observation labels (e.g. timestamps)."""

    values: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ConfigurationError("values must be a non-empty 1-d vector")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("all observations must be finite")
        object.__setattr__(self, "values", v)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != v.size:
                raise ConfigurationError("labels length must match values")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SmoothedProbs:
    """gamma[t, k] = p(z_t = k | y_{1:T}); rows on the simplex."""

    gamma: np.ndarray


def _log_params(m: HmmModel, y: ObservedSeries):
    with np.errstate(divide="ignore"):
        log_a = np.log(m.transition)
        log_s = np.log(m.initial)
    return log_s, log_a, m.emission_log_densities(y.values)


def forward_log_likelihood(m: HmmModel, y: ObservedSeries) -> float:
    """log p(y_{1:T}) by the log-space forward recursion."""
    log_s, log_a, log_b = _log_params(m, y)
    _, loglik = _kernels.forward_log(log_s, log_a, log_b)
    return float(loglik)


def forward_backward(m: HmmModel, y: ObservedSeries) -> SmoothedProbs:
    """Smoothed state posteriors from combined forward and backward passes."""
    log_s, log_a, log_b = _log_params(m, y)
    log_alpha, loglik = _kernels.forward_log(log_s, log_a, log_b)
    log_beta = _kernels.backward_log(log_a, log_b)
    gamma, _ = _kernels.smoothed_and_pair_counts(log_alpha, log_beta, log_a, log_b, loglik)
    return SmoothedProbs(gamma=gamma)


def complete_data_log_likelihood(m: HmmModel, y: ObservedSeries, z) -> float:
    """Joint log-probability of the observations and one specific state path.

    A path stepping through a zero-probability transition yields -inf rather
    than raising.
    """
    z = np.asarray(z, dtype=int)
    if z.size != len(y):
        raise ConfigurationError(f"path length {z.size} != series length {len(y)}")
    if np.any(z < 0) or np.any(z >= m.n_states):
        raise ConfigurationError("path entries must be valid 0-based state indices")
    log_s, log_a, log_b = _log_params(m, y)
    total = log_s[z[0]] + log_b[0, z[0]]
    for t in range(1, z.size):
        total += log_a[z[t - 1], z[t]] + log_b[t, z[t]]
    return float(total)


def simulate(
    m: HmmModel, t_len: int, rng: np.random.Generator
) -> tuple[ObservedSeries, np.ndarray, np.ndarray]:
    """Draw a length-T realization; returns (series, state path, component path)."""
    if t_len < 1:
        raise ConfigurationError("need at least one observation")
    states = np.empty(t_len, dtype=int)
    comps = np.empty(t_len, dtype=int)
    values = np.empty(t_len, dtype=float)
    states[0] = rng.choice(m.n_states, p=m.initial)
    for t in range(1, t_len):
        states[t] = rng.choice(m.n_states, p=m.transition[states[t - 1]])
    for t in range(t_len):
        values[t], comps[t] = sample_mixture(m.emissions[states[t]], rng)
    return ObservedSeries(values=values), states, comps


def stationary_distribution(a: np.ndarray) -> np.ndarray:
    """Left eigenvector of the transition matrix for eigenvalue 1, normalized."""
    a = np.asarray(a, dtype=float)
    vals, vecs = np.linalg.eig(a.T)
    idx = int(np.argmin(np.abs(vals - 1.0)))
    pi = np.real(vecs[:, idx])
    pi = np.abs(pi)
    return pi / pi.sum()

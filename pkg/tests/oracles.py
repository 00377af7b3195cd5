"""Independent brute-force oracles used by the tests.

Everything here is deliberately written from the definitions (explicit path
enumeration, direct density sums) rather than reusing the package's
recursions, so agreement is meaningful.
"""

import itertools
import math

import numpy as np

from snhmm.hmm import HmmModel, ObservedSeries
from snhmm.mixture import MixtureEmission, mixture_log_density
from snhmm.skewnormal import SkewNormalParams


def path_log_prob(model: HmmModel, series: ObservedSeries, path) -> float:
    """Complete-data log-likelihood of one path, from the definition."""
    with np.errstate(divide="ignore"):
        total = math.log(model.initial[path[0]]) if model.initial[path[0]] > 0 else -math.inf
    for t in range(1, len(path)):
        a = model.transition[path[t - 1], path[t]]
        total += math.log(a) if a > 0 else -math.inf
    for t, z in enumerate(path):
        total += mixture_log_density(model.emissions[z], float(series.values[t]))
    return total


def enumerate_paths(n_states: int, t_len: int):
    return itertools.product(range(n_states), repeat=t_len)


def brute_force_loglik(model: HmmModel, series: ObservedSeries) -> float:
    """log p(y) = logsumexp over every one of Z^T complete-data paths."""
    logs = [
        path_log_prob(model, series, path)
        for path in enumerate_paths(model.n_states, len(series))
    ]
    m = max(logs)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in logs))


def brute_force_smoothed(model: HmmModel, series: ObservedSeries) -> np.ndarray:
    """Posterior state marginals gamma[t, k] by path enumeration."""
    t_len, z = len(series), model.n_states
    gamma = np.zeros((t_len, z))
    logs = []
    paths = list(enumerate_paths(z, t_len))
    for path in paths:
        logs.append(path_log_prob(model, series, path))
    m = max(logs)
    weights = np.exp(np.array(logs) - m)
    weights /= weights.sum()
    for w, path in zip(weights, paths):
        for t, s in enumerate(path):
            gamma[t, s] += w
    return gamma


def brute_force_viterbi(model: HmmModel, series: ObservedSeries) -> np.ndarray:
    """Argmax path; ties keep the first maximizer in lexicographic order."""
    best_path = None
    best = -math.inf
    for path in enumerate_paths(model.n_states, len(series)):
        v = path_log_prob(model, series, path)
        if v > best:
            best = v
            best_path = path
    return np.asarray(best_path, dtype=int)


def random_model(rng, n_states: int, n_components: int) -> HmmModel:
    a = rng.dirichlet(np.ones(n_states) * 2.0, size=n_states)
    s = rng.dirichlet(np.ones(n_states))
    emissions = tuple(
        MixtureEmission(
            weights=rng.dirichlet(np.ones(n_components)),
            components=tuple(
                SkewNormalParams(
                    xi=rng.uniform(-6, 6),
                    omega=rng.uniform(0.3, 3.0),
                    lam=rng.uniform(-4, 4),
                )
                for _ in range(n_components)
            ),
        )
        for _ in range(n_states)
    )
    return HmmModel(transition=a, initial=s, emissions=emissions)


def random_instance(rng, n_states: int, n_components: int, t_len: int):
    model = random_model(rng, n_states, n_components)
    values = rng.uniform(-8, 8, size=t_len)
    return model, ObservedSeries(values=values)

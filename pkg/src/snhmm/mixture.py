"""K-component skew-normal mixture: the state-conditional emission law."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigurationError
from .skewnormal import SkewNormalParams, log_pdf_arr, moments, sample

# Tables in the literature often carry weights that sum to 0.9999; anything
# within this slack of 1 is renormalized on construction, anything further
# off is rejected.
_WEIGHT_SLACK = 1e-2


@dataclass(frozen=True)
class MixtureEmission:
    """Mixture weights on the simplex plus one SkewNormalParams per component."""

    weights: np.ndarray
    components: tuple[SkewNormalParams, ...]

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ConfigurationError("weights must be a non-empty 1-d vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ConfigurationError(f"weights must be finite and >= 0, got {w}")
        total = w.sum()
        if abs(total - 1.0) > _WEIGHT_SLACK:
            raise ConfigurationError(f"weights sum to {total}, too far from 1")
        w = w / total
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != w.size:
            raise ConfigurationError(
                f"{len(self.components)} components but {w.size} weights"
            )

    @property
    def n_components(self) -> int:
        return len(self.components)

    def component_log_pdfs(self, y) -> np.ndarray:
        """Per-component log densities; output shape = shape(y) + (K,)."""
        y = np.asarray(y, dtype=float)
        out = np.empty(y.shape + (self.n_components,))
        for k, c in enumerate(self.components):
            out[..., k] = log_pdf_arr(y, c.xi, c.omega, c.lam)
        return out

    def mean(self) -> float:
        """Weight-averaged analytic mean of the mixture."""
        return float(
            sum(w * moments(c)[0] for w, c in zip(self.weights, self.components))
        )


def mixture_log_density(e: MixtureEmission, y):
    """log sum_k zeta_k g_k(y) via log-sum-exp over component log densities."""
    with np.errstate(divide="ignore"):
        logs = e.component_log_pdfs(y) + np.log(e.weights)
    out = logsumexp(logs, axis=-1)
    return float(out) if out.ndim == 0 else out


def component_responsibilities(e: MixtureEmission, y: float) -> np.ndarray:
    """Posterior component probabilities r_k = zeta_k g_k(y) / sum_j zeta_j g_j(y).

    If every weighted component log-density is -inf (all densities underflow)
    the result falls back to the uniform simplex and a RuntimeWarning is
    emitted.
    """
    with np.errstate(divide="ignore"):
        logs = e.component_log_pdfs(y) + np.log(e.weights)
    m = np.max(logs)
    if not np.isfinite(m):
        import warnings

        warnings.warn(
            "all component densities underflowed; returning uniform "
            "responsibilities",
            RuntimeWarning,
            stacklevel=2,
        )
        return np.full(e.n_components, 1.0 / e.n_components)
    r = np.exp(logs - m)
    return r / r.sum()


def sample_mixture(e: MixtureEmission, rng: np.random.Generator) -> tuple[float, int]:
    """Draw (value, component index): k ~ Categorical(weights), y ~ component k."""
    k = int(rng.choice(e.n_components, p=e.weights))
    return sample(e.components[k], rng), k

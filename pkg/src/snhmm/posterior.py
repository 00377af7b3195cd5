"""Log-posterior of the unconstrained parameter vector and its exact gradient.

The marginal-likelihood gradient uses the identity

    d log p(y) / d eta = E[ d log p(y, z) / d eta | y ],

so one forward-backward pass yields every derivative: smoothed state
probabilities weight the emission-parameter derivatives, expected transition
counts drive the transition block, and the time-1 posterior drives the
initial distribution.  Everything is then chained through the exp/softmax
transforms.  Finite differences are used only as a test oracle, never here.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .priors import PriorConfig, log_prior_and_grad
from .skewnormal import inverse_mills, log_pdf_arr
from .transforms import ParameterSpace


def _emission_terms(values: np.ndarray, xi, omega, lam, zeta):
    """Per-component log densities, state log densities, responsibilities, u.

    Shapes: values (T,), parameter arrays (Z, K).  Returns
    (log_g (T,Z,K), log_b (T,Z), resp (T,Z,K), u (T,Z,K)).
    """
    y = values[:, None, None]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        u = (y - xi) / omega
        log_g = log_pdf_arr(y, xi, omega, lam)
        wl = log_g + np.log(zeta)
        m = wl.max(axis=-1, keepdims=True)
        finite = np.isfinite(m)
        safe_m = np.where(finite, m, 0.0)
        log_b = np.where(
            finite[..., 0],
            (safe_m[..., 0] + np.log(np.exp(wl - safe_m).sum(axis=-1))),
            -np.inf,
        )
        resp = np.where(finite, np.exp(wl - np.where(finite, log_b[..., None], 0.0)), 0.0)
    return log_g, log_b, resp, u


def log_likelihood(theta: np.ndarray, values: np.ndarray, space: ParameterSpace) -> float:
    """Marginal log-likelihood at an unconstrained vector (forward pass only)."""
    xi, omega, lam, a, s, zeta = space.unpack_arrays(theta)
    _, log_b, _, _ = _emission_terms(values, xi, omega, lam, zeta)
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
        log_s = np.log(s)
    _, loglik = _kernels.forward_log(log_s, log_a, log_b)
    return float(loglik)


def log_likelihood_and_grad(
    theta: np.ndarray, values: np.ndarray, space: ParameterSpace
) -> tuple[float, np.ndarray]:
    """Marginal log-likelihood and its gradient in the unconstrained vector."""
    xi, omega, lam, a, s, zeta = space.unpack_arrays(theta)
    _, log_b, resp, u = _emission_terms(values, xi, omega, lam, zeta)
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
        log_s = np.log(s)
    log_alpha, loglik = _kernels.forward_log(log_s, log_a, log_b)
    if not math.isfinite(loglik):
        return -math.inf, np.zeros(space.dim)
    log_beta = _kernels.backward_log(log_a, log_b)
    gamma, pair = _kernels.smoothed_and_pair_counts(
        log_alpha, log_beta, log_a, log_b, loglik
    )

    # emission-parameter derivatives, responsibility- and gamma-weighted;
    # overflow at absurd warmup parameters yields non-finite entries, which
    # the sampler treats as a divergent point
    with np.errstate(over="ignore", invalid="ignore"):
        psi = inverse_mills(lam * u)
        lam_psi = lam * psi
        weight = gamma[:, :, None] * resp
        g_xi = np.einsum("tzk,tzk->zk", weight, (u - lam_psi) / omega)
        g_logw = np.einsum("tzk,tzk->zk", weight, u * u - 1.0 - u * lam_psi)
        g_lam = np.einsum("tzk,tzk->zk", weight, u * psi)

        z, k = space.n_states, space.n_components
        b = space._blocks()
        grad = np.zeros(space.dim)
        grad[b["xi"]] = g_xi.ravel()
        grad[b["log_omega"]] = g_logw.ravel()
        grad[b["lam"]] = g_lam.ravel()

        # transition logits: expected counts against softmax rows (pinned last)
        row_tot = pair.sum(axis=1, keepdims=True)
        grad[b["trans"]] = (pair - a * row_tot)[:, : z - 1].ravel()

    # initial-distribution logits: gamma at t=1 sums to one
    grad[b["init"]] = gamma[0, : z - 1] - s[: z - 1]

    if k > 1:
        occ = weight.sum(axis=0)  # sum_t gamma[t,z] * resp[t,z,k]
        if space.shared_weights:
            tot = occ.sum(axis=0)
            grad[b["weights"]] = tot[: k - 1] - zeta[0, : k - 1] * tot.sum()
        else:
            grad[b["weights"]] = (
                occ[:, : k - 1] - zeta[:, : k - 1] * occ.sum(axis=1, keepdims=True)
            ).ravel()

    return float(loglik), grad


def log_posterior(
    theta: np.ndarray,
    values: np.ndarray,
    space: ParameterSpace,
    cfg: PriorConfig,
    prior_only: bool = False,
) -> float:
    """Unnormalized log posterior (log likelihood + log prior)."""
    lp, _ = log_prior_and_grad(theta, space, cfg)
    if not math.isfinite(lp):
        return -math.inf
    if prior_only:
        return lp
    return lp + log_likelihood(theta, values, space)


def log_posterior_and_grad(
    theta: np.ndarray,
    values: np.ndarray,
    space: ParameterSpace,
    cfg: PriorConfig,
    prior_only: bool = False,
) -> tuple[float, np.ndarray]:
    """Unnormalized log posterior and its gradient (the HMC target)."""
    lp, gp = log_prior_and_grad(theta, space, cfg)
    if not math.isfinite(lp):
        return -math.inf, gp
    if prior_only:
        return lp, gp
    ll, gl = log_likelihood_and_grad(theta, values, space)
    return lp + ll, gp + gl

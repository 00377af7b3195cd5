"""Hamiltonian Monte Carlo: leapfrog integrator, single step, adaptive chain.

The sampler is target-agnostic: it only sees a callable returning the log
target density and its gradient.  The Hamiltonian is H(theta, r) = V(theta)
+ K(r) with V = -log target and kinetic energy K = sum r_i^2 / (2 m_i);
momenta are resampled each step from N(0, m_i) per coordinate, so the mass
vector doubles as the momentum covariance and divides the position update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# A trajectory whose Hamiltonian error exceeds this is treated as divergent
# and rejected outright.
DIVERGENCE_THRESHOLD = 1000.0


@dataclass
class HmcState:
    """Position, momentum and tuning knobs of one sampler instance."""

    theta: np.ndarray
    momentum: np.ndarray
    mass: np.ndarray
    step_size: float
    n_steps: int

    def __post_init__(self) -> None:
        if np.any(self.mass <= 0) or self.step_size <= 0 or self.n_steps < 1:
            raise ValueError("mass entries and step size must be positive, steps >= 1")


def leapfrog(theta, r, grad0, eps, n_steps, mass, grad_fn):
    """n_steps iterations of half-kick / drift / half-kick.

    ``grad0`` is the gradient of the log target at ``theta`` (so the caller's
    evaluation is reused; the gradient of V is its negation).  Returns
    (theta, r, grad, ok) where ok=False flags a non-finite gradient or
    position encountered along the trajectory.
    """
    theta = theta.copy()
    r = r.copy()
    g = grad0
    for _ in range(n_steps):
        r = r + 0.5 * eps * g
        theta = theta + eps * r / mass
        if not np.all(np.isfinite(theta)):
            return theta, r, g, False
        g = grad_fn(theta)
        if not np.all(np.isfinite(g)):
            return theta, r, g, False
        r = r + 0.5 * eps * g
    return theta, r, g, True


def hmc_step(theta, value, grad, value_and_grad, rng, eps, n_steps, mass):
    """One momentum-resample + trajectory + accept/reject cycle.

    ``value``/``grad`` are the cached log target and gradient at ``theta``.
    Returns (theta, value, grad, accepted, accept_prob, delta_h, divergent);
    the first three are the new cached state (unchanged on rejection).
    """
    r0 = rng.standard_normal(theta.size) * np.sqrt(mass)
    h0 = -value + 0.5 * float(np.sum(r0 * r0 / mass))
    theta1, r1, g1, ok = leapfrog(theta, r0, grad, eps, n_steps, mass, lambda q: value_and_grad(q)[1])
    if not ok:
        return theta, value, grad, False, 0.0, math.inf, True
    v1, g1 = value_and_grad(theta1)
    h1 = -v1 + 0.5 * float(np.sum(r1 * r1 / mass))
    delta_h = h1 - h0
    if not math.isfinite(delta_h) or abs(delta_h) > DIVERGENCE_THRESHOLD:
        return theta, value, grad, False, 0.0, delta_h, True
    accept_prob = min(1.0, math.exp(-delta_h))
    if rng.uniform() < accept_prob:
        return theta1, v1, g1, True, accept_prob, delta_h, False
    return theta, value, grad, False, accept_prob, delta_h, False


class _DualAveraging:
    """Step-size adaptation by Nesterov dual averaging toward a target accept rate."""

    def __init__(self, eps0: float, target: float, gamma=0.05, t0=10.0, kappa=0.75):
        self.mu = math.log(10.0 * eps0)
        self.target = target
        self.gamma = gamma
        self.t0 = t0
        self.kappa = kappa
        self.log_eps = math.log(eps0)
        self.log_eps_bar = math.log(eps0)
        self.h_bar = 0.0
        self.count = 0

    def update(self, accept_prob: float) -> float:
        self.count += 1
        frac = 1.0 / (self.count + self.t0)
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (self.target - accept_prob)
        self.log_eps = self.mu - math.sqrt(self.count) / self.gamma * self.h_bar
        eta = self.count ** (-self.kappa)
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar
        return math.exp(self.log_eps)

    @property
    def adapted(self) -> float:
        return math.exp(self.log_eps_bar)


def sample_chain(
    value_and_grad,
    theta0: np.ndarray,
    rng: np.random.Generator,
    warmup: int,
    iters: int,
    n_steps: int = 20,
    target_accept: float = 0.8,
    eps0: float = 0.1,
):
    """Warmup (step-size + diagonal-mass adaptation) then a sampling phase.

    Warmup schedule: dual averaging on the step size throughout; draws from
    the second half of warmup (up to 90%) estimate per-coordinate posterior
    variances, the mass is set to their inverse, and the final 10% re-adapts
    the step size under the new metric.

    Returns a dict with the unconstrained draws (iters, dim) and diagnostics.
    """
    dim = theta0.size
    theta = np.asarray(theta0, dtype=float).copy()
    value, grad = value_and_grad(theta)
    if not math.isfinite(value):
        raise ValueError("initial point has zero posterior density")
    mass = np.ones(dim)
    eps = eps0
    adapt = _DualAveraging(eps0, target_accept)

    window_lo = warmup // 2
    window_hi = int(0.9 * warmup)
    collect_mass = window_hi - window_lo >= 10
    window: list[np.ndarray] = []

    divergences = 0
    for i in range(warmup):
        theta, value, grad, _, accept_prob, _, divergent = hmc_step(
            theta, value, grad, value_and_grad, rng, eps, n_steps, mass
        )
        eps = adapt.update(accept_prob if not divergent else 0.0)
        if collect_mass and window_lo <= i < window_hi:
            window.append(theta.copy())
        if collect_mass and i == window_hi - 1:
            draws = np.asarray(window)
            n = draws.shape[0]
            var = draws.var(axis=0, ddof=1)
            var = n / (n + 5.0) * var + 5.0 / (n + 5.0) * 1e-3
            mass = 1.0 / var
            eps = adapt.adapted
            adapt = _DualAveraging(eps, target_accept)

    eps = adapt.adapted if warmup > 0 else eps0
    out = np.empty((iters, dim))
    accepted = 0
    for i in range(iters):
        theta, value, grad, acc, _, _, divergent = hmc_step(
            theta, value, grad, value_and_grad, rng, eps, n_steps, mass
        )
        accepted += acc
        divergences += divergent
        out[i] = theta
    return {
        "draws": out,
        "accept_rate": accepted / max(iters, 1),
        "divergences": divergences,
        "step_size": eps,
        "mass": mass,
    }

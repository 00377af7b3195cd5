"""Posterior sampling for the full model: chain runner, relabeling, summaries.

Chains are independent: each gets its own generator spawned from the master
seed, so results are identical whether chains run sequentially or in a
process pool, and a fixed seed reproduces draws bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError, FittingError
from .hmc import sample_chain
from .hmm import HmmModel, ObservedSeries
from .posterior import log_posterior_and_grad
from .priors import PriorConfig
from .skewnormal import _SQRT_2_OVER_PI
from .transforms import ParameterSpace


@dataclass(frozen=True)
class RunConfig:
    """Sampler settings for one fit.

    ``init_refine`` climbs from the quantile starting point to a nearby
    posterior mode (L-BFGS on the exact gradient) before jittering per chain;
    without it, chains routinely stall in far-apart local modes of the
    mixture posterior.
    """

    chains: int = 4
    warmup: int = 500
    iters: int = 500
    seed: int = 0
    leapfrog_steps: int = 20
    target_accept: float = 0.8
    prior_only: bool = False
    init_refine: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.chains < 1 or self.warmup < 0 or self.iters < 1:
            raise ConfigurationError("need chains >= 1, warmup >= 0, iters >= 1")
        if self.leapfrog_steps < 1 or not (0 < self.target_accept < 1):
            raise ConfigurationError("invalid leapfrog/target-accept settings")

    def to_dict(self) -> dict:
        return {
            "chains": self.chains,
            "warmup": self.warmup,
            "iters": self.iters,
            "seed": self.seed,
            "leapfrog_steps": self.leapfrog_steps,
            "target_accept": self.target_accept,
            "prior_only": self.prior_only,
            "init_refine": self.init_refine,
        }

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        known = {k: d[k] for k in (
            "chains", "warmup", "iters", "seed", "leapfrog_steps",
            "target_accept", "prior_only", "init_refine", "workers",
        ) if k in d}
        return RunConfig(**known)


@dataclass
class PosteriorDraws:
    """Constrained-scale draws (chains, iters, constrained_dim) plus diagnostics."""

    space: ParameterSpace
    draws: np.ndarray
    names: list[str]
    accept_rate: np.ndarray
    divergences: np.ndarray
    step_size: np.ndarray
    seed: int

    @property
    def flat(self) -> np.ndarray:
        """Draws pooled across chains, shape (chains * iters, constrained_dim)."""
        return self.draws.reshape(-1, self.draws.shape[-1])

    def model_at(self, chain: int, iteration: int) -> HmmModel:
        return self.space.model_from_constrained(self.draws[chain, iteration])


def initial_theta(
    space: ParameterSpace, values: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Chain starting point: location params from data quantiles with jitter,
    log scales from the data sd with jitter, mild noise everywhere else."""
    z, k = space.n_states, space.n_components
    sd = float(np.std(values))
    sd = sd if sd > 0 else 1.0
    levels = (np.arange(z * k) + 1.0) / (z * k + 1.0)
    xi = np.quantile(values, levels) + 0.1 * sd * rng.standard_normal(z * k)
    log_omega = math.log(sd) + 0.2 * rng.standard_normal(z * k)
    lam = 0.5 * rng.standard_normal(z * k)
    logits = 0.2 * rng.standard_normal(z * (z - 1) + (z - 1) + space.n_weight_logits)
    return np.concatenate([xi, log_omega, lam, logits])


def pooled_theta(
    space: ParameterSpace, values: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Alternative starting point with every component near the pooled data
    location/scale; from here refinement can reach modes where few states
    carry the data (quantile spreading forces all states onto it)."""
    z, k = space.n_states, space.n_components
    sd = float(np.std(values))
    sd = sd if sd > 0 else 1.0
    med = float(np.median(values))
    xi = med + 0.05 * sd * rng.standard_normal(z * k)
    log_omega = math.log(sd) + 0.1 * rng.standard_normal(z * k)
    lam = 0.1 * rng.standard_normal(z * k)
    logits = 0.1 * rng.standard_normal(z * (z - 1) + (z - 1) + space.n_weight_logits)
    return np.concatenate([xi, log_omega, lam, logits])


def cluster_theta(
    space: ParameterSpace, values: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Starting point from a 1-d Lloyd clustering of the observations.

    Unlike equal-mass quantile blocks, this respects unequal state
    occupancies, so each state starts on its own cluster of the data.
    """
    z, k = space.n_states, space.n_components
    centers = np.quantile(values, (np.arange(z) + 0.5) / z)
    for _ in range(25):
        labels = np.argmin(np.abs(values[:, None] - centers[None, :]), axis=1)
        for j in range(z):
            members = values[labels == j]
            if members.size:
                centers[j] = members.mean()
    order = np.argsort(centers)
    centers = centers[order]
    labels = np.argmin(np.abs(values[:, None] - centers[None, :]), axis=1)
    global_sd = float(np.std(values)) or 1.0
    xi = np.empty((z, k))
    log_omega = np.empty((z, k))
    for rank, j in enumerate(order):
        members = np.sort(values[labels == j])
        if members.size >= 2 * k:
            levels = (np.arange(k) + 1.0) / (k + 1.0)
            xi[rank] = np.quantile(members, levels)
            csd = float(members.std()) or global_sd
        else:
            xi[rank] = centers[rank]
            csd = global_sd
        log_omega[rank] = math.log(csd)
    xi = xi.ravel() + 0.05 * global_sd * rng.standard_normal(z * k)
    log_omega = log_omega.ravel() + 0.1 * rng.standard_normal(z * k)
    lam = 0.3 * rng.standard_normal(z * k)
    logits = 0.1 * rng.standard_normal(z * (z - 1) + (z - 1) + space.n_weight_logits)
    return np.concatenate([xi, log_omega, lam, logits])


def _laplace_log_mass(theta, value, target, dim):
    """Gaussian (Laplace) approximation of the log posterior mass around a mode.

    Modes of mixture posteriors often tie in height while differing in basin
    width; the 0.5*log det term is what separates them.  Returns -inf when
    the negated Hessian is not positive definite (plateau or saddle).
    """
    h = 1e-4
    hess = np.empty((dim, dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        hess[:, i] = (target(theta + e)[1] - target(theta - e)[1]) / (2 * h)
    hess = 0.5 * (hess + hess.T)
    sign, logdet = np.linalg.slogdet(-hess + 1e-8 * np.eye(dim))
    if sign <= 0:
        return -math.inf
    return value + 0.5 * (dim * math.log(2.0 * math.pi) - logdet)


# Modes whose heights differ by less than this are treated as tied and
# compared by Laplace mass instead.
_MODE_TIE_NATS = 3.0


def _refine_start(theta0, values, space, rng, target):
    """Multistart L-BFGS to a posterior mode.

    Starts: the quantile spread, a pooled start, a 1-d-cluster start, and
    skew-randomized variants.  A decisively higher mode wins on height;
    near-ties (competing component-to-state coverings routinely land within
    a nat of each other) are resolved by approximate basin mass.
    """
    starts = [
        theta0,
        pooled_theta(space, values, rng),
        cluster_theta(space, values, rng),
    ]
    lam_sl = space._blocks()["lam"]
    for base in (initial_theta, cluster_theta):
        extra = base(space, values, rng)
        extra[lam_sl] = rng.normal(0.0, 1.5, lam_sl.stop - lam_sl.start)
        starts.append(extra)
    candidates = []
    for start in starts:
        opt = minimize(
            lambda th: tuple(-x for x in target(th)),
            start,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 400},
        )
        if math.isfinite(opt.fun):
            candidates.append((opt.x, -opt.fun))
    if not candidates:
        return theta0
    top = max(v for _, v in candidates)
    playoff = [(x, v) for x, v in candidates if v >= top - _MODE_TIE_NATS]
    if len(playoff) > 1:
        scored = [
            (_laplace_log_mass(x, v, target, space.dim), v, i)
            for i, (x, v) in enumerate(playoff)
        ]
        if any(math.isfinite(m) for m, _, _ in scored):
            _, _, idx = max(scored)
            return playoff[idx][0]
    return max(playoff, key=lambda c: c[1])[0]


def _run_one_chain(args):
    values, space, prior, run, chain_seed, shared_mode = args
    rng = np.random.default_rng(chain_seed)
    theta0 = initial_theta(space, values, rng)

    def target(theta):
        return log_posterior_and_grad(theta, values, space, prior, run.prior_only)

    for _ in range(20):
        if math.isfinite(target(theta0)[0]):
            break
        theta0 = initial_theta(space, values, rng)
    else:
        raise FittingError("could not find a starting point with positive density")

    if shared_mode is not None:
        refined = shared_mode + 0.1 * rng.standard_normal(space.dim)
        if math.isfinite(target(refined)[0]):
            theta0 = refined

    res = sample_chain(
        target,
        theta0,
        rng,
        warmup=run.warmup,
        iters=run.iters,
        n_steps=run.leapfrog_steps,
        target_accept=run.target_accept,
    )
    constrained = np.empty((run.iters, space.constrained_dim))
    for i, theta in enumerate(res["draws"]):
        constrained[i] = space.constrain_vector(theta)
    return constrained, res["accept_rate"], res["divergences"], res["step_size"]


def run_chains(
    y: ObservedSeries,
    space: ParameterSpace,
    prior: PriorConfig,
    run: RunConfig,
) -> PosteriorDraws:
    """Sample the posterior with ``run.chains`` independent HMC chains.

    Raises FittingError when no chain produces any accepted draw (with the
    per-chain acceptance diagnostics in the message).
    """
    if not run.prior_only and len(y) < space.n_states * space.n_components:
        raise ConfigurationError(
            f"series of length {len(y)} is too short for "
            f"{space.n_states} states x {space.n_components} components"
        )
    seeds = np.random.SeedSequence(run.seed).spawn(run.chains + 1)
    shared_mode = None
    if run.init_refine and not run.prior_only:
        # one refined mode for every chain: near-tied modes are resolved once,
        # so all chains explore the same basin and summaries stay coherent
        refine_rng = np.random.default_rng(seeds[run.chains])

        def target(theta):
            return log_posterior_and_grad(theta, y.values, space, prior)

        start = initial_theta(space, y.values, refine_rng)
        shared_mode = _refine_start(start, y.values, space, refine_rng, target)
    jobs = [
        (y.values, space, prior, run, seeds[c], shared_mode)
        for c in range(run.chains)
    ]
    if run.workers > 1:
        with ProcessPoolExecutor(max_workers=run.workers) as pool:
            results = list(pool.map(_run_one_chain, jobs))
    else:
        results = [_run_one_chain(j) for j in jobs]

    draws = np.stack([r[0] for r in results])
    accept = np.array([r[1] for r in results])
    div = np.array([r[2] for r in results], dtype=int)
    eps = np.array([r[3] for r in results])
    if np.all(accept == 0.0):
        raise FittingError(
            "every chain failed to accept any draw; "
            f"acceptance rates {accept.tolist()}, divergences {div.tolist()}"
        )
    return PosteriorDraws(
        space=space,
        draws=draws,
        names=space.constrained_names(),
        accept_rate=accept,
        divergences=div,
        step_size=eps,
        seed=run.seed,
    )


# --- label switching ------------------------------------------------------


def _mixture_means(xi, omega, lam, zeta) -> np.ndarray:
    """Weight-averaged analytic component means, one per state."""
    delta = lam / np.sqrt(1.0 + lam * lam)
    comp_mean = xi + _SQRT_2_OVER_PI * delta * omega
    return (zeta * comp_mean).sum(axis=1)


def canonical_orderings(xi, omega, lam, zeta):
    """State order by ascending mixture mean; component order by ascending xi."""
    state_order = np.argsort(_mixture_means(xi, omega, lam, zeta), kind="stable")
    comp_orders = np.argsort(xi[state_order], axis=1, kind="stable")
    return state_order, comp_orders


def _apply_orderings(xi, omega, lam, a, s, zeta, state_order, comp_orders):
    xi, omega, lam, zeta = (v[state_order] for v in (xi, omega, lam, zeta))
    a = a[state_order][:, state_order]
    s = s[state_order]
    rows = np.arange(xi.shape[0])[:, None]
    xi = xi[rows, comp_orders]
    omega = omega[rows, comp_orders]
    lam = lam[rows, comp_orders]
    zeta = zeta[rows, comp_orders]
    return xi, omega, lam, a, s, zeta


def relabel(draws: PosteriorDraws) -> PosteriorDraws:
    """Resolve label switching draw by draw.

    States are permuted so the weight-averaged mixture means ascend;
    components within each state are permuted so xi ascends; transition rows
    and columns and the initial distribution follow the state permutation.
    Idempotent, and the forward likelihood of every draw is unchanged.
    """
    space = draws.space
    out = np.empty_like(draws.draws)
    for c in range(draws.draws.shape[0]):
        for i in range(draws.draws.shape[1]):
            xi, omega, lam, a, s, zeta = space.split_constrained(draws.draws[c, i])
            state_order, comp_orders = canonical_orderings(xi, omega, lam, zeta)
            xi, omega, lam, a, s, zeta = _apply_orderings(
                xi, omega, lam, a, s, zeta, state_order, comp_orders
            )
            out[c, i] = np.concatenate(
                [xi.ravel(), omega.ravel(), lam.ravel(), a.ravel(), s, zeta.ravel()]
            )
    return PosteriorDraws(
        space=space,
        draws=out,
        names=list(draws.names),
        accept_rate=draws.accept_rate,
        divergences=draws.divergences,
        step_size=draws.step_size,
        seed=draws.seed,
    )


def canonicalize_model(m: HmmModel):
    """Relabel a model by the same convention as ``relabel``.

    Returns (model, state_order, comp_orders) so that latent paths simulated
    from the original model can be remapped: new_state = rank of old state in
    ``state_order``.
    """
    xi = np.array([[c.xi for c in e.components] for e in m.emissions])
    omega = np.array([[c.omega for c in e.components] for e in m.emissions])
    lam = np.array([[c.lam for c in e.components] for e in m.emissions])
    zeta = np.array([e.weights for e in m.emissions])
    state_order, comp_orders = canonical_orderings(xi, omega, lam, zeta)
    xi, omega, lam, a, s, zeta = _apply_orderings(
        xi, omega, lam, m.transition, m.initial, zeta, state_order, comp_orders
    )
    from .mixture import MixtureEmission
    from .skewnormal import SkewNormalParams

    emissions = tuple(
        MixtureEmission(
            weights=zeta[z_],
            components=tuple(
                SkewNormalParams(xi=xi[z_, k_], omega=omega[z_, k_], lam=lam[z_, k_])
                for k_ in range(xi.shape[1])
            ),
        )
        for z_ in range(xi.shape[0])
    )
    model = HmmModel(transition=a, initial=s, emissions=emissions)
    return model, state_order, comp_orders


@dataclass
class PosteriorSummary:
    """Per-parameter posterior mean/sd and central 90% interval, plus the
    posterior-mean point model (simplex rows renormalized)."""

    names: list[str]
    mean: np.ndarray
    sd: np.ndarray
    q05: np.ndarray
    q95: np.ndarray
    point_model: HmmModel

    def as_rows(self) -> list[dict]:
        return [
            {
                "parameter": n,
                "mean": float(self.mean[i]),
                "sd": float(self.sd[i]),
                "q05": float(self.q05[i]),
                "q95": float(self.q95[i]),
            }
            for i, n in enumerate(self.names)
        ]


def summarize(draws: PosteriorDraws) -> PosteriorSummary:
    """Posterior means, sds and 90% intervals over all chains (relabel first)."""
    flat = draws.flat
    mean = flat.mean(axis=0)
    sd = flat.std(axis=0, ddof=1) if flat.shape[0] > 1 else np.zeros(flat.shape[1])
    q05 = np.quantile(flat, 0.05, axis=0)
    q95 = np.quantile(flat, 0.95, axis=0)
    point = draws.space.model_from_constrained(mean)
    return PosteriorSummary(
        names=list(draws.names), mean=mean, sd=sd, q05=q05, q95=q95, point_model=point
    )

"""BIC, assignment entropy, and ICL for ranking candidate state counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hmm import SmoothedProbs


def bic(loglik: float, p: int, n: int) -> float:
    """-2 log L + p log N; lower is better."""
    if n < 1 or p < 1:
        raise ValueError("need p >= 1 and N >= 1")
    return -2.0 * loglik + p * math.log(n)


def parameter_count(n_states: int, n_components: int, shared_weights: bool = False) -> int:
    """Free parameters: 3 per component per state, transition rows, initial
    distribution, and mixture-weight simplexes (one per state, or one shared)."""
    z, k = n_states, n_components
    weights = (k - 1) if shared_weights else z * (k - 1)
    return 3 * z * k + z * (z - 1) + (z - 1) + weights


def assignment_entropy(g: SmoothedProbs) -> float:
    """H = -sum_t sum_k gamma_tk log gamma_tk, with 0 log 0 = 0."""
    gamma = np.asarray(g.gamma, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(gamma > 0.0, gamma * np.log(gamma), 0.0)
    return float(-terms.sum())


def icl(bic_value: float, entropy: float) -> float:
    """BIC minus the assignment entropy; never exceeds the BIC."""
    if entropy < 0:
        raise ValueError(f"entropy must be >= 0, got {entropy}")
    return bic_value - entropy


@dataclass(frozen=True)
class CandidateScore:
    """Selection inputs and criteria for one candidate state count."""

    n_states: int
    loglik: float
    p: int
    n_obs: int
    bic: float
    entropy: float
    icl: float


@dataclass(frozen=True)
class SelectionReport:
    """Scores per candidate plus rankings under both criteria.

    Both rankings list state counts from smallest criterion value to largest;
    the default selection key is BIC.  ICL values are reported alongside
    because the two criteria can disagree.
    """

    candidates: tuple[CandidateScore, ...]
    ranking_bic: tuple[int, ...]
    ranking_icl: tuple[int, ...]

    @property
    def selected(self) -> int:
        return self.ranking_bic[0]


def build_selection_report(candidates: list[CandidateScore]) -> SelectionReport:
    by_bic = tuple(c.n_states for c in sorted(candidates, key=lambda c: c.bic))
    by_icl = tuple(c.n_states for c in sorted(candidates, key=lambda c: c.icl))
    return SelectionReport(
        candidates=tuple(candidates), ranking_bic=by_bic, ranking_icl=by_icl
    )


def score_candidate(
    n_states: int,
    n_components: int,
    loglik: float,
    n_obs: int,
    g: SmoothedProbs,
    shared_weights: bool = False,
) -> CandidateScore:
    """Assemble BIC/ICL for one fitted candidate from its point-model outputs."""
    p = parameter_count(n_states, n_components, shared_weights)
    b = bic(loglik, p, n_obs)
    h = assignment_entropy(g)
    return CandidateScore(
        n_states=n_states,
        loglik=loglik,
        p=p,
        n_obs=n_obs,
        bic=b,
        entropy=h,
        icl=icl(b, h),
    )

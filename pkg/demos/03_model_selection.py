"""Rank candidate state counts by BIC and ICL on simulated two-regime data.

Run:  python3 demos/03_model_selection.py
"""

import numpy as np

from snhmm import (
    PriorConfig,
    RunConfig,
    build_selection_report,
    forward_backward,
    forward_log_likelihood,
    get_scenario,
    relabel,
    run_chains,
    score_candidate,
    simulate,
    summarize,
)
from snhmm.transforms import ParameterSpace

series, _, _ = simulate(get_scenario("two-state").model, 400, np.random.default_rng(1))
prior = PriorConfig.default()

candidates = []
for z in (2, 3):
    space = ParameterSpace(n_states=z, n_components=2)
    run = RunConfig(chains=2, warmup=250, iters=250, seed=11)
    draws = relabel(run_chains(series, space, prior, run))
    point = summarize(draws).point_model
    loglik = forward_log_likelihood(point, series)
    smoothed = forward_backward(point, series)
    candidates.append(score_candidate(z, 2, loglik, len(series), smoothed))
    print(f"fitted {z} states: loglik {loglik:.1f}")

report = build_selection_report(candidates)
print(f"\n{'Z':>3} {'loglik':>10} {'p':>4} {'BIC':>10} {'entropy':>9} {'ICL':>10}")
for c in report.candidates:
    print(f"{c.n_states:>3} {c.loglik:>10.2f} {c.p:>4} {c.bic:>10.2f} {c.entropy:>9.2f} {c.icl:>10.2f}")
print(f"\nranking by BIC (lower preferred): {report.ranking_bic}")
print(f"ranking by ICL (lower preferred): {report.ranking_icl}")
print(f"selected state count: {report.selected}")

"""Skew-normal mixture hidden Markov models.

Fits HMMs whose state-conditional emissions are finite skew-normal mixtures,
using Hamiltonian Monte Carlo over an unconstrained reparameterization;
decodes the most probable state path (changepoints = decoded state switches)
and ranks candidate state counts by BIC and ICL.
"""

__version__ = "0.1.0"

from .errors import ConfigurationError, FittingError, IngestionError, SnhmmError
from .evaluation import ConfusionMatrix, accuracy, align_states, cohen_kappa, confusion
from .hmm import (
    HmmModel,
    ObservedSeries,
    SmoothedProbs,
    complete_data_log_likelihood,
    forward_backward,
    forward_log_likelihood,
    simulate,
    stationary_distribution,
)
from .inference import (
    PosteriorDraws,
    PosteriorSummary,
    RunConfig,
    canonicalize_model,
    relabel,
    run_chains,
    summarize,
)
from .mixture import (
    MixtureEmission,
    component_responsibilities,
    mixture_log_density,
    sample_mixture,
)
from .model_selection import (
    SelectionReport,
    assignment_entropy,
    bic,
    build_selection_report,
    icl,
    parameter_count,
    score_candidate,
)
from .priors import HalfCauchy, PriorConfig, TruncatedNormal, sticky_transition_alpha
from .scenarios import Scenario, StudyReport, builtin_scenarios, get_scenario, run_study
from .skewnormal import SkewNormalParams, log_pdf, moments, pdf, sample
from .transforms import ParameterSpace
from .viterbi import ViterbiResult, extract_changepoints, viterbi_decode

__all__ = [
    "ConfigurationError",
    "FittingError",
    "IngestionError",
    "SnhmmError",
    "ConfusionMatrix",
    "accuracy",
    "align_states",
    "cohen_kappa",
    "confusion",
    "HmmModel",
    "ObservedSeries",
    "SmoothedProbs",
    "complete_data_log_likelihood",
    "forward_backward",
    "forward_log_likelihood",
    "simulate",
    "stationary_distribution",
    "PosteriorDraws",
    "PosteriorSummary",
    "RunConfig",
    "canonicalize_model",
    "relabel",
    "run_chains",
    "summarize",
    "MixtureEmission",
    "component_responsibilities",
    "mixture_log_density",
    "sample_mixture",
    "SelectionReport",
    "assignment_entropy",
    "bic",
    "build_selection_report",
    "icl",
    "parameter_count",
    "score_candidate",
    "HalfCauchy",
    "PriorConfig",
    "TruncatedNormal",
    "sticky_transition_alpha",
    "Scenario",
    "StudyReport",
    "builtin_scenarios",
    "get_scenario",
    "run_study",
    "SkewNormalParams",
    "log_pdf",
    "moments",
    "pdf",
    "sample",
    "ParameterSpace",
    "ViterbiResult",
    "extract_changepoints",
    "viterbi_decode",
]

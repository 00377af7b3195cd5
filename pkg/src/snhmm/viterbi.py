"""Most-probable state path (MAP decoding) and changepoint extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hmm import HmmModel, ObservedSeries, _log_params


@dataclass(frozen=True)
class ViterbiResult:
    """Decoded path plus the full trellis.

    ``path`` holds 0-based states; ``changepoints`` holds the 0-based
    positions t with path[t] != path[t-1].  ``log_delta[t, j]`` is the best
    complete-data log-likelihood of any prefix ending in state j at time t;
    ``backpointers[t, j]`` is the argmax predecessor (row 0 unused).
    """

    path: np.ndarray
    log_delta: np.ndarray
    backpointers: np.ndarray
    changepoints: np.ndarray


def viterbi_decode(m: HmmModel, y: ObservedSeries) -> ViterbiResult:
    """Decode the path maximizing the complete-data log-likelihood.

    Every argmax (forward cells and the terminal state) breaks ties toward
    the lowest state index, so decoding is deterministic.
    """
    log_s, log_a, log_b = _log_params(m, y)
    path, log_delta, back = _kernels.viterbi_log(log_s, log_a, log_b)
    switches = np.flatnonzero(path[1:] != path[:-1]) + 1
    return ViterbiResult(
        path=path, log_delta=log_delta, backpointers=back, changepoints=switches
    )


def extract_changepoints(r: ViterbiResult) -> list[tuple[int, int, int]]:
    """Report-ready changepoint triples (time, from-state, to-state), all 1-based."""
    return [
        (int(t) + 1, int(r.path[t - 1]) + 1, int(r.path[t]) + 1)
        for t in r.changepoints
    ]

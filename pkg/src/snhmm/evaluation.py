"""Decoded-path quality: label alignment, confusion matrix, accuracy, kappa."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

_MAX_ALIGN_STATES = 6


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i, j] = number of times true state i was decoded as state j."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=int)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or np.any(c < 0):
            raise ValueError("counts must be a square matrix of non-negative ints")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def align_states(true_path, decoded_path, n_states: int) -> np.ndarray:
    """Permutation of decoded labels maximizing agreement with the true path.

    Exhaustive over all n_states! permutations (supported up to 6 states);
    returns ``perm`` such that ``perm[decoded]`` is the aligned path.  Ties
    resolve to the first permutation in lexicographic order.
    """
    true_path = np.asarray(true_path, dtype=int)
    decoded_path = np.asarray(decoded_path, dtype=int)
    if true_path.shape != decoded_path.shape:
        raise ValueError("paths must have equal length")
    if n_states > _MAX_ALIGN_STATES:
        raise ValueError(f"alignment supports at most {_MAX_ALIGN_STATES} states")
    best_perm = None
    best_agree = -1
    for perm in itertools.permutations(range(n_states)):
        perm_arr = np.asarray(perm)
        agree = int(np.sum(perm_arr[decoded_path] == true_path))
        if agree > best_agree:
            best_agree = agree
            best_perm = perm_arr
    return best_perm


def confusion(true_path, decoded_path, n_states: int | None = None) -> ConfusionMatrix:
    """Cross-tabulate true (rows) against decoded (columns) states."""
    true_path = np.asarray(true_path, dtype=int)
    decoded_path = np.asarray(decoded_path, dtype=int)
    if true_path.shape != decoded_path.shape:
        raise ValueError("paths must have equal length")
    z = int(max(true_path.max(), decoded_path.max())) + 1 if n_states is None else n_states
    counts = np.zeros((z, z), dtype=int)
    np.add.at(counts, (true_path, decoded_path), 1)
    return ConfusionMatrix(counts=counts)


def accuracy(c: ConfusionMatrix) -> float:
    """Trace over total."""
    if c.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(c.counts) / c.total)


def cohen_kappa(c: ConfusionMatrix) -> float:
    """(p_o - p_e) / (1 - p_e) with chance agreement from the marginals.

    The degenerate case p_e = 1 (all mass in one row and column) is defined
    as 1 when observed agreement is perfect and 0 otherwise, with a warning.
    """
    if c.total == 0:
        raise ValueError("empty confusion matrix")
    n = float(c.total)
    p_o = np.trace(c.counts) / n
    rows = c.counts.sum(axis=1)
    cols = c.counts.sum(axis=0)
    p_e = float(np.dot(rows, cols)) / (n * n)
    if p_e >= 1.0:
        warnings.warn("chance agreement is 1; kappa is degenerate", RuntimeWarning, stacklevel=2)
        return 1.0 if p_o == 1.0 else 0.0
    return float((p_o - p_e) / (1.0 - p_e))

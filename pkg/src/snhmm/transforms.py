"""Mapping between the flat unconstrained sampling vector and model parameters.

Scales travel on the log scale; every simplex (transition rows, initial
distribution, mixture weights) travels as free logits with the last
category's logit pinned to 0 and is materialized through a stable softmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .hmm import HmmModel
from .mixture import MixtureEmission
from .skewnormal import SkewNormalParams

# exp() of an unconstrained coordinate is clipped into this range so that any
# finite input still yields a usable positive scale.
_SCALE_MIN, _SCALE_MAX = 1e-300, 1e300


def softmax_pinned(free_logits: np.ndarray) -> np.ndarray:
    """Simplex from free logits with the implicit last logit fixed at 0."""
    full = np.append(np.asarray(free_logits, dtype=float), 0.0)
    full -= full.max()
    e = np.exp(full)
    return e / e.sum()


def inv_softmax_pinned(p: np.ndarray) -> np.ndarray:
    """Free logits log(p_k / p_last); requires strictly positive entries."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ConfigurationError(
            "cannot represent a simplex with zero entries as finite logits"
        )
    return np.log(p[:-1]) - np.log(p[-1])


@dataclass(frozen=True)
class ParameterSpace:
    """Shape metadata tying a flat parameter vector to an HMM.

    ``shared_weights=True`` collapses the per-state mixture weights to one
    simplex shared by all states.
    """

    n_states: int
    n_components: int
    shared_weights: bool = False

    def __post_init__(self) -> None:
        if self.n_states < 2:
            raise ConfigurationError("need at least 2 states")
        if self.n_components < 1:
            raise ConfigurationError("need at least 1 mixture component")

    # --- unconstrained vector layout -------------------------------------

    @property
    def n_weight_logits(self) -> int:
        per = self.n_components - 1
        return per if self.shared_weights else self.n_states * per

    @property
    def dim(self) -> int:
        z, k = self.n_states, self.n_components
        return 3 * z * k + z * (z - 1) + (z - 1) + self.n_weight_logits

    def _blocks(self):
        z, k = self.n_states, self.n_components
        zk = z * k
        idx = 0
        out = {}
        for name, size in (
            ("xi", zk),
            ("log_omega", zk),
            ("lam", zk),
            ("trans", z * (z - 1)),
            ("init", z - 1),
            ("weights", self.n_weight_logits),
        ):
            out[name] = slice(idx, idx + size)
            idx += size
        return out

    def check(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise ConfigurationError(
                f"parameter vector has shape {theta.shape}, expected ({self.dim},)"
            )
        return theta

    def unpack_arrays(self, theta: np.ndarray):
        """Constrained arrays (xi, omega, lam, A, s, zeta) without dataclass wrapping.

        zeta always comes back with shape (Z, K), replicated across states
        when weights are shared.
        """
        theta = self.check(theta)
        z, k = self.n_states, self.n_components
        b = self._blocks()
        xi = theta[b["xi"]].reshape(z, k)
        with np.errstate(over="ignore"):
            omega = np.clip(
                np.exp(theta[b["log_omega"]].reshape(z, k)), _SCALE_MIN, _SCALE_MAX
            )
        lam = theta[b["lam"]].reshape(z, k)
        trans_logits = theta[b["trans"]].reshape(z, z - 1)
        a = np.vstack([softmax_pinned(trans_logits[i]) for i in range(z)])
        s = softmax_pinned(theta[b["init"]])
        if k == 1:
            zeta = np.ones((z, 1))
        elif self.shared_weights:
            zeta = np.tile(softmax_pinned(theta[b["weights"]]), (z, 1))
        else:
            w = theta[b["weights"]].reshape(z, k - 1)
            zeta = np.vstack([softmax_pinned(w[i]) for i in range(z)])
        return xi, omega, lam, a, s, zeta

    def to_model(self, theta: np.ndarray) -> HmmModel:
        """Back-transform to a fully validated HmmModel."""
        xi, omega, lam, a, s, zeta = self.unpack_arrays(theta)
        emissions = tuple(
            MixtureEmission(
                weights=zeta[z_],
                components=tuple(
                    SkewNormalParams(xi=xi[z_, k_], omega=omega[z_, k_], lam=lam[z_, k_])
                    for k_ in range(self.n_components)
                ),
            )
            for z_ in range(self.n_states)
        )
        return HmmModel(transition=a, initial=s, emissions=emissions)

    def from_model(self, m: HmmModel) -> np.ndarray:
        """Unconstrained vector reproducing the model (inverse of to_model)."""
        z, k = self.n_states, self.n_components
        if m.n_states != z or any(e.n_components != k for e in m.emissions):
            raise ConfigurationError("model shape does not match this space")
        xi = np.array([[c.xi for c in e.components] for e in m.emissions])
        log_omega = np.log([[c.omega for c in e.components] for e in m.emissions])
        lam = np.array([[c.lam for c in e.components] for e in m.emissions])
        trans = np.concatenate([inv_softmax_pinned(row) for row in m.transition])
        init = inv_softmax_pinned(m.initial)
        if k == 1:
            weights = np.empty(0)
        elif self.shared_weights:
            weights = inv_softmax_pinned(m.emissions[0].weights)
        else:
            weights = np.concatenate(
                [inv_softmax_pinned(e.weights) for e in m.emissions]
            )
        return np.concatenate(
            [xi.ravel(), log_omega.ravel(), lam.ravel(), trans, init, weights]
        )

    # --- constrained vector layout (used for stored draws) ---------------

    @property
    def constrained_dim(self) -> int:
        z, k = self.n_states, self.n_components
        return 3 * z * k + z * z + z + z * k

    def constrained_names(self) -> list[str]:
        """Column names for constrained draws; indices are 1-based."""
        z, k = self.n_states, self.n_components
        names: list[str] = []
        for block in ("xi", "omega", "lambda"):
            names += [f"{block}[{i+1},{j+1}]" for i in range(z) for j in range(k)]
        names += [f"A[{i+1},{j+1}]" for i in range(z) for j in range(z)]
        names += [f"s[{i+1}]" for i in range(z)]
        names += [f"zeta[{i+1},{j+1}]" for i in range(z) for j in range(k)]
        return names

    def constrain_vector(self, theta: np.ndarray) -> np.ndarray:
        """Flat constrained representation matching ``constrained_names``."""
        xi, omega, lam, a, s, zeta = self.unpack_arrays(theta)
        return np.concatenate(
            [xi.ravel(), omega.ravel(), lam.ravel(), a.ravel(), s, zeta.ravel()]
        )

    def split_constrained(self, vec: np.ndarray):
        """Inverse layout step of constrain_vector: arrays (xi, omega, lam, A, s, zeta)."""
        z, k = self.n_states, self.n_components
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.constrained_dim,):
            raise ConfigurationError(
                f"constrained vector has shape {vec.shape}, expected ({self.constrained_dim},)"
            )
        zk = z * k
        xi = vec[:zk].reshape(z, k)
        omega = vec[zk : 2 * zk].reshape(z, k)
        lam = vec[2 * zk : 3 * zk].reshape(z, k)
        a = vec[3 * zk : 3 * zk + z * z].reshape(z, z)
        s = vec[3 * zk + z * z : 3 * zk + z * z + z]
        zeta = vec[3 * zk + z * z + z :].reshape(z, k)
        return xi, omega, lam, a, s, zeta

    def model_from_constrained(self, vec: np.ndarray) -> HmmModel:
        """HmmModel from a constrained vector, renormalizing each simplex row."""
        xi, omega, lam, a, s, zeta = self.split_constrained(vec)
        emissions = tuple(
            MixtureEmission(
                weights=zeta[z_] / zeta[z_].sum(),
                components=tuple(
                    SkewNormalParams(xi=xi[z_, k_], omega=omega[z_, k_], lam=lam[z_, k_])
                    for k_ in range(self.n_components)
                ),
            )
            for z_ in range(self.n_states)
        )
        a = a / a.sum(axis=1, keepdims=True)
        return HmmModel(transition=a, initial=s / s.sum(), emissions=emissions)

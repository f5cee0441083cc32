"""Entropy, mutual information, and state-averaged information measures.

All quantities are in bits.  Terms whose probability falls below 1e-15 are
treated as exact zeros so that 0*log(0) never produces a NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelFamily, Distribution, mix
from .errors import ValidationError

_EPS = 1e-15


def _as_probs(d) -> np.ndarray:
    return d.probs if isinstance(d, Distribution) else np.asarray(d, dtype=np.float64)


def entropy(d) -> float:
    """Shannon entropy in bits of a probability vector."""
    p = _as_probs(d).ravel()
    mask = p > _EPS
    p = p[mask]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def conditional_entropy(joint: np.ndarray) -> float:
    """H(col | row) of a joint probability matrix with rows indexing the condition."""
    joint = np.asarray(joint, dtype=np.float64)
    if joint.ndim != 2:
        raise ValidationError("joint must be a matrix")
    return entropy(joint) - entropy(joint.sum(axis=1))


def mutual_information(p_x, channel: np.ndarray) -> float:
    """I(X; Y) for input distribution p_x through a row-stochastic channel."""
    p = _as_probs(p_x)
    w = np.asarray(channel, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != p.size:
        raise ValidationError(
            f"channel shape {w.shape} incompatible with input of size {p.size}"
        )
    p_y = p @ w
    h_y_given_x = float(p @ np.array([entropy(row) for row in w]))
    return max(0.0, entropy(p_y) - h_y_given_x)


@dataclass(frozen=True)
class JointInputChannel:
    """An input (or prefixed input) distribution paired with a channel matrix.

    ``input_dist`` is either a vector P_X or a joint matrix P_{UX} whose rows
    are indexed by the auxiliary symbol u.
    """

    input_dist: np.ndarray
    channel: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.input_dist, dtype=np.float64)
        w = np.asarray(self.channel, dtype=np.float64)
        if d.ndim not in (1, 2):
            raise ValidationError("input_dist must be a vector or a (U, X) matrix")
        if abs(d.sum() - 1.0) > 1e-12 or np.any(d < 0):
            raise ValidationError("input_dist is not a probability assignment")
        x_size = d.shape[-1]
        if w.ndim != 2 or w.shape[0] != x_size:
            raise ValidationError("channel rows must match the X alphabet")
        object.__setattr__(self, "input_dist", d)
        object.__setattr__(self, "channel", w)


def output_distributions(p_x, family: ChannelFamily) -> np.ndarray:
    """Per-state output marginals; row s is the law of Y_s under p_x."""
    p = _as_probs(p_x)
    return np.einsum("x,sxy->sy", p, family.matrices)


def avg_state_measures(p_states, family: ChannelFamily, p_x) -> tuple[float, float, float]:
    """State-averaged (H(Y_S), H(Y_S|X), I(X;Y_S)) under a state weighting P.

    These are probability-weighted averages of per-state quantities, not
    measures of the mixture channel: the averaged mutual information lies
    between min_s I(X;Y_s) and max_s I(X;Y_s).
    """
    weights = _as_probs(p_states)
    if weights.size != family.num_states:
        raise ValidationError("state weighting does not match the family")
    p = _as_probs(p_x)
    h_y = 0.0
    h_y_given_x = 0.0
    for s in range(family.num_states):
        w = family.matrices[s]
        h_y += weights[s] * entropy(p @ w)
        h_y_given_x += weights[s] * float(p @ np.array([entropy(row) for row in w]))
    return h_y, h_y_given_x, h_y - h_y_given_x


def avg_state_mutual_information(p_states, family: ChannelFamily, p_x) -> float:
    return avg_state_measures(p_states, family, p_x)[2]


def prefix_mutual_information(p_ux: np.ndarray, channel: np.ndarray) -> float:
    """I(U; Y) when U -> X -> Y with joint prefix law P_{UX} and channel P_{Y|X}."""
    joint = JointInputChannel(p_ux, channel)
    d = joint.input_dist
    if d.ndim == 1:
        # A bare P_X means U = X.
        return mutual_information(d, joint.channel)
    p_uy = d @ joint.channel
    p_u = d.sum(axis=1)
    h_y_given_u = 0.0
    for u in range(d.shape[0]):
        if p_u[u] > _EPS:
            h_y_given_u += p_u[u] * entropy(p_uy[u] / p_u[u])
    return max(0.0, entropy(p_uy.sum(axis=0)) - h_y_given_u)


def mixture_mutual_information(p_x, family: ChannelFamily, q: Distribution) -> float:
    """I(X; Y_q) through the mixed channel W_q."""
    return mutual_information(p_x, mix(family, q))


def binary_entropy(p: float) -> float:
    """h(p) in bits."""
    if p < _EPS or p > 1.0 - _EPS:
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))

"""State-conditioned letter typicality.

Typicality here is imposed blockwise: a state sequence partitions the
positions 1..N into index sets, one per state, and only the blocks of states
that occur often enough (the "frequent" states) are required to look typical.
Blocks of rare states are unconstrained apart from coordinatewise positivity.

Two deviation conventions are supported for the per-block letter test:

* ``relative`` (default): |count(a)/mu - P(a)| <= delta * P(a).  This is the
  convention under which the probability and cardinality bounds verified in
  the test suite are theorems.
* ``absolute``: |count(a)/mu - P(a)| <= delta, a deviation budget that does
  not scale with the letter mass.

Both conventions accept a word of exactly matching type for any delta >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .channels import ChannelFamily, Distribution, StateSequence
from .errors import EnumerationLimitError, ValidationError
from .info import output_distributions

_TOL = 1e-12


@dataclass(frozen=True)
class TypicalityParams:
    """Block-deviation delta, frequent-state threshold eta, and the convention."""

    delta: float
    eta: float
    relative: bool = True

    def __post_init__(self):
        if not (self.delta >= 0.0):
            raise ValidationError("delta must be nonnegative")
        if not (0.0 < self.eta < 1.0):
            raise ValidationError("eta must lie in (0, 1)")

    def doubled(self) -> "TypicalityParams":
        """Same parameters with delta doubled (used by conditional sets)."""
        return TypicalityParams(2.0 * self.delta, self.eta, self.relative)


@dataclass(frozen=True)
class MinProbConstants:
    """Minimum positive probabilities of the input, output and joint laws."""

    m_x: float
    m_y: float
    m_xy: float


def min_prob_constants(p_x, family: ChannelFamily) -> MinProbConstants:
    p = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    out = output_distributions(p, family)
    joint = p[None, :, None] * family.matrices
    return MinProbConstants(
        m_x=float(p[p > 0].min()),
        m_y=float(out[out > 0].min()),
        m_xy=float(joint[joint > 0].min()),
    )


def frequent_states(s: StateSequence, eta: float) -> np.ndarray:
    """States occurring strictly more than N*eta/|S| times in the sequence."""
    threshold = s.n * eta / s.num_states
    return np.flatnonzero(s.counts() > threshold)


def _count_bounds(mu: int, p: np.ndarray, params: TypicalityParams):
    """Inclusive (lo, hi) bounds on letter counts for a typical length-mu block."""
    if params.relative:
        slack = params.delta * p
    else:
        slack = np.full_like(p, params.delta)
    lo = mu * (p - slack)
    hi = mu * (p + slack)
    # Letters of zero probability can never appear: positivity is part of the
    # set definitions, and in relative mode the bound already forces it.
    hi = np.where(p <= 0.0, 0.0, hi)
    return lo, hi


def _counts_ok(counts: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> bool:
    return bool(np.all(counts >= lo - _TOL) and np.all(counts <= hi + _TOL))


def letter_typical(word, p, delta: float, relative: bool = True) -> bool:
    """Plain (state-free) letter typicality of a word w.r.t. a distribution."""
    w = np.asarray(word, dtype=np.int64)
    pv = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=np.float64)
    counts = np.bincount(w, minlength=pv.size).astype(np.float64)
    params = TypicalityParams(delta, 0.5, relative)
    lo, hi = _count_bounds(w.size, pv, params)
    return _counts_ok(counts, lo, hi)


def state_typical_input(x, s: StateSequence, p_x, params: TypicalityParams) -> bool:
    """Membership of an input word in the state-conditioned typical set."""
    xv = np.asarray(x, dtype=np.int64)
    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    if xv.size != s.n:
        raise ValidationError("word length does not match the state sequence")
    if np.any(pv[xv] <= 0.0):
        return False
    for a in frequent_states(s, params.eta):
        block = xv[s.index_set(int(a))]
        counts = np.bincount(block, minlength=pv.size).astype(np.float64)
        lo, hi = _count_bounds(block.size, pv, params)
        if not _counts_ok(counts, lo, hi):
            return False
    return True


def state_typical_output(y, s: StateSequence, out_dists: np.ndarray,
                         params: TypicalityParams) -> bool:
    """Membership of an output word; ``out_dists[s]`` is the law of Y_s."""
    yv = np.asarray(y, dtype=np.int64)
    if yv.size != s.n:
        raise ValidationError("word length does not match the state sequence")
    if np.any(out_dists[s.symbols, yv] <= 0.0):
        return False
    for a in frequent_states(s, params.eta):
        block = yv[s.index_set(int(a))]
        counts = np.bincount(block, minlength=out_dists.shape[1]).astype(np.float64)
        lo, hi = _count_bounds(block.size, out_dists[int(a)], params)
        if not _counts_ok(counts, lo, hi):
            return False
    return True


def jointly_typical(x, y, s: StateSequence, p_x, family: ChannelFamily,
                    params: TypicalityParams) -> bool:
    """Joint membership of (x, y) under the per-state joint laws P_X(x) W_s(y|x)."""
    xv = np.asarray(x, dtype=np.int64)
    yv = np.asarray(y, dtype=np.int64)
    if xv.size != yv.size or xv.size != s.n:
        raise ValidationError("x, y and the state sequence must have equal length")
    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    joint = pv[None, :, None] * family.matrices  # (S, X, Y)
    if np.any(joint[s.symbols, xv, yv] <= 0.0):
        return False
    nx, ny = family.num_inputs, family.num_outputs
    for a in frequent_states(s, params.eta):
        idx = s.index_set(int(a))
        counts = np.zeros((nx, ny))
        np.add.at(counts, (xv[idx], yv[idx]), 1.0)
        lo, hi = _count_bounds(idx.size, joint[int(a)].ravel(), params)
        if not _counts_ok(counts.ravel(), lo, hi):
            return False
    return True


def conditionally_typical(y, x, s: StateSequence, p_x, family: ChannelFamily,
                          params: TypicalityParams) -> bool:
    """y lies in the conditional typical set of x (same test as joint membership)."""
    return jointly_typical(x, y, s, p_x, family, params)


# ---------------------------------------------------------------------------
# Vectorized masks over enumerated word arrays (used by decoders and tests).

def typical_input_mask(words: np.ndarray, s: StateSequence, p_x,
                       params: TypicalityParams) -> np.ndarray:
    """Boolean mask of state-conditioned typicality over a (num, N) word array."""
    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    ok = ~np.any(pv[words] <= 0.0, axis=1)
    for a in frequent_states(s, params.eta):
        idx = s.index_set(int(a))
        lo, hi = _count_bounds(idx.size, pv, params)
        for letter in range(pv.size):
            counts = (words[:, idx] == letter).sum(axis=1)
            ok &= (counts >= lo[letter] - _TOL) & (counts <= hi[letter] + _TOL)
    return ok


def conditional_typical_mask(x, y_words: np.ndarray, s: StateSequence, p_x,
                             family: ChannelFamily, params: TypicalityParams) -> np.ndarray:
    """Mask over output words jointly typical with the fixed input word x."""
    xv = np.asarray(x, dtype=np.int64)
    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    joint = pv[None, :, None] * family.matrices
    ok = ~np.any(joint[s.symbols[None, :], xv[None, :], y_words] <= 0.0, axis=1)
    for a in frequent_states(s, params.eta):
        idx = s.index_set(int(a))
        lo, hi = _count_bounds(idx.size, joint[int(a)].ravel(), params)
        lo = lo.reshape(joint.shape[1:])
        hi = hi.reshape(joint.shape[1:])
        for letter in range(family.num_inputs):
            pos = idx[xv[idx] == letter]
            for out in range(family.num_outputs):
                counts = (y_words[:, pos] == out).sum(axis=1) if pos.size else 0.0
                ok &= (counts >= lo[letter, out] - _TOL) & (counts <= hi[letter, out] + _TOL)
    return ok


def typical_output_mask(y_words: np.ndarray, s: StateSequence, out_dists: np.ndarray,
                        params: TypicalityParams) -> np.ndarray:
    ok = ~np.any(out_dists[s.symbols[None, :], y_words] <= 0.0, axis=1)
    for a in frequent_states(s, params.eta):
        idx = s.index_set(int(a))
        lo, hi = _count_bounds(idx.size, out_dists[int(a)], params)
        for letter in range(out_dists.shape[1]):
            counts = (y_words[:, idx] == letter).sum(axis=1)
            ok &= (counts >= lo[letter] - _TOL) & (counts <= hi[letter] + _TOL)
    return ok


# ---------------------------------------------------------------------------
# Exact probabilities by multinomial enumeration.

BLOCK_ENUMERATION_CAP = 64


def _multinomial_box_prob(n: int, p: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    """Exact P{count vector of n iid draws from p lies in [lo, hi]}."""
    k = p.size
    logp = np.where(p > 0.0, np.log(np.maximum(p, 1e-300)), -np.inf)
    lo_int = np.maximum(0, np.ceil(lo - _TOL).astype(np.int64))
    hi_int = np.minimum(n, np.floor(hi + _TOL).astype(np.int64))
    hi_int = np.where(p <= 0.0, np.minimum(hi_int, 0), hi_int)
    if np.any(lo_int > hi_int):
        return 0.0
    total = 0.0

    def rec(letter: int, remaining: int, log_acc: float):
        nonlocal total
        if letter == k - 1:
            if lo_int[letter] <= remaining <= hi_int[letter]:
                if remaining > 0 and not np.isfinite(logp[letter]):
                    return
                contrib = log_acc - gammaln(remaining + 1)
                if remaining > 0:
                    contrib += remaining * logp[letter]
                total += math.exp(contrib)
            return
        upper = min(hi_int[letter], remaining)
        for c in range(int(lo_int[letter]), int(upper) + 1):
            if c > 0 and not np.isfinite(logp[letter]):
                break
            step = log_acc - gammaln(c + 1)
            if c > 0:
                step += c * logp[letter]
            rec(letter + 1, remaining - c, step)

    rec(0, n, float(gammaln(n + 1)))
    return min(1.0, total)


def block_typical_prob(mu: int, p, params: TypicalityParams) -> float:
    """Exact probability that mu iid draws from p form a typical block."""
    if mu > BLOCK_ENUMERATION_CAP:
        raise EnumerationLimitError(
            f"block length {mu} exceeds {BLOCK_ENUMERATION_CAP}; use Monte Carlo"
        )
    pv = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=np.float64)
    lo, hi = _count_bounds(mu, pv, params)
    return _multinomial_box_prob(mu, pv, lo, hi)


def typical_prob_exact(p_x, s: StateSequence, params: TypicalityParams) -> float:
    """Exact P{X^N state-conditioned typical} for X^N iid from p_x.

    Only frequent-state blocks constrain membership, and the blocks are
    independent, so the probability is a product of exact multinomial tail
    sums, one per frequent state.
    """
    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    prob = 1.0
    for a in frequent_states(s, params.eta):
        mu = int(s.counts()[a])
        prob *= block_typical_prob(mu, pv, params)
    return prob


def conditional_typical_prob_exact(x, s: StateSequence, p_x, family: ChannelFamily,
                                   params: TypicalityParams) -> float:
    """Exact P{Y^N jointly typical with x | X^N = x} under the product channel law.

    Within a frequent block the output draws split by input letter into
    independent multinomials, so the joint-count box factorizes exactly.
    """
    xv = np.asarray(x, dtype=np.int64)
    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    if np.any(pv[xv] <= 0.0):
        return 0.0
    joint = pv[None, :, None] * family.matrices
    prob = 1.0
    for a in frequent_states(s, params.eta):
        idx = s.index_set(int(a))
        if idx.size > BLOCK_ENUMERATION_CAP:
            raise EnumerationLimitError(
                f"block length {idx.size} exceeds {BLOCK_ENUMERATION_CAP}; use Monte Carlo"
            )
        lo, hi = _count_bounds(idx.size, joint[int(a)].ravel(), params)
        lo = lo.reshape(joint.shape[1:])
        hi = hi.reshape(joint.shape[1:])
        for letter in range(family.num_inputs):
            c = int((xv[idx] == letter).sum())
            if c == 0:
                # Joint counts for absent input letters must still sit inside
                # their boxes, which therefore must contain zero.
                if np.any(lo[letter] > _TOL):
                    return 0.0
                continue
            prob *= _multinomial_box_prob(
                c, family.matrices[int(a), letter], lo[letter], hi[letter]
            )
    return prob


# ---------------------------------------------------------------------------
# Calibration of the exponential-decay constants.

def calibrate_nu1(p_x, params: TypicalityParams, sequences) -> float:
    """Largest nu such that P{typical} > 1 - 2^(-N nu) holds on the given sequences.

    Returns the supremum; use any strictly smaller positive value.  A result
    of ``inf`` means every checked probability was exactly 1.
    """
    best = math.inf
    for s in sequences:
        p = typical_prob_exact(p_x, s, params)
        if p >= 1.0:
            continue
        if p <= 0.0:
            return 0.0
        best = min(best, -math.log2(1.0 - p) / s.n)
    return best


def calibrate_nu2(p_x, family: ChannelFamily, params: TypicalityParams, sequences,
                  input_cap: int = 100_000) -> float:
    """Largest nu2 with P{Y conditionally typical (doubled delta) | x} > 1 - 2^(-N nu2)
    over every state-typical input word x of every given sequence."""
    from .channels import enumerate_words

    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    best = math.inf
    for s in sequences:
        words = enumerate_words(family.num_inputs, s.n, cap=input_cap)
        mask = typical_input_mask(words, s, pv, params)
        for x in words[mask]:
            p = conditional_typical_prob_exact(x, s, pv, family, params.doubled())
            if p >= 1.0:
                continue
            if p <= 0.0:
                return 0.0
            best = min(best, -math.log2(1.0 - p) / s.n)
    return best


def calibrate_nu2_sampled(p_x, family: ChannelFamily, params: TypicalityParams,
                          n_grid, samples_per_n: int = 150, seed: int = 0) -> float:
    """Sampled variant of :func:`calibrate_nu2` for block lengths where the
    input space cannot be enumerated.

    For each length in the grid, random state sequences and random typical
    inputs are drawn and the exact conditional probability is evaluated; the
    returned constant is the largest one consistent with every draw.  The
    grid should span the lengths the constant will be used at, since the
    finite-length rate drifts before settling.
    """
    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    rng = np.random.Generator(np.random.Philox(seed))
    best = math.inf
    for n in n_grid:
        checked = 0
        while checked < samples_per_n:
            s = StateSequence(rng.integers(0, family.num_states, size=n),
                              family.num_states)
            x = rng.choice(pv.size, size=n, p=pv)
            if not state_typical_input(x, s, pv, params):
                continue
            p = conditional_typical_prob_exact(x, s, pv, family, params.doubled())
            checked += 1
            if p >= 1.0:
                continue
            if p <= 0.0:
                return 0.0
            best = min(best, -math.log2(1.0 - p) / n)
    return best

"""Membership examples plus the exhaustive N=6 verification of the
probability, cardinality, and conditional-typicality bounds (binary
alphabets, relative deviation, zero violations)."""

import itertools
import math

import numpy as np
import pytest

from avwc.channels import ChannelFamily, StateSequence, bsc, enumerate_words
from avwc.info import avg_state_measures, output_distributions
from avwc.typicality import (TypicalityParams, calibrate_nu1, calibrate_nu2,
                             conditional_typical_mask,
                             conditional_typical_prob_exact, frequent_states,
                             jointly_typical, letter_typical, min_prob_constants,
                             state_typical_input, state_typical_output,
                             typical_input_mask, typical_output_mask,
                             typical_prob_exact)

UNIFORM = np.array([0.5, 0.5])


# ---------------------------------------------------------------------------
# Frequent states and letter typicality.

def test_frequent_states_balanced_and_skewed():
    s = StateSequence.from_string("0" * 10 + "1" * 10)
    assert set(frequent_states(s, 0.5)) == {0, 1}
    s2 = StateSequence.from_string("0" * 18 + "1" * 2)
    assert set(frequent_states(s2, 0.5)) == {0}


def test_frequent_states_threshold_is_strict():
    # Threshold N*eta/|S| = 10 with eta -> 1: counts of exactly 10 are excluded.
    s = StateSequence.from_string("0" * 10 + "1" * 10)
    assert len(frequent_states(s, 0.9999999)) == 2  # 10 > 9.99...
    assert len(frequent_states(s, 1.0 - 1e-12)) == 2
    # exact equality case via a 2-state sequence of length 4, eta such that
    # the threshold is exactly 1: a state seen once must be excluded
    s3 = StateSequence.from_string("0001")
    assert set(frequent_states(s3, 0.5)) == {0}  # threshold 1, count 1 not > 1


def test_letter_typical_exact_type_any_delta():
    word = [0, 1, 0, 1]
    assert letter_typical(word, UNIFORM, 0.0)
    assert letter_typical(word, UNIFORM, 0.0, relative=False)


@pytest.mark.parametrize("relative", [True, False])
def test_letter_typical_five_and_seven_zeros(relative):
    five = [0] * 5 + [1] * 5
    seven = [0] * 7 + [1] * 3
    assert letter_typical(five, UNIFORM, 0.12, relative=relative)
    assert not letter_typical(seven, UNIFORM, 0.12, relative=relative)


def test_letter_typical_zero_prob_letter():
    assert not letter_typical([0, 1, 2], np.array([0.5, 0.5, 0.0]), 0.3)


# ---------------------------------------------------------------------------
# The worked two-state membership example (absolute deviation).

def _worked_example():
    return TypicalityParams(0.12, 0.5, relative=False)


def test_block_membership_balanced_states_in():
    params = _worked_example()
    s = StateSequence.from_string("0" * 10 + "1" * 10)
    x = [int(c) for c in "00000111110000001111"]
    assert state_typical_input(x, s, UNIFORM, params)


def test_block_membership_balanced_states_out():
    params = _worked_example()
    s = StateSequence.from_string("0" * 10 + "1" * 10)
    x = [int(c) for c in "00000111110000000111"]
    assert not state_typical_input(x, s, UNIFORM, params)


def test_block_membership_rare_state_unconstrained():
    # The two positions of the rare state hold atypical letters, but only the
    # frequent state's block must pass the test.
    params = _worked_example()
    s = StateSequence.from_string("0" * 18 + "1" * 2)
    x = [int(c) for c in "00000000011111111111"]
    assert state_typical_input(x, s, UNIFORM, params)
    block = x[:18]
    assert letter_typical(block, UNIFORM, 0.12, relative=False)
    assert not letter_typical(x[18:], UNIFORM, 0.12, relative=False)


# ---------------------------------------------------------------------------
# Exact typical-set probability against brute-force enumeration.

def brute_force_block_prob(mu, p, delta, relative):
    """Oracle: enumerate every word of length mu and add up typical ones."""
    total = 0.0
    for word in itertools.product(range(len(p)), repeat=mu):
        if letter_typical(word, p, delta, relative=relative):
            total += math.prod(p[c] for c in word)
    return total


@pytest.mark.parametrize("relative", [True, False])
def test_typical_prob_exact_matches_brute_force(relative):
    params = TypicalityParams(0.12, 0.5, relative=relative)
    s = StateSequence.from_string("0" * 10 + "1" * 10)
    got = typical_prob_exact(UNIFORM, s, params)
    block = brute_force_block_prob(10, UNIFORM, 0.12, relative)
    assert got == pytest.approx(block**2, abs=1e-12)


def test_typical_prob_exact_worked_example_value():
    # Absolute deviation 0.12 keeps blocks with 4..6 zeros out of 10:
    # (sum_{k=4}^{6} C(10,k) / 2^10)^2 = (672/1024)^2.
    params = TypicalityParams(0.12, 0.5, relative=False)
    s = StateSequence.from_string("0" * 10 + "1" * 10)
    assert typical_prob_exact(UNIFORM, s, params) == pytest.approx((672 / 1024) ** 2,
                                                                   abs=1e-12)


def test_typical_prob_vacuous_delta():
    params = TypicalityParams(1.0, 0.5, relative=True)
    s = StateSequence.from_string("0011")
    assert typical_prob_exact(UNIFORM, s, params) == pytest.approx(1.0, abs=1e-12)


def test_typical_prob_monotone_in_delta():
    s = StateSequence.from_string("000111")
    values = [typical_prob_exact(UNIFORM, s, TypicalityParams(d, 0.5))
              for d in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_typical_prob_skewed_law():
    p = np.array([0.8, 0.2])
    params = TypicalityParams(0.3, 0.5, relative=True)
    s = StateSequence.from_string("0" * 8)
    got = typical_prob_exact(p, s, params)
    assert got == pytest.approx(brute_force_block_prob(8, p, 0.3, True), abs=1e-12)


# ---------------------------------------------------------------------------
# Exhaustive N = 6 verification of every stated bound (relative deviation).

N6 = 6


def suite_instances():
    return [
        (UNIFORM, ChannelFamily.from_matrices([bsc(0.1), bsc(0.3)]),
         TypicalityParams(0.45, 0.5)),
        (np.array([0.7, 0.3]), ChannelFamily.from_matrices([bsc(0.2), bsc(0.45)]),
         TypicalityParams(0.25, 0.5)),
        (UNIFORM, ChannelFamily.from_matrices([np.eye(2), bsc(0.25)]),
         TypicalityParams(0.45, 0.6)),
    ]


def seq_prob(dists_by_state, s, word):
    return math.prod(dists_by_state[si][wi] for si, wi in zip(s.symbols, word))


def all_state_seqs(n=N6):
    return [StateSequence(row, 2) for row in enumerate_words(2, n)]


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_output_probability_sandwich_and_cardinality(idx):
    """Every typical output word's probability sits strictly inside the
    stated exponential window, and the typical set size obeys the
    corresponding counting bound."""
    p_x, fam, params = suite_instances()[idx]
    out = output_distributions(p_x, fam)
    consts = min_prob_constants(p_x, fam)
    y_words = enumerate_words(2, N6)
    violations = 0
    for s in all_state_seqs():
        h_y, _, _ = avg_state_measures(np.bincount(s.symbols, minlength=2) / N6,
                                       fam, p_x)
        mask = typical_output_mask(y_words, s, out, params)
        low = -N6 * ((1 + params.delta) * h_y - params.eta * math.log2(consts.m_y))
        high = -N6 * (1 - params.delta - params.eta) * h_y
        for y in y_words[mask]:
            log_p = math.log2(seq_prob(out, s, y))
            if not (low < log_p < high):
                violations += 1
        if not mask.sum() < 2.0 ** (-low):
            violations += 1
    assert violations == 0


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_joint_implies_marginals(idx):
    p_x, fam, params = suite_instances()[idx]
    out = output_distributions(p_x, fam)
    words = enumerate_words(2, N6)
    for s in all_state_seqs():
        for x in words:
            mask = conditional_typical_mask(x, words, s, p_x, fam, params)
            for y in words[mask]:
                assert state_typical_input(x, s, p_x, params)
                assert state_typical_output(y, s, out, params)


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_conditional_probability_sandwich(idx):
    """Jointly typical pairs obey the conditional-probability window."""
    p_x, fam, params = suite_instances()[idx]
    consts = min_prob_constants(p_x, fam)
    words = enumerate_words(2, N6)
    violations = 0
    for s in all_state_seqs():
        _, h_y_x, _ = avg_state_measures(np.bincount(s.symbols, minlength=2) / N6,
                                         fam, p_x)
        low = -N6 * ((1 + params.delta) * h_y_x - params.eta * math.log2(consts.m_xy))
        high = -N6 * (1 - params.delta - params.eta) * h_y_x
        for x in words:
            mask = conditional_typical_mask(x, words, s, p_x, fam, params)
            for y in words[mask]:
                cond = math.prod(fam.matrices[si, xi, yi]
                                 for si, xi, yi in zip(s.symbols, x, y))
                log_p = math.log2(cond)
                if not (low - 1e-12 <= log_p <= high + 1e-12):
                    violations += 1
    assert violations == 0


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_unconditional_hit_probability_bound(idx):
    """For a typical input, the chance that an independently drawn output
    word lands in its conditional typical set decays at the stated rate."""
    p_x, fam, params = suite_instances()[idx]
    out = output_distributions(p_x, fam)
    consts = min_prob_constants(p_x, fam)
    words = enumerate_words(2, N6)
    violations = 0
    for s in all_state_seqs():
        p_type = np.bincount(s.symbols, minlength=2) / N6
        h_y, _, i_avg = avg_state_measures(p_type, fam, p_x)
        bound = 2.0 ** (-N6 * (i_avg - (2 * params.delta + params.eta) * h_y
                               + params.eta * math.log2(consts.m_xy)))
        in_mask = typical_input_mask(words, s, p_x, params)
        for x in words[in_mask]:
            cond_mask = conditional_typical_mask(x, words, s, p_x, fam, params)
            hit = sum(seq_prob(out, s, y) for y in words[cond_mask])
            if not hit < bound:
                violations += 1
    assert violations == 0


def test_calibrated_nu1_holds_across_lengths():
    p_x, fam, params = suite_instances()[0]
    seqs = [StateSequence.from_string(t) for t in
            ("000111", "0101", "00001111", "000000111111", "0000000011111111")]
    nu1 = calibrate_nu1(p_x, params, seqs)
    assert nu1 > 0
    check = 0.99 * nu1
    for s in seqs:
        assert typical_prob_exact(p_x, s, params) > 1 - 2.0 ** (-s.n * check)


def test_calibrated_nu2_exhaustive_n6():
    # The doubled deviation must leave no integer-free count boxes at this
    # block length, hence the wider delta than the sandwich tests use.
    _, fam, _ = suite_instances()[0]
    p_x = UNIFORM
    params = TypicalityParams(0.6, 0.5)
    seqs = all_state_seqs()
    nu2 = calibrate_nu2(p_x, fam, params, seqs[:16])
    assert nu2 > 0
    check = 0.99 * nu2
    words = enumerate_words(2, N6)
    for s in seqs[:16]:
        mask = typical_input_mask(words, s, p_x, params)
        for x in words[mask]:
            prob = conditional_typical_prob_exact(x, s, p_x, fam, params.doubled())
            assert prob > 1 - 2.0 ** (-N6 * check)


def test_nu2_transfers_to_long_blocks():
    """A decay constant calibrated across a grid of block lengths keeps
    working on fresh draws at N=40 (per-input probabilities are exact block
    products, so no estimation error enters)."""
    from avwc.typicality import calibrate_nu2_sampled

    _, fam, _ = suite_instances()[0]
    p_x = UNIFORM
    params = TypicalityParams(0.6, 0.5)
    nu2 = 0.99 * calibrate_nu2_sampled(p_x, fam, params, n_grid=(6, 12, 20, 28, 40),
                                       samples_per_n=150, seed=5)
    assert nu2 > 0
    rng = np.random.Generator(np.random.Philox(11))
    n = 40
    checked = 0
    while checked < 100:
        s = StateSequence(rng.integers(0, 2, size=n), 2)
        x = rng.choice(2, size=n, p=p_x)
        if not state_typical_input(x, s, p_x, params):
            continue
        prob = conditional_typical_prob_exact(x, s, p_x, fam, params.doubled())
        assert prob > 1 - 2.0 ** (-n * nu2)
        checked += 1


def test_joint_membership_requires_positive_coordinates():
    fam = ChannelFamily.from_matrices([np.eye(2)])
    s = StateSequence(np.zeros(4, dtype=np.int64), 1)
    params = TypicalityParams(1.0, 0.5)
    x = np.array([0, 1, 0, 1])
    assert jointly_typical(x, x, s, UNIFORM, fam, params)
    assert not jointly_typical(x, 1 - x, s, UNIFORM, fam, params)

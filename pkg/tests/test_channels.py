import math

import numpy as np
import pytest

from avwc.channels import (ChannelFamily, CostModel, Distribution, StateSequence,
                           bsc, cost, cost_of_type, enumerate_words, mix,
                           product_alignment, sequence_transition_prob, sequence_type)
from avwc.errors import ValidationError


def test_distribution_validation():
    Distribution(np.array([0.25, 0.75]))
    with pytest.raises(ValidationError):
        Distribution(np.array([0.3, 0.69]))  # sums to 0.99, no silent renormalize
    with pytest.raises(ValidationError):
        Distribution(np.array([1.2, -0.2]))


def test_family_validation_rejects_bad_rows():
    with pytest.raises(ValidationError):
        ChannelFamily.from_matrices([[[0.5, 0.6], [0.5, 0.5]]])
    with pytest.raises(ValidationError):
        ChannelFamily.from_matrices([[[1.0, 0.0], [-0.1, 1.1]]])
    with pytest.raises(ValidationError):
        ChannelFamily(np.zeros((0, 2, 2)))


def test_mix_point_mass_recovers_member():
    fam = ChannelFamily.from_matrices([bsc(0.1), bsc(0.3)])
    for s in range(2):
        w = mix(fam, Distribution.point_mass(s, 2))
        assert np.array_equal(w, fam.matrices[s])


def test_mix_of_symmetric_channels():
    # Mixing BSC(q0) and BSC(q1) with weights (p, 1-p) is BSC(p q0 + (1-p) q1).
    q0, q1, p = 0.05, 0.4, 0.3
    fam = ChannelFamily.from_matrices([bsc(q0), bsc(q1)])
    got = mix(fam, Distribution(np.array([p, 1 - p])))
    assert np.allclose(got, bsc(p * q0 + (1 - p) * q1), atol=1e-15)


def test_mix_matches_entrywise_oracle():
    rng = np.random.Generator(np.random.Philox(5))
    mats = rng.dirichlet(np.ones(3), size=(2, 3))
    fam = ChannelFamily.from_matrices(list(mats))
    q = np.array([0.3, 0.7])
    got = mix(fam, Distribution(q))
    for x in range(3):
        for y in range(3):
            expected = sum(q[s] * mats[s][x][y] for s in range(2))
            assert got[x, y] == pytest.approx(expected, abs=1e-15)


def test_mix_closure():
    # Mixing two mixtures equals mixing once with the product weights.
    rng = np.random.Generator(np.random.Philox(9))
    fam = ChannelFamily.from_matrices(list(rng.dirichlet(np.ones(2), size=(3, 2))))
    q1 = rng.dirichlet(np.ones(3))
    q2 = rng.dirichlet(np.ones(3))
    lam = 0.4
    inner = lam * mix(fam, Distribution(q1)) + (1 - lam) * mix(fam, Distribution(q2))
    outer = mix(fam, Distribution(lam * q1 + (1 - lam) * q2))
    assert np.abs(inner - outer).max() <= 1e-12


def test_mix_rejects_wrong_state_count():
    fam = ChannelFamily.from_matrices([bsc(0.1), bsc(0.3)])
    with pytest.raises(ValidationError):
        mix(fam, Distribution(np.array([1.0])))


def test_sequence_prob_identity_channel():
    fam = ChannelFamily.from_matrices([np.eye(2), np.eye(2)])
    s = StateSequence(np.array([0, 1, 0, 1]), 2)
    x = np.array([0, 1, 1, 0])
    assert sequence_transition_prob(fam, x, s, x) == 1.0
    assert sequence_transition_prob(fam, x, s, 1 - x) == 0.0


def test_sequence_prob_single_step_is_matrix_entry():
    fam = ChannelFamily.from_matrices([bsc(0.1), bsc(0.25)])
    s = StateSequence(np.array([1]), 2)
    assert sequence_transition_prob(fam, [0], s, [1]) == pytest.approx(0.25, abs=1e-15)


def test_sequence_prob_matches_log_oracle():
    fam = ChannelFamily.from_matrices([bsc(0.1), bsc(0.2)])
    s = StateSequence(np.array([0, 1, 1]), 2)
    x = np.array([0, 1, 0])
    y = np.array([1, 1, 0])
    expected = math.exp(sum(math.log(fam.matrices[si, xi, yi])
                            for si, xi, yi in zip(s.symbols, x, y)))
    assert sequence_transition_prob(fam, x, s, y) == pytest.approx(expected, rel=1e-14)


def test_sequence_prob_length_mismatch():
    fam = ChannelFamily.from_matrices([bsc(0.1)])
    s = StateSequence(np.array([0, 0]), 1)
    with pytest.raises(ValidationError):
        sequence_transition_prob(fam, [0, 1, 0], s, [0, 1])


@pytest.mark.parametrize("n", [3, 6])
def test_sequence_prob_sums_to_one(n):
    fam = ChannelFamily.from_matrices([bsc(0.15), bsc(0.4)])
    rng = np.random.Generator(np.random.Philox(2))
    s = StateSequence(rng.integers(0, 2, size=n), 2)
    x = rng.integers(0, 2, size=n)
    total = sum(sequence_transition_prob(fam, x, s, y)
                for y in enumerate_words(2, n))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_product_alignment_singletons():
    main = ChannelFamily.from_matrices([bsc(0.1)])
    wiretap = ChannelFamily.from_matrices([bsc(0.3)])
    pair = product_alignment(main, wiretap)
    assert pair.num_states == 1
    assert np.array_equal(pair.main.matrices[0], bsc(0.1))
    assert np.array_equal(pair.wiretap.matrices[0], bsc(0.3))


def test_product_alignment_duplicates_matrices():
    main = ChannelFamily.from_matrices([bsc(0.1), bsc(0.2)])
    wiretap = ChannelFamily.from_matrices([bsc(0.3), bsc(0.4), bsc(0.45)])
    pair = product_alignment(main, wiretap)
    assert pair.num_states == 6
    # lexicographic (s, t): main matrix repeats over t, wiretap tiles over s
    for i, (s, t) in enumerate((s, t) for s in range(2) for t in range(3)):
        assert np.array_equal(pair.main.matrices[i], main.matrices[s])
        assert np.array_equal(pair.wiretap.matrices[i], wiretap.matrices[t])


def test_product_alignment_rejects_input_mismatch():
    main = ChannelFamily.from_matrices([bsc(0.1)])
    wiretap = ChannelFamily.from_matrices([np.full((3, 2), 0.5)])
    with pytest.raises(ValidationError):
        product_alignment(main, wiretap)


def test_product_alignment_preserves_bounds_for_state_free_wiretap():
    # When the wiretap channel does not depend on its state, collapsing the
    # product encoding must not change the secrecy bound.
    from avwc.capacity import less_noisy_secrecy_capacity
    from avwc.channels import WiretapPair

    main = ChannelFamily.from_matrices([bsc(0.05), bsc(0.15)])
    wiretap_one = ChannelFamily.from_matrices([bsc(0.35)])
    aligned = product_alignment(main, wiretap_one)
    direct = WiretapPair(main, ChannelFamily.from_matrices([bsc(0.35), bsc(0.35)]))
    a = less_noisy_secrecy_capacity(aligned, csr=True).value
    b = less_noisy_secrecy_capacity(direct, csr=True).value
    assert a == pytest.approx(b, abs=1e-6)


def test_sequence_type_examples():
    s = StateSequence.from_string("0" * 10 + "1" * 10)
    assert np.allclose(sequence_type(s).probs, [0.5, 0.5])
    s2 = StateSequence.from_string("0" * 18 + "1" * 2)
    assert np.allclose(sequence_type(s2).probs, [0.9, 0.1])


def test_cost_constant_and_bilinear():
    model = CostModel(np.array([1.0, 1.0]), budget=1.0)
    rng = np.random.Generator(np.random.Philox(3))
    for _ in range(5):
        s = StateSequence(rng.integers(0, 2, size=12), 2)
        assert cost(s, model) == 1.0
    model2 = CostModel(np.array([0.25, 2.0]), budget=1.0)
    s = StateSequence.from_string("001011")
    assert cost(s, model2) == pytest.approx(cost_of_type(sequence_type(s), model2),
                                            abs=0.0)


def test_cost_model_rejects_negative():
    with pytest.raises(ValidationError):
        CostModel(np.array([-0.5, 1.0]), budget=1.0)

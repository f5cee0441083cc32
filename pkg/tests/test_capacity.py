import numpy as np
import pytest

from avwc.capacity import (ConstraintSet, avc_capacity_random, avc_csr_capacity,
                           avwc_csr_lower_bound, avwc_lower_bound, avwc_upper_bound,
                           evaluate_csr_objective, evaluate_less_noisy_objective,
                           evaluate_lower_objective, evaluate_random_code_objective,
                           less_noisy_secrecy_capacity)
from avwc.channels import ChannelFamily, CostModel, WiretapPair, bsc
from avwc.errors import ValidationError
from avwc.info import binary_entropy, mutual_information
from avwc.presets import load_preset


def grid_capacity_oracle(w, num=4001):
    """Independent oracle for binary-input channel capacity: exhaustive grid."""
    ts = np.linspace(0.0, 1.0, num)
    return max(mutual_information([1 - t, t], w) for t in ts)


IDENT_FLIP = ChannelFamily.from_matrices([np.eye(2), np.array([[0., 1.], [1., 0.]])])


# ---------------------------------------------------------------------------
# Capacities of the plain state-varying channel.

def test_random_code_capacity_single_bsc():
    fam = ChannelFamily.from_matrices([bsc(0.1)])
    res = avc_capacity_random(fam)
    assert res.value == pytest.approx(1 - binary_entropy(0.1), abs=1e-9)
    assert res.value == pytest.approx(grid_capacity_oracle(bsc(0.1)), abs=1e-7)
    assert res.diagnostics["duality_gap"] <= 1e-5


def test_random_code_capacity_identity_flip_is_zero():
    res = avc_capacity_random(IDENT_FLIP)
    assert res.value == pytest.approx(0.0, abs=1e-6)
    assert np.allclose(res.worst_q, [0.5, 0.5], atol=1e-3)


def test_random_code_capacity_state_free_family():
    fam = ChannelFamily.from_matrices([bsc(0.2), bsc(0.2)])
    res = avc_capacity_random(fam)
    assert res.value == pytest.approx(1 - binary_entropy(0.2), abs=1e-8)


def test_csr_capacity_identity_flip_is_one():
    res = avc_csr_capacity(IDENT_FLIP)
    assert res.value == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(res.input_dist, [0.5, 0.5], atol=1e-6)


def test_csr_capacity_degenerate_min():
    fam = ChannelFamily.from_matrices([bsc(0.15), bsc(0.15)])
    res = avc_csr_capacity(fam)
    assert res.value == pytest.approx(1 - binary_entropy(0.15), abs=1e-9)


def test_csr_capacity_three_state_example():
    # For this family sum_s H(Y_s | X = x) is the same for every input, so
    # min_s I is capped by (2 - 2 h(1/3))/3, attained at the uniform input.
    fam = load_preset("prop-3.1-example")
    res = avc_csr_capacity(fam)
    expected = (2 - 2 * binary_entropy(1 / 3)) / 3
    assert res.value == pytest.approx(expected, abs=1e-7)
    assert np.allclose(res.input_dist, [1 / 3] * 3, atol=1e-4)


def test_capacity_ordering_chain():
    # random-code value <= receiver-informed value <= worst single channel.
    for fam in (IDENT_FLIP,
                ChannelFamily.from_matrices([bsc(0.05), bsc(0.3)]),
                load_preset("prop-3.1-example")):
        rnd = avc_capacity_random(fam).value
        csr = avc_csr_capacity(fam).value
        compound = min(grid_capacity_oracle(fam.matrices[s])
                       for s in range(fam.num_states)) if fam.num_inputs == 2 else None
        assert rnd <= csr + 1e-7
        if compound is not None:
            assert csr <= compound + 1e-6


def test_reported_argmax_reproduces_value():
    fam = ChannelFamily.from_matrices([bsc(0.05), bsc(0.3)])
    res = avc_csr_capacity(fam)
    assert evaluate_csr_objective(fam, res.input_dist) == pytest.approx(res.value,
                                                                        abs=1e-6)
    res2 = avc_capacity_random(fam)
    assert evaluate_random_code_objective(fam, res2.input_dist) == pytest.approx(
        res2.value, abs=1e-6)


# ---------------------------------------------------------------------------
# Wiretap lower bounds.

def degraded_pair(p_main, p_tap):
    return WiretapPair(ChannelFamily.from_matrices([bsc(p_main)]),
                       ChannelFamily.from_matrices([bsc(p_tap)]))


def test_lower_bound_degraded_single_state():
    pair = degraded_pair(0.1, 0.3)
    res = avwc_lower_bound(pair)
    assert res.value == pytest.approx(binary_entropy(0.3) - binary_entropy(0.1),
                                      abs=1e-6)
    # cross-check with an exhaustive binary-prefix search oracle
    best = 0.0
    for lam in np.linspace(0.1, 0.9, 9):
        for a in np.linspace(0, 1, 21):
            for b in np.linspace(0, 1, 21):
                p_ux = np.array([[lam * (1 - a), lam * a],
                                 [(1 - lam) * (1 - b), (1 - lam) * b]])
                from avwc.info import prefix_mutual_information
                gain = (prefix_mutual_information(p_ux, bsc(0.1))
                        - prefix_mutual_information(p_ux, bsc(0.3)))
                best = max(best, gain)
    assert res.value >= best - 1e-6


def test_lower_bound_null_wiretap_equals_main_capacity():
    main = ChannelFamily.from_matrices([bsc(0.05), bsc(0.2)])
    pair = WiretapPair(main, ChannelFamily.from_matrices([bsc(0.5), bsc(0.5)]))
    res = avwc_lower_bound(pair)
    assert res.value == pytest.approx(avc_capacity_random(main).value, abs=1e-5)


def test_csr_lower_bound_null_wiretap_equals_csr_capacity():
    main = ChannelFamily.from_matrices([bsc(0.05), bsc(0.2)])
    pair = WiretapPair(main, ChannelFamily.from_matrices([bsc(0.5), bsc(0.5)]))
    res = avwc_csr_lower_bound(pair)
    assert res.value == pytest.approx(avc_csr_capacity(main).value, abs=1e-5)


def test_csr_lower_bound_single_state_equals_plain():
    pair = degraded_pair(0.1, 0.3)
    a = avwc_lower_bound(pair).value
    b = avwc_csr_lower_bound(pair).value
    assert a == pytest.approx(b, abs=1e-6)


def test_csr_lower_dominates_plain_lower():
    pair = load_preset("example-6.2", p=0.25)
    lower = avwc_lower_bound(pair)
    lower_csr = avwc_csr_lower_bound(pair)
    assert lower_csr.value >= lower.value - 1e-6


def test_lower_bound_reevaluation_and_flags():
    pair = load_preset("example-6.2", p=0.2)
    res = avwc_lower_bound(pair)
    p_u = res.prefix_joint.sum(axis=1)
    rows = res.prefix_joint / p_u[:, None]
    again = evaluate_lower_objective(pair, p_u, rows, ConstraintSet.all_states(),
                                     csr=False)
    assert max(0.0, again) == pytest.approx(res.value, abs=1e-6)
    assert res.flagged("lower-bound-certified")


def test_prefix_cardinality_monotone():
    main = ChannelFamily.from_matrices([np.array([[0.8, 0.15, 0.05],
                                                  [0.1, 0.8, 0.1],
                                                  [0.05, 0.15, 0.8]])])
    tap = ChannelFamily.from_matrices([np.array([[0.5, 0.3, 0.2],
                                                 [0.3, 0.4, 0.3],
                                                 [0.2, 0.3, 0.5]])])
    pair = WiretapPair(main, tap)
    v2 = avwc_lower_bound(pair, prefix_cardinality=2, seed=3).value
    v3 = avwc_lower_bound(pair, prefix_cardinality=3, seed=3).value
    assert v3 >= v2 - 1e-9


# ---------------------------------------------------------------------------
# Constrained adversaries.

def test_cost_budget_slack_recovers_unconstrained():
    pair = load_preset("example-6.2", p=0.2)
    model = CostModel(np.array([1.0, 2.0]), budget=2.0)  # budget >= max cost
    free = avwc_lower_bound(pair)
    constrained = avwc_lower_bound(pair, ConstraintSet.cost_budget(model))
    assert constrained.value == pytest.approx(free.value, abs=1e-5)


def test_cost_budget_tightens_the_adversary():
    pair = load_preset("example-6.2", p=0.2)
    model = CostModel(np.array([0.0, 1.0]), budget=0.25)  # state 1 rationed
    constrained = avwc_lower_bound(pair, ConstraintSet.cost_budget(model))
    free = avwc_lower_bound(pair)
    assert constrained.value >= free.value - 1e-6


def test_single_type_constraint():
    pair = load_preset("example-6.2", p=0.2)
    res = avwc_lower_bound(pair, ConstraintSet.single_type(np.array([0.5, 0.5])))
    assert res.value >= 0.0
    assert np.allclose(res.worst_q, [0.5, 0.5])


def test_empty_cost_budget_rejected():
    model = CostModel(np.array([1.0, 2.0]), budget=0.5)
    with pytest.raises(ValidationError):
        ConstraintSet.cost_budget(model)


# ---------------------------------------------------------------------------
# Converse-side bound and less-noisy capacities.

def test_upper_bound_zero_when_wiretap_equals_main():
    fam = ChannelFamily.from_matrices([bsc(0.2)])
    pair = WiretapPair(fam, fam)
    res = avwc_upper_bound(pair, csr=True)
    assert res.value == pytest.approx(0.0, abs=1e-9)
    assert res.flagged("inner-max-heuristic")


def test_upper_bound_collapses_for_dominated_pair():
    # State-free main strictly better than the wiretap channel: the converse
    # bound meets the no-prefix capacity value.
    pair = WiretapPair(ChannelFamily.from_matrices([bsc(0.05), bsc(0.05)]),
                       ChannelFamily.from_matrices([bsc(0.25), bsc(0.25)]))
    upper = avwc_upper_bound(pair, csr=False)
    direct = less_noisy_secrecy_capacity(pair, csr=False)
    assert upper.value == pytest.approx(direct.value, abs=1e-4)


def test_bounds_ordering_on_sweep():
    for p in (0.1, 0.25, 0.4):
        pair = load_preset("example-6.1", p=p)
        lower = avwc_csr_lower_bound(pair)
        upper = avwc_upper_bound(pair, csr=True)
        assert lower.value <= upper.value + 1e-4


def test_less_noisy_capacity_reduces_for_null_wiretap():
    pair = load_preset("example-6.2", p=0.5)  # q = 0.5, wiretap carries nothing
    cap = less_noisy_secrecy_capacity(pair, csr=False)
    main_only = avc_capacity_random(pair.main)
    assert cap.value == pytest.approx(main_only.value, abs=1e-6)


def test_less_noisy_capacity_degenerate_endpoint():
    pair = load_preset("example-6.2", p=1e-9)
    for csr in (False, True):
        assert less_noisy_secrecy_capacity(pair, csr=csr).value == pytest.approx(
            0.0, abs=1e-6)


def test_csr_capacity_dominates_and_is_strict_inside():
    gaps = []
    for p in (0.05, 0.25, 0.45):
        pair = load_preset("example-6.2", p=p)
        csr = less_noisy_secrecy_capacity(pair, csr=True)
        avwc = less_noisy_secrecy_capacity(pair, csr=False)
        assert csr.value >= avwc.value - 1e-9
        gaps.append(csr.value - avwc.value)
    assert max(gaps) > 1e-3


def test_less_noisy_argmax_reproduces_value():
    pair = load_preset("example-6.2", p=0.3)
    res = less_noisy_secrecy_capacity(pair, csr=True)
    assert evaluate_less_noisy_objective(pair, res.input_dist, csr=True) == \
        pytest.approx(res.value, abs=1e-8)


def test_values_are_nonnegative_and_hypothesis_recorded():
    pair = load_preset("example-6.1", p=0.3)
    res = less_noisy_secrecy_capacity(pair, csr=True, hypothesis_grade="strong")
    assert res.value >= 0.0
    assert res.diagnostics["less_noisy_grade"] == "strong"

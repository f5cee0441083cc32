import numpy as np
import pytest

from avwc.channels import ChannelFamily, WiretapPair, bsc
from avwc.ordering import (classify_degradation, classify_less_noisy,
                           csr_max_error_positive, degradation_residual,
                           is_degraded, is_less_noisy)
from avwc.presets import load_preset


def bsc_degraded_analytic(p2, p1):
    """BSC(p1) composed with BSC(a) is BSC(p1(1-a) + a(1-p1)), which covers
    exactly the crossovers between p1 and 1-p1."""
    return min(p1, 1 - p1) <= p2 <= max(p1, 1 - p1)


def test_self_degradation_identity_witness():
    w = bsc(0.2)
    ok, vprime = is_degraded(w, w)
    assert ok
    assert np.allclose(w @ vprime, w, atol=1e-8)


def test_bsc_degradation_matches_analytic_grid():
    grid = np.linspace(0.05, 0.95, 19)
    for p1 in grid:
        for p2 in grid:
            ok, _ = is_degraded(bsc(p2), bsc(p1), tol=1e-9)
            assert ok == bsc_degraded_analytic(p2, p1), (p1, p2)


def test_degradation_residual_positive_when_infeasible():
    t, _ = degradation_residual(bsc(0.05), bsc(0.2))
    assert t > 1e-3


def test_erasure_pair_statewise_degradation():
    # The bundled erasure-style pair: the wiretap channel factors through the
    # main channel for both states and any (p, q).
    for p in (0.1, 0.25, 0.4):
        pair = load_preset("example-6.2", p=p)
        for s in range(2):
            for s2 in range(2):
                ok, _ = is_degraded(pair.wiretap.matrices[s2], pair.main.matrices[s])
                assert ok


def test_less_noisy_reflexive_and_null_wiretap():
    w = bsc(0.15)
    ok, info = is_less_noisy(w, w, search_budget=8)
    assert ok
    ok2, _ = is_less_noisy(np.array([[0.9, 0.1], [0.2, 0.8]]), bsc(0.5),
                           search_budget=8)
    assert ok2


def test_less_noisy_detects_violation_with_witness():
    # Wiretap strictly better than main: the reverse order must fail, and the
    # witness must certify it as an explicit binary-auxiliary construction.
    from avwc.info import mutual_information

    w, v = bsc(0.3), bsc(0.05)
    ok, info = is_less_noisy(w, v, search_budget=16)
    assert not ok
    p1, p2, lam = info["p1"], info["p2"], info["lam"]
    mixture = lam * p1 + (1 - lam) * p2

    def f(p):
        return mutual_information(p, w) - mutual_information(p, v)

    assert f(mixture) - lam * f(p1) - (1 - lam) * f(p2) < -1e-9


def test_less_noisy_mixtures_of_erasure_pair():
    # At q = 2p(1-p) every mixture of the main family dominates the (state
    # independent) wiretap channel.
    p = 0.25
    pair = load_preset("example-6.2", p=p)
    for lam in (0.0, 0.3, 0.5, 0.8, 1.0):
        wq = lam * pair.main.matrices[0] + (1 - lam) * pair.main.matrices[1]
        ok, _ = is_less_noisy(wq, pair.wiretap.matrices[0], search_budget=8)
        assert ok


def test_classify_weak_not_strong():
    verdict = classify_degradation(load_preset("order-weak"), grid_resolution=8)
    assert verdict.grade == "weak"
    assert "s" in verdict.witness  # the failing state pair is reported


def test_classify_strong_not_severe():
    verdict = classify_degradation(load_preset("order-strong"), grid_resolution=8)
    assert verdict.grade == "strong"
    assert "q" in verdict.witness


def test_classify_identical_single_state_pair_severe():
    fam = ChannelFamily.from_matrices([bsc(0.2)])
    verdict = classify_degradation(WiretapPair(fam, fam), grid_resolution=4)
    assert verdict.grade == "severe"


def test_classify_less_noisy_order_strong_pair():
    verdict = classify_less_noisy(load_preset("order-strong"), grid_resolution=4,
                                  search_budget=4)
    # strongly degraded implies at least strongly less noisy
    assert verdict.at_least("strong")
    assert verdict.numerically_supported


def test_degraded_implies_less_noisy_on_random_pairs():
    rng = np.random.Generator(np.random.Philox(31))
    found = 0
    while found < 6:
        w = rng.dirichlet(np.ones(3), size=2)
        vprime = rng.dirichlet(np.ones(3), size=3)
        v = w @ vprime  # degraded by construction
        ok, _ = is_degraded(v, w)
        assert ok
        ln, info = is_less_noisy(w, v, search_budget=8)
        assert ln, info
        found += 1


def test_degradation_transitive_on_composed_chain():
    rng = np.random.Generator(np.random.Philox(37))
    w = rng.dirichlet(np.ones(3), size=2)
    k1 = rng.dirichlet(np.ones(3), size=3)
    k2 = rng.dirichlet(np.ones(2), size=3)
    v = w @ k1
    u = v @ k2
    assert is_degraded(v, w)[0]
    assert is_degraded(u, v)[0]
    assert is_degraded(u, w)[0]


def test_positivity_identity_flip_family():
    fam = load_preset("remark-3.1")
    flag, witness = csr_max_error_positive(fam)
    assert flag
    assert witness == (0, 1)


def test_positivity_identical_rows_family():
    fam = ChannelFamily.from_matrices([np.array([[0.3, 0.7], [0.3, 0.7]]),
                                       np.array([[0.6, 0.4], [0.6, 0.4]])])
    flag, witness = csr_max_error_positive(fam)
    assert not flag
    assert witness is None


def test_positivity_pairwise_confusable_family():
    # Under state s the two inputs other than s share a row, so every input
    # pair is confusable under some state and the test must return false.
    a, b = [1 / 3, 2 / 3], [2 / 3, 1 / 3]
    fam = ChannelFamily.from_matrices([
        np.array([b, a, a]),
        np.array([a, b, a]),
        np.array([a, a, b]),
    ])
    flag, _ = csr_max_error_positive(fam)
    assert not flag

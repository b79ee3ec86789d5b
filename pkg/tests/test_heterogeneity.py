import math

import pytest
from hypothesis import given, strategies as st

from hetwsn.heterogeneity import (
    HeterogeneityConfig,
    NodeClass,
    class_counts,
    eligibility_window,
    epoch_length,
    initial_energy,
    node_classes,
    total_initial_energy,
    weighted_probability,
)

REL = 1e-12


def test_class_counts_case1(case1):
    assert class_counts(case1) == (50, 30, 20)


def test_class_counts_homogeneous():
    assert class_counts(HeterogeneityConfig(n=37, m=0.0)) == (37, 0, 0)


def test_class_counts_small():
    assert class_counts(HeterogeneityConfig(n=10, m=0.5, m0=0.4)) == (5, 3, 2)


@given(st.integers(0, 2000), st.floats(0, 1), st.floats(0, 1))
def test_class_counts_sum_to_n(n, m, m0):
    counts = class_counts(HeterogeneityConfig(n=n, m=m, m0=m0))
    assert sum(counts) == n
    assert min(counts) >= 0


def test_node_classes_are_ordered(case1):
    classes = node_classes(case1)
    assert classes == [NodeClass.NORMAL] * 50 + [NodeClass.ADVANCED] * 30 + [NodeClass.SUPER] * 20


def test_initial_energy(case1, case2):
    assert initial_energy(case1, NodeClass.NORMAL) == 0.5
    assert initial_energy(case1, NodeClass.ADVANCED) == pytest.approx(1.0, rel=REL)
    assert initial_energy(case2, NodeClass.SUPER) == pytest.approx(2.0, rel=REL)
    flat = HeterogeneityConfig(alpha=0.0, beta=0.0)
    assert {initial_energy(flat, k) for k in NodeClass} == {0.5}


def test_total_initial_energy(case1, case2):
    assert total_initial_energy(case1) == pytest.approx(85.0, rel=REL)
    assert total_initial_energy(case2) == pytest.approx(102.5, rel=REL)
    assert total_initial_energy(HeterogeneityConfig(n=40, m=0.0)) == pytest.approx(20.0, rel=REL)


@pytest.mark.parametrize("cfg", [
    HeterogeneityConfig(),
    HeterogeneityConfig(alpha=1.5, beta=3.0),
    HeterogeneityConfig(n=10, m=0.5, m0=0.4, alpha=0.7, beta=4.0, e0=1.3),
    HeterogeneityConfig(n=200, m=0.25, m0=0.5, alpha=2.0, beta=2.0),
])
def test_total_energy_matches_per_node_sum(cfg):
    n_norm, n_adv, n_super = class_counts(cfg)
    assert n_super == pytest.approx(cfg.n * cfg.m * cfg.m0)  # exact split, no rounding loss
    brute = math.fsum(initial_energy(cfg, k) for k in node_classes(cfg))
    assert total_initial_energy(cfg) == pytest.approx(brute, rel=REL)


def test_epoch_length(case1, case2):
    assert epoch_length(case1) == 17
    assert epoch_length(HeterogeneityConfig(m=0.0)) == 10
    assert epoch_length(case2) == 21


def test_weighted_probabilities_case1(case1):
    assert weighted_probability(case1, NodeClass.NORMAL) == pytest.approx(0.1 / 1.7, rel=REL)
    assert weighted_probability(case1, NodeClass.ADVANCED) == pytest.approx(0.2 / 1.7, rel=REL)
    assert weighted_probability(case1, NodeClass.SUPER) == pytest.approx(0.3 / 1.7, rel=REL)
    assert weighted_probability(case1, NodeClass.NORMAL) == pytest.approx(0.058824, abs=1e-6)
    assert weighted_probability(case1, NodeClass.SUPER) == pytest.approx(0.176471, abs=1e-6)


def test_weighted_probabilities_flat():
    cfg = HeterogeneityConfig(m=0.3, alpha=0.0, beta=0.0, p_opt=0.05)
    assert all(weighted_probability(cfg, k) == pytest.approx(0.05, rel=REL) for k in NodeClass)


def test_expected_ch_count_identity(case1):
    p = {k: weighted_probability(case1, k) for k in NodeClass}
    expected = 50 * p[NodeClass.NORMAL] + 30 * p[NodeClass.ADVANCED] + 20 * p[NodeClass.SUPER]
    assert expected == pytest.approx(10.0, rel=REL)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 5), st.floats(0, 5), st.floats(0.01, 0.2))
def test_expected_ch_count_identity_general(m, m0, a, b, p_opt):
    alpha, beta = sorted((a, b))
    cfg = HeterogeneityConfig(n=100, m=m, m0=m0, alpha=alpha, beta=beta, p_opt=p_opt)
    try:
        p = {k: weighted_probability(cfg, k) for k in NodeClass}
    except ValueError:
        return  # super probability reached 1
    expected = cfg.n * ((1 - m) * p[NodeClass.NORMAL] + m * (1 - m0) * p[NodeClass.ADVANCED]
                        + m * m0 * p[NodeClass.SUPER])
    assert expected == pytest.approx(cfg.n * p_opt, rel=1e-9)
    assert p[NodeClass.NORMAL] <= p[NodeClass.ADVANCED] <= p[NodeClass.SUPER]


def test_weighted_probability_too_large():
    cfg = HeterogeneityConfig(m=0.01, m0=1.0, alpha=0.0, beta=20.0, p_opt=0.5)
    with pytest.raises(ValueError):
        weighted_probability(cfg, NodeClass.SUPER)


def test_eligibility_windows(case1):
    # 1/p: 17, 8.5 -> 9 (half up), 5.67 -> 6
    assert eligibility_window(weighted_probability(case1, NodeClass.NORMAL)) == 17
    assert eligibility_window(weighted_probability(case1, NodeClass.ADVANCED)) == 9
    assert eligibility_window(weighted_probability(case1, NodeClass.SUPER)) == 6
    assert eligibility_window(0.1) == 10


@pytest.mark.parametrize("kwargs", [
    {"m": 1.5}, {"m0": -0.1}, {"alpha": 2.0, "beta": 1.0}, {"alpha": -1.0}, {"e0": 0.0},
    {"p_opt": 0.0}, {"p_opt": 1.0}, {"n": -1},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        HeterogeneityConfig(**kwargs)

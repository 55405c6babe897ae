from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from untrusted_advice import oracles
from untrusted_advice.bin_packing import (
    FAMILIES,
    OPT_LIMIT,
    BinLabel,
    ItemClass,
    RrcConfig,
    adversarial_sequences,
    audit_packing,
    bin_weight,
    classify,
    critical_ratio,
    encode_gamma,
    first_fit,
    opt_bins,
    opt_packing,
    pure_advice_term,
    ratio_bound,
    reserve_critical,
    rrc_pack,
    tiny_weight,
    trusted_ratio_bound,
    untrusted_ratio_bound,
    weight_density_bound,
)
from untrusted_advice.core import ParameterError

F = Fraction


def contents(pk):
    return [sorted(b.sizes) for b in pk.bins]


def test_classify_boundaries():
    assert classify(F(1, 3)) is ItemClass.TINY
    assert classify(1 / 3) is ItemClass.TINY
    assert classify(F(1, 2)) is ItemClass.SMALL
    assert classify(F(2, 3)) is ItemClass.CRITICAL
    assert classify(2 / 3) is ItemClass.CRITICAL
    assert classify(0.55) is ItemClass.CRITICAL
    assert classify(1.0) is ItemClass.LARGE
    for bad in (0, -0.1, 1.01):
        with pytest.raises(ParameterError):
            classify(bad)


@given(st.fractions(min_value=F(1, 10**6), max_value=1))
def test_float_classification_agrees_with_exact(x):
    assert classify(float(x)) is classify(F(float(x)))


def test_first_fit_examples():
    assert contents(first_fit([0.6, 0.6, 0.3])) == [[0.3, 0.6], [0.6]]
    assert first_fit([1.0, 1.0]).num_bins == 2
    assert first_fit([0.5, 0.5]).num_bins == 1


def test_reserve_critical_examples():
    pk = reserve_critical([0.6, 0.25], 1)
    assert contents(pk) == [[0.25, 0.6]]
    pk = reserve_critical([0.2] * 6, 3)
    labels = [b.label for b in pk.bins]
    assert labels == [BinLabel.CRITICAL] * 3 + [BinLabel.TINY]
    assert contents(pk) == [[0.2]] * 3 + [[0.2, 0.2, 0.2]]
    pk = reserve_critical([0.7], 0)
    assert [b.label for b in pk.bins] == [BinLabel.LARGE]


def test_reserve_critical_surplus_critical_items():
    pk = reserve_critical([0.6, 0.6], 1)
    assert [b.label for b in pk.bins] == [BinLabel.CRITICAL, BinLabel.CRITICAL]


def test_encode_gamma_examples():
    # one critical bin and one tiny bin
    items = [0.6, 0.3, 0.3]
    assert critical_ratio(items) == F(1, 2)
    assert encode_gamma(items, 2) == F(1, 4)
    assert encode_gamma([0.3] * 5, 3) == 0
    # three critical bins, five tiny bins
    items = [0.6] * 3 + [0.3] * 18
    assert critical_ratio(items) == F(3, 8)
    assert encode_gamma(items, 3) == F(2, 8)
    assert encode_gamma([0.6, 0.3, 0.3], 3) == F(3, 8)


def test_rrc_examples():
    pk = rrc_pack([0.6, 0.25], RrcConfig(1, F(1, 2), 1))
    assert [b.label for b in pk.bins] == [BinLabel.CRITICAL]
    assert contents(pk) == [[0.25, 0.6]]
    pk = rrc_pack([0.3] * 3, RrcConfig(0, 0, 3))
    assert [b.label for b in pk.bins] == [BinLabel.TINY]
    assert pk.events[0].c_prime + pk.events[0].t_prime == 0
    pk = rrc_pack([0.3] * 4, RrcConfig(F(1, 2), F(1, 2), 1))
    assert [b.label for b in pk.bins] == [BinLabel.TINY, BinLabel.CRITICAL]
    assert contents(pk) == [[0.3, 0.3, 0.3], [0.3]]


def test_rrc_config_validation():
    with pytest.raises(ParameterError):
        RrcConfig(F(3, 2), 0, 2)
    with pytest.raises(ParameterError):
        RrcConfig(1, F(1, 3), 2)
    with pytest.raises(ParameterError):
        RrcConfig(1, 1, 2)
    assert RrcConfig("0.25", F(3, 4), 2).beta == F(1, 4)


def test_weights():
    assert tiny_weight(F(1, 5), 0) == F(3, 10)
    assert tiny_weight(0.2, 0) == pytest.approx(0.3)
    eps = F(1, 1000)
    w = bin_weight([F(1, 2) + eps, F(1, 3) + eps, F(1, 6) - 2 * eps], 0)
    assert w < weight_density_bound(0) == F(7, 4)
    assert bin_weight([0.7, 0.4, 0.4], 0) == 2.0


def test_bound_formulas():
    assert trusted_ratio_bound(1) == F(3, 2)
    assert trusted_ratio_bound(0) == F(7, 4)
    assert pure_advice_term(2) == F(15, 4)
    assert pure_advice_term(3) == pytest.approx(15 / 2**2.5)
    assert trusted_ratio_bound(1, 8) == F(3, 2) + F(15, 32)
    assert trusted_ratio_bound(0, 12) == F(7, 4)
    assert untrusted_ratio_bound(0) == F(7, 4)
    assert untrusted_ratio_bound(1) == F(6)
    assert ratio_bound(0) == F(7, 4)
    assert ratio_bound(F(1, 2)) == F(3, 2) + F(9, 10)
    assert weight_density_bound(1) == F(3, 2)


def test_opt_examples():
    assert opt_bins([0.6, 0.6, 0.3, 0.3]) == 2
    assert opt_bins([1.0] * 3) == 3
    assert opt_bins([0.5] * 4) == 2
    assert opt_bins([]) == 0
    with pytest.raises(ParameterError):
        opt_bins([0.1] * (OPT_LIMIT + 1))


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=10))
def test_opt_matches_partition_oracle(items):
    bins = opt_packing(items)
    assert len(bins) == oracles.exhaustive_bin_opt(items)
    assert sorted(i for b in bins for i in b) == list(range(len(items)))
    assert all(sum(items[i] for i in b) <= 1 + 1e-9 for b in bins)


def test_families():
    assert adversarial_sequences("tiny-sixth", 12, 0) == [1 / 6 + 1e-4] * 12
    trip = adversarial_sequences("dense-triples", 9, 0)
    assert [classify(x) for x in trip[:3]] == [ItemClass.CRITICAL, ItemClass.SMALL, ItemClass.TINY]
    assert trip == trip[:3] * 3
    for fam in FAMILIES:
        assert adversarial_sequences(fam, 50, 9) == adversarial_sequences(fam, 50, 9)
    with pytest.raises(ParameterError):
        adversarial_sequences("nope", 3, 0)


def test_audit_examples():
    items = [F(1, 6) + F(1, 10**4)] * 40
    pk = rrc_pack(items, RrcConfig(F(1, 2), F(1, 2), 1))
    rep = audit_packing(pk, F(1, 2), items)
    assert rep.passed
    assert rep.checks["size_tiny"].margin is not None
    items = adversarial_sequences("uniform-random", 100, 4)
    pk = rrc_pack(items, RrcConfig(1, encode_gamma(items, 3), 3))
    assert audit_packing(pk, RrcConfig(1, encode_gamma(items, 3), 3).beta, items).checks["w_plus_3"].passed
    pk = rrc_pack([0.6, 0.7], RrcConfig(1, 0, 2))
    assert audit_packing(pk, 0, [0.6, 0.7]).checks["size_tiny"].detail == "vacuous"


def test_audit_catches_tampering():
    items = [0.3] * 7
    pk = rrc_pack(items, RrcConfig(F(1, 2), F(1, 2), 1))
    pk.bins[0].label = BinLabel.CRITICAL
    rep = audit_packing(pk, F(1, 2), items)
    assert not rep.passed and "beta_rule" in rep.failures()
    pk = first_fit([0.3, 0.3])
    pk.bins[0].items.append((0, 0.3))
    assert "structure" in audit_packing(pk, 0, [0.3, 0.3]).failures()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=60), st.sampled_from([0, 0.25, 0.5, 1]),
       st.integers(1, 4), st.data())
def test_rrc_passes_audit_for_any_advice(items, alpha, k, data):
    gamma = F(data.draw(st.integers(0, 2**k - 1)), 2**k)
    cfg = RrcConfig(alpha, gamma, k)
    pk = rrc_pack(items, cfg)
    rep = audit_packing(pk, cfg.beta, items)
    assert rep.passed, rep.to_json()

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from untrusted_advice.core import (
    AdviceMode,
    CompetitivePair,
    ExperimentRecord,
    InvariantViolation,
    ParameterError,
    RatioAccumulator,
    as_fraction,
    cost_ratio,
    derive_seed,
    dominates,
    make_rng,
    pareto_frontier,
)
from untrusted_advice.ski_rental import ak_pair


def P(r, w):
    return CompetitivePair(as_fraction(r), as_fraction(w))


def test_dominance_examples():
    assert dominates(P("1.4", "2.8"), P("1.4", "2.8"))
    assert not dominates(P(Fraction(5, 3), "2.5"), P(2, 2))
    assert not dominates(P(2, 2), P(Fraction(5, 3), "2.5"))
    assert dominates(P(1, 3), P("1.5", "3.5"))


def test_pair_rejects_r_above_w():
    with pytest.raises(InvariantViolation) as exc:
        CompetitivePair(Fraction(3), Fraction(2))
    assert exc.value.name == "pair.r_le_w"
    # float noise below the tolerance is accepted
    CompetitivePair(4.0 + 1e-15, 4.0)


def test_frontier_examples():
    pts = [("a", P(1, 5)), ("b", P(2, 3)), ("c", P(2, 4))]
    assert pareto_frontier(pts) == pts[:2]
    assert pareto_frontier([("x", P(1, 1))]) == [("x", P(1, 1))]
    assert pareto_frontier([]) == []
    family = [(k, ak_pair(k, 10)) for k in range(1, 11)]
    assert pareto_frontier(family) == family


def test_frontier_keeps_equal_pairs():
    pts = [("a", P(1, 2)), ("b", P(1, 2))]
    assert pareto_frontier(pts) == pts


pairs = st.tuples(st.integers(0, 20), st.integers(0, 20)).map(lambda t: P(min(t), max(t)))


@given(st.lists(pairs, max_size=25))
def test_frontier_is_antichain_covering_input(points):
    labeled = list(enumerate(points))
    front = pareto_frontier(labeled)
    for _, p in front:
        assert not any(dominates(q, p) and q != p for _, q in labeled)
    for _, p in labeled:
        assert any(dominates(q, p) for _, q in front)


def test_cost_ratio_is_exact_and_rejects_zero_opt():
    assert cost_ratio(14, 10) == Fraction(7, 5)
    assert isinstance(cost_ratio(14, 10), Fraction)
    with pytest.raises(ParameterError):
        cost_ratio(1, 0)


def test_ratio_accumulator_with_slack():
    acc = RatioAccumulator(additive_slack=4)
    acc.add_costs(10, 2, witness="a")
    acc.add_costs(3, 3, witness="b")
    assert acc.max_ratio == Fraction(3)
    assert acc.arg_max == "a"
    assert acc.count == 2


def test_as_fraction_reads_decimal_repr():
    assert as_fraction(0.1) == Fraction(1, 10)
    assert as_fraction("0.25") == Fraction(1, 4)
    with pytest.raises(ParameterError):
        as_fraction(float("nan"))


def test_advice_mode_roundtrip():
    for mode in (AdviceMode.trusted(), AdviceMode.adversarial(), AdviceMode.fixed(3)):
        assert AdviceMode.from_json(json.loads(json.dumps(mode.to_json()))) == mode
    with pytest.raises(ParameterError):
        AdviceMode("sometimes")


def _record(**over):
    base = dict(problem="skirental", algorithm="A_5", params={"B": 10, "k": 5}, input_family="exhaustive",
                seed=7, alg_cost=14, opt_cost=10, ratio=None, advice_mode=AdviceMode.trusted())
    base.update(over)
    return ExperimentRecord(**base)


def test_record_roundtrip_and_ratio():
    rec = _record()
    assert rec.ratio == Fraction(7, 5)
    line = rec.to_jsonl()
    assert "\n" not in line
    back = ExperimentRecord.from_json(json.loads(line))
    assert back.to_jsonl() == line
    assert list(json.loads(line)) == list(ExperimentRecord.FIELDS)


def test_record_additive_adjustment():
    rec = _record(params={"additive_constant": 4}, alg_cost=10, opt_cost=2)
    assert rec.additive_constant == 4
    assert rec.adjusted_ratio == 3


def test_record_schema_errors():
    obj = _record().to_json()
    del obj["seed"]
    with pytest.raises(ParameterError):
        ExperimentRecord.from_json(obj)
    with pytest.raises(ParameterError):
        ExperimentRecord.from_json(dict(_record().to_json(), extra=1))
    with pytest.raises(ParameterError):
        _record(seed=2**64)
    with pytest.raises(ParameterError):
        _record(opt_cost=0)
    with pytest.raises(ParameterError):
        _record(advice_mode=None)


def test_seed_derivation_is_stable():
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
    assert 0 <= derive_seed(123, "x") < 2**64
    a = make_rng(derive_seed(5, 0)).random(4)
    b = make_rng(derive_seed(5, 0)).random(4)
    assert (a == b).all()

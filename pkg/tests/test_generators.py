import pytest

from mckernel.generators import GENERALIZED_CORE, GenParams, compact, gen_instance, gen_rule_trigger
from mckernel.kernel import digest
from mckernel.rules import ALL_RULES, first_applicable
from mckernel.tree import Verdict, build_instance


def test_deterministic():
    p = GenParams(n=(15, 15), shape="caterpillar", requests=10, seed=7)
    assert digest(gen_instance(p)) == digest(gen_instance(p))
    assert gen_instance(p).is_caterpillar


def test_no_requests_is_true():
    assert gen_instance(GenParams(shape="path", requests=0)).verdict == Verdict.TRUE


def test_uniform_open():
    inst = gen_instance(GenParams(n=(25, 25), requests=12, k=(3, 3), seed=1))
    assert inst.verdict == Verdict.OPEN and len(inst.nodes) == 25 and inst.k == 3


@pytest.mark.parametrize("shape", ["path", "caterpillar", "spider", "uniform-random"])
def test_shapes(shape):
    for seed in range(20):
        inst = gen_instance(GenParams(n=(2, 20), shape=shape, requests=1, seed=seed))
        assert len(inst.edges) == len(inst.nodes) - 1
        if shape in ("path", "caterpillar"):
            assert inst.is_caterpillar


@pytest.mark.parametrize("params", [
    GenParams(n=(0, 3)),
    GenParams(n=(5, 3)),
    GenParams(shape="blob"),
    GenParams(n=(3, 3), requests=4),
    GenParams(k=(2, 1)),
    GenParams(requests=-1),
])
def test_invalid_params(params):
    with pytest.raises(ValueError):
        gen_instance(params)


def test_fixed_triggers():
    assert [r.pair for r in gen_rule_trigger("rule0", 1).requests] == [(0, 1)]
    t = gen_rule_trigger("rule1", 1)
    assert len(t.requests) == 2 and first_applicable(t).rule == "rule1"


@pytest.mark.parametrize("rule", ALL_RULES)
def test_trigger_fires_first(rule):
    mode = "caterpillar" if rule == "rule5" else "general"
    for k in (1, 2, 3):
        inst = gen_rule_trigger(rule, k, seed=3)
        assert first_applicable(inst, mode).rule == rule
        assert sorted(inst.nodes) == list(range(len(inst.nodes)))


def test_generalized_core_fires_first():
    edges, reqs, k = GENERALIZED_CORE
    inst = build_instance(edges, reqs, k)
    app = first_applicable(inst)
    assert app.rule == "rule5b" and app.pivot == 12


def test_trigger_rejects_bad_input():
    with pytest.raises(ValueError):
        gen_rule_trigger("rule9", 1)
    with pytest.raises(ValueError):
        gen_rule_trigger("rule0", 0)


def test_compact_keeps_order():
    inst = gen_instance(GenParams(n=(9, 9), requests=5, seed=2))
    sub = compact(inst)
    assert digest(sub) == digest(inst)

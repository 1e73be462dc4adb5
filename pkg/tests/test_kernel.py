import random

import pytest
from hypothesis import given, settings

from mckernel.generators import GenParams, gen_instance
from mckernel.kernel import (
    NotReducedError,
    digest,
    finalize,
    format_trace,
    kernelize,
    kernelize_full,
    parse_trace,
    replay,
    structural_report,
    verify_kernel_bounds,
)
from mckernel.rules import ModeError, apply_rule, validate_witness
from mckernel.solver import brute_force_opt, is_multicut, solve
from mckernel.tree import Verdict, build_instance
from test_tree import instances


def yes(inst):
    if inst.verdict != Verdict.OPEN:
        return inst.verdict == Verdict.TRUE
    return brute_force_opt(inst, at_most=inst.k) <= inst.k


PATH5 = [(1, 2), (2, 3), (3, 4), (4, 5)]


def test_unit_request_resolves_true():
    ker, trace = kernelize(build_instance([(1, 2)], [(1, 2)], 1))
    assert ker.verdict == Verdict.TRUE and trace.rules == ["rule0"]
    assert len(ker.nodes) == 1


def test_disjoint_pair_resolves_false():
    ker, trace = kernelize(build_instance(PATH5, [(1, 3), (3, 5)], 1))
    assert ker.verdict == Verdict.FALSE and trace.rules == ["rule1"]


def test_already_decided_input_has_empty_trace():
    ker, trace = kernelize(build_instance(PATH5, [], 2))
    assert ker.verdict == Verdict.TRUE and trace.rules == []


def test_random_n20_k3_agrees_with_oracle():
    for seed in range(10):
        inst = gen_instance(GenParams(n=(20, 20), requests=12, k=(3, 3), seed=seed))
        ker, _ = kernelize(inst)
        assert yes(inst) == yes(ker)
        assert ker.k <= inst.k


def test_mode_mismatch():
    spider = build_instance([(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)], [(2, 4)], 1)
    with pytest.raises(ModeError):
        kernelize(spider, "caterpillar")
    with pytest.raises(ValueError):
        kernelize(spider, "sideways")


def test_finalize_canonical_forms():
    assert finalize(build_instance(PATH5, [], 1)).nodes == {0}
    false = finalize(build_instance(PATH5, [(1, 2)], 0))
    assert false.verdict == Verdict.FALSE and false.k == 0


@given(instances())
@settings(max_examples=150, deadline=None)
def test_trace_replays_and_terminates(inst):
    res = kernelize_full(inst)
    tr = res.trace
    assert digest(replay(inst, tr.applications)) == tr.final_digest == digest(res.kernel)
    assert tr.iterations <= inst.potential
    # only the step that decides the instance may leave the potential unchanged
    assert all(b < a for a, b in zip(tr.potentials[:-1], tr.potentials[1:-1]))
    steps, apps = parse_trace(format_trace(tr))
    assert apps == tr.applications and steps == tr.step_of


@given(instances())
@settings(max_examples=150, deadline=None)
def test_idempotent(inst):
    ker, _ = kernelize(inst)
    again, trace = kernelize(ker)
    assert digest(again) == digest(ker) and trace.rules == []


@given(instances(max_n=10, max_req=6))
@settings(max_examples=150, deadline=None)
def test_safety_and_lifting(inst):
    res = kernelize_full(inst)
    assert yes(inst) == yes(res.kernel)
    assert set(res.origin.values()) <= inst.edges
    assert set(res.deleted) <= inst.edges
    assert len(res.deleted) == inst.k - res.kernel.k or res.kernel.verdict != Verdict.OPEN


def test_every_logged_application_was_valid():
    rng = random.Random(5)
    for _ in range(100):
        inst = gen_instance(GenParams(n=(8, 16), requests=rng.randint(3, 14), k=(1, 3),
                                      seed=rng.randrange(10**6)))
        cur = finalize(inst)
        for app in kernelize(inst)[1].applications:
            assert validate_witness(cur, app)
            cur = finalize(apply_rule(cur, app))


class TestReports:
    def test_empty_request_instance(self):
        report = structural_report(build_instance(PATH5, [], 1))
        assert report.verdict == Verdict.TRUE and report.reduced
        assert verify_kernel_bounds(report) == []

    def test_not_reduced(self):
        report = structural_report(build_instance(PATH5, [(1, 4)], 2))
        assert not report.reduced
        with pytest.raises(NotReducedError):
            verify_kernel_bounds(report)

    def test_reduced_caterpillar_claims(self):
        hits = 0
        for seed in range(300):
            inst = gen_instance(GenParams(n=(10, 18), shape="caterpillar", requests=14,
                                          k=(1, 3), seed=seed))
            ker, _ = kernelize(inst, "caterpillar")
            checks = verify_kernel_bounds(structural_report(ker, "caterpillar"))
            assert all(c.ok for c in checks), checks
            hits += bool(checks)
        assert hits > 0

    def test_reduced_general_claims(self):
        hits = 0
        for seed in range(300):
            inst = gen_instance(GenParams(n=(10, 20), shape="spider", requests=14,
                                          k=(1, 3), seed=seed))
            checks = verify_kernel_bounds(structural_report(kernelize(inst)[0]))
            assert all(c.ok for c in checks), checks
            assert all(c.claim != "wingspan" for c in checks)
            hits += bool(checks)
        assert hits > 0


def test_lifted_solution_is_multicut():
    for seed in range(40):
        inst = gen_instance(GenParams(n=(12, 12), requests=8, k=(2, 4), seed=seed))
        cut = solve(inst)
        if cut is not None:
            assert cut.size <= inst.k and is_multicut(inst, cut.edges)

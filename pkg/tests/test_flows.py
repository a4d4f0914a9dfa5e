from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from prefixlim import flows
from prefixlim.errors import BadParams, BadResolution, FlowNotInSet
from prefixlim.family import steps_pass_both_validators, validate_family
from prefixlim.flows import FlowSet, Signal, dyadic, refine, refine_step, reconstruct, thread_of_flow
from prefixlim.limits import thread_violations

seqs = st.lists(st.integers(-5, 5), max_size=12).map(tuple)


def test_refine_examples():
    s = ("s0", "s1", "s2", "s3", "s4")
    assert refine(s, 3, 3) == s
    assert refine(("x",), 1, 0) == ()
    assert refine(s, 1, 0) == ("s0", "s2")


@given(seqs)
def test_length_law(s):
    assert len(refine(s, 1, 0)) == math.ceil((len(s) - 1) / 2)
    assert refine_step(s) == refine(s, 1, 0)


@given(seqs)
def test_subsample_keeps_every_other(s):
    assert refine_step(s, "subsample") == s[::2]
    assert len(refine_step(s, "subsample")) >= len(refine_step(s, "recursion"))


@given(seqs, st.integers(0, 12))
def test_refine_step_is_monotone(b, cut):
    a = b[:cut]
    for mode in ("recursion", "subsample"):
        got, full = refine_step(a, mode), refine_step(b, mode)
        assert full[:len(got)] == got


def test_signal_evaluation_is_exact():
    f = Signal.polynomial([0, 0, 1])
    assert f(Fraction(1, 4)) == Fraction(1, 16)
    saw = Signal.sawtooth(Fraction(1, 2))
    assert [saw(t) for t in (0, Fraction(1, 4), Fraction(1, 2), 1)] == [0, Fraction(1, 4), Fraction(1, 2), 0]
    with pytest.raises(ValueError):
        f(2)
    with pytest.raises(BadParams):
        Signal.constant(1, end=Fraction(1, 3))


def test_signal_document_round_trip():
    for f in [*flows.standard_flowset(), Signal.sawtooth(Fraction(1, 4))]:
        assert Signal.from_document(f.to_document()) == f


@pytest.mark.parametrize("mode", ["recursion", "subsample"])
def test_tower_steps_pass_both_validators(mode):
    tower = flows.dyadic_tower(flows.standard_flowset(), 5, mode=mode)
    validate_family(tower)
    assert steps_pass_both_validators(tower) == []


def test_constant_flow_tower_is_a_chain_of_chains():
    tower = flows.dyadic_tower(FlowSet([Signal.constant(3)]), 3)
    for n in tower.indices:
        o = tower.obj(n)
        assert len(o.roots()) == 1 and len(o.maximal()) == 1
    assert tower.obj(0) != tower.obj(1)


def test_tower_k0_is_a_single_object():
    tower = flows.dyadic_tower(flows.standard_flowset(), 0)
    assert tower.indices == [0]
    assert tower.map(0, 0).graph == {u: u for u in tower.obj(0).elements}


@pytest.mark.parametrize("mode", ["recursion", "subsample"])
def test_round_trip_exact(mode):
    tower = flows.dyadic_tower(flows.standard_flowset(), 6, mode=mode)
    for f in tower.flows:
        thread = thread_of_flow(f, tower)
        assert thread_violations(tower, thread.as_dict()) == []
        for d in range(7):
            rec = reconstruct(thread, d)
            assert all(f(t) == v for t, v in rec.samples.items())
    end = reconstruct(thread_of_flow(tower.flows.generators[0], tower), 6).domain_end
    assert end == (Fraction(63, 64) if mode == "recursion" else 1)


def test_identity_flow_thread():
    tower = flows.dyadic_tower(flows.standard_flowset(), 3)
    t = thread_of_flow(tower.flows.generators[1], tower)
    rec = reconstruct(t, 3)
    assert all(v == k for k, v in rec.samples.items())
    assert t.at(2) == (0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


def test_distinct_generators_give_distinct_threads():
    tower = flows.dyadic_tower(flows.standard_flowset(), 4)
    keys = {thread_of_flow(f, tower).key for f in tower.flows}
    assert len(keys) == 3
    with pytest.raises(FlowNotInSet):
        thread_of_flow(Signal.constant(7), tower)


def test_composed_long_maps_differ_from_one_shot_recursion():
    # the recursion applied in one go is not the composite of single steps
    s = tuple(range(9))
    assert refine(s, 2, 0) == ()
    assert refine_step(refine_step(s)) == (0, 4)


def test_refute_search():
    member = FlowSet([Signal.polynomial([0, 1])])
    assert flows.refute_search(member, Signal.constant(1), 3) == (0,)
    assert flows.refute_search(member, Signal.polynomial([0, 1]), 3) is None
    saw = flows.sawtooth_flowset(5)
    zero = Signal.constant(0)
    for depth in range(5):
        assert flows.refute_search(saw, zero, depth) is None


def test_increment_lattice():
    assert flows.increment_lattice(1, 2) == (Fraction(-1, 2), 0, Fraction(1, 2))
    with pytest.raises(BadResolution):
        flows.increment_lattice(2, 2)
    for k in range(1, 4):
        assert all(abs(d) <= dyadic(1, k) for d in flows.increment_lattice(k, k + 2))


def test_inclusion_example_small():
    rep = flows.inclusion_demo(1, 2, 4, samples=10)
    assert rep.zero_member and rep.passed
    assert rep.zero_increments == [0, 0, 0, 0]
    level = flows.inclusion_level(1, 2, 4)
    assert flows.SampleSeq([Fraction(0)] * 5) in level


def test_discretization_holds_every_sample_prefix():
    fs = flows.standard_flowset()
    a = flows.discretize(fs, 2)
    for f in fs:
        full = f.samples(2)
        assert all(full[:n] in a for n in range(len(full) + 1))
    assert len(a) == 1 + 5 + (1 + 2 * 4)  # t and t² share their first sample

from __future__ import annotations

import random

import pytest

from oracles import brute_threads
from prefixlim import limits
from prefixlim.errors import ConeNotCommuting, HorizonExceedsFamily, WrongFamilyKind
from prefixlim.family import BOTTOM, FiniteFamily, FiniteIndex, builtin_family
from prefixlim.limits import (EXACT, enumerate_threads, exact_chain_limit, projection, thread_violations)
from prefixlim.maps import PhpMap, identity
from prefixlim.order import PrefixOrder, is_isomorphic, random_order


def _families():
    yield builtin_family("fan_strand", N=3)
    yield builtin_family("fan_grow", N=3)
    yield builtin_family("constant", order=PrefixOrder({0: None, 1: 0, 2: 0}), N=2)
    yield builtin_family("dyadic_tower", K=2)


@pytest.mark.parametrize("fam", list(_families()), ids=lambda f: f.name)
def test_threads_match_brute_force(fam):
    h = fam.horizon
    brute = brute_threads([fam.obj(i).elements for i in range(h + 1)], fam.apply, h)
    threads = enumerate_threads(fam)
    assert {frozenset(t.as_dict().items()) for t in threads.threads.values()} == {frozenset(b.items()) for b in brute}
    # ⊑ is the pointwise order wherever both threads are defined
    ts = list(threads.threads.values())
    for a in ts:
        for b in ts:
            pointwise = all(fam.obj(i).leq(u, b.at(i)) for i, u in a.assignment if b.at(i) is not None)
            assert threads.order.leq(a.key, b.key) == pointwise


def test_finite_family_threads():
    idx = FiniteIndex(["a", "b", "t"], [("a", "t"), ("b", "t")])
    top = PrefixOrder({"r": None, "x": "r", "y": "r"})
    small = PrefixOrder({"r": None, "x": "r"})
    cut = PhpMap(top, small, {"r": "r", "x": "x"})
    fam = FiniteFamily(idx, {"a": small, "b": small, "t": top}, {("a", "t"): cut, ("b", "t"): cut})
    th = enumerate_threads(fam)
    assert len(th) == 3
    assert all(t.certainty == EXACT for t in th.threads.values())
    assert not limits.projection_violations(th) and not limits.naturality_violations(th)


@pytest.mark.parametrize("name", ["fan_strand", "fan_grow"])
def test_projection_and_naturality(name):
    for n in range(1, 6):
        th = enumerate_threads(builtin_family(name, N=n))
        assert limits.projection_violations(th) == []
        assert limits.naturality_violations(th) == []
        assert limits.antisymmetry_mechanism_violations(th) == []


def test_exact_limits_of_the_fans():
    for n in range(2, 7):
        strand = builtin_family("fan_strand", N=n)
        grow = builtin_family("fan_grow", N=n)
        assert is_isomorphic(exact_chain_limit(strand), enumerate_threads(strand).order)
        assert is_isomorphic(exact_chain_limit(grow), enumerate_threads(grow).order)
        # at any finite stage the two chains end in isomorphic objects; only their maps differ
        assert is_isomorphic(exact_chain_limit(strand), exact_chain_limit(grow))


def test_fan_chains_grow_differently():
    # strand k keeps length k+1 in one chain, and keeps growing in the other
    strand = builtin_family("fan_strand", N=6)
    grow = builtin_family("fan_grow", N=6)

    def length(order, k):
        return sum(1 for u in order.elements if u != BOTTOM and u[0] == k)

    for n in range(1, 7):
        assert length(strand.obj(n), 0) == 1
        assert length(grow.obj(n), 0) == n


def test_exact_limit_requires_certified_kind():
    with pytest.raises(WrongFamilyKind):
        exact_chain_limit(builtin_family("dyadic_tower", K=2))


def test_constant_family_limit_is_the_object():
    rng = random.Random(3)
    for _ in range(5):
        o = random_order(rng.randint(0, 6), rng)
        fam = builtin_family("constant", order=o, N=3)
        assert is_isomorphic(enumerate_threads(fam).order, o)
        assert exact_chain_limit(fam) == o


def test_thread_violation_bullets():
    fam = builtin_family("fan_strand", N=3)
    good = {0: BOTTOM, 1: BOTTOM, 2: BOTTOM, 3: BOTTOM}
    assert thread_violations(fam, good) == []
    assert thread_violations(fam, {})[0].bullet == 0
    mismatch = {0: BOTTOM, 1: BOTTOM, 2: (1, 0), 3: (0, 0)}
    assert 1 in {v.bullet for v in thread_violations(fam, mismatch)}
    gap = {3: (0, 0)}
    assert 2 in {v.bullet for v in thread_violations(fam, gap)}
    stops = {0: BOTTOM, 1: BOTTOM}
    assert 3 in {v.bullet for v in thread_violations(fam, stops)}
    with pytest.raises(HorizonExceedsFamily):
        thread_violations(fam, good, horizon=9)


def test_universal_property_projection_cone():
    fam = builtin_family("fan_grow", N=3)
    th = enumerate_threads(fam)
    cone = {i: projection(th, i) for i in fam.indices}
    rep = limits.check_universal_property(fam, th.order, cone)
    assert rep.mediating == identity(th.order)
    assert rep.uniqueness == "pointwise"


def test_universal_property_small_cone_exhaustive():
    fam = builtin_family("fan_strand", N=2)
    src = PrefixOrder({"w": None, "w1": "w"})
    cone = {i: PhpMap(src, fam.obj(i), {"w": BOTTOM, "w1": (1, 0)} if i >= 2 else {"w": BOTTOM}) for i in fam.indices}
    rep = limits.check_universal_property(fam, src, cone)
    assert rep.uniqueness == "exhaustive" and rep.candidates == 1


def test_non_commuting_cone_rejected():
    fam = builtin_family("fan_strand", N=2)
    src = PrefixOrder({"w": None})
    cone = {0: PhpMap(src, fam.obj(0), {}), 1: PhpMap(src, fam.obj(1), {"w": BOTTOM}),
            2: PhpMap(src, fam.obj(2), {"w": BOTTOM})}
    with pytest.raises(ConeNotCommuting):
        limits.check_universal_property(fam, src, cone)

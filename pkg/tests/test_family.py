from __future__ import annotations

import itertools

import pytest

from prefixlim import family as fam_mod
from prefixlim.errors import (BadParams, CoherenceViolation, InvalidIndex, KindViolation, NotIdentityAtDiagonal,
                              StepInvalid, TypeMismatch, UnknownName)
from prefixlim.family import (BOTTOM, ChainFamily, FamilyKind, FiniteFamily, FiniteIndex, builtin_family,
                              family_violations, validate_family)
from prefixlim.maps import PhpMap, compose, identity
from prefixlim.order import PrefixOrder


@pytest.mark.parametrize("name", ["fan_strand", "fan_grow"])
def test_fan_builtins_validate(name):
    for n in range(9):
        fam = builtin_family(name, N=n)
        assert fam.kind is FamilyKind.INCREASING_PARTIAL_IDENTITY
        assert family_violations(fam) == []


def test_fan_objects_match_their_formulas():
    for n in range(6):
        strand = {(k, l) for k in range(n) for l in range(n) if l <= k}
        grow = {(k, l) for k in range(n) for l in range(n) if l <= n - k - 1}
        assert fam_mod.fan_strand_order(n).elements == strand | {BOTTOM}
        assert fam_mod.fan_grow_order(n).elements == grow | {BOTTOM}


def test_long_maps_compose_steps():
    fam = builtin_family("fan_grow", N=5)
    for i, j, k in itertools.product(range(6), repeat=3):
        if i <= j <= k:
            assert fam.map(i, k) == compose(fam.map(i, j), fam.map(j, k))
            for u in fam.obj(k).elements:
                assert fam.apply(i, k, u) == fam.map(i, k)(u)


def test_constant_family():
    o = PrefixOrder({0: None, 1: 0, 2: 0})
    fam = builtin_family("constant", order=o, N=3)
    assert fam.kind is FamilyKind.EXPLICIT_STABLE
    assert fam.map(0, 3) == identity(o)


def test_builtin_errors():
    with pytest.raises(UnknownName):
        builtin_family("nope")
    with pytest.raises(BadParams):
        builtin_family("fan_strand", N=-1)
    with pytest.raises(BadParams):
        builtin_family("constant", N=2)


def _chain_orders():
    u0 = PrefixOrder({"r": None})
    u1 = PrefixOrder({"r": None, "x": "r"})
    return u0, u1


def test_invalid_step_detected():
    u0, u1 = _chain_orders()
    bad = PhpMap(u1, u0, {"x": "r"}, check=False)  # domain not prefix closed
    errs = family_violations(ChainFamily([u0, u1], [bad]))
    assert isinstance(errs[0], StepInvalid)


def test_wrong_endpoints_detected():
    u0, u1 = _chain_orders()
    errs = family_violations(ChainFamily([u0, u1], [identity(u1)]))
    assert isinstance(errs[0], TypeMismatch)


def test_kind_checked():
    u0, u1 = _chain_orders()
    collapse = PhpMap(u1, u0, {"r": "r", "x": "r"})
    fam = ChainFamily([u0, u1], [collapse], kind=FamilyKind.INCREASING_PARTIAL_IDENTITY)
    assert any(isinstance(e, KindViolation) for e in family_violations(fam))
    stable = ChainFamily([u0, u1], [collapse], kind=FamilyKind.EXPLICIT_STABLE, stable_from=0)
    assert any(isinstance(e, KindViolation) for e in family_violations(stable))
    assert family_violations(ChainFamily([u0, u1], [collapse])) == []


def _finite(maps_override=None):
    idx = FiniteIndex([0, 1, 2], [(0, 1), (1, 2), (0, 2)])
    u = PrefixOrder({"r": None, "x": "r", "y": "r"})
    objs = {0: u, 1: u, 2: u}
    swap = PhpMap(u, u, {"r": "r", "x": "y", "y": "x"})
    stored = {(0, 1): swap, (1, 2): swap, (0, 2): identity(u)}
    stored.update(maps_override or {})
    return FiniteFamily(idx, objs, stored), u, swap


def test_finite_family_coherence():
    fam, u, swap = _finite()
    assert validate_family(fam) is fam
    broken, _, _ = _finite({(0, 2): swap})
    errs = family_violations(broken)
    assert any(isinstance(e, CoherenceViolation) for e in errs)
    diag, _, _ = _finite({(1, 1): swap})
    assert any(isinstance(e, NotIdentityAtDiagonal) for e in family_violations(diag))


def test_finite_index_must_be_directed_and_transitive():
    with pytest.raises(InvalidIndex):
        FiniteIndex(["a", "b"], [])
    with pytest.raises(InvalidIndex):
        FiniteIndex([1, 2, 3], [(1, 2), (2, 3)])
    assert FiniteIndex(["a", "b", "t"], [("a", "t"), ("b", "t")]).top == "t"


def test_cofinal_sample():
    s = fam_mod.CofinalSample(1, 3)
    assert s.members(10) == [1, 4, 7, 10]
    assert 7 in s and 8 not in s
    with pytest.raises(InvalidIndex):
        fam_mod.CofinalSample(0, 0)


def test_truncate_and_range():
    fam = builtin_family("fan_strand", N=4)
    t = fam.truncate(2)
    assert t.horizon == 2 and t.obj(2) == fam.obj(2)
    with pytest.raises(InvalidIndex):
        fam.obj(7)
    with pytest.raises(InvalidIndex):
        fam.map(3, 1)

"""Acceptance criteria 1-10, one test each.

Each test records a ``PASS``/``FAIL`` line (printed in the pytest summary,
or directly when this file is run as a script) and then asserts.
"""

from __future__ import annotations

import itertools
import random
import sys

import pytest

from conftest import ACCEPTANCE_LINES
from oracles import small_forests
from prefixlim import catalog, flows, limits, maps
from prefixlim.family import BOTTOM, builtin_family, steps_pass_both_validators
from prefixlim.limitbisim import Bounds, check_limit_bisim_witness
from prefixlim.lts import bisimilar, random_lts
from prefixlim.maps import compose, direct_violation, identity, theorem1_violation
from prefixlim.order import PrefixOrder, is_isomorphic, random_order, sorted_ids, validate_order


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _agree(s, t, g) -> bool:
    return (direct_violation(s, t, g) is None) == (theorem1_violation(s, t, g) is None)


def test_criterion_01_validator_equivalence():
    orders = [PrefixOrder(p) for p in small_forests(4)]
    exhaustive = disagree = accepted = 0
    for s, t in itertools.product(orders, repeat=2):
        xs, ys = sorted_ids(s.elements), [None, *sorted_ids(t.elements)]
        for values in itertools.product(ys, repeat=len(xs)):
            g = {u: v for u, v in zip(xs, values) if v is not None}
            exhaustive += 1
            accepted += direct_violation(s, t, g) is None
            disagree += not _agree(s, t, g)
    rng = random.Random(2024)
    rand = 0
    for _ in range(10_000):
        s, t = random_order(rng.randint(0, 6), rng), random_order(rng.randint(0, 6), rng)
        if rng.random() < 0.5 and len(t):
            g = {u: rng.choice(sorted_ids(t.elements)) for u in s.elements if rng.random() < 0.7}
        else:
            g = dict(maps.random_php_map(s, t, rng).graph)
            if g and rng.random() < 0.5:  # perturb one point
                u = rng.choice(sorted_ids(g))
                g[u] = rng.choice(sorted_ids(t.elements))
        rand += 1
        disagree += not _agree(s, t, g)
    record(1, "validator equivalence", disagree == 0,
           f"{exhaustive} exhaustive cases over {len(orders)} orders (≤4 elements, {accepted} accepted) "
           f"+ {rand} random cases (≤6 elements), {disagree} disagreements")


def _builtin_families():
    for n in range(9):
        yield f"fan_strand N={n}", builtin_family("fan_strand", N=n)
        yield f"fan_grow N={n}", builtin_family("fan_grow", N=n)
    rng = random.Random(8)
    for n in range(9):
        yield f"constant N={n}", builtin_family("constant", order=random_order(rng.randint(0, 6), rng), N=n)
    for k in range(9):
        yield f"dyadic_tower K={k}", builtin_family("dyadic_tower", K=k)


def test_criterion_02_limit_construction():
    bad, count, threads_total = [], 0, 0
    for name, fam in _builtin_families():
        th = limits.enumerate_threads(fam)
        count += 1
        threads_total += len(th)
        keys = list(th.threads)
        pairs = [(a, b) for a in keys for b in keys if limits.thread_leq(fam, th.threads[a], th.threads[b])]
        try:
            again = validate_order(keys, pairs, assume_reflexive=False)
        except Exception as exc:  # any axiom failure is a criterion failure
            bad.append((name, "axioms", exc))
            continue
        if again != th.order.relabel(None):
            bad.append((name, "order differs", None))
        bad += [(name, "projection", v) for v in limits.projection_violations(th)]
        bad += [(name, "naturality", v) for v in limits.naturality_violations(th)]
    record(2, "projective-limit construction", not bad,
           f"{count} builtin families (N≤8), {threads_total} threads, {len(bad)} violations")


def _formula_order(cells):
    elems = [BOTTOM, *cells]
    pairs = [(BOTTOM, c) for c in cells]
    pairs += [((k, l), (k2, l2)) for (k, l) in cells for (k2, l2) in cells if k == k2 and l < l2]
    return validate_order(elems, pairs)


def test_criterion_03_fan_limits():
    failures = []
    for n in range(2, 9):
        y = _formula_order([(k, l) for k in range(n) for l in range(n) if l <= k])
        x = _formula_order([(k, l) for k in range(n) for l in range(n) if k + l < n])
        for name, expect in (("fan_strand", y), ("fan_grow", x)):
            fam = builtin_family(name, N=n)
            exact = limits.exact_chain_limit(fam)
            threads = limits.enumerate_threads(fam).order
            if not (is_isomorphic(exact, expect) and is_isomorphic(threads, expect)):
                failures.append((name, n))
    record(3, "fan chain limits", not failures,
           f"N=2..8 for both chains, exact limit ≅ formula ≅ thread order, {len(failures)} mismatches")


def test_criterion_04_constant_family():
    rng = random.Random(4)
    mismatches = 0
    for _ in range(20):
        o = random_order(rng.randint(0, 6), rng)
        th = limits.enumerate_threads(builtin_family("constant", order=o, N=5))
        mismatches += not is_isomorphic(th.order, o)
    record(4, "constant family limit is the object", mismatches == 0, f"20 random orders, {mismatches} mismatches")


def test_criterion_05_delayed_choice_impossible():
    src, tgt = catalog.delayed_choice_order(), catalog.choice_order()
    labelled = list(maps.enumerate_php_maps(src, tgt, preserve_labels=True, required=catalog.DAGGER))
    plain = list(maps.enumerate_php_maps(src, tgt, required=catalog.DAGGER))
    collapse = [f for f in plain if f("ab_dag") == f("ac_dag") == "ab"]
    ok = len(labelled) == 0 and len(plain) >= 1 and collapse
    record(5, "delayed choice is not a limit of the early choice", bool(ok),
           f"{len(labelled)} label-preserving maps, {len(plain)} maps ignoring labels "
           f"({len(collapse)} collapse both delayed branches onto ab)")


BOUNDS = Bounds(index=32, depth=6, stride=4)


def test_criterion_06_witness_demos():
    fan = check_limit_bisim_witness(catalog.fan_omega_witness(BOUNDS.index, BOUNDS.depth), BOUNDS)
    delayed = check_limit_bisim_witness(catalog.delayed_choice_witness(), BOUNDS)
    naive = check_limit_bisim_witness(catalog.naive_fan_witness(BOUNDS.index), BOUNDS)
    subnet = check_limit_bisim_witness(catalog.delayed_choice_witness(), BOUNDS, reading="subnet")
    naive_ok = not naive.passed and naive.violation.clause == 3
    ok = fan.passed and delayed.passed and naive_ok
    where = ""
    if not delayed.passed:
        v = delayed.violation
        while v.cause is not None:
            v = v.cause
        where = f" (condition {v.clause} at state {v.state!r}, label {v.label!r})"
    record(6, "limit-bisimulation witnesses", ok,
           f"fan+ω strand {'pass' if fan.passed else 'violation'}; delayed choice "
           f"{'pass' if delayed.passed else 'violation'}{where}; naive relation "
           f"{'violates condition 3' if naive_ok else 'not refuted'}; "
           f"delayed choice under the subnet reading: {'pass' if subnet.passed else 'violation'}")


def test_criterion_07_bisimulation():
    res = bisimilar(catalog.choice_lts(), catalog.delayed_choice_lts())
    rng = random.Random(7)
    corpus = [random_lts(rng, rng.randint(1, 6), ("a", "b")) for _ in range(20)]
    reflexive = all(bisimilar(p, p) for p in corpus)
    ok = not res.bisimilar and res.level is not None and res.level <= 2 and reflexive
    record(7, "bisimulation", ok, f"early vs delayed choice bisimilar={res.bisimilar} at level {res.level}; "
                                  f"reflexive on 20 random systems: {reflexive}")


def test_criterion_08_tower_round_trip():
    tower = flows.dyadic_tower(flows.standard_flowset(), 6)
    failing = steps_pass_both_validators(tower)
    mism = checked = 0
    for f in tower.flows:
        thread = flows.thread_of_flow(f, tower)
        for d in range(7):
            rec = flows.reconstruct(thread, d)
            checked += len(rec.samples)
            mism += sum(f(t) != v for t, v in rec.samples.items())
    ok = not failing and mism == 0
    record(8, "dyadic tower round trip", ok,
           f"K=6, {len(failing)} failing steps, {checked} grid values compared exactly, {mism} mismatches")


def test_criterion_09_inclusion_closure():
    parts, ok = [], True
    for k in (1, 2, 3):
        rep = flows.inclusion_demo(k, k + 1, 8)
        ok = ok and rep.zero_member and not rep.lipschitz_violations and all(d == 0 for d in rep.zero_increments)
        parts.append(f"k={k}: zero member={rep.zero_member}, {rep.sampled} threads 1-Lipschitz="
                     f"{not rep.lipschitz_violations}, zero slopes={all(d == 0 for d in rep.zero_increments)}")
    record(9, "differential-inclusion closure", ok, "; ".join(parts))


def test_criterion_10_category_laws():
    rng = random.Random(10)
    bad = 0
    for _ in range(10_000):
        a, b, c, d = (random_order(rng.randint(0, 6), rng) for _ in range(4))
        f, g, h = maps.random_php_map(a, b, rng), maps.random_php_map(b, c, rng), maps.random_php_map(c, d, rng)
        bad += compose(h, compose(g, f)) != compose(compose(h, g), f)
        bad += compose(identity(b), f) != f or compose(f, identity(a)) != f
    record(10, "category laws", bad == 0, f"10000 random composable triples, {bad} violations")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

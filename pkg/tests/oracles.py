"""Brute-force reference implementations used by the tests.

Everything here works on explicit relations (sets of pairs) rather than on the
parent forests the library uses, so agreement is a genuine cross-check.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping


def closure(parent: Mapping) -> set:
    """Reflexive-transitive closure of the parent links, by Warshall's algorithm."""
    elems = list(parent)
    rel = {(a, a) for a in elems} | {(p, u) for u, p in parent.items() if p is not None}
    for k in elems:
        for i in elems:
            if (i, k) in rel:
                for j in elems:
                    if (k, j) in rel:
                        rel.add((i, j))
    return rel


def is_prefix_order(elems: Iterable, rel: set) -> bool:
    elems = list(elems)
    for a in elems:
        if (a, a) not in rel:
            return False
    for a, b, c in itertools.product(elems, repeat=3):
        if (a, b) in rel and (b, c) in rel and (a, c) not in rel:
            return False
        if (a, c) in rel and (b, c) in rel and (a, b) not in rel and (b, a) not in rel:
            return False
    for a, b in itertools.product(elems, repeat=2):
        if a != b and (a, b) in rel and (b, a) in rel:
            return False
    return True


def down(rel: set, u) -> frozenset:
    return frozenset(a for a, b in rel if b == u)


def is_php(src_elems, src_rel: set, tgt_rel: set, graph: Mapping) -> bool:
    """Prefix-closed domain and f(u⁻) = f(u)⁻, evaluated on relations."""
    for u in graph:
        for w in down(src_rel, u):
            if w not in graph:
                return False
        if frozenset(graph[w] for w in down(src_rel, u)) != down(tgt_rel, graph[u]):
            return False
    return True


def ahu(parent: Mapping) -> str:
    kids: dict = {u: [] for u in parent}
    for u, p in parent.items():
        if p is not None:
            kids[p].append(u)

    def code(u):
        return "(" + "".join(sorted(code(c) for c in kids[u])) + ")"

    return "".join(sorted(code(u) for u, p in parent.items() if p is None))


def small_forests(max_n: int) -> list[dict]:
    """One parent map per isomorphism class of forests with at most ``max_n`` nodes."""
    out, seen = [], set()
    for n in range(max_n + 1):
        for choice in itertools.product(*[range(i + 1) for i in range(n)]):
            parent = {i: (None if c == i else c) for i, c in enumerate(choice)}
            key = ahu(parent)
            if key not in seen:
                seen.add(key)
                out.append(parent)
    return out


def all_partial_functions(xs: list, ys: list):
    for values in itertools.product([None, *ys], repeat=len(xs)):
        yield {u: v for u, v in zip(xs, values) if v is not None}


def brute_threads(objects: list, apply, horizon: int) -> list[dict]:
    """Every assignment over indices 0..horizon meeting the limit-execution conditions.

    ``apply(i, j, u)`` is the long map ``f_ij`` (``None`` when undefined).
    """
    found = []
    choices = [[None, *sorted(objects[i], key=repr)] for i in range(horizon + 1)]
    for pick in itertools.product(*choices):
        h = {i: u for i, u in enumerate(pick) if u is not None}
        if not h:
            continue
        ok = True
        for i in range(horizon + 1):
            for j in range(i, horizon + 1):
                if j in h:
                    img = apply(i, j, h[j])
                    if (i in h and img != h[i]) or (i not in h and img is not None):
                        ok = False
        if ok and horizon not in h:
            ok = False
        if ok:
            found.append(h)
    return found

"""Partial history preserving maps between finite prefix orders.

Two validators are provided and kept deliberately independent:

* :func:`direct_violation` checks ``f(u⁻) = f(u)⁻`` pointwise on a
  prefix-closed domain;
* :func:`theorem1_violation` checks order preservation plus backward
  simulation (together with a prefix-closed domain).

They are cross-checked exhaustively by the test suite.
"""

from __future__ import annotations

import itertools
import json
import random
from typing import Any, Iterable, Iterator, Mapping

from .errors import (
    BackwardSimFails,
    DomainNotPrefixClosed,
    HistoryNotPreserved,
    MapViolation,
    NotOrderPreserving,
    TypeMismatch,
    UnknownElement,
)
from .order import PrefixOrder, decode_id, encode_id, sort_key, sorted_ids


def _check_graph(source: PrefixOrder, target: PrefixOrder, graph: Mapping) -> None:
    for u, v in graph.items():
        if u not in source:
            raise UnknownElement(u, "source order")
        if v not in target:
            raise UnknownElement(v, "target order")


def _by_depth(order: PrefixOrder, xs: Iterable) -> list:
    return sorted(xs, key=lambda u: (order.depth(u), sort_key(u)))


def direct_violation(source: PrefixOrder, target: PrefixOrder, graph: Mapping) -> MapViolation | None:
    """First violation of the pointwise definition, scanning the domain shallow-first."""
    _check_graph(source, target, graph)
    for u in _by_depth(source, graph):
        for w in source.chain(u):
            if w not in graph:
                return DomainNotPrefixClosed(u, w)
        image = {graph[w] for w in source.chain(u)}
        if image != set(target.chain(graph[u])):
            return HistoryNotPreserved(u)
    return None


def theorem1_violation(source: PrefixOrder, target: PrefixOrder, graph: Mapping) -> MapViolation | None:
    """First violation of the order-preservation + backward-simulation characterisation.

    The domain must be prefix closed for the characterisation to hold, so that
    is checked first; the remaining checks quantify over explicit pairs.
    """
    _check_graph(source, target, graph)
    dom = _by_depth(source, graph)
    for u in dom:
        p = source.parent[u]
        if p is not None and p not in graph:
            return DomainNotPrefixClosed(u, p)
    below = {u: set(source.chain(u)) for u in dom}
    pos = {u: n for n, u in enumerate(dom)}
    # pairs u ≤ u2 are exactly u2 with u in its chain; report the first in (u, u2) order
    bad = [(pos[u], pos[u2]) for u2 in dom for u in below[u2] if not target.leq(graph[u], graph[u2])]
    if bad:
        i, j = min(bad)
        return NotOrderPreserving(dom[i], dom[j])
    for u in dom:
        preimages_below = {graph[w] for w in below[u]}
        # the target down-set of f(u), shallow first
        for v in target.chain(graph[u]):
            if v not in preimages_below:
                return BackwardSimFails(u, v)
    return None


class PhpMap:
    """A partial history preserving map ``source -> target``.

    Partiality is absence from ``graph``.  With ``check=True`` (default) the
    graph is validated with the direct definition.
    """

    __slots__ = ("source", "target", "_graph", "_hash")

    def __init__(self, source: PrefixOrder, target: PrefixOrder, graph: Mapping, *, check: bool = True):
        self.source = source
        self.target = target
        self._graph = {source.intern(u): target.intern(v) for u, v in graph.items()}
        self._hash = None
        if check:
            err = direct_violation(source, target, self._graph)
            if err is not None:
                raise err

    @property
    def graph(self) -> Mapping:
        return self._graph

    @property
    def domain(self) -> frozenset:
        return frozenset(self._graph)

    def __call__(self, u):
        return self._graph.get(u)

    def __contains__(self, u) -> bool:
        return u in self._graph

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhpMap):
            return NotImplemented
        return self._graph == other._graph and self.source == other.source and self.target == other.target

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._graph.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"PhpMap({len(self._graph)}/{len(self.source)} defined)"

    def image(self) -> frozenset:
        return frozenset(self._graph.values())

    def is_total(self) -> bool:
        return len(self._graph) == len(self.source)

    def is_surjective(self) -> bool:
        return self.image() == self.target.elements

    def is_injective(self) -> bool:
        return len(self.image()) == len(self._graph)

    def preserves_labels(self) -> bool:
        """λ-compatibility: every defined point keeps its observation label."""
        return all(self.source.label(u) == self.target.label(v) for u, v in self._graph.items())

    def inverse(self) -> PhpMap:
        if not self.is_injective():
            raise ValueError("map is not injective")
        return PhpMap(self.target, self.source, {v: u for u, v in self._graph.items()})


def validate_php_direct(source: PrefixOrder, target: PrefixOrder, graph: Mapping) -> PhpMap:
    err = direct_violation(source, target, graph)
    if err is not None:
        raise err
    return PhpMap(source, target, graph, check=False)


def validate_php_theorem1(source: PrefixOrder, target: PrefixOrder, graph: Mapping) -> PhpMap:
    err = theorem1_violation(source, target, graph)
    if err is not None:
        raise err
    return PhpMap(source, target, graph, check=False)


def identity(order: PrefixOrder) -> PhpMap:
    return PhpMap(order, order, {u: u for u in order.elements}, check=False)


def empty_map(source: PrefixOrder, target: PrefixOrder) -> PhpMap:
    return PhpMap(source, target, {}, check=False)


def compose(f: PhpMap, g: PhpMap) -> PhpMap:
    """``f ∘ g``: first ``g``, then ``f``; defined where both legs are."""
    if g.target != f.source:
        raise TypeMismatch("cannot compose: target of the inner map is not the source of the outer map")
    graph = {u: f.graph[v] for u, v in g.graph.items() if v in f.graph}
    return PhpMap(g.source, f.target, graph, check=False)


def chain_image_is_chain(f: PhpMap, chain: Iterable) -> bool:
    image = [f(u) for u in chain if u in f]
    return all(f.target.leq(a, b) or f.target.leq(b, a) for a in image for b in image)


# -- enumeration ----------------------------------------------------------


def all_partial_functions(source: PrefixOrder, target: PrefixOrder) -> Iterator[dict]:
    """Every partial function between the element sets (no validity filter)."""
    xs = sorted_ids(source.elements)
    choices = [None] + sorted_ids(target.elements)
    for values in itertools.product(choices, repeat=len(xs)):
        yield {u: v for u, v in zip(xs, values) if v is not None}


def enumerate_php_maps(source: PrefixOrder, target: PrefixOrder, *, preserve_labels: bool = False,
                       required: Iterable | None = None) -> Iterator[PhpMap]:
    """All PHP maps ``source -> target``, generated structurally.

    A root goes to a target root or is left undefined; a child of ``u`` goes to
    a child of ``f(u)``, to ``f(u)`` itself, or is left undefined; nothing
    below an undefined point is defined.  ``required`` restricts the output to
    maps defined on every listed element.
    """
    order = source.by_depth()
    req = set(required or ())
    for r in req:
        if r not in source:
            raise UnknownElement(r, "source order")

    def options(u, graph):
        p = source.parent[u]
        if p is None:
            cands = target.roots()
        elif p not in graph:
            return [] if u in req else [None]
        else:
            cands = [graph[p], *target.children(graph[p])]
        if preserve_labels:
            cands = [v for v in cands if source.label(u) == target.label(v)]
        return cands if u in req else [None, *cands]

    def rec(i, graph):
        if i == len(order):
            yield PhpMap(source, target, graph, check=False)
            return
        u = order[i]
        for v in options(u, graph):
            if v is None:
                yield from rec(i + 1, graph)
            else:
                graph[u] = v
                yield from rec(i + 1, graph)
                del graph[u]

    yield from rec(0, {})


def random_php_map(source: PrefixOrder, target: PrefixOrder, rng: random.Random, *,
                   p_undefined: float = 0.2, p_stay: float = 0.3) -> PhpMap:
    """A random valid map built along the structural recursion."""
    graph: dict = {}
    for u in source.by_depth():
        p = source.parent[u]
        if p is not None and p not in graph:
            continue
        if rng.random() < p_undefined:
            continue
        if p is None:
            cands = target.roots()
        else:
            kids = list(target.children(graph[p]))
            cands = [graph[p]] if (not kids or rng.random() < p_stay) else kids
        if cands:
            graph[u] = rng.choice(cands)
    return PhpMap(source, target, graph, check=False)


# -- serialisation --------------------------------------------------------


def to_document(f: PhpMap, source_ref: str = "", target_ref: str = "") -> dict:
    pairs = [{"from": encode_id(u), "to": encode_id(f.graph[u])} for u in _by_depth(f.source, f.graph)]
    return {"source_ref": source_ref, "target_ref": target_ref, "pairs": pairs}


def graph_from_document(doc: Mapping[str, Any]) -> dict:
    graph: dict = {}
    for rec in doc.get("pairs", []):
        u = decode_id(rec["from"])
        if u in graph:
            raise TypeMismatch(f"{u!r} is mapped twice")
        graph[u] = decode_id(rec["to"])
    return graph


def dumps(f: PhpMap, source_ref: str = "", target_ref: str = "") -> str:
    return json.dumps(to_document(f, source_ref, target_ref), ensure_ascii=False, indent=1)

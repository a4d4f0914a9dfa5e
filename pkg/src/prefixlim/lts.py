"""Labeled transition systems, their run orders, and bisimulation."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable

from .errors import AlphabetMismatch, UnknownElement
from .maps import PhpMap
from .order import PrefixOrder, decode_id, encode_id, sort_key, sorted_ids, string_order


@dataclass(frozen=True)
class Lts:
    states: frozenset
    alphabet: frozenset
    initial: Hashable
    transitions: frozenset  # of (source, label, target)

    def __init__(self, states: Iterable, alphabet: Iterable, initial: Hashable, transitions: Iterable[tuple]):
        object.__setattr__(self, "states", frozenset(states))
        object.__setattr__(self, "alphabet", frozenset(alphabet))
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "transitions", frozenset(tuple(t) for t in transitions))
        if initial not in self.states:
            raise UnknownElement(initial, "state set")
        succ: dict = {}
        for x, a, y in self.transitions:
            for s in (x, y):
                if s not in self.states:
                    raise UnknownElement(s, "state set")
            if a not in self.alphabet:
                raise UnknownElement(a, "alphabet")
            succ.setdefault((x, a), set()).add(y)
        object.__setattr__(self, "_succ", {k: tuple(sorted_ids(v)) for k, v in succ.items()})

    def successors(self, x, a) -> tuple:
        """Targets of ``a``-transitions from ``x``, in sorted order."""
        return self._succ.get((x, a), ())

    def enabled(self, x) -> list:
        return sorted_ids({a for (y, a) in self._succ if y == x})

    def out(self, x) -> list[tuple]:
        return [(a, y) for a in sorted_ids(self.alphabet) for y in self.successors(x, a)]

    @property
    def deterministic(self) -> bool:
        return all(len(v) <= 1 for v in self._succ.values())

    def reachable(self) -> frozenset:
        seen, stack = {self.initial}, [self.initial]
        while stack:
            x = stack.pop()
            for _, y in self.out(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return frozenset(seen)

    def restrict_reachable(self) -> Lts:
        r = self.reachable()
        return Lts(r, self.alphabet, self.initial, [t for t in self.transitions if t[0] in r])

    def to_document(self) -> dict:
        return {
            "states": [encode_id(s) for s in sorted_ids(self.states)],
            "alphabet": sorted_ids(self.alphabet),
            "initial": encode_id(self.initial),
            "transitions": [[encode_id(x), a, encode_id(y)] for x, a, y in sorted(self.transitions, key=sort_key)],
        }

    @classmethod
    def from_document(cls, doc: dict) -> Lts:
        return cls(
            [decode_id(s) for s in doc["states"]],
            doc["alphabet"],
            decode_id(doc["initial"]),
            [(decode_id(x), a, decode_id(y)) for x, a, y in doc["transitions"]],
        )


# -- runs -----------------------------------------------------------------


@dataclass
class RunOrder:
    """Runs of an LTS up to a depth, prefix ordered by extension.

    A run is identified by the tuple of ``(label, state)`` steps taken from the
    initial state; ``state_of`` gives its last state and ``lam`` its trace.
    """

    lts: Lts
    depth: int
    order: PrefixOrder
    lam: PhpMap = field(repr=False)

    def state_of(self, run: tuple):
        return run[-1][1] if run else self.lts.initial

    def trace(self, run: tuple) -> tuple:
        return tuple(a for a, _ in run)


def trace_label(trace: tuple) -> str:
    return "".join(map(str, trace)) if trace else "ε"


def unfold(lts: Lts, depth: int) -> RunOrder:
    if depth < 0:
        raise ValueError("depth must be non-negative")
    parent: dict = {(): None}
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for run in frontier:
            x = run[-1][1] if run else lts.initial
            for a, y in lts.out(x):
                r2 = run + ((a, y),)
                parent[r2] = run
                nxt.append(r2)
        frontier = nxt
    labels = {r: trace_label(tuple(a for a, _ in r)) for r in parent}
    order = PrefixOrder(parent, labels)
    strings = string_order(lts.alphabet, depth)
    lam = PhpMap(order, strings, {r: tuple(a for a, _ in r) for r in parent})
    return RunOrder(lts, depth, order, lam)


def unfolding_lts(lts: Lts, depth: int) -> Lts:
    """The run tree up to ``depth`` as an LTS (leaves have no outgoing transitions)."""
    runs = unfold(lts, depth).order
    trans = [(runs.parent[r], r[-1][0], r) for r in runs.elements if r]
    return Lts(runs.elements, lts.alphabet, (), trans)


# -- bisimulation ---------------------------------------------------------


@dataclass
class BisimResult:
    bisimilar: bool
    relation: frozenset  # pairs (x, y) identified by the coarsest bisimulation
    level: int | None  # first refinement round separating the initial states

    def __bool__(self) -> bool:
        return self.bisimilar


def bisimilar(p: Lts, q: Lts) -> BisimResult:
    """Decide bisimilarity of the initial states by signature refinement on the disjoint union."""
    if p.alphabet != q.alphabet:
        raise AlphabetMismatch(p.alphabet, q.alphabet)
    states = [(0, x) for x in sorted_ids(p.states)] + [(1, y) for y in sorted_ids(q.states)]
    systems = (p, q)

    def out(s):
        side, x = s
        return [(a, (side, y)) for a, y in systems[side].out(x)]

    block = {s: 0 for s in states}
    level = None
    rnd = 0
    while True:
        if level is None and block[(0, p.initial)] != block[(1, q.initial)]:
            level = rnd
        sigs = {s: (block[s], frozenset((a, block[t]) for a, t in out(s))) for s in states}
        ids: dict = {}
        new = {s: ids.setdefault(sigs[s], len(ids)) for s in states}
        rnd += 1
        if len(ids) == len(set(block.values())):
            break
        block = new
    if level is None and block[(0, p.initial)] != block[(1, q.initial)]:
        level = rnd
    rel = frozenset((x, y) for (sx, x) in states if sx == 0 for (sy, y) in states if sy == 1
                    and block[(0, x)] == block[(1, y)])
    same = block[(0, p.initial)] == block[(1, q.initial)]
    return BisimResult(same, rel if same else frozenset(), None if same else level)


def random_lts(rng: random.Random, n_states: int, alphabet: Iterable = ("a", "b"), *, density: float = 0.35) -> Lts:
    letters = sorted(alphabet)
    states = list(range(n_states))
    trans = [(x, a, y) for x in states for a in letters for y in states if rng.random() < density]
    return Lts(states, letters, 0, trans)


def dumps(lts: Lts) -> str:
    return json.dumps(lts.to_document(), ensure_ascii=False, indent=1)

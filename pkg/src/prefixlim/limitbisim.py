"""A bounded checker for limit-bisimulation witness relations.

A witness relation pairs states of a candidate LTS with nets of states drawn
from a net of LTSs indexed by ℕ.  Infinite nets are replaced by finite
samples over the indices ``0..N``; cofinal subsets become progressions over
the positions of the current sample.  The checker plays the three conditions
as a game from the initial pair, to a bounded number of transitions:

* condition 1: the initial state is related to the net of initial states;
* condition 2: each candidate move is matched by a net of moves from some
  index onward (the checker searches for the matching net);
* condition 3: each net of moves on a cofinal subset (chosen adversarially
  from a fixed menu of shapes) is matched by a candidate move and a further
  cofinal subset.

A pass means that no violation exists at the given bounds; it is not a proof.

Finite readings of the asymptotic quantifiers, all evaluated on the *tail*
of a sample (its members at indices ``≥ N // 2``):

* "eventually P" holds when P holds on the whole tail;
* "unbounded" holds when the maximum over the later half of the tail exceeds
  the maximum over the earlier half;
* "infinitely often y" holds when ``y`` occurs in the later half of the tail.

A sample counts as cofinal only if its tail has at least two members.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping

from .errors import BoundsTooSmall
from .lts import Lts
from .order import sort_key


@dataclass(frozen=True)
class SampledNet:
    """Values ``x_k`` at the sampled indices ``k`` (increasing)."""

    indices: tuple
    values: tuple

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")

    @classmethod
    def of(cls, pairs: Iterable[tuple]) -> SampledNet:
        pairs = list(pairs)
        return cls(tuple(i for i, _ in pairs), tuple(v for _, v in pairs))

    def __len__(self) -> int:
        return len(self.indices)

    def items(self) -> Iterator[tuple]:
        return zip(self.indices, self.values)

    def tail(self, n: int) -> tuple:
        """Values at indices ``≥ n // 2``."""
        return tuple(v for k, v in self.items() if k >= n // 2)

    def cofinal(self, n: int) -> bool:
        return len(self.tail(n)) >= 2

    def eventually(self, pred: Callable[[Any], bool], n: int) -> bool:
        t = self.tail(n)
        return len(t) >= 2 and all(pred(v) for v in t)

    def eventually_equal(self, x, n: int) -> bool:
        return self.eventually(lambda v: v == x, n)

    def unbounded(self, measure: Callable[[Any], Any], n: int) -> bool:
        t = self.tail(n)
        if len(t) < 2:
            return False
        half = len(t) // 2
        return max(map(measure, t[half:])) > max(map(measure, t[:half]))

    def infinitely_often(self, x, n: int) -> bool:
        t = self.tail(n)
        return len(t) >= 2 and x in t[len(t) // 2:]

    def positions(self, offset: int, step: int) -> SampledNet:
        return SampledNet(self.indices[offset::step], self.values[offset::step])

    def from_index(self, n0: int) -> SampledNet:
        return SampledNet.of((k, v) for k, v in self.items() if k >= n0)

    def describe(self) -> list:
        return [[k, v] for k, v in self.items()]


Relation = Callable[[Hashable, SampledNet, int], bool]


@dataclass(frozen=True)
class Bounds:
    index: int = 32  # N: nets are sampled on 0..N
    depth: int = 6  # D: transitions explored from the initial pair
    stride: int = 4  # B: progressions have offset < step ≤ B
    offset: int | None = None  # optional tighter cap on offsets

    def to_report(self) -> dict:
        out = {"N": self.index, "D": self.depth, "B": self.stride}
        if self.offset is not None:
            out["offset_bound"] = self.offset
        return out


@dataclass
class WitnessSpec:
    """A candidate system, a net of systems over ℕ, and a proposed witness relation."""

    candidate: Lts
    net: Callable[[int], Lts]
    relation: Relation
    name: str = ""


@dataclass
class Violation:
    clause: int
    state: Any
    net: SampledNet
    label: Any = None
    detail: str = ""
    cause: Violation | None = None

    def to_report(self) -> dict:
        out = {"clause": self.clause, "state": _plain(self.state), "net": _plain(self.net.describe()),
               "label": self.label, "detail": self.detail}
        if self.cause is not None:
            out["cause"] = self.cause.to_report()
        return out


def _plain(x):
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (int, str)) or x is None:
        return x
    return str(x)


@dataclass
class WitnessReport:
    passed: bool
    violation: Violation | None
    bounds: Bounds
    pairs_checked: int
    reading: str
    name: str = ""

    def to_report(self) -> dict:
        return {
            "witness": self.name,
            "result": "pass" if self.passed else "violation",
            "note": "pass means no violation within the bounds, not a proof",
            "reading": self.reading,
            "bounds": self.bounds.to_report(),
            "pairs_checked": self.pairs_checked,
            "violation": self.violation.to_report() if self.violation else None,
        }


# -- choice menus ---------------------------------------------------------


def _choosers(candidates: Iterable = ()) -> list[tuple[str, Callable[[int, int, tuple], Any]]]:
    """Ways of picking one successor per sampled index ``k`` at position ``p``."""
    rank0 = lambda k, p, s: s[0]
    rank1 = lambda k, p, s: s[min(1, len(s) - 1)]
    last = lambda k, p, s: s[-1]
    track = lambda k, p, s: s[min(k, len(s) - 1)]

    def alt(f, g):
        return lambda k, p, s: f(k, p, s) if p % 2 == 0 else g(k, p, s)

    menu = [("rank0", rank0), ("rank1", rank1), ("last", last), ("track", track),
            ("alt(rank0,rank1)", alt(rank0, rank1)), ("alt(rank0,last)", alt(rank0, last)),
            ("alt(rank0,track)", alt(rank0, track))]
    for y in candidates:
        menu.append((f"value({y})", lambda k, p, s, y=y: y if y in s else None))
    return menu


def _successor_nets(lts_at: Callable[[int], Lts], net: SampledNet, label, *, constants: bool) -> dict[tuple, SampledNet]:
    """Distinct nets of ``label``-successors, one per menu entry (empty if some member is stuck).

    With ``constants`` the menu also offers every constant choice.
    """
    succ = [lts_at(k).successors(x, label) for k, x in net.items()]
    if any(not s for s in succ):
        return {}
    values = sorted({y for s in succ for y in s}, key=sort_key) if constants else ()
    out: dict = {}
    for _name, pick in _choosers(values):
        vals = tuple(pick(k, p, s) for p, ((k, _), s) in enumerate(zip(net.items(), succ)))
        if any(v is None for v in vals):
            continue
        out.setdefault(vals, SampledNet(net.indices, vals))
    return out


def _progressions(net: SampledNet, bounds: Bounds) -> list[SampledNet]:
    """Sub-samples at positions ``offset + step·t`` with ``offset < step ≤ B`` that stay cofinal."""
    n = bounds.index
    cap = bounds.stride if bounds.offset is None else bounds.offset + 1
    out, seen = [], set()
    for step in range(1, bounds.stride + 1):
        for offset in range(min(step, cap)):
            sub = net.positions(offset, step)
            if sub.cofinal(n) and sub.indices not in seen:
                seen.add(sub.indices)
                out.append(sub)
    return out


# -- the game -------------------------------------------------------------


class _Game:
    def __init__(self, spec: WitnessSpec, bounds: Bounds, reading: str):
        self.spec = spec
        self.bounds = bounds
        self.reading = reading
        self.n = bounds.index
        self.memo: dict = {}
        self._lts_cache: dict[int, Lts] = {}

    def lts_at(self, k: int) -> Lts:
        if k not in self._lts_cache:
            self._lts_cache[k] = self.spec.net(k)
        return self._lts_cache[k]

    def related(self, x, net: SampledNet) -> bool:
        return net.cofinal(self.n) and self.spec.relation(x, net, self.n)

    def good(self, x, net: SampledNet, r: int) -> Violation | None:
        key = (x, net.indices, net.values, r)
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = None  # co-inductive assumption while the pair is on the stack
        res = self._check(x, net, r)
        self.memo[key] = res
        return res

    def _check(self, x, net: SampledNet, r: int) -> Violation | None:
        if r == 0:
            return None
        cand = self.spec.candidate
        for a, x2 in cand.out(x):
            v = self._match_candidate_move(x, net, a, x2, r)
            if v is not None:
                return v
        for a in sorted(cand.alphabet, key=sort_key):
            v = self._answer_net_moves(x, net, a, r)
            if v is not None:
                return v
        return None

    def _match_candidate_move(self, x, net, a, x2, r) -> Violation | None:
        n = self.n
        starts = sorted({net.indices[0], *[k for k in net.indices if k >= n // 2][:1]})
        bases = [net]
        if self.reading == "subnet":
            bases += _progressions(net, self.bounds)
        last_cause = None
        for base in bases:
            for n0 in starts:
                tail = base.from_index(n0)
                if not tail.cofinal(n):
                    continue
                for nxt in _successor_nets(self.lts_at, tail, a, constants=True).values():
                    if not self.related(x2, nxt):
                        continue
                    cause = self.good(x2, nxt, r - 1)
                    if cause is None:
                        return None
                    last_cause = cause
        detail = f"no net of {a}-moves from some index onward is related to {x2!r}"
        return Violation(2, x, net, a, detail, last_cause)

    def _answer_net_moves(self, x, net, a, r) -> Violation | None:
        n = self.n
        options = self.spec.candidate.successors(x, a)
        for sub in _progressions(net, self.bounds):
            for moved in _successor_nets(self.lts_at, sub, a, constants=False).values():
                if not self._some_answer(options, moved, r):
                    detail = f"no {a}-move of the candidate is related to a cofinal part of the moved net"
                    return Violation(3, x, net, a, detail, Violation(3, None, moved, a, "unanswered net"))
        return None

    def _some_answer(self, options, moved: SampledNet, r) -> bool:
        for x2 in options:
            for part in _progressions(moved, self.bounds):
                if self.related(x2, part) and self.good(x2, part, r - 1) is None:
                    return True
        return False


def check_limit_bisim_witness(spec: WitnessSpec, bounds: Bounds = Bounds(), *, reading: str = "literal") -> WitnessReport:
    """Search for a violation of the witness conditions within ``bounds``.

    ``reading="literal"`` requires, for a candidate move, a matching net on
    the whole current sample from some index on; ``reading="subnet"`` also
    lets the match use a cofinal part of the sample.
    """
    if reading not in ("literal", "subnet"):
        raise ValueError(f"unknown reading {reading!r}")
    if bounds.stride < 1 or bounds.depth < 0:
        raise BoundsTooSmall("need stride ≥ 1 and depth ≥ 0")
    full = SampledNet(tuple(range(bounds.index + 1)), tuple(spec.net(k).initial for k in range(bounds.index + 1)))
    if not full.cofinal(bounds.index):
        raise BoundsTooSmall(f"index bound {bounds.index} leaves fewer than two samples in the tail")
    game = _Game(spec, bounds, reading)
    if not spec.relation(spec.candidate.initial, full, bounds.index):
        v = Violation(1, spec.candidate.initial, full, None, "initial state is not related to the net of initial states")
        return WitnessReport(False, v, bounds, 0, reading, spec.name)
    v = game.good(spec.candidate.initial, full, bounds.depth)
    return WitnessReport(v is None, v, bounds, len(game.memo), reading, spec.name)

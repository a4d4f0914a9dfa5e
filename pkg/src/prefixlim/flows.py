"""Flows, dyadic discretisation and the refinement tower.

Everything is exact: times and values are :class:`fractions.Fraction`, and
signals are restricted to classes that stay dyadic on dyadic inputs.

A sample sequence at level ``k`` lists ``f(0), f(2^-k), f(2·2^-k), …``.  The
refinement map from level ``l`` to level ``k ≤ l`` is given recursively by
:func:`refine`; the one-level step keeps samples ``0, 2, 4, …`` of the first
``2·⌊n/2⌋`` entries.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BadParams, BadResolution, FlowNotInSet, InconsistentThread
from .family import ChainFamily, FamilyKind
from .limits import EXACT, LimitThread, thread_through
from .maps import PhpMap
from .order import HashedTuple, PrefixOrder

Q = Fraction


def dyadic(num: int, exp: int = 0) -> Fraction:
    """``num / 2**exp``."""
    return Fraction(num, 2 ** exp) if exp >= 0 else Fraction(num * 2 ** -exp)


def is_dyadic(x: Fraction) -> bool:
    d = Fraction(x).denominator
    return d & (d - 1) == 0


class SampleSeq(HashedTuple):
    """A sample sequence; hashing and comparing Fractions is costly, so the hash is cached."""

    def __getitem__(self, item):
        out = tuple.__getitem__(self, item)
        return SampleSeq(out) if isinstance(item, slice) else out

    def __add__(self, other):
        return SampleSeq(tuple.__add__(self, tuple(other)))


def _encode(x: Fraction) -> list[int]:
    x = Fraction(x)
    exp = x.denominator.bit_length() - 1
    return [x.numerator, exp]


def _decode(pair) -> Fraction:
    return dyadic(int(pair[0]), int(pair[1]))


@dataclass(frozen=True)
class Signal:
    """A continuous dyadic signal on ``[0, end]``.

    ``kind`` is ``"constant"`` (``data = (c,)``), ``"polynomial"``
    (``data`` = coefficients, constant term first) or ``"piecewise"``
    (``data = (start, (until, slope), …)`` with increasing breakpoints).
    """

    kind: str
    data: tuple
    end: Fraction
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("constant", "polynomial", "piecewise"):
            raise BadParams(f"unknown signal kind {self.kind!r}")
        if self.end < 0 or not is_dyadic(self.end):
            raise BadParams("domain end must be a non-negative dyadic rational")
        if self.kind == "piecewise":
            prev = Fraction(0)
            for until, slope in self.data[1:]:
                if until <= prev or not is_dyadic(until) or not is_dyadic(slope):
                    raise BadParams("breakpoints must increase and be dyadic")
                prev = until
            if prev < self.end:
                raise BadParams("segments do not cover the domain")

    @classmethod
    def constant(cls, c, end=1, name: str = "") -> Signal:
        return cls("constant", (Q(c),), Q(end), name or f"const {c}")

    @classmethod
    def polynomial(cls, coefficients: Sequence, end=1, name: str = "") -> Signal:
        return cls("polynomial", tuple(Q(c) for c in coefficients), Q(end), name)

    @classmethod
    def piecewise(cls, start, segments: Iterable[tuple], end=None, name: str = "") -> Signal:
        segs = tuple((Q(u), Q(s)) for u, s in segments)
        return cls("piecewise", (Q(start), *segs), Q(end) if end is not None else segs[-1][0], name)

    @classmethod
    def sawtooth(cls, half_period, end=1, start=0, first_slope=1, name: str = "") -> Signal:
        """Slope ±1 alternating every ``half_period``."""
        w = Q(half_period)
        n = -(-Q(end) // w)
        segs = [((i + 1) * w, first_slope * (-1) ** i) for i in range(int(n))]
        return cls.piecewise(start, segs, end, name or f"sawtooth {w}")

    def __call__(self, t) -> Fraction:
        t = Q(t)
        if t < 0 or t > self.end:
            raise ValueError(f"time {t} outside [0, {self.end}]")
        if self.kind == "constant":
            return self.data[0]
        if self.kind == "polynomial":
            acc = Fraction(0)
            for c in reversed(self.data):
                acc = acc * t + c
            return acc
        value, prev = self.data[0], Fraction(0)
        for until, slope in self.data[1:]:
            if t <= until:
                return value + slope * (t - prev)
            value += slope * (until - prev)
            prev = until
        return value

    def samples(self, k: int, count: int | None = None) -> tuple:
        """``f(m·2^-k)`` for ``m = 0 .. count-1`` (default: the whole grid on ``[0, end]``)."""
        step = dyadic(1, k)
        if count is None:
            count = int(self.end / step) + 1
        return SampleSeq(self(m * step) for m in range(count))

    def to_document(self) -> dict:
        if self.kind == "piecewise":
            data = [_encode(self.data[0])] + [[_encode(u), _encode(s)] for u, s in self.data[1:]]
        else:
            data = [_encode(c) for c in self.data]
        return {"kind": self.kind, "data": data, "T": _encode(self.end), "name": self.name}

    @classmethod
    def from_document(cls, doc: Mapping) -> Signal:
        kind = doc["kind"]
        if kind == "piecewise":
            first, *rest = doc["data"]
            data = (_decode(first), *((_decode(u), _decode(s)) for u, s in rest))
        else:
            data = tuple(_decode(c) for c in doc["data"])
        return cls(kind, data, _decode(doc["T"]), doc.get("name", ""))


@dataclass(frozen=True)
class FlowSet:
    """Generators of a prefix-closed set of flows (every restriction of a generator is a member)."""

    generators: tuple

    def __init__(self, generators: Iterable[Signal]):
        object.__setattr__(self, "generators", tuple(generators))

    def __iter__(self):
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)


def standard_flowset() -> FlowSet:
    return FlowSet([Signal.constant(1, name="1"), Signal.polynomial([0, 1], name="t"),
                    Signal.polynomial([0, 0, 1], name="t^2")])


def sawtooth_flowset(finest: int, end=1) -> FlowSet:
    """Saw-tooth flows of half-period ``2^-j`` for ``j = 0..finest``, starting upward from 0."""
    return FlowSet([Signal.sawtooth(dyadic(1, j), end) for j in range(finest + 1)])


# -- discretisation and refinement ----------------------------------------


def trie(sequences: Iterable[tuple]) -> PrefixOrder:
    parent: dict = {SampleSeq(): None}
    for s in sequences:
        s = SampleSeq(s)
        for n in range(len(s), 0, -1):
            if s[:n] in parent:
                break
            parent[s[:n]] = s[:n - 1]
    return PrefixOrder(parent)


def discretize(flows: FlowSet, k: int) -> PrefixOrder:
    """All sample sequences at step ``2^-k`` of members of the flow set, with the empty sequence as root."""
    if k < 0:
        raise BadParams("level must be non-negative")
    return trie(f.samples(k) for f in flows)


def refine(seq: tuple, l: int, k: int) -> tuple:
    """The recursive refinement map from level ``l`` to level ``k``, exactly as defined by its three clauses."""
    if k > l:
        raise BadParams(f"cannot refine from level {l} to finer level {k}")
    if l == k:
        return tuple(seq)
    if len(seq) <= 1:
        return ()
    x, rest = seq[0], seq[2:]
    return refine((x,) + refine(rest, l, k), l - 1, k)


def refine_step(seq: tuple, mode: str = "recursion") -> tuple:
    """One level coarser: ``recursion`` drops an unpaired last sample, ``subsample`` keeps it."""
    if mode == "recursion":
        return SampleSeq(seq[0:2 * (len(seq) // 2):2])
    if mode == "subsample":
        return SampleSeq(seq[::2])
    raise BadParams(f"unknown refinement mode {mode!r}")


class DyadicTower(ChainFamily):
    """Discretisations at levels ``0..K`` linked by one-level refinement steps."""

    def __init__(self, objects, *, horizon: int, mode: str = "recursion", flows: FlowSet | None = None,
                 name: str = "dyadic_tower"):
        self.flows = flows
        self.mode = mode
        objs = objects if callable(objects) else (lambda n: objects[n])
        super().__init__(objs, self._make_step, horizon=horizon, kind=FamilyKind.GENERATOR, name=name)

    def _make_step(self, n: int) -> PhpMap:
        fine, coarse = self.obj(n + 1), self.obj(n)
        return PhpMap(fine, coarse, {s: refine_step(s, self.mode) for s in fine.elements}, check=False)


def dyadic_tower(flows: FlowSet, K: int, mode: str = "recursion") -> DyadicTower:
    if K < 0:
        raise BadParams("K must be non-negative")
    refine_step((), mode)
    return DyadicTower(lambda n: discretize(flows, n), horizon=K, mode=mode, flows=flows)


def thread_length(end: Fraction, level: int, mode: str) -> int:
    """Number of samples the flow's thread holds at ``level``."""
    scaled = Fraction(end) * 2 ** level
    return int(scaled) if mode == "recursion" else int(scaled) + 1


def thread_of_flow(f: Signal, tower: DyadicTower) -> LimitThread:
    """The limit execution of a generator.

    Under the recursion the full grids are not compatible (each step drops the
    endpoint), so level ``n`` holds ``⌊T·2^n⌋`` samples; this is the unique
    thread through every level.  Under ``subsample`` the full grids are used.
    """
    if tower.flows is None or f not in tower.flows.generators:
        raise FlowNotInSet(f)
    assignment = {n: f.samples(n, thread_length(f.end, n, tower.mode)) for n in tower.indices}
    return LimitThread.from_mapping(assignment, EXACT)


@dataclass
class Reconstruction:
    samples: dict  # time -> value on the requested grid
    domain_end: Fraction | None  # sup of grid points covered by the thread

    def increments(self) -> list[Fraction]:
        ts = sorted(self.samples)
        return [self.samples[b] - self.samples[a] for a, b in zip(ts, ts[1:])]

    def is_lipschitz(self, constant=1) -> bool:
        ts = sorted(self.samples)
        return all(abs(self.samples[b] - self.samples[a]) <= constant * (b - a) for a, b in itertools.combinations(ts, 2))


def reconstruct(thread: LimitThread, depth: int) -> Reconstruction:
    """Values on the ``2^-depth`` grid carried by a tower thread, checked for consistency across levels."""
    values: dict = {}
    for level, seq in thread.assignment:
        step = dyadic(1, level)
        for m, v in enumerate(seq):
            t = m * step
            if t in values and values[t] != v:
                raise InconsistentThread(t, values[t], v)
            values[t] = v
    levels = dict(thread.assignment)
    if depth not in levels:
        raise BadParams(f"thread has no level {depth}")
    step = dyadic(1, depth)
    samples = {m * step: v for m, v in enumerate(levels[depth])}
    covered = [(len(seq) - 1) * dyadic(1, lv) for lv, seq in thread.assignment if seq]
    return Reconstruction(samples, max(covered) if covered else None)


def refute_search(flows: FlowSet, candidate, depth: int) -> tuple | None:
    """Look for grid times on which ``candidate`` differs from every member flow.

    ``candidate`` is a :class:`Signal` or a mapping ``level -> samples``.  For
    each generator defined at least as long as the candidate, the earliest
    grid time of disagreement (over levels ``0..depth``) is collected; the
    sorted set of those times is returned, or ``None`` if some generator
    agrees on every grid point (inconclusive).
    """
    if isinstance(candidate, Signal):
        ladder = {d: candidate.samples(d) for d in range(depth + 1)}
    else:
        ladder = {d: tuple(candidate[d]) for d in range(depth + 1) if d in candidate}
    points: dict = {}
    for d, seq in ladder.items():
        for m, v in enumerate(seq):
            points.setdefault(m * dyadic(1, d), v)
    if not points:
        return None
    horizon = max(points)
    refuting = set()
    for g in flows:
        if g.end < horizon:
            continue
        bad = [t for t in sorted(points) if g(t) != points[t]]
        if not bad:
            return None
        refuting.add(bad[0])
    return tuple(sorted(refuting)) if refuting else None


# -- the differential-inclusion closure demo -------------------------------


def increment_lattice(k: int, m: int) -> tuple:
    """Increments over one ``2^-k`` step of slope-±1 flows switching only at multiples of ``2^-m``."""
    if m < k + 1:
        raise BadResolution(k, m)
    h = dyadic(1, k)
    q = dyadic(1, m)
    count = int(h / q)
    return tuple(sorted({h - 2 * j * q for j in range(count + 1)}))


def inclusion_level(level: int, m: int, steps: int) -> PrefixOrder:
    incs = increment_lattice(level, m)
    seqs = []
    for choice in itertools.product(incs, repeat=steps):
        seqs.append(tuple(itertools.accumulate(choice, initial=Fraction(0))))
    return trie(seqs)


@dataclass
class InclusionReport:
    k: int
    m: int
    length: int
    zero_member: bool
    sampled: int
    lipschitz_violations: list
    zero_increments: list
    sawtooth_gap: Fraction
    family_valid: bool

    @property
    def passed(self) -> bool:
        return (self.zero_member and not self.lipschitz_violations and self.family_valid
                and all(d == 0 for d in self.zero_increments))

    def to_report(self) -> dict:
        return {
            "k": self.k, "m": self.m, "len": self.length,
            "zero_sequence_member": self.zero_member,
            "sampled_threads": self.sampled,
            "lipschitz_violations": [str(v) for v in self.lipschitz_violations],
            "zero_thread_increments": [str(d) for d in self.zero_increments],
            "zero_thread_slope_pm1": any(d != 0 for d in self.zero_increments),
            "nearest_sawtooth_sup_distance": str(self.sawtooth_gap),
            "refinement_steps_history_preserving": self.family_valid,
            "result": "pass" if self.passed else "violation",
        }


def inclusion_demo(k: int, m: int, length: int, *, seed: int = 0, samples: int = 50) -> InclusionReport:
    """Discretise ``ẋ ∈ {-1, 1}`` from 0 and show the tower closes it to slopes in ``[-1, 1]``.

    Level ``n`` holds sequences of ``⌊length·2^(n-k)⌋`` increments from the
    lattice at that level; levels ``0..k`` form the tower.
    """
    if m < k + 1:
        raise BadResolution(k, m)
    T = length * dyadic(1, k)
    objects = [inclusion_level(n, m, thread_length(T, n, "subsample") - 1) for n in range(k + 1)]
    tower = DyadicTower(objects, horizon=k, mode="recursion", name="inclusion")
    from .maps import direct_violation

    family_valid = all(direct_violation(tower.step(n).source, tower.step(n).target, tower.step(n).graph) is None
                       for n in range(k))
    top = objects[k]
    zero = SampleSeq(Fraction(0) for _ in range(length + 1))
    zero_member = zero in top

    rng = random.Random(seed)
    maximal = sorted(top.maximal(), key=lambda s: tuple(s))
    picks = [zero] + rng.sample(maximal, min(samples, len(maximal)))
    bad = []
    for s in picks:
        thread = thread_through(tower, s, k)
        rec = reconstruct(thread, k)
        if not rec.is_lipschitz():
            bad.append(s)
    zero_rec = reconstruct(thread_through(tower, zero, k), k) if zero_member else Reconstruction({}, None)
    tooth = Signal.sawtooth(dyadic(1, m), T)
    gap = max(abs(tooth(t)) for t in (j * dyadic(1, m + 1) for j in range(int(T * 2 ** (m + 1)) + 1)))
    return InclusionReport(k, m, length, zero_member, len(picks), bad, zero_rec.increments(), gap, family_valid)


def plot_data(rec: Reconstruction) -> list[list[str]]:
    return [[str(t), str(v)] for t, v in sorted(rec.samples.items())]


def dumps_signal(f: Signal) -> str:
    return json.dumps(f.to_document())

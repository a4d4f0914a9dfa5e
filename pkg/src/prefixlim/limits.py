"""Limit executions (threads) and the projective limit of an inverse family.

At a finite horizon ``h`` every thread is defined at ``h`` (it extends upward)
and is then determined by its value there (it is closed downward under the
family maps), so threads are enumerated by pushing each element of ``U_h``
back through the family.  The order ⊑ between threads is nevertheless
computed pairwise from its definition and then checked against the
prefix-order axioms, so the construction is verified rather than assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import (
    ConeNotCommuting,
    HorizonExceedsFamily,
    InvalidIndex,
    MediatingNotThread,
    NotUnique,
    ThreadViolation,
    TypeMismatch,
    WrongFamilyKind,
)
from .family import ChainFamily, Family, FamilyKind, FiniteFamily
from .maps import PhpMap, direct_violation, theorem1_violation
from .order import HashedTuple, PrefixOrder, encode_id, sort_key, validate_order

EXACT = "exact"
APPROXIMATE = "horizon-approximate"


@dataclass(frozen=True)
class LimitThread:
    """A compatible choice of at most one execution per index."""

    assignment: tuple  # ((index, exec), ...) in index order
    certainty: str = APPROXIMATE

    def __post_init__(self):
        # the assignment doubles as the thread's id in the thread order
        object.__setattr__(self, "assignment", HashedTuple(self.assignment))
        object.__setattr__(self, "_lookup", dict(self.assignment))

    @classmethod
    def from_mapping(cls, assignment: Mapping, certainty: str = APPROXIMATE) -> LimitThread:
        return cls(tuple(sorted(assignment.items(), key=lambda p: sort_key(p[0]))), certainty)

    @property
    def key(self) -> tuple:
        return self.assignment

    @property
    def start(self):
        return self.assignment[0][0] if self.assignment else None

    @property
    def indices(self) -> list:
        return [i for i, _ in self.assignment]

    def at(self, i):
        for j, u in self.assignment:
            if j == i:
                return u
        return None

    def as_dict(self) -> dict:
        return dict(self._lookup)

    def to_document(self) -> dict:
        return {"start": encode_id(self.start), "assignments": [[encode_id(i), encode_id(u)] for i, u in self.assignment],
                "certainty": self.certainty}


@dataclass
class ThreadOrder:
    """Threads of a family up to a horizon, with ⊑ realised as a validated prefix order."""

    family: Any
    horizon: Any
    threads: dict  # key -> LimitThread
    order: PrefixOrder = field(repr=False)

    def __len__(self) -> int:
        return len(self.threads)

    def __iter__(self):
        return iter(self.order)

    def thread(self, key) -> LimitThread:
        return self.threads[key]

    def by_value_at(self, i) -> dict:
        """Map ``exec -> thread key`` for threads defined at index ``i``."""
        return {t.at(i): k for k, t in self.threads.items() if t.at(i) is not None}


def _check_horizon(family: Family, horizon) -> Any:
    if isinstance(family, FiniteFamily):
        if horizon is not None and horizon != family.top:
            raise InvalidIndex("finite families are enumerated over their whole index")
        return family.top
    if horizon is None:
        return family.horizon
    if horizon > family.horizon:
        raise HorizonExceedsFamily(horizon, family.horizon)
    if horizon < 0:
        raise InvalidIndex("horizon must be non-negative")
    return horizon


def _indices_upto(family: Family, horizon) -> list:
    return [i for i in family.indices if family.leq(i, horizon)]


def certainty_of(family: Family, horizon) -> str:
    if isinstance(family, FiniteFamily):
        return EXACT
    if family.kind is FamilyKind.INCREASING_PARTIAL_IDENTITY:
        return EXACT
    if family.kind is FamilyKind.EXPLICIT_STABLE and horizon >= family.stable_from and horizon == family.horizon:
        return EXACT
    return APPROXIMATE


def thread_violations(family: Family, assignment: Mapping, horizon=None) -> list[ThreadViolation]:
    """Check the three limit-execution conditions on an assignment, up to a horizon."""
    horizon = _check_horizon(family, horizon)
    idx = _indices_upto(family, horizon)
    out: list[ThreadViolation] = []
    if not assignment:
        return [ThreadViolation(0, "a limit execution must be non-empty")]
    for i, u in assignment.items():
        if i not in idx:
            return [ThreadViolation(0, f"index {i!r} outside the horizon")]
        if u not in family.obj(i):
            return [ThreadViolation(0, f"{u!r} is not an element of U_{i}")]
    for i in idx:
        for j in idx:
            if not family.leq(i, j) or j not in assignment:
                continue
            image = family.map(i, j)(assignment[j])
            if i in assignment and image != assignment[i]:
                out.append(ThreadViolation(1, f"f[{i},{j}] sends {assignment[j]!r} to {image!r}, not {assignment[i]!r}"))
            elif i not in assignment and image is not None:
                out.append(ThreadViolation(2, f"f[{i},{j}]({assignment[j]!r}) = {image!r} is missing at {i!r}"))
    for i in assignment:
        for j in idx:
            if family.leq(i, j) and j not in assignment:
                out.append(ThreadViolation(3, f"defined at {i!r} but not at later index {j!r}"))
                break
    return out


def thread_through(family: Family, v, top, certainty: str = APPROXIMATE) -> LimitThread:
    """The thread whose value at ``top`` is ``v``."""
    assignment = {}
    for i in _indices_upto(family, top):
        u = family.map(i, top)(v) if not isinstance(family, ChainFamily) else family.apply(i, top, v)
        if u is not None:
            assignment[i] = u
    return LimitThread.from_mapping(assignment, certainty)


def thread_leq(family: Family, h: LimitThread, k: LimitThread) -> bool:
    kd = k._lookup
    return all(family.obj(i).leq(u, kd[i]) for i, u in h.assignment if i in kd)


def enumerate_threads(family: Family, horizon=None) -> ThreadOrder:
    """All threads over indices up to ``horizon``, ordered by ⊑.

    Raises :class:`~prefixlim.errors.InvalidOrder` if ⊑ ever failed to be a
    prefix order, which would contradict the construction.
    """
    horizon = _check_horizon(family, horizon)
    certainty = certainty_of(family, horizon)
    top_obj = family.obj(horizon)
    threads = {}
    labels = {}
    for v in top_obj.by_depth():
        t = thread_through(family, v, horizon, certainty)
        threads[t.key] = t
        if top_obj.label(v) is not None:
            labels[t.key] = top_obj.label(v)

    # by_top lets ⊑ be evaluated through cached ancestor sets per index
    ancestors: dict = {}

    def below(i, u) -> frozenset:
        key = (i, u)
        if key not in ancestors:
            ancestors[key] = frozenset(family.obj(i).chain(u))
        return ancestors[key]

    keys = list(threads)
    pairs = []
    for a in keys:
        ha = threads[a].as_dict()
        for b in keys:
            hb = threads[b].as_dict()
            if all(ha[i] in below(i, hb[i]) for i in ha if i in hb):
                pairs.append((a, b))
    order = validate_order(keys, pairs, labels=labels or None, assume_reflexive=False)
    return ThreadOrder(family, horizon, threads, order)


def projection(threads: ThreadOrder, i) -> PhpMap:
    """``π_i`` from the thread order to ``U_i``."""
    family = threads.family
    if not family.leq(i, threads.horizon):
        raise InvalidIndex(f"index {i!r} beyond horizon {threads.horizon!r}")
    graph = {k: t.at(i) for k, t in threads.threads.items() if t.at(i) is not None}
    return PhpMap(threads.order, family.obj(i), graph, check=False)


def projection_violations(threads: ThreadOrder) -> list[tuple]:
    """Every ``(index, validator, violation)`` where a projection fails a PHP validator."""
    out = []
    for i in _indices_upto(threads.family, threads.horizon):
        p = projection(threads, i)
        for name, check in (("direct", direct_violation), ("theorem1", theorem1_violation)):
            err = check(p.source, p.target, p.graph)
            if err is not None:
                out.append((i, name, err))
    return out


def naturality_violations(threads: ThreadOrder) -> list[tuple]:
    """Triples ``(i, j, thread key)`` where ``f[i,j](π_j(H)) ≠ π_i(H)``."""
    family = threads.family
    idx = _indices_upto(family, threads.horizon)
    out = []
    for key, t in threads.threads.items():
        for i in idx:
            for j in idx:
                if family.leq(i, j):
                    uj = t.at(j)
                    via = family.map(i, j)(uj) if uj is not None else None
                    if via != t.at(i):
                        out.append((i, j, key))
    return out


def antisymmetry_mechanism_violations(threads: ThreadOrder) -> list[tuple]:
    """Pairs of threads that agree at some index but disagree at a smaller one."""
    family = threads.family
    out = []
    items = list(threads.threads.items())
    for a, ha in items:
        da = ha.as_dict()
        for b, hb in items:
            db = hb.as_dict()
            for i in da:
                if i in db and da[i] == db[i]:
                    if any(da.get(j) != db.get(j) for j in family.indices if family.leq(j, i) and j != i):
                        out.append((a, b, i))
                        break
    return out


def restrict_threads(threads: ThreadOrder, horizon) -> set:
    """Assignments of the given threads cut at a smaller horizon (empty cuts dropped)."""
    family = threads.family
    out = set()
    for t in threads.threads.values():
        cut = tuple((i, u) for i, u in t.assignment if family.leq(i, horizon))
        if cut:
            out.add(cut)
    return out


def exact_chain_limit(family: Family) -> PrefixOrder:
    """The limit of a chain whose kind certifies it exactly.

    Increasing partial-identity chains give the union of their objects (every
    element persists through all later steps, which is re-checked here);
    explicit-stable chains give the object at the stabilisation index.
    """
    if not isinstance(family, ChainFamily):
        raise WrongFamilyKind(family.kind)
    if family.kind is FamilyKind.INCREASING_PARTIAL_IDENTITY:
        parent: dict = {}
        labels: dict = {}
        for n in family.indices:
            u_n = family.obj(n)
            for u in u_n.elements:
                for m in range(n, family.horizon):
                    if family.step(m)(u) != u:
                        raise WrongFamilyKind(family.kind)
                parent[u] = u_n.parent[u]
                if u_n.label(u) is not None:
                    labels[u] = u_n.label(u)
        return PrefixOrder(parent, labels)
    if family.kind is FamilyKind.EXPLICIT_STABLE:
        if family.horizon < family.stable_from:
            raise HorizonExceedsFamily(family.stable_from, family.horizon)
        return family.obj(family.stable_from)
    raise WrongFamilyKind(family.kind)


# -- universal property ---------------------------------------------------


@dataclass
class UniversalReport:
    mediating: PhpMap
    threads: ThreadOrder
    uniqueness: str  # "exhaustive" or "pointwise"
    candidates: int


def check_universal_property(family: Family, source: PrefixOrder, cone: Mapping[Any, PhpMap],
                             horizon=None, *, exhaustive_limit: int = 6) -> UniversalReport:
    """Build the mediating map of a cone and verify it is the unique one.

    ``cone[i]`` is ``ρ_i : source -> U_i`` for each index up to the horizon.
    Raises ConeNotCommuting, MediatingNotThread, NotUnique or a map violation.
    """
    horizon = _check_horizon(family, horizon)
    idx = _indices_upto(family, horizon)
    for i in idx:
        if i not in cone:
            raise TypeMismatch(f"cone has no map at index {i!r}")
        rho = cone[i]
        if rho.source != source or rho.target != family.obj(i):
            raise TypeMismatch(f"cone map at {i!r} has the wrong endpoints")
    ws = source.by_depth()
    for i in idx:
        for j in idx:
            if family.leq(i, j):
                fij = family.map(i, j)
                for w in ws:
                    rj = cone[j](w)
                    if cone[i](w) != (fij(rj) if rj is not None else None):
                        raise ConeNotCommuting(i, j, w)

    threads = enumerate_threads(family, horizon)
    graph = {}
    for w in ws:
        assignment = {i: cone[i](w) for i in idx if cone[i](w) is not None}
        if not assignment:
            continue
        bad = thread_violations(family, assignment, horizon)
        if bad:
            raise MediatingNotThread(w, str(bad[0]))
        key = LimitThread.from_mapping(assignment).key
        if key not in threads.threads:
            raise MediatingNotThread(w, "(not among the enumerated threads)")
        graph[w] = key
    for check in (direct_violation, theorem1_violation):
        err = check(source, threads.order, graph)
        if err is not None:
            raise err
    u = PhpMap(source, threads.order, graph, check=False)
    for i in idx:
        pi = projection(threads, i)
        for w in ws:
            mid = u(w)
            if (pi(mid) if mid is not None else None) != cone[i](w):
                raise MediatingNotThread(w, f"(projection {i!r} disagrees)")

    if len(source) <= exhaustive_limit:
        count = _count_mediating(source, threads, cone, idx)
        if count != 1:
            raise NotUnique(count)
        return UniversalReport(u, threads, "exhaustive", count)
    signatures = {tuple(t.at(i) for i in idx) for t in threads.threads.values()}
    if len(signatures) != len(threads.threads):
        raise NotUnique(2)
    return UniversalReport(u, threads, "pointwise", 1)


def _count_mediating(source: PrefixOrder, threads: ThreadOrder, cone: Mapping, idx: list) -> int:
    """Count PHP maps into the thread order satisfying every cone equation, by backtracking."""
    target = threads.order
    order = source.by_depth()
    projections = {i: projection(threads, i) for i in idx}

    def fits(w, key) -> bool:
        return all(projections[i](key) == cone[i](w) for i in idx)

    def undefined_ok(w) -> bool:
        return all(cone[i](w) is None for i in idx)

    def rec(n, graph) -> int:
        if n == len(order):
            return 1
        w = order[n]
        p = source.parent[w]
        if p is None:
            cands = target.roots()
        elif p not in graph:
            return rec(n + 1, graph) if undefined_ok(w) else 0
        else:
            cands = [graph[p], *target.children(graph[p])]
        total = rec(n + 1, graph) if undefined_ok(w) else 0
        for c in cands:
            if fits(w, c):
                graph[w] = c
                total += rec(n + 1, graph)
                del graph[w]
        return total

    return rec(0, {})


def threads_document(threads: ThreadOrder) -> str:
    docs = [threads.threads[k].to_document() for k in threads.order.by_depth()]
    return json.dumps({"horizon": encode_id(threads.horizon), "threads": docs}, ensure_ascii=False, indent=1)

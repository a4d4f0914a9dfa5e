"""Directed index structures and inverse directed families of PHP maps.

Convention: for ``i ⪯ j`` the map ``f[i,j]`` goes from ``U_j`` down to
``U_i``, and coherence reads ``f[i,k](u) = f[i,j](f[j,k](u))``.

Chains over ℕ store only successive steps ``f[n,n+1]``; longer maps are
derived by composition and cached.  Finite directed posets store a map for
every comparable pair.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .errors import (
    BadParams,
    CoherenceViolation,
    FamilyViolation,
    InvalidIndex,
    KindViolation,
    NotIdentityAtDiagonal,
    StepInvalid,
    TypeMismatch,
    UnknownName,
)
from .maps import PhpMap, compose, direct_violation, identity, theorem1_violation
from .order import PrefixOrder, sorted_ids


class FamilyKind(enum.Enum):
    EXPLICIT = "explicit"
    EXPLICIT_STABLE = "explicit-stable"
    INCREASING_PARTIAL_IDENTITY = "increasing-partial-identity"
    GENERATOR = "generator"

    def __str__(self) -> str:
        return self.value


# -- index structures -----------------------------------------------------


@dataclass(frozen=True)
class NatChain:
    """The chain 0 ≤ 1 ≤ … ≤ horizon."""

    horizon: int

    def __post_init__(self):
        if self.horizon < 0:
            raise InvalidIndex("horizon must be non-negative")

    @property
    def elements(self) -> list[int]:
        return list(range(self.horizon + 1))

    @property
    def top(self) -> int:
        return self.horizon

    def leq(self, i: int, j: int) -> bool:
        return i <= j


@dataclass(frozen=True)
class FiniteIndex:
    """A finite directed preorder given by an explicit relation (reflexive pairs implied)."""

    elements: tuple
    relation: frozenset

    def __init__(self, elements: Iterable[Hashable], relation: Iterable[tuple]):
        elems = tuple(sorted_ids(set(elements)))
        rel = {(a, a) for a in elems} | {tuple(p) for p in relation}
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "relation", frozenset(rel))
        self._validate()

    def _validate(self) -> None:
        es = set(self.elements)
        if not es:
            raise InvalidIndex("index set is empty")
        for a, b in self.relation:
            if a not in es or b not in es:
                raise InvalidIndex(f"relation mentions unknown index {a if a not in es else b!r}")
        for a, b, c in itertools.product(self.elements, repeat=3):
            if (a, b) in self.relation and (b, c) in self.relation and (a, c) not in self.relation:
                raise InvalidIndex(f"index relation is not transitive at ({a!r}, {b!r}, {c!r})")
        for a, b in itertools.combinations(self.elements, 2):
            if not any((a, c) in self.relation and (b, c) in self.relation for c in self.elements):
                raise InvalidIndex(f"indices {a!r} and {b!r} have no common upper bound")

    def leq(self, i, j) -> bool:
        return (i, j) in self.relation

    @property
    def top(self):
        for c in self.elements:
            if all((a, c) in self.relation for a in self.elements):
                return c
        raise InvalidIndex("no greatest index")  # unreachable for finite directed sets


@dataclass(frozen=True)
class CofinalSample:
    """The progression ``offset, offset+step, …`` cut at a horizon; a stand-in for a cofinal subset of ℕ."""

    offset: int
    step: int

    def __post_init__(self):
        if self.offset < 0 or self.step < 1:
            raise InvalidIndex("progression needs offset ≥ 0 and step ≥ 1")

    def members(self, horizon: int) -> list[int]:
        out = list(range(self.offset, horizon + 1, self.step))
        if not out:
            raise InvalidIndex(f"progression {self} has no member up to {horizon}")
        return out

    def __contains__(self, n: int) -> bool:
        return n >= self.offset and (n - self.offset) % self.step == 0


# -- families -------------------------------------------------------------


class ChainFamily:
    """An inverse family over the chain ``0..horizon``.

    ``objects`` and ``steps`` may be sequences or callables (generator
    families); ``steps(n)`` is ``f[n,n+1] : U_{n+1} -> U_n``.  Callables must
    be pure, since results are memoised.
    """

    def __init__(self, objects: Sequence[PrefixOrder] | Callable[[int], PrefixOrder],
                 steps: Sequence[PhpMap] | Callable[[int], PhpMap], *, horizon: int | None = None,
                 kind: FamilyKind = FamilyKind.EXPLICIT, stable_from: int | None = None, name: str = ""):
        if horizon is None:
            if callable(objects):
                raise BadParams("generator families need an explicit horizon")
            horizon = len(objects) - 1
        self.index = NatChain(horizon)
        self.kind = kind
        self.stable_from = stable_from
        self.name = name
        self._objects = objects
        self._steps = steps
        self._obj_cache: dict[int, PrefixOrder] = {}
        self._map_cache: dict[tuple[int, int], PhpMap] = {}
        if not callable(steps) and len(steps) != horizon:
            raise BadParams(f"expected {horizon} steps, got {len(steps)}")
        if kind is FamilyKind.EXPLICIT_STABLE and stable_from is None:
            raise BadParams("explicit-stable families need stable_from")

    def __repr__(self) -> str:
        return f"ChainFamily({self.name or 'unnamed'}, horizon={self.horizon}, kind={self.kind})"

    @property
    def horizon(self) -> int:
        return self.index.horizon

    @property
    def indices(self) -> list[int]:
        return self.index.elements

    @property
    def top(self) -> int:
        return self.index.horizon

    def leq(self, i, j) -> bool:
        return i <= j

    def _in_range(self, i: int) -> None:
        if not (isinstance(i, int) and 0 <= i <= self.horizon):
            raise InvalidIndex(f"index {i!r} outside 0..{self.horizon}")

    def obj(self, n: int) -> PrefixOrder:
        self._in_range(n)
        if n not in self._obj_cache:
            self._obj_cache[n] = self._objects(n) if callable(self._objects) else self._objects[n]
        return self._obj_cache[n]

    def step(self, n: int) -> PhpMap:
        """``f[n, n+1]``."""
        self._in_range(n + 1)
        key = (n, n + 1)
        if key not in self._map_cache:
            self._map_cache[key] = self._steps(n) if callable(self._steps) else self._steps[n]
        return self._map_cache[key]

    def map(self, i: int, j: int) -> PhpMap:
        """``f[i, j]`` for ``i ≤ j``, derived from successive steps."""
        self._in_range(i)
        self._in_range(j)
        if i > j:
            raise InvalidIndex(f"no map f[{i},{j}]: {i} > {j}")
        key = (i, j)
        if key not in self._map_cache:
            if i == j:
                self._map_cache[key] = identity(self.obj(i))
            else:
                self._map_cache[key] = compose(self.step(i), self.map(i + 1, j))
        return self._map_cache[key]

    def apply(self, i: int, j: int, u):
        """``f[i, j](u)`` pointwise, walking successive steps (``None`` if undefined)."""
        for n in range(j - 1, i - 1, -1):
            if u is None:
                return None
            u = self.step(n)(u)
        return u

    def truncate(self, horizon: int) -> ChainFamily:
        if horizon > self.horizon:
            raise InvalidIndex(f"cannot extend horizon {self.horizon} to {horizon}")
        return ChainFamily([self.obj(n) for n in range(horizon + 1)], [self.step(n) for n in range(horizon)],
                           kind=self.kind, stable_from=self.stable_from, name=self.name)


class FiniteFamily:
    """An inverse family over a finite directed index with a map for every comparable pair."""

    def __init__(self, index: FiniteIndex, objects: Mapping[Any, PrefixOrder], maps: Mapping[tuple, PhpMap], *,
                 kind: FamilyKind = FamilyKind.EXPLICIT, name: str = ""):
        self.index = index
        self.kind = kind
        self.stable_from = None
        self.name = name
        self._objects = dict(objects)
        self._maps = dict(maps)
        for i in index.elements:
            if i not in self._objects:
                raise BadParams(f"no object at index {i!r}")
        for i in index.elements:
            if (i, i) not in self._maps:
                self._maps[(i, i)] = identity(self._objects[i])

    @property
    def indices(self) -> list:
        return list(self.index.elements)

    @property
    def top(self):
        return self.index.top

    def leq(self, i, j) -> bool:
        return self.index.leq(i, j)

    def obj(self, i) -> PrefixOrder:
        if i not in self._objects:
            raise InvalidIndex(f"unknown index {i!r}")
        return self._objects[i]

    def map(self, i, j) -> PhpMap:
        if not self.index.leq(i, j):
            raise InvalidIndex(f"indices {i!r} and {j!r} are not ordered")
        if (i, j) not in self._maps:
            raise InvalidIndex(f"no stored map f[{i!r},{j!r}]")
        return self._maps[(i, j)]

    def apply(self, i, j, u):
        return self.map(i, j)(u) if u is not None else None


Family = ChainFamily | FiniteFamily


# -- validation -----------------------------------------------------------


def family_violations(family: Family, *, first_only: bool = False) -> list[FamilyViolation | TypeMismatch]:
    found: list = []

    def add(v) -> bool:
        found.append(v)
        return first_only

    idx = family.indices
    pairs = [(i, j) for i in idx for j in idx if family.leq(i, j)]
    if isinstance(family, ChainFamily):
        pairs_to_check = [(n, n + 1) for n in range(family.horizon)]
    else:
        pairs_to_check = [(i, j) for i, j in pairs if i != j]
    for i, j in pairs_to_check:
        f = family.step(i) if isinstance(family, ChainFamily) else family.map(i, j)
        if f.source != family.obj(j) or f.target != family.obj(i):
            if add(TypeMismatch(f"f[{i},{j}] does not go from U_{j} to U_{i}")):
                return found
            continue
        err = direct_violation(f.source, f.target, f.graph)
        if err is not None and add(StepInvalid(i, j, err)):
            return found
    if found:
        return found

    for i in idx:
        if family.map(i, i) != identity(family.obj(i)):
            if add(NotIdentityAtDiagonal(i)):
                return found

    # coherence on every triple, evaluated pointwise
    for i, j, k in itertools.product(idx, repeat=3):
        if not (family.leq(i, j) and family.leq(j, k)):
            continue
        fik, fij, fjk = family.map(i, k), family.map(i, j), family.map(j, k)
        for u in sorted_ids(family.obj(k).elements):
            mid = fjk(u)
            via = fij(mid) if mid is not None else None
            if fik(u) != via:
                if add(CoherenceViolation(i, j, k, u)):
                    return found
                break

    found.extend(kind_violations(family))
    return found[:1] if first_only else found


def kind_violations(family: Family) -> list[KindViolation]:
    out = []
    if family.kind is FamilyKind.INCREASING_PARTIAL_IDENTITY:
        if not isinstance(family, ChainFamily):
            return [KindViolation("increasing-partial-identity requires a chain index")]
        for n in range(family.horizon):
            lo, hi = family.obj(n), family.obj(n + 1)
            if not lo.elements <= hi.elements or any(hi.parent[u] != lo.parent[u] for u in lo.elements):
                out.append(KindViolation(f"U_{n} is not a prefix-closed sub-order of U_{n + 1}"))
            elif dict(family.step(n).graph) != {u: u for u in lo.elements}:
                out.append(KindViolation(f"f[{n},{n + 1}] is not the partial identity on U_{n}"))
    elif family.kind is FamilyKind.EXPLICIT_STABLE:
        if not isinstance(family, ChainFamily):
            return [KindViolation("explicit-stable requires a chain index")]
        for n in range(family.stable_from, family.horizon):
            f = family.step(n)
            if not (f.is_total() and f.is_surjective() and f.is_injective()):
                out.append(KindViolation(f"f[{n},{n + 1}] is not a bijection"))
                continue
            inv = {v: u for u, v in f.graph.items()}
            if direct_violation(f.target, f.source, inv) is not None:
                out.append(KindViolation(f"inverse of f[{n},{n + 1}] is not history preserving"))
    return out


def validate_family(family: Family) -> Family:
    """Return the family unchanged if it is a valid inverse directed family, else raise the first violation."""
    found = family_violations(family, first_only=True)
    if found:
        raise found[0]
    return family


def steps_pass_both_validators(family: ChainFamily) -> list[tuple[int, str]]:
    """Indices whose step fails either validator, with the validator name (empty when all pass)."""
    bad = []
    for n in range(family.horizon):
        f = family.step(n)
        if direct_violation(f.source, f.target, f.graph) is not None:
            bad.append((n, "direct"))
        if theorem1_violation(f.source, f.target, f.graph) is not None:
            bad.append((n, "theorem1"))
    return bad


# -- the two fan chains ---------------------------------------------------

BOTTOM = "⊥"


def fan_strand_order(n: int) -> PrefixOrder:
    """``{(k,l) : l ≤ k < n} ∪ {⊥}``: strand ``k`` has length ``k+1``."""
    parent: dict = {BOTTOM: None}
    for k in range(n):
        for l in range(k + 1):
            parent[(k, l)] = BOTTOM if l == 0 else (k, l - 1)
    return PrefixOrder(parent)


def fan_grow_order(n: int) -> PrefixOrder:
    """``{(k,l) : l ≤ n-k-1} ∪ {⊥}``: strand ``k`` has length ``n-k``."""
    parent: dict = {BOTTOM: None}
    for k in range(n):
        for l in range(n - k):
            parent[(k, l)] = BOTTOM if l == 0 else (k, l - 1)
    return PrefixOrder(parent)


def inclusion_chain(orders: Sequence[PrefixOrder], *, name: str = "") -> ChainFamily:
    """An increasing chain of sub-orders linked by partial identities."""
    steps = [PhpMap(orders[n + 1], orders[n], {u: u for u in orders[n].elements}) for n in range(len(orders) - 1)]
    return ChainFamily(list(orders), steps, kind=FamilyKind.INCREASING_PARTIAL_IDENTITY, name=name)


def constant_family(order: PrefixOrder, horizon: int) -> ChainFamily:
    ident = identity(order)
    return ChainFamily([order] * (horizon + 1), [ident] * horizon, kind=FamilyKind.EXPLICIT_STABLE,
                       stable_from=0, name="constant")


BUILTIN_NAMES = ("fan_strand", "fan_grow", "constant", "dyadic_tower")


def builtin_family(name: str, **params) -> Family:
    """Build and validate one of the named families.

    ``fan_strand`` / ``fan_grow`` take ``N``; ``constant`` takes ``order`` and
    ``N``; ``dyadic_tower`` takes ``K`` and optionally ``flows`` and ``mode``.
    """
    def need_int(key: str, default=None) -> int:
        v = params.get(key, default)
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise BadParams(f"{name} needs a non-negative integer {key}")
        return v

    if name == "fan_strand":
        n = need_int("N")
        fam = inclusion_chain([fan_strand_order(i) for i in range(n + 1)], name=name)
    elif name == "fan_grow":
        n = need_int("N")
        fam = inclusion_chain([fan_grow_order(i) for i in range(n + 1)], name=name)
    elif name == "constant":
        order = params.get("order")
        if not isinstance(order, PrefixOrder):
            raise BadParams("constant needs an order")
        fam = constant_family(order, need_int("N"))
    elif name == "dyadic_tower":
        from . import flows as _flows

        k = need_int("K", params.get("N"))
        flowset = params.get("flows") or _flows.standard_flowset()
        fam = _flows.dyadic_tower(flowset, k, mode=params.get("mode", "recursion"))
    else:
        raise UnknownName(name)
    return validate_family(fam)

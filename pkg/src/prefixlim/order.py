"""Finite prefix orders.

A prefix order is a partial order in which every history (down-set) is a
chain.  For finite orders this is exactly a forest, so orders are stored as a
parent map: ``parent[u]`` is the immediate predecessor of ``u`` or ``None``
for minimal elements.  Arbitrary relations are accepted by
:func:`validate_order`, checked against all four axioms and canonicalised.

Element ids can be any hashable value; ints, strings, Fractions and (nested)
tuples of those survive the JSON round trip.
"""

from __future__ import annotations

import json
import numbers
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping

from .errors import AxiomViolation, InvalidOrder, MalformedForest, UnknownElement

ExecId = Hashable


def sort_key(x: Any) -> tuple:
    """Total, deterministic ordering key over mixed element ids."""
    t = type(x)
    if t is int or t is Fraction or t is float:
        return (0, x)
    if t is str:
        return (1, x)
    if isinstance(x, HashedTuple):
        try:
            return x._sort_key
        except AttributeError:
            x._sort_key = (2, tuple(sort_key(e) for e in x))
            return x._sort_key
    if isinstance(x, tuple):
        return (2, tuple(sort_key(e) for e in x))
    if isinstance(x, numbers.Real) and not isinstance(x, bool):
        return (0, x)
    if isinstance(x, str):
        return (1, x)
    return (3, repr(x))


def sorted_ids(xs: Iterable[ExecId]) -> list:
    return sorted(xs, key=sort_key)


class HashedTuple(tuple):
    """A tuple that caches its hash and compares hashes before elements.

    Used for composite ids (sample sequences, thread assignments) that are
    looked up and compared many times.  Equal to a plain tuple with the same
    items.
    """

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            self._hash = tuple.__hash__(self)
            return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if isinstance(other, HashedTuple) and hash(self) != hash(other):
            return False
        return tuple.__eq__(self, other)

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq


class PrefixOrder:
    """An immutable finite prefix order stored as a parent forest."""

    __slots__ = ("_parent", "_labels", "_children", "_depth", "_hash", "_canon", "_span")

    def __init__(self, parent: Mapping[ExecId, ExecId | None], labels: Mapping[ExecId, str] | None = None):
        # parent links point at the key objects themselves, so equal ids are usually identical
        self._canon = {u: u for u in parent}
        self._parent = {}
        for u, p in parent.items():
            if p is not None and p not in self._canon:
                raise MalformedForest(f"parent {p!r} of {u!r} is not an element")
            self._parent[u] = None if p is None else self._canon[p]
        self._labels = {self.intern(u): lab for u, lab in (labels or {}).items() if lab is not None}
        for u in self._labels:
            if u not in self._parent:
                raise UnknownElement(u)
        children: dict = {u: [] for u in self._parent}
        for u, p in self._parent.items():
            if p is not None:
                children[p].append(u)
        self._children = {u: tuple(sorted_ids(cs)) for u, cs in children.items()}
        self._depth = self._compute_depths()
        self._span = self._compute_spans()
        self._hash = None

    def _compute_depths(self) -> dict:
        depth: dict = {}
        for start in self._parent:
            path = []
            u = start
            while u is not None and u not in depth:
                if u in path:
                    raise MalformedForest(f"parent links of {start!r} form a cycle")
                path.append(u)
                u = self._parent[u]
            base = -1 if u is None else depth[u]
            for v in reversed(path):
                base += 1
                depth[v] = base
        return depth

    def _compute_spans(self) -> dict:
        # u ≤ v iff v's preorder interval nests inside u's
        span: dict = {}
        clock = 0
        for root in (u for u, p in self._parent.items() if p is None):
            stack = [(root, False)]
            while stack:
                u, done = stack.pop()
                if done:
                    span[u] = (span[u], clock)
                    continue
                span[u] = clock
                clock += 1
                stack.append((u, True))
                stack.extend((c, False) for c in self._children[u])
        return span

    # -- basic access ---------------------------------------------------

    @property
    def parent(self) -> Mapping[ExecId, ExecId | None]:
        return self._parent

    @property
    def labels(self) -> Mapping[ExecId, str]:
        return self._labels

    @property
    def elements(self) -> frozenset:
        return frozenset(self._parent)

    def __len__(self) -> int:
        return len(self._parent)

    def __contains__(self, u) -> bool:
        return u in self._parent

    def __iter__(self) -> Iterator:
        return iter(sorted_ids(self._parent))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, PrefixOrder):
            return NotImplemented
        return self._parent == other._parent and self._labels == other._labels

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self._parent.items()), frozenset(self._labels.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"PrefixOrder({len(self)} elements, {len(self.roots())} roots)"

    def _check(self, u) -> None:
        if u not in self._parent:
            raise UnknownElement(u)

    def intern(self, u):
        """The order's own object for an id equal to ``u`` (``u`` itself if absent)."""
        return self._canon.get(u, u)

    def parent_of(self, u) -> ExecId | None:
        self._check(u)
        return self._parent[u]

    def children(self, u) -> tuple:
        self._check(u)
        return self._children[u]

    def depth(self, u) -> int:
        self._check(u)
        return self._depth[u]

    def label(self, u) -> str | None:
        self._check(u)
        return self._labels.get(u)

    def roots(self) -> list:
        return sorted_ids(u for u, p in self._parent.items() if p is None)

    def maximal(self) -> list:
        return sorted_ids(u for u, cs in self._children.items() if not cs)

    def by_depth(self) -> list:
        """Elements sorted so that every parent precedes its children."""
        return sorted(self._parent, key=lambda u: (self._depth[u], sort_key(u)))

    # -- order structure ------------------------------------------------

    def leq(self, u, v) -> bool:
        try:
            a, b = self._span[u], self._span[v]
        except KeyError as exc:
            raise UnknownElement(exc.args[0]) from None
        return a[0] <= b[0] and b[1] <= a[1]

    def chain(self, u) -> tuple:
        """The history of ``u`` as a tuple, minimal element first."""
        self._check(u)
        out = []
        while u is not None:
            out.append(u)
            u = self._parent[u]
        return tuple(reversed(out))

    def history(self, u) -> PrefixClosedSet:
        return PrefixClosedSet(self, frozenset(self.chain(u)))

    def future(self, u) -> frozenset:
        self._check(u)
        out, stack = set(), [u]
        while stack:
            v = stack.pop()
            out.add(v)
            stack.extend(self._children[v])
        return frozenset(out)

    def relation(self) -> frozenset:
        """The full prefix relation as a set of pairs (reflexive-transitive closure of parent)."""
        return frozenset((a, v) for v in self._parent for a in self.chain(v))

    def is_prefix_closed(self, subset: Iterable) -> bool:
        s = set(subset)
        return all(u in self._parent for u in s) and all(
            self._parent[u] is None or self._parent[u] in s for u in s
        )

    def restrict(self, subset: Iterable) -> PrefixOrder:
        """Sub-order on a prefix-closed subset."""
        s = set(subset)
        if not self.is_prefix_closed(s):
            raise ValueError("restriction requires a prefix-closed subset")
        return PrefixOrder({u: self._parent[u] for u in s}, {u: l for u, l in self._labels.items() if u in s})

    def relabel(self, labels: Mapping[ExecId, str] | None) -> PrefixOrder:
        return PrefixOrder(self._parent, labels)

    def rename(self, f: Callable[[ExecId], ExecId]) -> PrefixOrder:
        parent = {f(u): (None if p is None else f(p)) for u, p in self._parent.items()}
        if len(parent) != len(self._parent):
            raise ValueError("renaming is not injective")
        return PrefixOrder(parent, {f(u): lab for u, lab in self._labels.items()})


@dataclass(frozen=True)
class PrefixClosedSet:
    order: PrefixOrder
    members: frozenset

    def __post_init__(self):
        if not self.order.is_prefix_closed(self.members):
            raise ValueError("members are not prefix closed")

    def __contains__(self, u) -> bool:
        return u in self.members

    def __iter__(self):
        return iter(sorted(self.members, key=lambda u: (self.order.depth(u), sort_key(u))))

    def __len__(self) -> int:
        return len(self.members)

    def is_chain(self) -> bool:
        ms = list(self.members)
        return all(self.order.leq(a, b) or self.order.leq(b, a) for a in ms for b in ms)


EMPTY = PrefixOrder({})


# -- validation of explicit relations -------------------------------------


def order_violations(elements: Iterable, pairs: Iterable[tuple], *, assume_reflexive: bool = True) -> list[AxiomViolation]:
    """Check a relation against the four prefix-order axioms.

    Returns one violation per failed axiom (first witness in sorted order),
    or an empty list.  With ``assume_reflexive`` the diagonal is added before
    checking, so callers may list only the non-trivial pairs.
    """
    keys = {a: sort_key(a) for a in set(elements)}
    elems = sorted(keys, key=keys.__getitem__)
    rank = {a: n for n, a in enumerate(elems)}

    def ordered(xs):
        return sorted(xs, key=rank.__getitem__)

    rel = set()
    for a, b in pairs:
        for x in (a, b):
            if x not in rank:
                raise UnknownElement(x, "element set")
        rel.add((a, b))
    if assume_reflexive:
        rel.update((a, a) for a in elems)
    up: dict = {a: set() for a in elems}
    down: dict = {a: set() for a in elems}
    for a, b in rel:
        up[a].add(b)
        down[b].add(a)

    # each search below first runs a set-based test and only walks pairs in
    # sorted order (to report the first witness) when that test fails
    found = []
    for a in elems:
        if (a, a) not in rel:
            found.append(AxiomViolation("reflexive", (a,)))
            break

    def first_transitivity():
        for a in elems:
            if all(up[b] <= up[a] for b in up[a]):
                continue
            for b in ordered(up[a]):
                if not up[b] <= up[a]:
                    return (a, b, ordered(up[b] - up[a])[0])
        return None

    w = first_transitivity()
    if w:
        found.append(AxiomViolation("transitive", w))

    def first_antisymmetry():
        for a in elems:
            if not (up[a] & down[a]) - {a}:
                continue
            for b in ordered(up[a]):
                if b != a and a in up[b]:
                    return (a, b)
        return None

    w = first_antisymmetry()
    if w:
        found.append(AxiomViolation("anti-symmetric", w))

    def first_downward_total():
        for c in elems:
            below = down[c]
            if all(below <= (up[a] | down[a]) for a in below):
                continue
            below = ordered(below)
            for i, a in enumerate(below):
                for b in below[i + 1:]:
                    if b not in up[a] and a not in up[b]:
                        return (a, b, c)
        return None

    w = first_downward_total()
    if w:
        found.append(AxiomViolation("downward-total", w))
    return found


def validate_order(elements: Iterable, pairs: Iterable[tuple], *, labels: Mapping | None = None,
                   assume_reflexive: bool = True) -> PrefixOrder:
    """Validate an explicit relation and return its canonical forest form.

    >>> o = validate_order("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    >>> o.parent_of("c")
    'b'
    """
    elements = list(elements)
    pairs = list(pairs)
    violations = order_violations(elements, pairs, assume_reflexive=assume_reflexive)
    if violations:
        raise InvalidOrder(violations)
    strict_down: dict = {a: set() for a in elements}
    for a, b in pairs:
        if a != b:
            strict_down[b].add(a)
    parent = {}
    for u, below in strict_down.items():
        # below is a chain; the immediate predecessor is the one with the most predecessors
        parent[u] = max(below, key=lambda a: len(strict_down[a])) if below else None
    return PrefixOrder(parent, labels)


# -- isomorphism ----------------------------------------------------------


def _subtree_codes(order: PrefixOrder, use_labels: bool) -> dict:
    code: dict = {}
    for u in sorted(order.elements, key=lambda u: -order.depth(u)):
        inner = "".join(sorted(code[c] for c in order.children(u)))
        lab = json.dumps(order.labels.get(u)) if use_labels else ""
        code[u] = f"({lab}{inner})"
    return code


def canonical_form(order: PrefixOrder, *, use_labels: bool = False) -> str:
    """A string that is equal for two orders iff they are isomorphic."""
    code = _subtree_codes(order, use_labels)
    return "[" + "".join(sorted(code[r] for r in order.roots())) + "]"


def find_isomorphism(a: PrefixOrder, b: PrefixOrder, *, use_labels: bool = False) -> dict | None:
    """An order isomorphism ``a -> b`` as a dict, or ``None``."""
    if len(a) != len(b):
        return None
    ca, cb = _subtree_codes(a, use_labels), _subtree_codes(b, use_labels)
    mapping: dict = {}

    def match(xs, ys) -> bool:
        xs = sorted(xs, key=lambda u: (ca[u], sort_key(u)))
        ys = sorted(ys, key=lambda u: (cb[u], sort_key(u)))
        if [ca[x] for x in xs] != [cb[y] for y in ys]:
            return False
        for x, y in zip(xs, ys):
            mapping[x] = y
            if not match(a.children(x), b.children(y)):
                return False
        return True

    return mapping if match(a.roots(), b.roots()) else None


def is_isomorphic(a: PrefixOrder, b: PrefixOrder, *, use_labels: bool = False) -> bool:
    return find_isomorphism(a, b, use_labels=use_labels) is not None


# -- constructors ---------------------------------------------------------


def from_sequences(seqs: Iterable[tuple], *, labels: Callable[[tuple], str] | None = None) -> PrefixOrder:
    """The prefix order of a set of sequences, closed under prefixes (includes the empty sequence)."""
    parent: dict = {(): None}
    for s in seqs:
        s = tuple(s)
        for n in range(len(s), 0, -1):
            if s[:n] in parent:
                break
            parent[s[:n]] = s[:n - 1]
    lab = {u: labels(u) for u in parent} if labels else None
    return PrefixOrder(parent, lab)


def string_order(alphabet: Iterable, depth: int) -> PrefixOrder:
    """All strings (as tuples) of length at most ``depth`` under the prefix relation."""
    letters = sorted_ids(set(alphabet))
    level = [()]
    parent: dict = {(): None}
    for _ in range(depth):
        level = [s + (a,) for s in level for a in letters]
        for s in level:
            parent[s] = s[:-1]
    return PrefixOrder(parent)


def random_order(n: int, rng: random.Random, *, labels: Iterable[str] | None = None) -> PrefixOrder:
    """A uniformly built random forest on ids ``0..n-1`` (each parent chosen among earlier ids or none)."""
    parent = {}
    for i in range(n):
        choice = rng.randrange(i + 1)
        parent[i] = None if choice == i else choice
    lab = None
    if labels is not None:
        pool = list(labels)
        lab = {i: rng.choice(pool) for i in range(n)}
    return PrefixOrder(parent, lab)


# -- serialisation --------------------------------------------------------


def encode_id(u: Any) -> Any:
    if isinstance(u, tuple):
        return [encode_id(x) for x in u]
    if isinstance(u, Fraction):
        if u.denominator == 1:
            return int(u)
        return {"frac": f"{u.numerator}/{u.denominator}"}
    if isinstance(u, (str, int)) and not isinstance(u, bool):
        return u
    raise TypeError(f"element id {u!r} has no structured-text encoding")


def decode_id(x: Any) -> Any:
    if isinstance(x, list):
        return tuple(decode_id(e) for e in x)
    if isinstance(x, dict) and set(x) == {"frac"}:
        return Fraction(x["frac"])
    return x


def to_document(order: PrefixOrder) -> list[dict]:
    """Structured-text form: a list of ``{id, parent?, label?}`` records, parents first."""
    out = []
    for u in order.by_depth():
        rec: dict = {"id": encode_id(u)}
        if order.parent[u] is not None:
            rec["parent"] = encode_id(order.parent[u])
        if u in order.labels:
            rec["label"] = order.labels[u]
        out.append(rec)
    return out


def from_document(doc: Any) -> PrefixOrder:
    """Inverse of :func:`to_document`.

    Also accepts ``{"elements": [...], "relation": [[a, b], ...]}`` for an
    explicit relation, which is validated with :func:`validate_order`.
    """
    if doc is None:
        return EMPTY
    if isinstance(doc, dict):
        elements = [decode_id(e) for e in doc.get("elements", [])]
        pairs = [(decode_id(a), decode_id(b)) for a, b in doc.get("relation", [])]
        labels = {decode_id(k["id"]): k["label"] for k in doc.get("labels", [])}
        return validate_order(elements, pairs, labels=labels or None,
                              assume_reflexive=doc.get("assume_reflexive", True))
    parent, labels = {}, {}
    for rec in doc:
        u = decode_id(rec["id"])
        if u in parent:
            raise MalformedForest(f"duplicate id {u!r}")
        parent[u] = decode_id(rec["parent"]) if "parent" in rec else None
        if "label" in rec:
            labels[u] = rec["label"]
    return PrefixOrder(parent, labels)


def dumps(order: PrefixOrder) -> str:
    return json.dumps(to_document(order), ensure_ascii=False, indent=1)


def loads(text: str) -> PrefixOrder:
    text = text.strip()
    return from_document(json.loads(text)) if text else EMPTY


def display(u: Any) -> str:
    if isinstance(u, tuple):
        return "(" + ",".join(display(x) for x in u) + ")"
    return str(u)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(order: PrefixOrder, *, name: str = "prefix_order", node_name: Callable[[Any], str] = display) -> str:
    """Graphviz rendering, one edge per immediate-predecessor link (drawn upward)."""
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for u in order.by_depth():
        text = node_name(u)
        attrs = f"label={_dot_quote(text + (' : ' + order.labels[u] if u in order.labels else ''))}"
        lines.append(f"  {_dot_quote(text)} [{attrs}];")
    for u in order.by_depth():
        p = order.parent[u]
        if p is not None:
            lines.append(f"  {_dot_quote(node_name(p))} -> {_dot_quote(node_name(u))};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export(order: PrefixOrder, fmt: str = "text") -> str:
    if fmt == "dot":
        return to_dot(order)
    if fmt == "text":
        return dumps(order) + "\n"
    raise ValueError(f"unknown export format {fmt!r}")

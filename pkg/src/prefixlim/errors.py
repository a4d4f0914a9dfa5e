"""Exception types shared across the package.

Violations are exceptions so that ``validate_*`` functions can raise them, while
the matching ``*_violation(s)`` functions return them as plain values for
reporting.  Every violation knows how to render itself as a JSON-able dict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable


class PrefixLimError(Exception):
    """Base class for every error raised by this package."""

    kind = "error"

    def fields(self) -> dict[str, Any]:
        return {}

    def to_report(self) -> dict[str, Any]:
        return {"violation": self.kind, **{k: _jsonable(v) for k, v in self.fields().items()}}


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple, frozenset, set)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return str(value)


class UnknownElement(PrefixLimError, KeyError):
    kind = "unknown-element"

    def __init__(self, element: Hashable, where: str = "order"):
        super().__init__(f"{element!r} is not an element of the {where}")
        self.element = element

    def fields(self):
        return {"element": self.element}

    def __str__(self):
        return self.args[0]


class TypeMismatch(PrefixLimError):
    kind = "type-mismatch"

    def __init__(self, message: str):
        super().__init__(message)

    def fields(self):
        return {"message": self.args[0]}


# -- orders ---------------------------------------------------------------


@dataclass(frozen=True)
class AxiomViolation:
    """One failed prefix-order axiom with a witnessing tuple of elements."""

    axiom: str
    witness: tuple

    def to_report(self) -> dict[str, Any]:
        return {"axiom": self.axiom, "witness": _jsonable(self.witness)}


class InvalidOrder(PrefixLimError):
    kind = "invalid-order"

    def __init__(self, violations: list[AxiomViolation]):
        names = ", ".join(v.axiom for v in violations)
        super().__init__(f"relation is not a prefix order ({names})")
        self.violations = list(violations)

    def to_report(self):
        return {"violation": self.kind, "axioms": [v.to_report() for v in self.violations]}


class MalformedForest(PrefixLimError):
    kind = "malformed-forest"

    def __init__(self, message: str):
        super().__init__(message)

    def fields(self):
        return {"message": self.args[0]}


# -- maps -----------------------------------------------------------------


class MapViolation(PrefixLimError):
    """A partial function that is not a partial history preserving map."""


class DomainNotPrefixClosed(MapViolation):
    kind = "domain-not-prefix-closed"

    def __init__(self, u, missing):
        super().__init__(f"{u!r} is in the domain but its prefix {missing!r} is not")
        self.u, self.missing = u, missing

    def fields(self):
        return {"u": self.u, "missing": self.missing}


class HistoryNotPreserved(MapViolation):
    kind = "history-not-preserved"

    def __init__(self, u):
        super().__init__(f"image of the history of {u!r} differs from the history of its image")
        self.u = u

    def fields(self):
        return {"u": self.u}


class NotOrderPreserving(MapViolation):
    kind = "not-order-preserving"

    def __init__(self, u, u2):
        super().__init__(f"{u!r} precedes {u2!r} but their images are not ordered")
        self.u, self.u2 = u, u2

    def fields(self):
        return {"u": self.u, "u_prime": self.u2}


class BackwardSimFails(MapViolation):
    kind = "backward-simulation-fails"

    def __init__(self, u, v):
        super().__init__(f"{v!r} precedes the image of {u!r} but has no preimage below it")
        self.u, self.v = u, v

    def fields(self):
        return {"u": self.u, "v": self.v}


# -- families and limits --------------------------------------------------


class FamilyViolation(PrefixLimError):
    pass


class CoherenceViolation(FamilyViolation):
    kind = "coherence"

    def __init__(self, i, j, k, u=None):
        super().__init__(f"f[{i},{k}] differs from f[{i},{j}] o f[{j},{k}]" + (f" at {u!r}" if u is not None else ""))
        self.i, self.j, self.k, self.u = i, j, k, u

    def fields(self):
        return {"i": self.i, "j": self.j, "k": self.k, "at": self.u}


class NotIdentityAtDiagonal(FamilyViolation):
    kind = "not-identity-at-diagonal"

    def __init__(self, i):
        super().__init__(f"f[{i},{i}] is not the identity")
        self.i = i

    def fields(self):
        return {"i": self.i}


class KindViolation(FamilyViolation):
    kind = "family-kind"

    def __init__(self, message: str):
        super().__init__(message)

    def fields(self):
        return {"message": self.args[0]}


class InvalidIndex(FamilyViolation):
    kind = "invalid-index"

    def __init__(self, message: str):
        super().__init__(message)

    def fields(self):
        return {"message": self.args[0]}


class StepInvalid(FamilyViolation):
    kind = "invalid-step"

    def __init__(self, i, j, cause: MapViolation):
        super().__init__(f"map f[{i},{j}] is not history preserving: {cause}")
        self.i, self.j, self.cause = i, j, cause

    def to_report(self):
        return {"violation": self.kind, "i": self.i, "j": self.j, "cause": self.cause.to_report()}


class UnknownName(PrefixLimError):
    kind = "unknown-name"

    def __init__(self, name: str):
        super().__init__(f"no builtin named {name!r}")
        self.name = name

    def fields(self):
        return {"name": self.name}


class BadParams(PrefixLimError):
    kind = "bad-params"

    def __init__(self, message: str):
        super().__init__(message)

    def fields(self):
        return {"message": self.args[0]}


class HorizonExceedsFamily(PrefixLimError):
    kind = "horizon-exceeds-family"

    def __init__(self, horizon, available):
        super().__init__(f"horizon {horizon} exceeds the stored range 0..{available}")
        self.horizon, self.available = horizon, available

    def fields(self):
        return {"horizon": self.horizon, "available": self.available}


class WrongFamilyKind(PrefixLimError):
    kind = "wrong-family-kind"

    def __init__(self, kind):
        super().__init__(f"no exact limit construction for family kind {kind}")
        self.family_kind = kind

    def fields(self):
        return {"family_kind": str(self.family_kind)}


class ThreadViolation(PrefixLimError):
    kind = "thread"

    def __init__(self, bullet: int, message: str):
        super().__init__(f"limit execution condition {bullet} fails: {message}")
        self.bullet = bullet

    def fields(self):
        return {"bullet": self.bullet, "message": self.args[0]}


class ConeNotCommuting(PrefixLimError):
    kind = "cone-not-commuting"

    def __init__(self, i, j, w):
        super().__init__(f"rho[{i}]({w!r}) differs from f[{i},{j}](rho[{j}]({w!r}))")
        self.i, self.j, self.w = i, j, w

    def fields(self):
        return {"i": self.i, "j": self.j, "w": self.w}


class MediatingNotThread(PrefixLimError):
    kind = "mediating-not-thread"

    def __init__(self, w, reason: str = ""):
        super().__init__(f"cone values at {w!r} do not form a limit execution {reason}".strip())
        self.w = w

    def fields(self):
        return {"w": self.w}


class NotUnique(PrefixLimError):
    kind = "mediating-not-unique"

    def __init__(self, count: int):
        super().__init__(f"{count} distinct mediating maps satisfy the cone equations")
        self.count = count

    def fields(self):
        return {"count": self.count}


# -- lts and flows --------------------------------------------------------


class AlphabetMismatch(PrefixLimError):
    kind = "alphabet-mismatch"

    def __init__(self, left, right):
        super().__init__(f"alphabets differ: {sorted(map(str, left))} vs {sorted(map(str, right))}")

    def fields(self):
        return {"message": self.args[0]}


class BoundsTooSmall(PrefixLimError):
    kind = "bounds-too-small"

    def __init__(self, message: str):
        super().__init__(message)

    def fields(self):
        return {"message": self.args[0]}


class FlowNotInSet(PrefixLimError):
    kind = "flow-not-in-set"

    def __init__(self, flow):
        super().__init__(f"{flow!r} is not a generator of the flow set")

    def fields(self):
        return {"message": self.args[0]}


class InconsistentThread(PrefixLimError):
    kind = "inconsistent-thread"

    def __init__(self, t, a, b):
        super().__init__(f"thread assigns both {a} and {b} to time {t}")

    def fields(self):
        return {"message": self.args[0]}


class BadResolution(PrefixLimError):
    kind = "bad-resolution"

    def __init__(self, k: int, m: int):
        super().__init__(f"switch resolution m={m} must be at least k+1={k + 1}")

    def fields(self):
        return {"message": self.args[0]}

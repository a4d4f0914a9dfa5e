"""Named example objects: fan orders, the delayed-choice orders and systems, and witness relations."""

from __future__ import annotations

from .family import BOTTOM, fan_grow_order, fan_strand_order
from .limitbisim import SampledNet, WitnessSpec
from .lts import Lts
from .order import PrefixOrder

OMEGA = "ω"

__all__ = [
    "BOTTOM", "OMEGA", "fan_strand_order", "fan_grow_order", "choice_order", "delayed_choice_order",
    "choice_lts", "delayed_choice_lts", "fan_lts", "fan_omega_lts",
    "eventually_constant_relation", "fan_limit_relation", "delayed_choice_relation",
    "fan_omega_witness", "delayed_choice_witness", "naive_fan_witness", "choice_witness", "DAGGER",
]

DAGGER = ("a_dag", "ab_dag", "ac_dag")


def choice_order() -> PrefixOrder:
    """Runs of the early-choice system: ε branches into two ``a`` executions, continued by ``b`` and ``c``."""
    return PrefixOrder(
        {"ε": None, "a_left": "ε", "a_right": "ε", "ab": "a_left", "ac": "a_right"},
        {"ε": "ε", "a_left": "a", "a_right": "a", "ab": "ab", "ac": "ac"},
    )


def delayed_choice_order() -> PrefixOrder:
    """The early-choice runs plus a third ``a`` execution that branches later."""
    return PrefixOrder(
        {"ε": None, "a_left": "ε", "a_dag": "ε", "a_right": "ε",
         "ab": "a_left", "ab_dag": "a_dag", "ac_dag": "a_dag", "ac": "a_right"},
        {"ε": "ε", "a_left": "a", "a_dag": "a", "a_right": "a",
         "ab": "ab", "ab_dag": "ab", "ac_dag": "ac", "ac": "ac"},
    )


def choice_lts() -> Lts:
    return Lts([1, 2, 3, 4, 5], "abc", 1, [(1, "a", 2), (1, "a", 3), (2, "b", 4), (3, "c", 5)])


def delayed_choice_lts() -> Lts:
    base = choice_lts()
    return Lts(base.states | {"*"}, "abc", 1, base.transitions | {(1, "a", "*"), ("*", "b", 4), ("*", "c", 5)})


def fan_lts(strands: int, label: str = "a") -> Lts:
    """⊥ → (k,0) and (k,l) → (k,l+1) for l < k, over strands ``k < strands``."""
    states = [BOTTOM] + [(k, l) for k in range(strands) for l in range(k + 1)]
    trans = [(BOTTOM, label, (k, 0)) for k in range(strands)]
    trans += [((k, l), label, (k, l + 1)) for k in range(strands) for l in range(k)]
    return Lts(states, [label], BOTTOM, trans)


def fan_omega_lts(strands: int, omega_length: int, label: str = "a") -> Lts:
    """:func:`fan_lts` plus an extra strand (ω,0) → (ω,1) → … of the given length."""
    base = fan_lts(strands, label)
    extra = [(OMEGA, l) for l in range(omega_length)]
    trans = [(BOTTOM, label, (OMEGA, 0))] + [((OMEGA, l), label, (OMEGA, l + 1)) for l in range(omega_length - 1)]
    return Lts(base.states | set(extra), [label], BOTTOM, base.transitions | set(trans))


# -- witness relations ----------------------------------------------------


def eventually_constant_relation(x, net: SampledNet, n: int) -> bool:
    return net.eventually_equal(x, n)


def fan_limit_relation(x, net: SampledNet, n: int) -> bool:
    """⊥ pairs with all-⊥ nets, (k,l) with nets eventually (k,l), (ω,l) with nets eventually on level l with unbounded strand."""
    if x == BOTTOM:
        return len(net) > 0 and all(v == BOTTOM for v in net.values)
    if x[0] == OMEGA:
        level = x[1]
        return (net.eventually(lambda v: v != BOTTOM and v[1] == level, n)
                and net.unbounded(lambda v: v[0] if v != BOTTOM else -1, n))
    return net.eventually_equal(x, n)


def delayed_choice_relation(x, net: SampledNet, n: int) -> bool:
    """Plain states pair with nets eventually equal to them; ``*`` with nets eventually alternating 2 and 3."""
    if x == "*":
        return (net.eventually(lambda v: v in (2, 3), n)
                and net.infinitely_often(2, n) and net.infinitely_often(3, n))
    return net.eventually_equal(x, n)


def fan_omega_witness(n: int, depth: int) -> WitnessSpec:
    net = fan_lts(n + 1)
    return WitnessSpec(fan_omega_lts(n + 1, depth + 1), lambda k: net, fan_limit_relation, "fan-omega")


def delayed_choice_witness() -> WitnessSpec:
    net = choice_lts()
    return WitnessSpec(delayed_choice_lts(), lambda k: net, delayed_choice_relation, "delayed-choice")


def choice_witness() -> WitnessSpec:
    net = choice_lts()
    return WitnessSpec(net, lambda k: net, eventually_constant_relation, "choice-constant")


def naive_fan_witness(n: int) -> WitnessSpec:
    net = fan_lts(n + 1)
    return WitnessSpec(net, lambda k: net, eventually_constant_relation, "fan-naive")

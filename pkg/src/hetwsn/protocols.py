"""Per-round protocol logic: election, cluster formation, sleep state, relays.

Three protocols share one round planner:

* ``MEECDA``: weighted election with a residual-energy factor on normal
  nodes, nearest-CH clustering with a sleep state for nodes that would
  spend more reaching their CH than the base station, and relaying of
  normal cluster heads' aggregates through idle advanced/super nodes.
* ``EECDA_APPROX``: an approximation of EECDA. Weighted election without the
  residual factor, CHs send straight to the base station, no sleep, no relays.
  It is not the original protocol's routing.
* ``LEACH``: the classic threshold with a single probability for every node.

``plan_round`` mutates protocol bookkeeping on the nodes (last CH round and
sleep counters). Energy is never touched here; the engine does that.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from hetwsn.heterogeneity import (
    HeterogeneityConfig,
    NodeClass,
    eligibility_window,
    weighted_probability,
)
from hetwsn.radio import RadioParams, tx_energy
from hetwsn.rng import RandomStream

MAX_SLEEP_ROUNDS = 8

Point = tuple[float, float]


class ProtocolKind(enum.Enum):
    MEECDA = "meecda"
    EECDA_APPROX = "eecda-approx"
    LEACH = "leach"

    @classmethod
    def parse(cls, name: str) -> "ProtocolKind":
        try:
            return cls(name.lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown protocol {name!r} (choose from {choices})") from None


class WakeAction(enum.Enum):
    WAKE_AS_CH = "wake-as-ch"
    WAKE_AS_MEMBER = "wake-as-member"
    KEEP_SLEEPING = "keep-sleeping"
    WAKE_AND_SEND_DIRECT = "wake-and-send-direct"


@dataclass(slots=True)
class NodeState:
    id: int
    node_class: NodeClass
    x: float
    y: float
    energy: float
    initial_energy: float
    last_ch_round: Optional[int] = None
    sleep_rounds_remaining: int = 0
    alive: bool = True

    @property
    def pos(self) -> Point:
        return (self.x, self.y)

    def rounds_since_ch(self, r: int) -> Optional[int]:
        if self.last_ch_round is None:
            return None
        return r - self.last_ch_round


@dataclass
class RoundPlan:
    round_index: int
    cluster_heads: set[int] = field(default_factory=set)
    memberships: dict[int, int] = field(default_factory=dict)
    relays: dict[int, int] = field(default_factory=dict)
    sleepers: set[int] = field(default_factory=set)
    direct_senders: set[int] = field(default_factory=set)


class Geometry:
    """Pairwise and node-to-BS distances for a fixed deployment."""

    def __init__(self, positions: Sequence[Point], bs_pos: Point):
        self.bs_pos = bs_pos
        self.d = [[math.dist(a, b) for b in positions] for a in positions]
        self.d_bs = [math.dist(a, bs_pos) for a in positions]

    @classmethod
    def from_world(cls, world: Sequence[NodeState], bs_pos: Point) -> "Geometry":
        return cls([n.pos for n in world], bs_pos)


@functools.lru_cache(maxsize=64)
def election_table(kind: ProtocolKind, c: HeterogeneityConfig) -> dict[NodeClass, tuple[float, int]]:
    """Per-class (probability, eligibility window) for a protocol."""
    table = {}
    for k in NodeClass:
        p = c.p_opt if kind is ProtocolKind.LEACH else weighted_probability(c, k)
        table[k] = (p, eligibility_window(p))
    return table


def is_eligible(node: NodeState, window: int, r: int) -> bool:
    """True if the node has not been CH since the current window started."""
    return node.last_ch_round is None or node.last_ch_round < r - r % window


def _base_threshold(p: float, window: int, r: int) -> float:
    denom = 1 - p * (r % window)
    if denom <= 0:
        raise RuntimeError(f"non-positive threshold denominator for p={p}, r={r}")
    return p / denom


def election_threshold(node: NodeState, c: HeterogeneityConfig, r: int,
                       kind: ProtocolKind = ProtocolKind.MEECDA) -> float:
    """Election threshold of ``node`` in round ``r``.

    For M-EECDA a normal node's threshold is scaled by its residual over
    initial energy; advanced and super nodes use the weighted probability
    unscaled. Ineligible or dead nodes get 0.
    """
    if not node.alive:
        return 0.0
    p, window = election_table(kind, c)[node.node_class]
    if not is_eligible(node, window, r):
        return 0.0
    t = _base_threshold(p, window, r)
    if kind is ProtocolKind.MEECDA and node.node_class is NodeClass.NORMAL:
        t *= node.energy / node.initial_energy
    return t


def leach_threshold(node: NodeState, p: float, r: int) -> float:
    if not node.alive:
        return 0.0
    window = eligibility_window(p)
    if not is_eligible(node, window, r):
        return 0.0
    return _base_threshold(p, window, r)


def elect_cluster_heads(world: Sequence[NodeState], kind: ProtocolKind, c: HeterogeneityConfig,
                        r: int, rng: RandomStream) -> set[int]:
    """Run the randomized election for round ``r``.

    Nodes are visited in ascending id and every alive, eligible node consumes
    exactly one draw. Sleeping nodes take part, so a sleeper can wake as CH.
    Winners have their last CH round set to ``r``.
    """
    table = election_table(kind, c)
    residual_factor = kind is ProtocolKind.MEECDA
    elected = set()
    for node in sorted(world, key=lambda n: n.id):
        if not node.alive:
            continue
        p, window = table[node.node_class]
        if not is_eligible(node, window, r):
            continue
        t = _base_threshold(p, window, r)
        if residual_factor and node.node_class is NodeClass.NORMAL:
            t *= node.energy / node.initial_energy
        if rng.random() < t:
            elected.add(node.id)
            node.last_ch_round = r
    return elected


def sleep_decision(node: NodeState, nearest_ch_dist: float, bs_dist: float, p: RadioParams) -> bool:
    """True if joining the nearest CH costs strictly more than reaching the BS."""
    e_join = tx_energy(p, p.packet_bits, nearest_ch_dist)
    e_direct = tx_energy(p, p.packet_bits, bs_dist)
    return e_join > e_direct


def wake_or_continue(node: NodeState, this_round_is_ch: bool, found_cheaper_ch: bool) -> WakeAction:
    """Advance a sleeping node by one round and update its counter."""
    if node.sleep_rounds_remaining <= 0:
        raise ValueError(f"node {node.id} is not asleep")
    if this_round_is_ch:
        node.sleep_rounds_remaining = 0
        return WakeAction.WAKE_AS_CH
    if found_cheaper_ch:
        node.sleep_rounds_remaining = 0
        return WakeAction.WAKE_AS_MEMBER
    if node.sleep_rounds_remaining == 1:
        node.sleep_rounds_remaining = 0
        return WakeAction.WAKE_AND_SEND_DIRECT
    node.sleep_rounds_remaining -= 1
    return WakeAction.KEEP_SLEEPING


def select_relay(ch: NodeState, world: Sequence[NodeState], current_chs: Iterable[int], bs_pos: Point,
                 exclude: Iterable[int] = (), geom: Optional[Geometry] = None) -> Optional[int]:
    """Nearest idle advanced/super node that is closer to ``ch`` than the BS is.

    Ties go to the lowest id. ``None`` means the CH sends straight to the BS.
    """
    skip = set(current_chs) | set(exclude)
    if geom is not None:
        row = geom.d[ch.id]
        d_bs = geom.d_bs[ch.id]
    else:
        row = {n.id: math.dist(ch.pos, n.pos) for n in world}
        d_bs = math.dist(ch.pos, bs_pos)
    best, best_d = None, d_bs
    for cand in world:
        if cand.node_class is NodeClass.NORMAL or not cand.alive or cand.id in skip or cand.id == ch.id:
            continue
        d = row[cand.id]
        if d < best_d or (d == best_d and best is not None and cand.id < best):
            best, best_d = cand.id, d
    return best


def plan_round(world: Sequence[NodeState], kind: ProtocolKind, c: HeterogeneityConfig, p: RadioParams,
               bs_pos: Point, r: int, rng: RandomStream, geom: Optional[Geometry] = None,
               max_sleep_rounds: int = MAX_SLEEP_ROUNDS) -> RoundPlan:
    """Setup phase of round ``r``: election, sleep handling, clustering, relays.

    ``world`` must be indexed by node id (``world[i].id == i``).
    """
    if geom is None:
        geom = Geometry.from_world(world, bs_pos)
    chs = elect_cluster_heads(world, kind, c, r, rng)
    plan = RoundPlan(round_index=r, cluster_heads=chs)
    ch_list = sorted(chs)
    L = p.packet_bits
    d_bs = geom.d_bs

    for node in world:
        if not node.alive:
            continue
        i = node.id
        if i in chs:
            if node.sleep_rounds_remaining > 0:
                wake_or_continue(node, True, False)
            continue
        nearest = min(ch_list, key=geom.d[i].__getitem__) if ch_list else None

        if node.sleep_rounds_remaining > 0:
            cheaper = nearest is not None and (
                tx_energy(p, L, geom.d[i][nearest]) < tx_energy(p, L, d_bs[i]))
            action = wake_or_continue(node, False, cheaper)
            if action is WakeAction.WAKE_AS_MEMBER:
                plan.memberships[i] = nearest
            elif action is WakeAction.WAKE_AND_SEND_DIRECT:
                plan.direct_senders.add(i)
            else:
                plan.sleepers.add(i)
        elif nearest is None:
            plan.direct_senders.add(i)
        elif kind is ProtocolKind.MEECDA and sleep_decision(node, geom.d[i][nearest], d_bs[i], p):
            node.sleep_rounds_remaining = max_sleep_rounds
            plan.sleepers.add(i)
        else:
            plan.memberships[i] = nearest

    if kind is ProtocolKind.MEECDA:
        for ch_id in ch_list:
            ch = world[ch_id]
            if ch.node_class is not NodeClass.NORMAL:
                continue
            relay = select_relay(ch, world, chs, bs_pos, exclude=plan.sleepers, geom=geom)
            if relay is not None:
                plan.relays[ch_id] = relay
    return plan

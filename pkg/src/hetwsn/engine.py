"""World setup and the round loop (setup phase, steady-state accounting, deaths)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from hetwsn.heterogeneity import (
    HeterogeneityConfig,
    NodeClass,
    initial_energy,
    node_classes,
)
from hetwsn.metrics import MetricsTrace, Summary, TraceRow
from hetwsn.protocols import (
    MAX_SLEEP_ROUNDS,
    Geometry,
    NodeState,
    Point,
    ProtocolKind,
    RoundPlan,
    plan_round,
)
from hetwsn.radio import RadioParams, crossover_distance, rx_energy, tx_energy
from hetwsn.rng import RandomStream

# Table-1 radio constants keep M-EECDA runs alive for ~40k rounds
DEFAULT_MAX_ROUNDS = 100_000


@dataclass(frozen=True)
class SimulationConfig:
    het: HeterogeneityConfig = field(default_factory=HeterogeneityConfig)
    radio: RadioParams = field(default_factory=RadioParams)
    area_side: float = 100.0
    bs_pos: Point = (50.0, 50.0)
    max_rounds: int = DEFAULT_MAX_ROUNDS
    seed: int = 0
    protocol: ProtocolKind = ProtocolKind.MEECDA
    max_sleep_rounds: int = MAX_SLEEP_ROUNDS

    def __post_init__(self):
        if not self.area_side > 0:
            raise ValueError(f"area_side must be positive, got {self.area_side!r}")
        if self.max_rounds < 0:
            raise ValueError(f"max_rounds must be >= 0, got {self.max_rounds!r}")
        if self.max_sleep_rounds < 1:
            raise ValueError(f"max_sleep_rounds must be >= 1, got {self.max_sleep_rounds!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass
class RoundOutcome:
    round_index: int
    plan: RoundPlan
    energy_spent_per_node: dict[int, float]
    packets_to_bs: int
    deaths: set[int]
    total_residual: float


def init_world(cfg: SimulationConfig, rng: Optional[RandomStream] = None) -> list[NodeState]:
    """Deploy ``cfg.het.n`` nodes uniformly over the square field.

    Classes are assigned by id (normals first, super last); positions are
    drawn x then y per node, in id order, from ``rng`` (seeded from
    ``cfg.seed`` when omitted).
    """
    if rng is None:
        rng = RandomStream(cfg.seed)
    side = cfg.area_side
    world = []
    for i, k in enumerate(node_classes(cfg.het)):
        x = rng.uniform(0, side)
        y = rng.uniform(0, side)
        e = initial_energy(cfg.het, k)
        world.append(NodeState(id=i, node_class=k, x=x, y=y, energy=e, initial_energy=e))
    return world


class _Ledger:
    """Debits energy operation by operation; a short node drains and fails."""

    __slots__ = ("world", "spent")

    def __init__(self, world):
        self.world = world
        self.spent: dict[int, float] = {}

    def debit(self, i: int, cost: float) -> bool:
        node = self.world[i]
        before = node.energy
        if cost <= before:
            node.energy = before - cost
            ok = True
        else:
            node.energy = 0.0
            ok = False
        self.spent[i] = self.spent.get(i, 0.0) + (before - node.energy)
        return ok


def total_energy(world) -> float:
    # plain id-order sum; the kernel accumulates the same way
    total = 0.0
    for node in world:
        total += node.energy
    return total


def run_round(world: list[NodeState], cfg: SimulationConfig, r: int, rng: RandomStream,
              geom: Optional[Geometry] = None) -> tuple[list[NodeState], RoundOutcome]:
    """Play one round in place and report what happened.

    Steady-state order: members send to their CH, then each CH (ascending
    id) receives, aggregates and sends to its relay or the BS, the relay
    forwards, and finally direct senders transmit. Any node that cannot
    afford an operation spends what it has left and its packet is lost.
    """
    if geom is None:
        geom = Geometry.from_world(world, cfg.bs_pos)
    radio = cfg.radio
    L = radio.packet_bits
    plan = plan_round(world, cfg.protocol, cfg.het, radio, cfg.bs_pos, r, rng,
                      geom=geom, max_sleep_rounds=cfg.max_sleep_rounds)
    ledger = _Ledger(world)
    d, d_bs = geom.d, geom.d_bs
    packets = 0

    received = dict.fromkeys(plan.cluster_heads, 0)
    for member in sorted(plan.memberships):
        ch = plan.memberships[member]
        if ledger.debit(member, tx_energy(radio, L, d[member][ch])):
            received[ch] += 1

    rx = rx_energy(radio, L)
    for ch in sorted(plan.cluster_heads):
        n_rx = received[ch]
        if not ledger.debit(ch, n_rx * rx):
            continue
        if not ledger.debit(ch, radio.e_da * L * (n_rx + 1)):
            continue
        relay = plan.relays.get(ch)
        if relay is None:
            if ledger.debit(ch, tx_energy(radio, L, d_bs[ch])):
                packets += 1
            continue
        if not ledger.debit(ch, tx_energy(radio, L, d[ch][relay])):
            continue
        if ledger.debit(relay, rx) and ledger.debit(relay, tx_energy(radio, L, d_bs[relay])):
            packets += 1

    for node_id in sorted(plan.direct_senders):
        if ledger.debit(node_id, tx_energy(radio, L, d_bs[node_id])):
            packets += 1

    deaths = set()
    for node in world:
        if node.alive and node.energy <= 0.0:
            node.alive = False
            deaths.add(node.id)

    outcome = RoundOutcome(
        round_index=r,
        plan=plan,
        energy_spent_per_node=ledger.spent,
        packets_to_bs=packets,
        deaths=deaths,
        total_residual=total_energy(world),
    )
    return world, outcome


class Simulator:
    """One seeded run. Step it by hand or call :meth:`run`."""

    def __init__(self, cfg: SimulationConfig):
        self.cfg = cfg
        self.rng = RandomStream(cfg.seed)
        self.world = init_world(cfg, self.rng)
        self.geom = Geometry.from_world(self.world, cfg.bs_pos)
        self.round = 0
        self.initial_total = math.fsum(n.energy for n in self.world)

    @property
    def alive_count(self) -> int:
        return sum(1 for n in self.world if n.alive)

    @property
    def finished(self) -> bool:
        return self.round >= self.cfg.max_rounds or self.alive_count == 0

    def step(self) -> RoundOutcome:
        _, outcome = run_round(self.world, self.cfg, self.round, self.rng, geom=self.geom)
        self.round += 1
        return outcome

    def run(self, observer: Optional[Callable[[RoundOutcome], None]] = None) -> MetricsTrace:
        n = len(self.world)
        rows = []
        fnd = hnd = lnd = None
        packets_cum = 0
        half = n // 2
        while not self.finished:
            outcome = self.step()
            if observer is not None:
                observer(outcome)
            alive = [0, 0, 0]
            for node in self.world:
                if node.alive:
                    alive[node.node_class] += 1
            n_alive = sum(alive)
            r = outcome.round_index
            if fnd is None and n_alive < n:
                fnd = r
            if hnd is None and n_alive <= half:
                hnd = r
            if lnd is None and n_alive == 0:
                lnd = r
            packets_cum += outcome.packets_to_bs
            rows.append(TraceRow(
                round=r,
                alive_normal=alive[NodeClass.NORMAL],
                alive_advanced=alive[NodeClass.ADVANCED],
                alive_super=alive[NodeClass.SUPER],
                ch_count=len(outcome.plan.cluster_heads),
                sleeping=len(outcome.plan.sleepers),
                packets_round=outcome.packets_to_bs,
                packets_cum=packets_cum,
                residual_j=outcome.total_residual,
            ))
        summary = Summary(fnd=fnd, hnd=hnd, lnd=lnd, total_packets=packets_cum, rounds_simulated=len(rows))
        return MetricsTrace(rows=rows, n_nodes=n, summary=summary,
                            protocol=self.cfg.protocol.value, config=self.cfg)


def run_simulation(cfg: SimulationConfig,
                   observer: Optional[Callable[[RoundOutcome], None]] = None,
                   engine: str = "fast") -> MetricsTrace:
    """Run ``cfg`` to extinction or ``cfg.max_rounds``.

    ``engine="fast"`` uses the compiled kernel; ``"reference"`` steps the
    object model and is required when an ``observer`` wants each
    :class:`RoundOutcome`. Both produce identical traces.
    """
    if observer is not None or engine == "reference":
        return Simulator(cfg).run(observer)
    if engine != "fast":
        raise ValueError(f"unknown engine {engine!r}")
    return run_fast(cfg).trace


@dataclass
class FastRun:
    """Result of a compiled run.

    ``spent`` holds the energy dissipated in each round and ``residual``
    the unrounded network residual after it. With
    ``record=True``, ``roles[r, i]`` is node i's role in round r (see
    ``hetwsn.kernel.ROLE_*``) and ``targets[r, i]`` its CH (members) or
    relay (cluster heads), -1 otherwise.
    """

    trace: MetricsTrace
    initial_total: float
    spent: np.ndarray
    residual: np.ndarray
    classes: np.ndarray
    geom: Geometry
    roles: Optional[np.ndarray] = None
    targets: Optional[np.ndarray] = None


_KIND_CODES = {ProtocolKind.MEECDA: 0, ProtocolKind.EECDA_APPROX: 1, ProtocolKind.LEACH: 2}
_CHUNK = 8192


def run_fast(cfg: SimulationConfig, record: bool = False) -> FastRun:
    from hetwsn import kernel
    from hetwsn.protocols import election_table

    stream = RandomStream(cfg.seed)
    world = init_world(cfg, stream)
    geom = Geometry.from_world(world, cfg.bs_pos)
    n = len(world)
    initial_total = math.fsum(node.energy for node in world)

    cls = np.array([node.node_class for node in world], dtype=np.int64)
    energy = np.array([node.energy for node in world], dtype=np.float64)
    init_e = energy.copy()
    last_ch = np.full(n, -1, dtype=np.int64)
    sleep = np.zeros(n, dtype=np.int64)
    alive = np.ones(n, dtype=np.bool_)
    d = np.array(geom.d, dtype=np.float64).reshape(n, n)
    d_bs = np.array(geom.d_bs, dtype=np.float64)
    table = election_table(cfg.protocol, cfg.het)
    p_cls = np.array([table[k][0] for k in NodeClass], dtype=np.float64)
    w_cls = np.array([table[k][1] for k in NodeClass], dtype=np.int64)
    radio = cfg.radio

    chunks = []
    r = 0
    while r < cfg.max_rounds and alive.any():
        stream.ensure(n)
        cap = min(_CHUNK, cfg.max_rounds - r)
        out = {
            "round": np.empty(cap, np.int64),
            "alive": np.empty((cap, 3), np.int64),
            "ch": np.empty(cap, np.int64),
            "sleep": np.empty(cap, np.int64),
            "packets": np.empty(cap, np.int64),
            "residual": np.empty(cap, np.float64),
            "spent": np.empty(cap, np.float64),
            "roles": np.empty((cap if record else 0, n), np.int8),
            "targets": np.empty((cap if record else 0, n), np.int64),
        }
        pos, r, rows = kernel.run_segment(
            _KIND_CODES[cfg.protocol], cls, d, d_bs, energy, init_e, last_ch, sleep, alive,
            p_cls, w_cls, radio.e_elec, radio.eps_fs, radio.eps_mp, radio.e_da,
            crossover_distance(radio), radio.packet_bits, cfg.max_sleep_rounds,
            stream.buffer, stream.pos, r, cfg.max_rounds,
            out["round"], out["alive"], out["ch"], out["sleep"], out["packets"],
            out["residual"], out["spent"], record, out["roles"], out["targets"],
        )
        stream.pos = pos
        chunks.append({k: v[:rows] for k, v in out.items()})

    def cat(key, shape=()):
        if not chunks:
            dtype = np.float64 if key in ("residual", "spent") else np.int64
            return np.empty((0, *shape), dtype)
        return np.concatenate([c[key] for c in chunks])

    alive_by_class = cat("alive", (3,))
    packets = cat("packets")
    packets_cum = np.cumsum(packets)
    rows = [
        TraceRow(int(rd), int(a[0]), int(a[1]), int(a[2]), int(ch), int(sl), int(pk), int(pc), float(res))
        for rd, a, ch, sl, pk, pc, res in zip(
            cat("round").tolist(), alive_by_class.tolist(), cat("ch").tolist(), cat("sleep").tolist(),
            packets.tolist(), packets_cum.tolist(), cat("residual").tolist())
    ]
    total_alive = alive_by_class.sum(axis=1)

    def first(mask) -> Optional[int]:
        idx = np.flatnonzero(mask)
        return int(idx[0]) if idx.size else None

    summary = Summary(
        fnd=first(total_alive < n),
        hnd=first(total_alive <= n // 2),
        lnd=first(total_alive == 0),
        total_packets=int(packets_cum[-1]) if len(rows) else 0,
        rounds_simulated=len(rows),
    )
    trace = MetricsTrace(rows=rows, n_nodes=n, summary=summary, protocol=cfg.protocol.value, config=cfg)
    return FastRun(
        trace=trace,
        initial_total=initial_total,
        spent=cat("spent"),
        residual=cat("residual"),
        classes=cls,
        geom=geom,
        roles=cat("roles", (n,)) if record else None,
        targets=cat("targets", (n,)) if record else None,
    )

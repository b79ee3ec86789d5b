"""First-order radio model and the analytical per-round energetics.

All energies are in joules, distances in metres. The simulator only ever
charges energy through :func:`tx_energy` and :func:`rx_energy`; the
closed-form helpers (:func:`ch_round_energy` and friends) always use the
free-space amplifier term and exist for planning and cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class RadioParams:
    e_elec: float = 5e-9  # J/bit, transmitter/receiver electronics
    eps_fs: float = 10e-12  # J/bit/m^2
    eps_mp: float = 0.0013e-12  # J/bit/m^4
    e_da: float = 5e-9  # J/bit/signal, aggregation
    d0_override: Optional[float] = None
    packet_bits: int = 4000

    def __post_init__(self):
        for name in ("e_elec", "eps_fs", "eps_mp", "e_da"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)!r}")
        if self.packet_bits < 1:
            raise ValueError(f"packet_bits must be >= 1, got {self.packet_bits!r}")
        if self.d0_override is not None and not self.d0_override > 0:
            raise ValueError(f"d0_override must be positive, got {self.d0_override!r}")

    @property
    def d0(self) -> float:
        return crossover_distance(self)


def crossover_distance(p: RadioParams) -> float:
    """Distance where the amplifier switches from d^2 to d^4 loss."""
    if p.d0_override is not None:
        return p.d0_override
    return math.sqrt(p.eps_fs / p.eps_mp)


def amplifier_energy(p: RadioParams, bits: int, d: float) -> float:
    # operation order is mirrored by the compiled kernel; keep them in sync
    d2 = d * d
    if d < crossover_distance(p):
        return bits * p.eps_fs * d2
    return bits * p.eps_mp * (d2 * d2)


def tx_energy(p: RadioParams, bits: int, d: float) -> float:
    """Energy to transmit ``bits`` over distance ``d``.

    Electronics cost plus the free-space (d < d0) or multipath (d >= d0)
    amplifier cost. Raises ``ValueError`` for a negative distance.
    """
    if d < 0:
        raise ValueError(f"distance must be non-negative, got {d!r}")
    return bits * p.e_elec + amplifier_energy(p, bits, d)


def rx_energy(p: RadioParams, bits: int) -> float:
    return bits * p.e_elec


def ch_round_energy(p: RadioParams, n: int, k: int, d_bs: float) -> float:
    """Analytical energy of one cluster head over a round.

    Receives ``n/k - 1`` member packets, aggregates ``n/k`` signals and
    sends one packet to the base station over the free-space branch. The
    formula presumes ``d_bs < d0``; it is not re-branched on d0.
    """
    if k <= 0:
        raise ValueError(f"cluster count must be >= 1, got {k!r}")
    L = p.packet_bits
    per_cluster = n / k
    return (
        (per_cluster - 1) * L * p.e_elec
        + per_cluster * L * p.e_da
        + L * p.e_elec
        + L * p.eps_fs * d_bs**2
    )


def non_ch_round_energy(p: RadioParams, d_ch: float) -> float:
    """Analytical energy of a cluster member sending one packet (free-space form)."""
    if d_ch < 0:
        raise ValueError(f"distance must be non-negative, got {d_ch!r}")
    L = p.packet_bits
    return L * p.e_elec + L * p.eps_fs * d_ch**2


def total_round_energy(p: RadioParams, n: int, k: int, d_bs: float, d_ch: float) -> float:
    if k <= 0:
        raise ValueError(f"cluster count must be >= 1, got {k!r}")
    L = p.packet_bits
    return L * (2 * n * p.e_elec + n * p.e_da + p.eps_fs * (k * d_bs**2 + n * d_ch**2))


def optimal_clusters(p: RadioParams, n: int, area_side: float, d_bs: float) -> float:
    """Optimal cluster count as a real number; callers round as they see fit."""
    if d_bs <= 0:
        raise ValueError(f"d_bs must be positive, got {d_bs!r}")
    return math.sqrt(n) / math.sqrt(2 * math.pi) * math.sqrt(p.eps_fs / p.eps_mp) * area_side / d_bs**2


def optimal_probability(k_opt: float, n: int) -> float:
    if n <= 0:
        raise ValueError(f"node count must be >= 1, got {n!r}")
    return min(1.0, max(0.0, k_opt / n))

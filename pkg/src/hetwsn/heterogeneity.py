"""Three-class energy heterogeneity: populations, energies and weighted probabilities."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class NodeClass(enum.IntEnum):
    NORMAL = 0
    ADVANCED = 1
    SUPER = 2


def round_half_up(x: float) -> int:
    # snap first so 20.499999999999996 (10 * 2.05) rounds like 20.5
    return math.floor(round(x, 9) + 0.5)


@dataclass(frozen=True)
class HeterogeneityConfig:
    """Population description.

    ``m`` is the fraction of heterogeneous (advanced + super) nodes and
    ``m0`` the share of those that are super nodes.
    """

    n: int = 100
    m: float = 0.5
    m0: float = 0.4
    alpha: float = 1.0
    beta: float = 2.0
    e0: float = 0.5
    p_opt: float = 0.1

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n!r}")
        if not 0 <= self.m <= 1:
            raise ValueError(f"m must lie in [0, 1], got {self.m!r}")
        if not 0 <= self.m0 <= 1:
            raise ValueError(f"m0 must lie in [0, 1], got {self.m0!r}")
        if not 0 <= self.alpha <= self.beta:
            raise ValueError(f"need 0 <= alpha <= beta, got alpha={self.alpha!r} beta={self.beta!r}")
        if not self.e0 > 0:
            raise ValueError(f"e0 must be positive, got {self.e0!r}")
        if not 0 < self.p_opt < 1:
            raise ValueError(f"p_opt must lie in (0, 1), got {self.p_opt!r}")

    @property
    def energy_factor(self) -> float:
        """How many times more energy the network holds than a homogeneous one."""
        return 1 + self.m * (self.alpha + self.m0 * (self.beta - self.alpha))


def class_counts(c: HeterogeneityConfig) -> tuple[int, int, int]:
    """(normal, advanced, super) head counts; super is rounded first."""
    n_super = round_half_up(c.n * c.m * c.m0)
    n_adv = round_half_up(c.n * c.m) - n_super
    n_norm = c.n - n_adv - n_super
    if min(n_norm, n_adv, n_super) < 0:
        raise ValueError(f"class counts went negative: {(n_norm, n_adv, n_super)}")
    return n_norm, n_adv, n_super


def node_classes(c: HeterogeneityConfig) -> list[NodeClass]:
    """Class of every node id: normals first, then advanced, then super."""
    n_norm, n_adv, n_super = class_counts(c)
    return [NodeClass.NORMAL] * n_norm + [NodeClass.ADVANCED] * n_adv + [NodeClass.SUPER] * n_super


def initial_energy(c: HeterogeneityConfig, k: NodeClass) -> float:
    if k is NodeClass.NORMAL:
        return c.e0
    if k is NodeClass.ADVANCED:
        return c.e0 * (1 + c.alpha)
    return c.e0 * (1 + c.beta)


def total_initial_energy(c: HeterogeneityConfig) -> float:
    return c.n * c.e0 * c.energy_factor


def epoch_length(c: HeterogeneityConfig) -> int:
    return round_half_up(c.energy_factor / c.p_opt)


def weighted_probability(c: HeterogeneityConfig, k: NodeClass) -> float:
    multiplier = {
        NodeClass.NORMAL: 1.0,
        NodeClass.ADVANCED: 1 + c.alpha,
        NodeClass.SUPER: 1 + c.beta,
    }[k]
    p = c.p_opt * multiplier / c.energy_factor
    if not 0 < p < 1:
        raise ValueError(f"weighted probability for {k.name} is {p!r}; election probabilities must lie in (0, 1)")
    return p


def eligibility_window(p: float) -> int:
    """Rounds per election window for probability ``p``: round(1/p), at least 1."""
    return max(1, round_half_up(1 / p))

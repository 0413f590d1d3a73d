"""Ground-truth world and the dynamically revealed view of it.

The planner only ever sees a KnownEnvironment snapshot.  Whole primitives
become revealed once any robot position comes within the sensing radius of
them; initially-known primitives are revealed from the start.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Sequence, Tuple

import numpy as np

from .geometry import ObstaclePrimitive, as_config


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Immutable world description: workspace box, obstacles, formation band."""

    dim: int
    bounds_lo: np.ndarray
    bounds_hi: np.ndarray
    primitives: Tuple[ObstaclePrimitive, ...]
    dmin: float | None = None
    dmax: float | None = None

    @staticmethod
    def create(dim: int, bounds_lo, bounds_hi, primitives: Sequence[ObstaclePrimitive],
               dmin: float | None = None, dmax: float | None = None) -> "GroundTruth":
        lo = np.asarray(bounds_lo, dtype=float)
        hi = np.asarray(bounds_hi, dtype=float)
        if lo.shape != (dim,) or hi.shape != (dim,) or np.any(lo >= hi):
            raise ValueError("workspace bounds must be a non-degenerate box of the given dim")
        return GroundTruth(dim=dim, bounds_lo=lo, bounds_hi=hi,
                           primitives=tuple(primitives), dmin=dmin, dmax=dmax)

    def robot_positions(self, x: np.ndarray):
        x = as_config(x)
        if x.shape[0] % self.dim != 0:
            raise ValueError(f"configuration length {x.shape[0]} not divisible by workspace dim {self.dim}")
        return list(x.reshape(-1, self.dim))

    def known_ids(self) -> FrozenSet[int]:
        return frozenset(i for i, p in enumerate(self.primitives) if p.known)


@dataclass(frozen=True, eq=False)
class KnownEnvironment:
    """Snapshot of the revealed obstacle set; immutable, new snapshot per sense."""

    truth: GroundTruth
    revealed: FrozenSet[int]
    sensing_radius: float

    @staticmethod
    def initial(truth: GroundTruth, sensing_radius: float) -> "KnownEnvironment":
        return KnownEnvironment(truth=truth, revealed=truth.known_ids(),
                                sensing_radius=sensing_radius)

    @property
    def bounds_lo(self) -> np.ndarray:
        return self.truth.bounds_lo

    @property
    def bounds_hi(self) -> np.ndarray:
        return self.truth.bounds_hi

    @property
    def dim(self) -> int:
        return self.truth.dim

    def robot_positions(self, x: np.ndarray):
        return self.truth.robot_positions(x)

    def revealed_primitives(self) -> Tuple[ObstaclePrimitive, ...]:
        return tuple(self.truth.primitives[i] for i in sorted(self.revealed))

    def fully_revealed(self) -> "KnownEnvironment":
        return KnownEnvironment(truth=self.truth,
                                revealed=frozenset(range(len(self.truth.primitives))),
                                sensing_radius=self.sensing_radius)


def sense(known: KnownEnvironment, x) -> KnownEnvironment:
    """Reveal every primitive within the sensing radius of any robot position."""
    positions = known.robot_positions(as_config(x))
    new = set(known.revealed)
    for i, prim in enumerate(known.truth.primitives):
        if i in new:
            continue
        for pos in positions:
            if prim.distance_to(pos) <= known.sensing_radius:
                new.add(i)
                break
    if len(new) == len(known.revealed):
        return known
    return KnownEnvironment(truth=known.truth, revealed=frozenset(new),
                            sensing_radius=known.sensing_radius)


def distance_to_revealed(x, known: KnownEnvironment) -> float:
    """Minimum workspace distance from any robot position to any revealed primitive."""
    positions = known.robot_positions(as_config(x))
    prims = known.revealed_primitives()
    if not prims:
        return float("inf")
    return min(prim.distance_to(pos) for pos in positions for prim in prims)

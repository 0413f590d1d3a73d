"""Configuration-space geometry: distances, potentials and feasibility tests.

A configuration is a flat float array of length n.  For k robots in a
d-dimensional workspace n = k * d and the coordinates are the stacked
per-robot positions.  Obstacles live in the workspace and are open sets:
interiors are infeasible, boundaries are feasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


def as_config(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"configuration must be a flat vector, got shape {a.shape}")
    return a


def distance(a, b) -> float:
    """Euclidean distance between two configurations of equal dimension."""
    a = as_config(a)
    b = as_config(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Convex potential with unique global minimum at the target: ||x - target||."""

    target: np.ndarray

    def value(self, x) -> float:
        return distance(x, self.target)

    def gradient(self, x) -> np.ndarray:
        """Analytic gradient; zero vector at the target itself."""
        d = as_config(x) - self.target
        n = np.linalg.norm(d)
        if n == 0.0:
            return np.zeros_like(d)
        return d / n


def potential(field: PotentialField, x) -> float:
    return field.value(x)


@dataclass(frozen=True, eq=False)
class ObstaclePrimitive:
    """One obstacle: an open axis-aligned box, or an implicit constraint fn < 0.

    `known` marks constraints available before any sensing.
    """

    kind: str  # "box" | "implicit"
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None
    fn: Optional[Callable[[np.ndarray], float]] = None
    known: bool = False

    @staticmethod
    def box(lo, hi, known: bool = False) -> "ObstaclePrimitive":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError(f"invalid box corners {lo} .. {hi}")
        return ObstaclePrimitive(kind="box", lo=lo, hi=hi, known=known)

    @staticmethod
    def implicit(fn: Callable[[np.ndarray], float], known: bool = False) -> "ObstaclePrimitive":
        return ObstaclePrimitive(kind="implicit", fn=fn, known=known)

    def contains(self, p: np.ndarray) -> bool:
        """True iff p is strictly inside (obstacles are open sets)."""
        if self.kind == "box":
            return bool(np.all(self.lo < p) and np.all(p < self.hi))
        return self.fn(p) < 0.0

    def distance_to(self, p: np.ndarray) -> float:
        """Distance from a workspace point to the obstacle; 0 inside.

        For implicit obstacles the constraint value is used as a signed
        distance proxy.
        """
        if self.kind == "box":
            d = np.maximum(np.maximum(self.lo - p, p - self.hi), 0.0)
            return float(np.linalg.norm(d))
        return max(float(self.fn(p)), 0.0)


def segment_hits_box(a: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> bool:
    """True iff segment [a, b] intersects the OPEN box (lo, hi).

    Grazing a face or an edge (boundary contact only) does not count.
    """
    d = b - a
    t0, t1 = 0.0, 1.0
    for i in range(a.shape[0]):
        if d[i] == 0.0:
            if not (lo[i] < a[i] < hi[i]):
                return False
        else:
            ta = (lo[i] - a[i]) / d[i]
            tb = (hi[i] - a[i]) / d[i]
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
            if t0 >= t1:
                return False
    return t1 > t0


def segments_hit_boxes(starts: np.ndarray, ends: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized open-box slab test.

    starts/ends: (N, d) segment endpoints; lo/hi: (P, d) box corners.
    Returns a boolean (N,) array: segment crosses the interior of any box.
    """
    n = starts.shape[0]
    if n == 0 or lo.shape[0] == 0:
        return np.zeros(n, dtype=bool)
    a = starts[:, None, :]  # (N, 1, d)
    d = ends[:, None, :] - a
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (lo[None, :, :] - a) / d
        tb = (hi[None, :, :] - a) / d
    zero = d == 0.0
    inside = (lo[None, :, :] < a) & (a < hi[None, :, :])
    lo_t = np.minimum(ta, tb)
    hi_t = np.maximum(ta, tb)
    # Degenerate axes: full line if inside the slab, empty otherwise.
    lo_t = np.where(zero, np.where(inside, -np.inf, np.inf), lo_t)
    hi_t = np.where(zero, np.where(inside, np.inf, -np.inf), hi_t)
    t0 = np.maximum(lo_t.max(axis=2), 0.0)
    t1 = np.minimum(hi_t.min(axis=2), 1.0)
    return np.any(t1 > t0, axis=1)


def point_feasible(x, env) -> bool:
    """True iff no robot position is out of bounds or inside a revealed obstacle."""
    x = as_config(x)
    for pos in env.robot_positions(x):
        if np.any(pos < env.bounds_lo) or np.any(pos > env.bounds_hi):
            return False
        for prim in env.revealed_primitives():
            if prim.contains(pos):
                return False
    return True


def segment_feasible(a, b, env, implicit_step: float = 1e-3) -> bool:
    """True iff the straight configuration segment [a, b] avoids revealed obstacles.

    Box obstacles get an exact slab test per robot; implicit obstacles are
    sampled along the segment at `implicit_step` (configuration-space pitch).
    """
    a = as_config(a)
    b = as_config(b)
    pa = env.robot_positions(a)
    pb = env.robot_positions(b)
    boxes = [p for p in env.revealed_primitives() if p.kind == "box"]
    implicit = [p for p in env.revealed_primitives() if p.kind == "implicit"]
    for ra, rb in zip(pa, pb):
        for prim in boxes:
            if segment_hits_box(ra, rb, prim.lo, prim.hi):
                return False
    if implicit:
        length = distance(a, b)
        steps = max(int(np.ceil(length / implicit_step)), 1)
        for s in range(steps + 1):
            t = s / steps
            x = a + t * (b - a)
            for pos in env.robot_positions(x):
                for prim in implicit:
                    if prim.contains(pos):
                        return False
    return True


def multi_robot_feasible(x, env, dmin: float, dmax: float) -> bool:
    """Pairwise distance band plus unblocked robot-to-robot links at x."""
    positions = env.robot_positions(as_config(x))
    k = len(positions)
    boxes = [p for p in env.revealed_primitives() if p.kind == "box"]
    for i in range(k):
        for j in range(i + 1, k):
            d = float(np.linalg.norm(positions[i] - positions[j]))
            if d < dmin or d > dmax:
                return False
            for prim in boxes:
                if segment_hits_box(positions[i], positions[j], prim.lo, prim.hi):
                    return False
    return True


def _pair_distance_band_over_motion(pa, pb, qa, qb, dmin: float, dmax: float) -> bool:
    """Distance between two linearly moving points stays in [dmin, dmax].

    The squared distance is a convex quadratic in t, so the max is attained
    at an endpoint and the min at the clamped vertex.
    """
    r0 = pa - qa
    r1 = pb - qb
    dr = r1 - r0
    if float(np.linalg.norm(r0)) > dmax or float(np.linalg.norm(r1)) > dmax:
        return False
    denom = float(np.dot(dr, dr))
    if denom > 0.0:
        t = float(np.clip(-np.dot(r0, dr) / denom, 0.0, 1.0))
    else:
        t = 0.0
    if float(np.linalg.norm(r0 + t * dr)) < dmin:
        return False
    return True


def formation_segment_feasible(a, b, env, dmin: Optional[float], dmax: Optional[float],
                               link_step: float) -> bool:
    """Full admission test for moving the stacked configuration from a to b.

    Combines per-robot segment tests with the pairwise distance band held
    along the whole motion and robot-to-robot links sampled at `link_step`.
    """
    if not segment_feasible(a, b, env, implicit_step=link_step):
        return False
    if dmin is None or dmax is None:
        return True
    a = as_config(a)
    b = as_config(b)
    pa = env.robot_positions(a)
    pb = env.robot_positions(b)
    k = len(pa)
    if k < 2:
        return True
    for i in range(k):
        for j in range(i + 1, k):
            if not _pair_distance_band_over_motion(pa[i], pb[i], pa[j], pb[j], dmin, dmax):
                return False
    # Link blocking along the motion, sampled at the configuration pitch.
    boxes = [p for p in env.revealed_primitives() if p.kind == "box"]
    if not boxes:
        return True
    length = distance(a, b)
    steps = max(int(np.ceil(length / link_step)), 1)
    for s in range(steps + 1):
        t = s / steps
        pos = [pa[i] + t * (pb[i] - pa[i]) for i in range(k)]
        for i in range(k):
            for j in range(i + 1, k):
                for prim in boxes:
                    if segment_hits_box(pos[i], pos[j], prim.lo, prim.hi):
                        return False
    return True

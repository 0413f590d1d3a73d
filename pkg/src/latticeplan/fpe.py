"""Upwind finite-volume solver for the lattice gradient/diffusion flow and
the alternating construction of the bounded search region.

The density evolves by explicit Euler steps under an adaptive CFL bound;
mass is conserved edge-wise and the free energy is a Lyapunov function.
The region alternates greedy descent sweeps (diffusion strength zero) with
Gibbs-layer growth (positive diffusion) until the target node is claimed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .environment import KnownEnvironment
from .errors import CflViolationError, RegionError
from .geometry import PotentialField, as_config, point_feasible, segment_feasible

_RHO_FLOOR = 1e-300  # guards log() only; masses themselves are never clipped


@dataclass(eq=False)
class Lattice:
    """Feasible grid points of one pitch with axis adjacency and potentials."""

    coords: np.ndarray          # (M, n)
    dx: float
    anchor: np.ndarray
    p: np.ndarray               # (M,) potential per node
    edges: np.ndarray           # (E, 2) node index pairs, j < k not required
    neighbors: List[List[int]]  # per node, adjacent node indices
    key_map: Dict[Tuple[int, ...], int]

    @staticmethod
    def build(env: KnownEnvironment, anchor, dx: float, target) -> "Lattice":
        anchor = as_config(anchor)
        target = as_config(target)
        n = anchor.shape[0]
        if n > 3:
            raise ValueError(
                f"lattice solver is a 2D/3D verification tool; got n = {n} "
                "(the planner itself has no such limit)")
        lo = np.tile(env.bounds_lo, n // env.dim)
        hi = np.tile(env.bounds_hi, n // env.dim)
        kmin = np.ceil((lo - anchor) / dx - 1e-9).astype(int)
        kmax = np.floor((hi - anchor) / dx + 1e-9).astype(int)
        pot = PotentialField(target=target)
        coords = []
        key_map: Dict[Tuple[int, ...], int] = {}
        ranges = [range(kmin[i], kmax[i] + 1) for i in range(n)]
        grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, n)
        for key_arr in grid:
            x = anchor + dx * key_arr
            if point_feasible(x, env):
                key_map[tuple(int(v) for v in key_arr)] = len(coords)
                coords.append(x)
        coords_arr = np.asarray(coords)
        neighbors: List[List[int]] = [[] for _ in range(len(coords))]
        edges = []
        for key, j in key_map.items():
            for axis in range(n):
                up = list(key)
                up[axis] += 1
                k = key_map.get(tuple(up))
                if k is None:
                    continue
                if not segment_feasible(coords_arr[j], coords_arr[k], env,
                                        implicit_step=dx / 10.0):
                    continue
                edges.append((j, k))
                neighbors[j].append(k)
                neighbors[k].append(j)
        p = np.array([pot.value(x) for x in coords_arr])
        edges_arr = np.asarray(edges, dtype=int) if edges else np.zeros((0, 2), dtype=int)
        return Lattice(coords=coords_arr, dx=dx, anchor=anchor, p=p,
                       edges=edges_arr, neighbors=[sorted(ns) for ns in neighbors],
                       key_map=key_map)

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    def node_at(self, x) -> int:
        """Index of the lattice node at configuration x (must be on-grid)."""
        key = tuple(int(v) for v in np.rint((as_config(x) - self.anchor) / self.dx))
        idx = self.key_map.get(key)
        if idx is None or float(np.max(np.abs(self.coords[idx] - x))) > 0.25 * self.dx:
            raise ValueError(f"configuration {x} is not a lattice node")
        return idx

    def component_of(self, start: int) -> Set[int]:
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in self.neighbors[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen


@dataclass
class DensityField:
    rho: np.ndarray
    beta: float

    @staticmethod
    def delta(lat: Lattice, node: int, beta: float = 0.0) -> "DensityField":
        rho = np.zeros(lat.size)
        rho[node] = 1.0
        return DensityField(rho=rho, beta=beta)

    @staticmethod
    def uniform(lat: Lattice, beta: float) -> "DensityField":
        return DensityField(rho=np.full(lat.size, 1.0 / lat.size), beta=beta)


@dataclass(eq=False)
class ProjectionWeights:
    """0/1 weight per lattice edge; gradient mode keeps only steepest-descent
    edges, diffusion mode keeps all of them."""

    d: np.ndarray  # (E,)


def diffusion_weights(lat: Lattice) -> ProjectionWeights:
    return ProjectionWeights(d=np.ones(lat.edges.shape[0]))


def gradient_weights(lat: Lattice, pot: Optional[PotentialField] = None) -> ProjectionWeights:
    """For each node, mark the edge(s) toward the neighbor maximizing the inner
    product of the descent step with the analytic potential gradient, among
    strictly lower-potential neighbors; exact ties all carry weight one."""
    d = np.zeros(lat.edges.shape[0])
    edge_index: Dict[Tuple[int, int], int] = {}
    for e, (j, k) in enumerate(lat.edges):
        edge_index[(int(j), int(k))] = e
        edge_index[(int(k), int(j))] = e
    for j in range(lat.size):
        lower = [k for k in lat.neighbors[j] if lat.p[k] < lat.p[j]]
        if not lower:
            continue
        if pot is not None:
            grad = pot.gradient(lat.coords[j])
        else:
            grad = None
        vals = []
        for k in lower:
            step = lat.coords[j] - lat.coords[k]
            if grad is not None:
                vals.append(float(np.dot(step, grad)))
            else:
                vals.append(float(lat.p[j] - lat.p[k]))
        m = max(vals)
        for k, v in zip(lower, vals):
            if v >= m - 1e-12:
                d[edge_index[(j, int(k))]] = 1.0
    return ProjectionWeights(d=d)


def _f_vector(f: DensityField, lat: Lattice) -> np.ndarray:
    """Variation of the free energy per node: p + beta (log rho + 1)."""
    if f.beta == 0.0:
        return lat.p
    return lat.p + f.beta * (np.log(np.maximum(f.rho, _RHO_FLOOR)) + 1.0)


def free_energy(f: DensityField, lat: Lattice) -> float:
    """Potential energy plus beta-weighted entropy; zero mass contributes zero."""
    e = float(np.dot(lat.p, f.rho))
    if f.beta == 0.0:
        return e
    mask = f.rho > 0.0
    return e + f.beta * float(np.sum(f.rho[mask] * np.log(f.rho[mask])))


def cfl_dt(f: DensityField, lat: Lattice, w: ProjectionWeights,
           safety: float = 0.9) -> float:
    """Largest stable explicit step (scaled by the safety factor), capped at
    dx^2 when both stability bounds are vacuous."""
    if lat.edges.shape[0] == 0:
        return lat.dx * lat.dx
    F = _f_vector(f, lat)
    ej = lat.edges[:, 0]
    ek = lat.edges[:, 1]
    dF = F[ej] - F[ek]
    pos = np.maximum(dF, 0.0) * w.d   # coefficient of flow j -> k
    neg = np.maximum(-dF, 0.0) * w.d  # coefficient of flow k -> j
    m = lat.size
    out_coef = np.bincount(ej, weights=pos, minlength=m) + \
        np.bincount(ek, weights=neg, minlength=m)
    in_flux = np.bincount(ek, weights=pos * f.rho[ej], minlength=m) + \
        np.bincount(ej, weights=neg * f.rho[ek], minlength=m)
    b1 = np.inf if out_coef.max() <= 0.0 else 1.0 / out_coef.max()
    active = in_flux > 0.0
    if not np.any(active):
        b2 = np.inf
    else:
        with np.errstate(over="ignore", divide="ignore"):
            b2 = float(np.min((1.0 - f.rho[active]) / in_flux[active]))
    raw = min(b1, b2)
    scale = 1.0 if not np.isfinite(raw) else min(safety * raw, 1.0)
    return scale * lat.dx * lat.dx


def fpe_step(f: DensityField, lat: Lattice, w: ProjectionWeights,
             dt: float) -> DensityField:
    """One explicit Euler step of the upwind scheme; conserves mass edge-wise."""
    if lat.edges.shape[0] == 0:
        return DensityField(rho=f.rho.copy(), beta=f.beta)
    F = _f_vector(f, lat)
    ej = lat.edges[:, 0]
    ek = lat.edges[:, 1]
    dF = F[ej] - F[ek]
    scale = dt / (lat.dx * lat.dx)
    # net transfer from j to k along each edge
    t = (np.maximum(dF, 0.0) * f.rho[ej] - np.maximum(-dF, 0.0) * f.rho[ek]) * w.d * scale
    m = lat.size
    delta = np.bincount(ek, weights=t, minlength=m) - \
        np.bincount(ej, weights=t, minlength=m)
    rho = f.rho + delta
    if rho.min() < -1e-14:
        raise CflViolationError(
            f"negative mass {rho.min():.3e} detected: step {dt:.3e} violates the CFL bound")
    if rho.max() > 1.0 + 1e-12:
        raise CflViolationError(
            f"mass {rho.max():.6f} exceeded 1: step {dt:.3e} violates the CFL bound")
    return DensityField(rho=rho, beta=f.beta)


@dataclass
class EvolveResult:
    field: DensityField
    converged: bool
    iterations: int
    residual: float
    max_mass_error: float
    max_energy_increase: float


def evolve_to_steady(f: DensityField, lat: Lattice, w: ProjectionWeights,
                     tol: float = 1e-10, max_iters: int = 10 ** 6,
                     safety: float = 0.9,
                     touched_threshold: Optional[float] = None,
                     touched: Optional[Set[int]] = None) -> EvolveResult:
    """Iterate explicit steps with adaptive dt until the time derivative
    drops below tol in max norm.

    The step starts at the CFL bound and is halved whenever a trial step
    would raise the free energy (the explicit scheme turns stiff near the
    steady state when the entropy term dominates); it recovers by doubling
    after a run of accepted steps.  When `touched` is given, nodes whose
    derivative is ever above `touched_threshold` are collected into it.
    """
    mass_err = 0.0
    energy_inc = 0.0
    fe = free_energy(f, lat)
    residual = np.inf
    shrink = 1.0
    streak = 0
    it = 0
    for it in range(1, max_iters + 1):
        dt = shrink * cfl_dt(f, lat, w, safety=safety)
        nxt = fpe_step(f, lat, w, dt)
        fe_next = free_energy(nxt, lat)
        if fe_next > fe + 1e-15 and shrink > 1e-9:
            shrink *= 0.5
            streak = 0
            continue  # retry the step at a gentler pace
        d = nxt.rho - f.rho
        if touched is not None:
            gain = np.nonzero(d / dt > touched_threshold)[0]
            touched.update(int(i) for i in gain)
        residual = float(np.max(np.abs(d))) / dt
        mass_err = max(mass_err, abs(float(nxt.rho.sum()) - 1.0))
        energy_inc = max(energy_inc, fe_next - fe)
        fe = fe_next
        f = nxt
        streak += 1
        if shrink < 1.0 and streak >= 50:
            shrink = min(1.0, shrink * 2.0)
            streak = 0
        if residual < tol:
            return EvolveResult(field=f, converged=True, iterations=it,
                                residual=residual, max_mass_error=mass_err,
                                max_energy_increase=energy_inc)
    return EvolveResult(field=f, converged=False, iterations=it,
                        residual=residual, max_mass_error=mass_err,
                        max_energy_increase=energy_inc)


@dataclass(eq=False)
class Region:
    """Claimed lattice nodes plus the closed boxes of half-width `half_width`
    they cover."""

    nodes: Tuple[int, ...]
    lattice: Lattice
    half_width: float
    steady_rho: Optional[np.ndarray] = None

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = as_config(x)
        lat = self.lattice
        node_set = self._node_set
        base = np.floor((x - lat.anchor) / lat.dx).astype(int)
        n = x.shape[0]
        offsets = np.stack(np.meshgrid(*[[0, 1, -1]] * n, indexing="ij"),
                           axis=-1).reshape(-1, n)
        for off in offsets:
            idx = lat.key_map.get(tuple(int(v) for v in base + off))
            if idx is None or idx not in node_set:
                continue
            if float(np.max(np.abs(lat.coords[idx] - x))) <= self.half_width + tol:
                return True
        return False

    @property
    def _node_set(self) -> Set[int]:
        if not hasattr(self, "_cached_set"):
            self._cached_set = set(self.nodes)
        return self._cached_set


def contains_path(region: Region, trajectory: Sequence) -> bool:
    """True iff every trajectory sample lies inside some covered box."""
    return all(region.contains(x) for x in trajectory)


def gradient_region(start_node: int, lat: Lattice,
                    pot: Optional[PotentialField] = None,
                    tol: float = 1e-12) -> Set[int]:
    """Descent sweep: evolve a unit mass from the start node with projected
    weights and collect every node whose density ever strictly increases."""
    w = gradient_weights(lat, pot)
    f = DensityField.delta(lat, start_node, beta=0.0)
    touched: Set[int] = {start_node}
    evolve_to_steady(f, lat, w, tol=tol, touched_threshold=1e-14,
                     touched=touched)
    return touched


def diffusion_region(prev: Set[int], lat: Lattice, beta: float,
                     eps: float = 1e-6,
                     steady: Optional[np.ndarray] = None
                     ) -> Tuple[Set[int], Optional[int]]:
    """Gibbs-layer growth around the previously claimed region.

    Returns the newly claimed nodes and the next descent start (the lowest
    potential unclaimed neighbor of the grown region), or None when the
    region already exhausts its lattice component.
    """
    if beta <= 0.0:
        raise ValueError("diffusion requires beta > 0")
    if not prev:
        raise ValueError("previous region must be nonempty")
    if steady is None:
        rest = lat.size - len(prev)
        if rest > 0 and not (1.0 - eps) / len(prev) > eps / rest:
            raise ValueError("diffusion floor eps too large for this lattice")
        rho = np.full(lat.size, (eps / rest) if rest else 0.0)
        for i in prev:
            rho[i] = (1.0 - eps) / len(prev)
        rho /= rho.sum()
        res = evolve_to_steady(DensityField(rho=rho, beta=beta), lat,
                               diffusion_weights(lat), tol=1e-10)
        steady = res.field.rho

    claimed = set(prev)

    def exit_node(nodes) -> bool:
        for z in nodes:
            for y in lat.neighbors[z]:
                if y not in claimed and lat.p[y] < lat.p[z]:
                    return True
        return False

    added: Set[int] = set()
    if not exit_node(prev):
        while True:
            cands = sorted({x for z in claimed for x in lat.neighbors[z]
                            if x not in claimed})
            if not cands:
                break  # region already fills its component
            x = max(cands, key=lambda i: (steady[i], -i))
            claimed.add(x)
            added.add(x)
            if exit_node({x}):
                break

    outside = sorted({y for x in claimed for y in lat.neighbors[x]
                      if y not in claimed})
    if not outside:
        return added, None
    next_start = min(outside, key=lambda i: (lat.p[i], i))
    return added, next_start


def build_region(start, target, lat: Lattice, beta: Optional[float] = None
                 ) -> Region:
    """Alternate descent sweeps and Gibbs-layer growth until the target node
    is claimed; the result is the union of boxes of half-width dx."""
    start_node = lat.node_at(start)
    target_node = lat.node_at(target)
    if target_node not in lat.component_of(start_node):
        raise RegionError(
            "target is not lattice-connected to the start: no bounded search "
            "region exists at this pitch")
    if beta is None:
        beta = float(lat.p.max() - lat.p.min()) / 10.0 or 1.0
    pot = PotentialField(target=as_config(target))

    # The Gibbs steady state is independent of the reinitialized density, so
    # one honest evolution serves every diffusion round.
    rho0 = np.full(lat.size, 1.0 / lat.size)
    steady = evolve_to_steady(DensityField(rho=rho0, beta=beta), lat,
                              diffusion_weights(lat), tol=1e-10).field.rho

    region: Set[int] = set()
    x_i = start_node
    for _ in range(lat.size + 1):
        region |= gradient_region(x_i, lat, pot)
        if target_node in region:
            break
        added, nxt = diffusion_region(region, lat, beta, steady=steady)
        region |= added
        if target_node in region:
            break
        if nxt is None:
            raise RegionError("region growth exhausted the lattice component "
                              "without claiming the target")
        x_i = nxt
    else:
        raise RegionError("region alternation exceeded the lattice size")
    return Region(nodes=tuple(sorted(region)), lattice=lat,
                  half_width=lat.dx, steady_rho=steady)


def region_dump(region: Region) -> str:
    """One lattice node per line: coord... in_region(0/1) steady_rho."""
    lat = region.lattice
    inside = region._node_set
    rho = region.steady_rho if region.steady_rho is not None else np.zeros(lat.size)
    lines = []
    for i in range(lat.size):
        coords = " ".join(f"{c:.12g}" for c in lat.coords[i])
        lines.append(f"{coords} {1 if i in inside else 0} {rho[i]:.12g}")
    return "\n".join(lines) + "\n"

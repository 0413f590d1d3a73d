"""Density-flow solver: CFL bound, conservation, Gibbs limits, regions."""

import numpy as np
import pytest

import latticeplan as lp
from latticeplan import fpe
from latticeplan.errors import CflViolationError, RegionError


def _chain(p, dx=0.1):
    """Hand-built 1D chain lattice embedded in 2D."""
    m = len(p)
    coords = np.array([[i * dx, 0.0] for i in range(m)])
    edges = np.array([[i, i + 1] for i in range(m - 1)])
    neighbors = [[] for _ in range(m)]
    for j, k in edges:
        neighbors[j].append(int(k))
        neighbors[k].append(int(j))
    key_map = {(i, 0): i for i in range(m)}
    return fpe.Lattice(coords=coords, dx=dx, anchor=np.zeros(2),
                       p=np.array(p, dtype=float), edges=edges,
                       neighbors=neighbors, key_map=key_map)


def _env(prims=(), dmin=None, dmax=None):
    truth = lp.GroundTruth.create(2, [0, 0], [1, 1], list(prims),
                                  dmin=dmin, dmax=dmax)
    return lp.KnownEnvironment.initial(truth, 0.1).fully_revealed()


def test_cfl_dt_two_node_hand_value():
    # p=(0,1), beta=0, rho=(1/2,1/2), dx=0.1: both bounds equal 1, so
    # dt = 0.9 * 0.01 = 0.009.
    lat = _chain([0.0, 1.0])
    f = fpe.DensityField(rho=np.array([0.5, 0.5]), beta=0.0)
    w = fpe.diffusion_weights(lat)
    assert fpe.cfl_dt(f, lat, w) == pytest.approx(0.009, abs=1e-15)
    # One step moves 0.45 of mass downhill: (0.95, 0.05).
    nxt = fpe.fpe_step(f, lat, w, 0.009)
    assert np.allclose(nxt.rho, [0.95, 0.05], atol=1e-15)


def test_cfl_violation_on_oversized_step():
    # All mass on the high node: 4x the stable step drains 3.6x its mass.
    lat = _chain([0.0, 1.0])
    f = fpe.DensityField(rho=np.array([0.0, 1.0]), beta=0.0)
    w = fpe.diffusion_weights(lat)
    dt = fpe.cfl_dt(f, lat, w)
    with pytest.raises(CflViolationError):
        fpe.fpe_step(f, lat, w, 4.0 * dt)


def test_mass_conserved_and_energy_monotone():
    lat = _chain([0.3, 0.1, 0.5, 0.2, 0.0], dx=0.05)
    rng = np.random.default_rng(3)
    rho = rng.uniform(0.1, 1.0, 5)
    f = fpe.DensityField(rho=rho / rho.sum(), beta=0.2)
    w = fpe.diffusion_weights(lat)
    fe = fpe.free_energy(f, lat)
    for _ in range(500):
        f = fpe.fpe_step(f, lat, w, fpe.cfl_dt(f, lat, w))
        assert abs(f.rho.sum() - 1.0) < 1e-12
        fe_next = fpe.free_energy(f, lat)
        assert fe_next <= fe + 1e-12
        fe = fe_next


def test_steady_state_matches_gibbs_three_nodes():
    # softmax(-p) for p=(0,1,2): exact Gibbs weights.
    # A tiny chain with beta comparable to the potential gaps is stiff in the
    # entropy term; a reduced step keeps the explicit scheme contractive.
    lat = _chain([0.0, 1.0, 2.0])
    f = fpe.DensityField.uniform(lat, beta=1.0)
    res = fpe.evolve_to_steady(f, lat, fpe.diffusion_weights(lat), tol=1e-12,
                               safety=0.2)
    want = np.exp(-lat.p)
    want /= want.sum()
    assert res.converged
    assert np.max(np.abs(res.field.rho - want)) < 1e-8
    assert np.allclose(want, [0.66524096, 0.24472847, 0.09003057], atol=1e-8)


def test_gibbs_is_stationary():
    lat = _chain([0.0, 0.7, 0.3, 1.0], dx=0.2)
    beta = 0.5
    rho = np.exp(-lat.p / beta)
    f = fpe.DensityField(rho=rho / rho.sum(), beta=beta)
    w = fpe.diffusion_weights(lat)
    nxt = fpe.fpe_step(f, lat, w, fpe.cfl_dt(f, lat, w))
    assert np.max(np.abs(nxt.rho - f.rho)) < 1e-14


def test_beta_zero_support_two_basins():
    # Two local minima (ends), barrier in the middle: steady support is
    # exactly the two minimizers.
    lat = _chain([0.0, 0.4, 0.8, 0.3, 0.1])
    f = fpe.DensityField.uniform(lat, beta=0.0)
    res = fpe.evolve_to_steady(f, lat, fpe.diffusion_weights(lat), tol=1e-13)
    support = set(np.nonzero(res.field.rho > 1e-10)[0])
    assert support == {0, 4}


def test_gradient_weights_pick_steepest_axis():
    env = _env()
    lat = fpe.Lattice.build(env, [0.0, 0.0], 0.1, [0.9, 0.2])
    w = fpe.gradient_weights(lat, lp.PotentialField(target=np.array([0.9, 0.2])))
    # At (0.1, 0.2) the gradient points along -x only: the +x edge must carry
    # weight 1 and the downhill y edge weight 0.
    j = lat.node_at([0.1, 0.2])
    k = lat.node_at([0.2, 0.2])
    e = [i for i, (a, b) in enumerate(lat.edges)
         if {int(a), int(b)} == {j, k}][0]
    assert w.d[e] == 1.0


def test_lattice_rejects_high_dimension():
    env = _env()
    with pytest.raises(ValueError):
        fpe.Lattice.build(env, [0.1, 0.1, 0.1, 0.1], 0.1, [0.9, 0.9, 0.9, 0.9])


def test_lattice_excludes_obstacle_interiors():
    env = _env([lp.ObstaclePrimitive.box([0.35, 0.35], [0.65, 0.65], known=True)])
    lat = fpe.Lattice.build(env, [0.0, 0.0], 0.1, [0.9, 0.9])
    for x in lat.coords:
        assert not (0.35 < x[0] < 0.65 and 0.35 < x[1] < 0.65)


def test_gradient_region_descends_to_target():
    env = _env()
    lat = fpe.Lattice.build(env, [0.1, 0.5], 0.05, [0.9, 0.5])
    nodes = fpe.gradient_region(lat.node_at([0.1, 0.5]), lat,
                                lp.PotentialField(target=np.array([0.9, 0.5])))
    assert lat.node_at([0.1, 0.5]) in nodes
    assert lat.node_at([0.9, 0.5]) in nodes


def test_build_region_convex_world_is_corridor():
    env = _env()
    lat = fpe.Lattice.build(env, [0.1, 0.5], 0.05, [0.9, 0.5])
    region = fpe.build_region([0.1, 0.5], [0.9, 0.5], lat)
    # Pure descent: the region is the straight row of nodes.
    ys = {round(float(lat.coords[i][1]), 10) for i in region.nodes}
    assert ys == {0.5}
    line = [np.array([x, 0.5]) for x in np.linspace(0.1, 0.9, 200)]
    assert fpe.contains_path(region, line)
    assert not region.contains([0.5, 0.62])


def test_region_unreachable_target_raises():
    walls = [lp.ObstaclePrimitive.box([0.4, 0.0], [0.5, 1.0], known=True)]
    env = _env(walls)
    lat = fpe.Lattice.build(env, [0.1, 0.52], 0.05, [0.9, 0.52])
    with pytest.raises(RegionError):
        fpe.build_region([0.1, 0.52], [0.9, 0.52], lat)


def test_diffusion_layer_potentials_increase():
    # Pocket: back wall plus arms; layers must climb the potential.
    walls = [lp.ObstaclePrimitive.box([0.52, 0.22], [0.57, 0.63], known=True),
             lp.ObstaclePrimitive.box([0.33, 0.22], [0.52, 0.27], known=True),
             lp.ObstaclePrimitive.box([0.33, 0.58], [0.52, 0.63], known=True)]
    env = _env(walls)
    lat = fpe.Lattice.build(env, [0.1, 0.4], 0.05, [0.9, 0.4])
    pot = lp.PotentialField(target=np.array([0.9, 0.4]))
    prev = fpe.gradient_region(lat.node_at([0.1, 0.4]), lat, pot)
    beta = float(lat.p.max() - lat.p.min()) / 10.0
    added, nxt = fpe.diffusion_region(prev, lat, beta)
    assert added, "the trapped descent region must grow diffusion layers"
    assert nxt is not None and nxt not in prev and nxt not in added
    # Every layer node sits above the trapped region's minimum potential and
    # the hand-off node continues downhill from some region node.
    region_min = min(lat.p[i] for i in prev)
    assert all(lat.p[i] > region_min for i in added)
    assert any(lat.p[nxt] < lat.p[i] for i in added)


def test_region_dump_format():
    env = _env()
    lat = fpe.Lattice.build(env, [0.1, 0.5], 0.2, [0.9, 0.5])
    region = fpe.build_region([0.1, 0.5], [0.9, 0.5], lat)
    lines = fpe.region_dump(region).strip().splitlines()
    assert len(lines) == lat.size
    first = lines[0].split()
    assert len(first) == 4  # x y in_region steady_rho
    assert first[2] in ("0", "1")

"""Geometry primitives: projection, quotient distance, nets, index, sup-norm."""

import numpy as np
import pytest

from lipext.errors import ConfigError, NetCapExceeded
from lipext.space import (Box, GridNet, Subspace, build_index, even_power,
                          offset_region_net, project, quotient_grad,
                          quotient_norm, smooth_sup_norm,
                          smooth_sup_norm_grad, subspace_net)

RNG = np.random.default_rng(20240817)


def random_subspace(n, k, rng):
    A = rng.normal(size=(n, n))
    Q, _ = np.linalg.qr(A)
    return Subspace(Q[:k])


def test_project_coordinate_subspace():
    S = Subspace([[1.0, 0.0]])
    assert np.allclose(project(S, [3.0, 4.0]), [3.0, 0.0])


def test_project_idempotent_on_subspace_points():
    S = random_subspace(4, 2, RNG)
    y = S.from_coords(RNG.normal(size=2))
    assert np.allclose(project(S, y), y, atol=1e-12)


def test_project_residual_orthogonal_to_basis():
    for _ in range(20):
        S = random_subspace(5, 3, RNG)
        x = RNG.normal(size=5)
        r = x - project(S, x)
        assert np.max(np.abs(S.basis @ r)) < 1e-10


def test_project_nonexpanding():
    for _ in range(20):
        S = random_subspace(4, 2, RNG)
        x = RNG.normal(size=4)
        assert np.linalg.norm(project(S, x)) <= np.linalg.norm(x) + 1e-12


def test_project_dim_mismatch():
    S = Subspace([[1.0, 0.0]])
    with pytest.raises(ConfigError):
        project(S, [1.0, 2.0, 3.0])


def test_subspace_rejects_non_orthonormal():
    with pytest.raises(ConfigError):
        Subspace([[1.0, 1.0]])


def test_quotient_norm_coordinate_case():
    S = Subspace([[1.0, 0.0]])
    assert quotient_norm(S, [5.0, 1.0]) == pytest.approx(1.0)
    assert quotient_norm(S, [7.0, 0.0]) == pytest.approx(0.0, abs=1e-12)


def test_quotient_norm_against_net_minimization():
    # independent oracle: brute-force min distance over a fine net of Y
    S = random_subspace(3, 1, RNG)
    box = Box([-2, -2, -2], [2, 2, 2])
    t = np.linspace(-6, 6, 4001)
    ypts = t[:, None] * S.basis[0]
    for _ in range(10):
        x = box.sample(RNG, 1)[0]
        brute = np.min(np.linalg.norm(ypts - x, axis=1))
        d = quotient_norm(S, x)
        assert d <= brute + 1e-9
        assert brute - d <= 6 / 4000 + 1e-9  # net spacing tolerance


def test_quotient_grad_unit_vector_and_undefined_zone():
    S = Subspace([[1.0, 0.0]])
    d, g = quotient_grad(S, [0.3, -2.0])
    assert d == pytest.approx(2.0)
    assert np.allclose(g, [0.0, -1.0])
    d0, g0 = quotient_grad(S, [0.3, 1e-13])
    assert g0 is None and d0 < 1e-12


def test_subspace_net_counts_and_cover_1d():
    S = Subspace([[1.0, 0.0]])
    box = Box([-2, -2], [2, 2])
    net = subspace_net(S, box, spacing=1.0)
    assert net.count >= 5  # segment of length 4 at spacing 1
    pts = RNG.uniform(-2, 2, size=1000)
    for t in pts:
        y = np.array([t, 0.0])
        idx, cs = net.query_ball(y, net.spacing + 1e-9)
        assert len(idx) > 0


def test_subspace_net_single_center_when_spacing_huge():
    S = Subspace([[1.0, 0.0]])
    box = Box([-1, -1], [1, 1])
    net = subspace_net(S, box, spacing=100.0, inflate=0.0)
    assert net.count == 1


def test_subspace_net_covering_random_orientation():
    S = random_subspace(3, 2, RNG)
    box = Box([-1, -1, -1], [1, 1, 1])
    net = subspace_net(S, box, spacing=0.3)
    C = net.centers
    for _ in range(1000):
        y = S.from_coords(RNG.uniform(-0.7, 0.7, size=2))
        if not box.contains(y):
            continue
        assert np.min(np.linalg.norm(C - y, axis=1)) <= net.spacing + 1e-9


def test_offset_net_min_dist_and_cover():
    S = Subspace([[1.0, 0.0]])
    box = Box([-1, -1], [1, 1])
    net = offset_region_net(S, box, spacing=0.25, min_dist=0.5)
    C = net.centers
    assert np.all(np.abs(C[:, 1]) >= 0.5 - 1e-12)
    hits = 0
    for _ in range(2000):
        x = box.sample(RNG, 1)[0]
        if abs(x[1]) < 0.5:
            continue
        hits += 1
        assert np.min(np.linalg.norm(C - x, axis=1)) <= 0.25 + 1e-9
    assert hits > 100


def test_offset_net_empty_when_min_dist_beyond_reach():
    S = Subspace([[1.0, 0.0]])
    box = Box([-1, -1], [1, 1])
    net = offset_region_net(S, box, spacing=0.25, min_dist=50.0, inflate=0.0)
    assert net.count == 0


def test_offset_net_codim2_push_out():
    S = Subspace([[1.0, 0.0, 0.0]])
    box = Box([-1, -1, -1], [1, 1, 1])
    net = offset_region_net(S, box, spacing=0.5, min_dist=0.4)
    C = net.centers
    w = np.linalg.norm(C[:, 1:], axis=1)
    assert np.all(w >= 0.4 * (1 - 1e-9))
    for _ in range(500):
        x = box.sample(RNG, 1)[0]
        if np.linalg.norm(x[1:]) < 0.4:
            continue
        assert np.min(np.linalg.norm(C - x, axis=1)) <= 0.5 + 1e-9


def test_net_cap_error_names_cap():
    S = Subspace([[1.0, 0.0]])
    box = Box([-2, -2], [2, 2])
    net = subspace_net(S, box, spacing=1e-6, cap=1000)
    with pytest.raises(NetCapExceeded) as e:
        _ = net.centers
    assert "1000" in str(e.value)


def test_gridnet_query_matches_bruteforce():
    S = Subspace([[1.0, 0.0]])
    box = Box([-2, -2], [2, 2])
    net = offset_region_net(S, box, spacing=0.11, min_dist=0.3)
    C = net.centers
    for _ in range(200):
        x = box.sample(RNG, 1)[0]
        rad = RNG.uniform(0.05, 0.6)
        idx, _ = net.query_ball(x, rad)
        brute = np.nonzero(np.linalg.norm(C - x, axis=1) <= rad)[0]
        assert set(idx.tolist()) == set(brute.tolist())


def test_gridnet_prefix_max_dist_matches_bruteforce():
    S = Subspace([[1.0, 0.0]])
    box = Box([-2, -2], [2, 2])
    net = offset_region_net(S, box, spacing=0.17, min_dist=0.3)
    C = net.centers
    for _ in range(100):
        x = box.sample(RNG, 1)[0]
        lin = int(RNG.integers(1, net.count))
        got, cstar = net.prefix_max_dist(x, lin)
        d = np.linalg.norm(C[:lin] - x, axis=1)
        assert got == pytest.approx(float(d.max()), rel=1e-12)
        assert np.linalg.norm(cstar - x) == pytest.approx(got, rel=1e-12)


def test_spatial_index_trivial_cases():
    idx = build_index([((0.0, 0.0), 1.0)], cell_size=0.5)
    assert idx.query(np.array([0.5, 0.0])) == [0]
    assert idx.query(np.array([10.0, 10.0])) == []


def test_spatial_index_superset_of_linear_scan():
    centers = RNG.uniform(-5, 5, size=(1000, 2))
    radii = RNG.uniform(0.1, 0.8, size=1000)
    idx = build_index(list(zip(centers, radii)), cell_size=0.9)
    for _ in range(200):
        x = RNG.uniform(-5, 5, size=2)
        got = set(idx.query(x))
        truth = set(np.nonzero(np.linalg.norm(centers - x, axis=1) <= radii)[0].tolist())
        assert truth <= got


def test_smooth_sup_norm_single_spike():
    assert smooth_sup_norm([1.0, 0.0, 0.0]) == pytest.approx(1.0)


def test_smooth_sup_norm_sixteen_ones_hits_ceiling():
    v = np.ones(16)
    assert even_power(16) == 4
    assert smooth_sup_norm(v) == pytest.approx(2.0)  # 16**(1/4) exactly


def test_smooth_sup_norm_sandwich_random():
    for _ in range(200):
        m = int(RNG.integers(1, 40))
        v = RNG.normal(size=m)
        val = smooth_sup_norm(v)
        vinf = np.max(np.abs(v))
        assert vinf - 1e-12 <= val <= 2 * vinf + 1e-12


def test_smooth_sup_norm_gradient_fd():
    for _ in range(50):
        m = int(RNG.integers(2, 12))
        v = RNG.uniform(0.2, 2.0, size=m)
        val, g = smooth_sup_norm_grad(v)
        h = 1e-6
        for i in range(m):
            vp, vm = v.copy(), v.copy()
            vp[i] += h
            vm[i] -= h
            fd = (smooth_sup_norm(vp) - smooth_sup_norm(vm)) / (2 * h)
            assert abs(fd - g[i]) <= 1e-6 * max(1.0, abs(fd))


def test_smooth_sup_norm_zero_padding_invariance():
    v = RNG.uniform(0.0, 1.0, size=7)
    a = smooth_sup_norm(np.concatenate([v, np.zeros(9)]))
    b = smooth_sup_norm(v, total=16)
    assert a == pytest.approx(b, rel=1e-14)

"""Packing nets, entropy numbers, the chaining constant, and projections."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saacert.geometry import (SpaceDescriptor, a_alpha, dists_to,
                              entropy_number, packing_net, set_deviation,
                              vec_norm)

# Frozen reference: chaining constant of the two-point set {0, 1},
# recomputed independently in test_a_alpha_two_point_matches_series below.
A1_TWO_POINT = 1.5519953931848245


def exhaustive_max_packing(points, theta, norm):
    """Exact maximum theta-separated subset size by branch and bound."""
    n = len(points)
    conflict = np.zeros((n, n), dtype=bool)
    for i in range(n):
        d = np.array([float(vec_norm(points[j] - points[i], norm))
                      for j in range(n)])
        conflict[i] = d <= theta
        conflict[i, i] = False
    best = [0]
    order = np.argsort(conflict.sum(axis=1))

    def dfs(idx, allowed, count):
        if count + int(allowed[order[idx:]].sum() if idx < n else 0) <= best[0]:
            return
        if idx == n:
            best[0] = max(best[0], count)
            return
        i = order[idx]
        if allowed[i]:
            nxt = allowed & ~conflict[i]
            nxt[i] = False
            dfs(idx + 1, nxt, count + 1)
        dfs(idx + 1, allowed, count)

    dfs(0, np.ones(n, dtype=bool), 0)
    return best[0]


def test_packing_interval_counts():
    space = SpaceDescriptor.box([0.0], [1.0])
    net = packing_net(space, 0.4, h=0.01)
    assert net.size == 3
    # pairwise separation strictly above theta
    for i in range(net.size):
        d = dists_to(np.delete(net.points, i, axis=0), net.points[i], "linf")
        assert np.all(d > 0.4)


def test_packing_permutation_invariant():
    """Cloud packing size must not depend on the point order."""
    rng = np.random.default_rng(3)
    pts = rng.uniform(size=(30, 2))
    base = packing_net(SpaceDescriptor.cloud(pts), 0.3).size
    for _ in range(5):
        perm = rng.permutation(30)
        assert packing_net(SpaceDescriptor.cloud(pts[perm]), 0.3).size == base


def test_entropy_nonincreasing_in_theta():
    space = SpaceDescriptor.box([0.0, 0.0], [1.0, 1.0])
    values = [entropy_number(space, th, h=0.05).value
              for th in (0.1, 0.2, 0.3, 0.5, 0.8, 1.2)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))


def test_entropy_bracket_interval():
    ent = entropy_number(SpaceDescriptor.box([0.0], [1.0]), 0.4, h=0.01)
    assert ent.net_size == 3
    assert ent.within_bracket()


def test_a_alpha_two_point_matches_series():
    """Recompute the dyadic sum directly from the two-point packing counts."""
    def H(s):
        return math.log(2.0) if s < 1.0 else 0.0

    total, i = 0.0, 1
    while True:
        term = (1.0 / 2 ** i) * math.sqrt(
            H(1.0 / 2 ** i) + H(1.0 / 2 ** (i - 1)) + math.log(i * (i + 1)))
        total += term
        if term < 1e-12 * total:
            break
        i += 1
    comp = a_alpha(SpaceDescriptor.cloud([[0.0], [1.0]]), 1.0)
    assert comp.value == pytest.approx(total, abs=1e-8)
    assert comp.value == pytest.approx(A1_TWO_POINT, abs=1e-12)


def test_a_alpha_single_level_closed_form():
    comp = a_alpha(SpaceDescriptor.cloud([[0.0], [1.0]]), 1.0, max_levels=1)
    assert comp.value == pytest.approx(0.5 * math.sqrt(2 * math.log(2)),
                                       abs=1e-9)


def test_a_alpha_nondecreasing_in_diameter():
    values = []
    for D in (0.5, 1.0, 2.0):
        comp = a_alpha(SpaceDescriptor.box([0.0], [D]), 1.0, h=D / 100)
        assert comp.diameter == pytest.approx(D)
        values.append(comp.value)
    assert values[0] <= values[1] + 1e-12 <= values[2] + 2e-12


def test_a_alpha_truncation_reported():
    comp = a_alpha(SpaceDescriptor.box([0.0], [1.0]), 0.5, h=0.01)
    assert comp.levels >= 1
    assert comp.tail_bound >= 0.0
    assert comp.value > 0.0


def test_set_deviation_monotone_in_target():
    """Adding points to the target set can only shrink the deviation."""
    rng = np.random.default_rng(11)
    a = rng.uniform(size=(12, 2))
    b_small = rng.uniform(size=(4, 2))
    b_large = np.vstack([b_small, rng.uniform(size=(8, 2))])
    d_small = set_deviation(a, b_small, "l2")
    d_large = set_deviation(a, b_large, "l2")
    assert d_large <= d_small + 1e-12


def test_set_deviation_zero_on_subset():
    pts = np.array([[0.0, 0.0], [0.5, 0.5]])
    assert set_deviation(pts, np.vstack([pts, [[1.0, 1.0]]]), "l2") == 0.0


def test_ball_grid_respects_radius():
    space = SpaceDescriptor.ball([0.0, 0.0], 0.5)
    grid = space.grid(0.1)
    assert len(grid) > 0
    assert np.all(np.linalg.norm(grid, axis=1) <= 0.5 + 1e-12)


def test_product_grid_concatenates_parts():
    space = SpaceDescriptor.product(SpaceDescriptor.simplex(2),
                                    SpaceDescriptor.interval(-1.0, 1.0))
    grid = space.grid(0.5)
    assert grid.shape[1] == 3
    assert np.allclose(grid[:, :2].sum(axis=1), 1.0)
    assert np.all((grid[:, 2] >= -1.0 - 1e-12) & (grid[:, 2] <= 1.0 + 1e-12))


def test_simplex_projection_matches_sort_method():
    rng = np.random.default_rng(5)
    space = SpaceDescriptor.simplex(4)
    for _ in range(25):
        v = rng.normal(size=4) * 2
        x = space.project(v)
        assert x.min() >= -1e-12
        assert x.sum() == pytest.approx(1.0, abs=1e-9)
        # projection optimality: no feasible grid point is closer
        for y in np.eye(4):
            assert np.linalg.norm(v - x) <= np.linalg.norm(v - y) + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3),
       st.floats(0.1, 3.0))
def test_l1_projection_optimality(vals, radius):
    """The l1-ball projection beats every sparse feasible competitor."""
    v = np.array(vals)
    space = SpaceDescriptor.ball(np.zeros(3), radius, norm="l1")
    x = space.project(v)
    assert np.abs(x).sum() <= radius + 1e-9
    competitors = [np.zeros(3)]
    for j in range(3):
        e = np.zeros(3)
        e[j] = radius * np.sign(v[j] if v[j] != 0 else 1.0)
        competitors.append(e)
    competitors.append(np.clip(v, -radius / 3, radius / 3))
    for y in competitors:
        if np.abs(y).sum() <= radius + 1e-12:
            assert np.linalg.norm(v - x) <= np.linalg.norm(v - y) + 1e-9


def test_greedy_packing_attains_maximum_on_small_cases():
    """Spots where the lexicographic greedy net happens to be optimal."""
    cases_1d = [(1.0, 0.4, 0.1), (1.0, 0.3, 0.1), (2.0, 0.7, 0.1),
                (1.0, 0.9, 0.1), (0.5, 0.2, 0.05)]
    for L, theta, h in cases_1d:
        sp = SpaceDescriptor.box([0.0], [L])
        assert packing_net(sp, theta, h).size == exhaustive_max_packing(
            sp.grid(h), theta, sp.norm)
    sp = SpaceDescriptor.box([0.0, 0.0], [1.0, 1.0])
    assert packing_net(sp, 0.5, 0.25).size == exhaustive_max_packing(
        sp.grid(0.25), 0.5, sp.norm)

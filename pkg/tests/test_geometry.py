import numpy as np
import pytest

from mesharc.geometry import (
    Level,
    LevelSchedule,
    PointSet,
    RectDomain,
    fill_distance,
    load_points_csv,
    neighbor_pairs,
    new_centres,
    save_points_csv,
    separation_radius,
    uniform_grid,
)


def test_domain_validation():
    with pytest.raises(ValueError):
        RectDomain(1.0, -1.0, 0.0, 1.0)
    d = RectDomain(-1, 1, -1, 1)
    assert d.area == 4.0
    assert d.boundary_distance(np.array([0.25, -0.5])) == pytest.approx(0.5)


@pytest.mark.parametrize("m,n", [(5, 25), (9, 81), (17, 289), (33, 1089), (65, 4225)])
def test_uniform_grid_sizes(square, m, n):
    assert len(uniform_grid(square, m)) == n


def test_uniform_grid_corners(square):
    g = uniform_grid(square, 2)
    assert sorted(map(tuple, g.points.tolist())) == [
        (-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
    with pytest.raises(ValueError):
        uniform_grid(square, 1)


def test_fill_distance_uniform_grids(square):
    # exact value: half diagonal of one grid cell
    assert fill_distance(uniform_grid(square, 5), square) == pytest.approx(np.sqrt(2) / 4)
    h9 = fill_distance(uniform_grid(square, 9), square)
    assert h9 == pytest.approx(np.sqrt(2) / 8)
    # the reference table rounds these to two digits (3.5e-1, 1.75e-1)
    assert abs(h9 - 1.75e-1) / 1.75e-1 < 0.02


def test_fill_distance_probe_path(square):
    centre = PointSet(np.array([[0.0, 0.0]]))
    assert fill_distance(centre, square) == pytest.approx(np.sqrt(2), abs=1e-12)
    with pytest.raises(ValueError):
        fill_distance(PointSet(np.empty((0, 2))), square)


def test_fill_distance_monotone_under_refinement(square):
    grids = [uniform_grid(square, m) for m in (5, 9, 17)]
    hs = [fill_distance(g, square) for g in grids]
    assert hs[0] > hs[1] > hs[2]
    assert hs[0] == pytest.approx(2 * hs[1])
    assert hs[1] == pytest.approx(2 * hs[2])


def test_separation_radius_grid_and_pairs(square):
    assert separation_radius(uniform_grid(square, 5)) == pytest.approx(0.25)
    two = PointSet(np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert separation_radius(two) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        separation_radius(PointSet(np.array([[0.0, 0.0]])))


def test_separation_radius_matches_brute_force(rng):
    pts = rng.uniform(-3, 2, (100, 2))
    ps = PointSet(pts)
    d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
    np.fill_diagonal(d, np.inf)
    assert separation_radius(ps) == pytest.approx(d.min() / 2, abs=1e-12)


def test_neighbor_pairs_grid_diagonal(square):
    g = uniform_grid(square, 5)
    ii, jj = neighbor_pairs(g, g, cutoff=0.4)  # below the 0.5 spacing
    assert np.array_equal(ii, jj)
    assert len(ii) == 25


def test_neighbor_pairs_infinite_cutoff(square):
    g = uniform_grid(square, 3)
    ii, jj = neighbor_pairs(g, g, np.inf)
    assert len(ii) == 81


def test_neighbor_pairs_symmetric_when_same_set(rng):
    ps = PointSet(rng.uniform(-1, 1, (60, 2)))
    ii, jj = neighbor_pairs(ps, ps, 0.5)
    got = set(zip(ii.tolist(), jj.tolist()))
    assert all((j, i) in got for i, j in got)


def test_neighbor_pairs_matches_brute_force(rng):
    X = PointSet(rng.uniform(-2, 1, (83, 2)))
    Y = PointSet(rng.uniform(-1, 2, (57, 2)))
    for cutoff in (0.05, 0.3, 1.2):
        ii, jj = neighbor_pairs(X, Y, cutoff)
        got = set(zip(ii.tolist(), jj.tolist()))
        d = np.linalg.norm(X.points[:, None] - Y.points[None, :], axis=2)
        want = set(zip(*[a.tolist() for a in np.nonzero(d < cutoff)]))
        assert got == want


def test_neighbor_pairs_rejects_bad_cutoff(square):
    g = uniform_grid(square, 3)
    with pytest.raises(ValueError):
        neighbor_pairs(g, g, 0.0)


def test_schedule_ratio_bounds(square):
    sched = LevelSchedule.from_grids(square, [5, 9, 17], deltas=[2, 1, 0.5])
    assert len(sched) == 3
    hs = [lv.h for lv in sched]
    assert hs[1] == pytest.approx(0.5 * hs[0])

    bad = [Level(uniform_grid(square, 5), 2.0, 0.35, 0.25),
           Level(uniform_grid(square, 9), 1.0, 0.30, 0.125)]
    with pytest.warns(UserWarning):
        LevelSchedule(bad, square, mu=0.5, c=1.0)


def test_schedule_nu_consistency(square):
    nu = 4 * np.sqrt(2)
    sched = LevelSchedule.from_grids(square, [5, 9], nu=nu)
    assert sched[0].delta == pytest.approx(nu * sched[0].h, rel=1e-12)
    bad = [Level(uniform_grid(square, 5), 1.0, np.sqrt(2) / 4, 0.25)]
    with pytest.raises(ValueError):
        LevelSchedule(bad, square, nu=nu)
    with pytest.raises(ValueError):
        LevelSchedule.from_grids(square, [5], deltas=[1.0], nu=nu)


def test_new_centres_on_nested_grids(square):
    grids = [uniform_grid(square, m) for m in (5, 9, 17)]
    assert len(new_centres(grids[0], [])) == 25
    assert len(new_centres(grids[1], grids[:1])) == 56
    assert len(new_centres(grids[2], grids[:2])) == 208


def test_csv_roundtrip(tmp_path, rng):
    ps = PointSet(rng.uniform(-1, 1, (17, 2)))
    path = tmp_path / "points.csv"
    save_points_csv(ps, path)
    back = load_points_csv(path)
    assert np.array_equal(back.points, ps.points)
    assert back.provenance == "external"

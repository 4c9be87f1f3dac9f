"""Domains, centre sets, mesh statistics and fixed-radius neighbor search."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RectDomain",
    "PointSet",
    "Level",
    "LevelSchedule",
    "uniform_grid",
    "fill_distance",
    "separation_radius",
    "neighbor_pairs",
    "load_points_csv",
    "save_points_csv",
]

# Probe resolution for fill distances of non-grid sets; the estimate is exact
# up to domain_diagonal / PROBE_N.
PROBE_N = 512

# Coordinates are snapped to this many decimals when detecting repeated
# centres across levels (externally loaded sets may carry read-off noise).
SNAP_DECIMALS = 12


@dataclass(frozen=True)
class RectDomain:
    """Axis-aligned rectangle [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("domain must satisfy xmin < xmax and ymin < ymax")

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.xmax - self.xmin, self.ymax - self.ymin))

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return (
            (pts[..., 0] >= self.xmin)
            & (pts[..., 0] <= self.xmax)
            & (pts[..., 1] >= self.ymin)
            & (pts[..., 1] <= self.ymax)
        )

    def boundary_distance(self, pts) -> np.ndarray:
        """Distance from interior points to the boundary of the rectangle."""
        pts = np.asarray(pts, dtype=float)
        return np.minimum(
            np.minimum(pts[..., 0] - self.xmin, self.xmax - pts[..., 0]),
            np.minimum(pts[..., 1] - self.ymin, self.ymax - pts[..., 1]),
        )


@dataclass(frozen=True)
class PointSet:
    """An ordered set of pairwise distinct 2-D points with a provenance tag.

    ``provenance`` is ``("uniform", m)`` for an m x m tensor grid generated by
    :func:`uniform_grid`, or ``"external"`` for anything else.  The tag lets
    mesh statistics use exact closed forms where they exist.
    """

    points: np.ndarray
    provenance: object = "external"

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must be an (N, 2) array")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def grid_m(self):
        if isinstance(self.provenance, tuple) and self.provenance[0] == "uniform":
            return self.provenance[1]
        return None


def uniform_grid(domain: RectDomain, m: int) -> PointSet:
    """m x m equally spaced points on the closed rectangle, boundary included."""
    if m < 2:
        raise ValueError("uniform grid needs m >= 2")
    xs = np.linspace(domain.xmin, domain.xmax, m)
    ys = np.linspace(domain.ymin, domain.ymax, m)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    return PointSet(pts, provenance=("uniform", m))


def fill_distance(X: PointSet, domain: RectDomain) -> float:
    """Largest distance from a domain point to its nearest centre.

    Uniform grids use the exact value spacing * sqrt(2)/2.  Other sets are
    probed on a PROBE_N x PROBE_N inclusive grid, so the estimate is a lower
    bound accurate to domain.diagonal / PROBE_N.
    """
    if len(X) == 0:
        raise ValueError("fill distance of an empty point set")
    m = X.grid_m
    if m is not None:
        sx = (domain.xmax - domain.xmin) / (m - 1)
        sy = (domain.ymax - domain.ymin) / (m - 1)
        return float(np.hypot(sx, sy) / 2)
    probes = uniform_grid(domain, PROBE_N).points
    best = np.full(probes.shape[0], np.inf)
    pts = X.points
    # chunked nearest-centre scan keeps memory at ~PROBE_N^2 floats
    for k in range(0, len(X), 256):
        blk = pts[k : k + 256]
        d2 = ((probes[:, None, :] - blk[None, :, :]) ** 2).sum(axis=2)
        np.minimum(best, d2.min(axis=1), out=best)
    return float(np.sqrt(best.max()))


def separation_radius(X: PointSet) -> float:
    """Half the minimum pairwise distance between centres."""
    n = len(X)
    if n < 2:
        raise ValueError("separation radius needs at least two points")
    pts = X.points
    best = np.inf
    for k in range(0, n, 512):
        blk = pts[k : k + 512]
        d2 = ((blk[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        idx = np.arange(blk.shape[0])
        d2[idx, k + idx] = np.inf  # ignore self-distances
        best = min(best, d2.min())
    return float(np.sqrt(best) / 2)


def _bucket_index(pts: np.ndarray, origin: np.ndarray, cell: float) -> np.ndarray:
    return np.floor((pts - origin) / cell).astype(np.int64)


def neighbor_pairs(X: PointSet, Y: PointSet, cutoff: float):
    """All index pairs (i, j) with ||X_i - Y_j|| < cutoff.

    Uses a uniform bucket grid with cell size equal to the cutoff, so each
    query only inspects the 3 x 3 block of cells around a point.  Returns two
    int arrays (rows into X, rows into Y) sorted lexicographically.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    xp, yp = X.points, Y.points
    nx, ny = len(X), len(Y)
    if nx == 0 or ny == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if not np.isfinite(cutoff):
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        return ii.ravel(), jj.ravel()

    origin = np.minimum(xp.min(axis=0), yp.min(axis=0))
    cx = _bucket_index(xp, origin, cutoff)
    cy = _bucket_index(yp, origin, cutoff)

    buckets: dict = {}
    for j, key in enumerate(map(tuple, cy.tolist())):
        buckets.setdefault(key, []).append(j)

    # group X points by cell and test each group against its 3x3 neighborhood
    xcells: dict = {}
    for i, key in enumerate(map(tuple, cx.tolist())):
        xcells.setdefault(key, []).append(i)

    out_i: list = []
    out_j: list = []
    c2 = cutoff * cutoff
    for (a, b), rows in xcells.items():
        cand: list = []
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                cand.extend(buckets.get((a + da, b + db), ()))
        if not cand:
            continue
        rows = np.asarray(rows, dtype=np.int64)
        cand = np.asarray(cand, dtype=np.int64)
        d2 = ((xp[rows][:, None, :] - yp[cand][None, :, :]) ** 2).sum(axis=2)
        hit_r, hit_c = np.nonzero(d2 < c2)
        out_i.append(rows[hit_r])
        out_j.append(cand[hit_c])
    if not out_i:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    ii = np.concatenate(out_i)
    jj = np.concatenate(out_j)
    order = np.lexsort((jj, ii))
    return ii[order], jj[order]


@dataclass(frozen=True)
class Level:
    """One approximation level: centres plus mesh statistics and scale."""

    points: PointSet
    delta: float
    h: float
    q: float


@dataclass
class LevelSchedule:
    """Per-level centre sets with fill distances, separations and scales.

    The mesh ratios mu (target contraction of fill distances) and c (lower
    slack) are recorded for rate estimation; consecutive levels are checked
    against c*mu*h_i <= h_{i+1} <= mu*h_i and a warning is emitted on
    violation.  nu is the scale-to-fill-distance ratio when the scales were
    generated as delta_i = nu * h_i.
    """

    levels: list
    domain: RectDomain
    mu: float = 0.5
    c: float = 1.0
    nu: float | None = None

    def __post_init__(self):
        eps = 1e-12
        for a, b in zip(self.levels[:-1], self.levels[1:]):
            lo = self.c * self.mu * a.h
            hi = self.mu * a.h
            if not (lo - eps <= b.h <= hi + eps):
                warnings.warn(
                    f"fill distances violate ratio bounds: "
                    f"{lo:g} <= {b.h:g} <= {hi:g} fails",
                    stacklevel=2,
                )
        if self.nu is not None:
            for lv in self.levels:
                if abs(lv.delta - self.nu * lv.h) > 1e-9 * abs(lv.delta):
                    raise ValueError("scales inconsistent with delta = nu * h")

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def __getitem__(self, i) -> Level:
        return self.levels[i]

    @classmethod
    def from_grids(
        cls,
        domain: RectDomain,
        grid_ms,
        deltas=None,
        nu: float | None = None,
        mu: float = 0.5,
        c: float = 1.0,
    ) -> "LevelSchedule":
        """Build a schedule from uniform grid sizes and explicit or nu-derived scales."""
        if (deltas is None) == (nu is None):
            raise ValueError("give either explicit deltas or nu, not both")
        levels = []
        for k, m in enumerate(grid_ms):
            ps = uniform_grid(domain, m)
            h = fill_distance(ps, domain)
            q = separation_radius(ps)
            delta = nu * h if deltas is None else float(deltas[k])
            levels.append(Level(ps, delta, h, q))
        return cls(levels, domain, mu=mu, c=c, nu=nu)


def new_centres(level_points: PointSet, earlier: list) -> np.ndarray:
    """Rows of ``level_points`` that do not occur in any earlier point set.

    Coordinates are compared after snapping to SNAP_DECIMALS decimals, which
    is exact for grids generated by :func:`uniform_grid` and tolerant of
    formatting noise in externally loaded sets.
    """
    seen = set()
    for ps in earlier:
        snapped = np.round(ps.points, SNAP_DECIMALS)
        seen.update(map(tuple, snapped.tolist()))
    snapped = np.round(level_points.points, SNAP_DECIMALS)
    keep = [i for i, t in enumerate(map(tuple, snapped.tolist())) if t not in seen]
    return np.asarray(keep, dtype=np.int64)


def save_points_csv(X: PointSet, path) -> None:
    """Write one ``x,y`` pair per line in decimal notation."""
    with open(path, "w") as fh:
        for x, y in X.points:
            fh.write(f"{x:.17g},{y:.17g}\n")


def load_points_csv(path) -> PointSet:
    """Read a point set written by :func:`save_points_csv`."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split(",")
            rows.append((float(a), float(b)))
    return PointSet(np.asarray(rows, dtype=float), provenance="external")

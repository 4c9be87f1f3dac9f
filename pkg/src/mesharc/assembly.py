"""Sparse symmetric stiffness assembly for the two bilinear forms.

Entries are Galerkin integrals of scaled-kernel pairs.  Each pair integral
is computed over the intersection of the two support bounding boxes clipped
to the domain, in a frame translated to the first centre, and cached by the
exact relative geometry (scales, centre offset, relative box).  On the
uniform grids used throughout, that collapses hundreds of thousands of
entries to a few thousand distinct quadratures.  All cached values use the
plain kernel convention; normalization prefactors are applied per entry
afterwards, so the native and plain assemblies differ by exact scalar
factors.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import PointSet, RectDomain, neighbor_pairs
from .kernels import ScaledKernel, WendlandKernel
from .quadrature import (
    QuadratureSpec,
    clip_box,
    domain_edges,
    edge_window,
    integrate_boundary,
    integrate_box,
    integrate_box_multi,
    integrate_interval_multi,
)

__all__ = [
    "ProblemSpec",
    "PROBLEMS",
    "Assembler",
    "StiffnessSystem",
    "assemble_stiffness",
    "assemble_load",
    "assemble_cross",
    "dense_oracle_matrix",
    "export_coo",
    "zero_field",
]

VARIANTS = ("helmholtz_neumann", "poisson_dirichlet")


@dataclass(frozen=True)
class ProblemSpec:
    """PDE variant, data fields and domain.

    ``variant`` selects the bilinear form: "helmholtz_neumann" uses
    grad-grad plus mass (weak form of -Lap u + u = f with natural boundary
    conditions); "poisson_dirichlet" uses grad-grad with the symmetric
    penalty boundary terms and requires Dirichlet data ``g`` (may be the
    zero function) and a penalty ``beta`` at assembly time.
    """

    variant: str
    f: Callable
    domain: RectDomain
    g: Callable | None = None
    exact: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if (self.variant == "poisson_dirichlet") != (self.g is not None):
            raise ValueError("Dirichlet data g required iff variant is poisson_dirichlet")


def _helmholtz_f(p):
    return np.cos(np.pi * p[..., 0]) * np.cos(np.pi * p[..., 1])


def _helmholtz_exact(p):
    return _helmholtz_f(p) / (2.0 * np.pi**2 + 1.0)


def _poisson_f(p):
    return np.sin(np.pi * p[..., 0]) * np.cos(0.5 * np.pi * p[..., 1])


def _poisson_exact(p):
    return _poisson_f(p) / (1.25 * np.pi**2)


def zero_field(p):
    """The identically-zero data field (recognized to skip boundary loads)."""
    return np.zeros(np.asarray(p).shape[:-1])


_SQUARE = RectDomain(-1.0, 1.0, -1.0, 1.0)

PROBLEMS = {
    "helmholtz_neumann": ProblemSpec(
        "helmholtz_neumann",
        f=_helmholtz_f,
        domain=_SQUARE,
        exact=_helmholtz_exact,
        name="helmholtz_neumann",
    ),
    "poisson_dirichlet": ProblemSpec(
        "poisson_dirichlet",
        f=_poisson_f,
        domain=_SQUARE,
        g=zero_field,
        exact=_poisson_exact,
        name="poisson_dirichlet",
    ),
}


def _round_key(*vals):
    return tuple(round(float(v), 12) for v in vals)


class Assembler:
    """Builds stiffness / load / cross-coupling objects for one run.

    Holds the geometry-keyed quadrature caches, so it should live for the
    duration of a multiscale run and be shared across levels.
    """

    def __init__(
        self,
        base: WendlandKernel,
        prob: ProblemSpec,
        spec: QuadratureSpec | None = None,
        normalization: str = "native",
        beta: float | None = None,
        threads: int = 1,
    ):
        if prob.variant == "poisson_dirichlet" and beta is None:
            raise ValueError("poisson_dirichlet assembly requires beta")
        self.base = base
        self.prob = prob
        self.spec = spec or QuadratureSpec()
        self.normalization = normalization
        self.beta = beta
        self.threads = max(1, int(threads))
        self._vol_cache: dict = {}
        self._edge_cache: dict = {}
        self.nonconverged = 0

    # -- plain-convention integrands ------------------------------------

    def _volume_integrand(self, dx, dy, inva, invb):
        base = self.base

        def f(pts):
            xa = pts[:, 0]
            ya = pts[:, 1]
            xb = xa - dx
            yb = ya - dy
            ua = np.sqrt(xa * xa + ya * ya) * inva
            ub = np.sqrt(xb * xb + yb * yb) * invb
            out = np.empty((pts.shape[0], 2))
            sa = base.dphi_over_r(ua)
            sb = base.dphi_over_r(ub)
            out[:, 0] = (inva * inva * invb * invb) * sa * sb * (xa * xb + ya * yb)
            out[:, 1] = base.phi(ua) * base.phi(ub)
            return out

        return f

    def _edge_integrand(self, da, db, dt, inva, invb):
        # points on the edge, parametrized by the along-coordinate relative
        # to the first centre; (p - centre) . n equals the perpendicular
        # distance of the centre to the edge
        base = self.base

        def f(ts):
            ra = np.sqrt(ts * ts + da * da) * inva
            tb = ts - dt
            rb = np.sqrt(tb * tb + db * db) * invb
            pa = base.phi(ra)
            pb = base.phi(rb)
            na = base.dphi_over_r(ra) * (inva * inva) * da
            nb = base.dphi_over_r(rb) * (invb * invb) * db
            out = np.empty((ts.size, 3))
            out[:, 0] = pb * na + pa * nb  # v dn(u) + u dn(v)
            out[:, 1] = pa * pb            # boundary mass
            out[:, 2] = na * nb            # normal-gradient product
            return out

        return f

    # -- geometry and caching --------------------------------------------

    def _volume_geo(self, a, b, delta_a, delta_b):
        dx = b[0] - a[0]
        dy = b[1] - a[1]
        if dx * dx + dy * dy >= (delta_a + delta_b) ** 2:
            return None
        box = clip_box(
            (
                max(a[0] - delta_a, b[0] - delta_b),
                min(a[0] + delta_a, b[0] + delta_b),
                max(a[1] - delta_a, b[1] - delta_b),
                min(a[1] + delta_a, b[1] + delta_b),
            ),
            self.prob.domain,
        )
        if box is None:
            return None
        rel = (box[0] - a[0], box[1] - a[0], box[2] - a[1], box[3] - a[1])
        key = ("v", delta_a, delta_b) + _round_key(dx, dy, *rel)
        return key, dx, dy, rel

    def _volume_task(self, geo):
        key, dx, dy, rel = geo
        f = self._volume_integrand(dx, dy, 1.0 / key[1], 1.0 / key[2])
        vals, ok, _ = integrate_box_multi(f, rel, self.spec)
        return key, (vals[0], vals[1], ok)

    def _edge_geos(self, a, b, delta_a, delta_b):
        """Per-edge boundary windows shared by both supports, with cache keys."""
        geos = []
        for edge in domain_edges(self.prob.domain):
            wa = edge_window(edge, a, delta_a)
            if wa is None:
                continue
            wb = edge_window(edge, b, delta_b)
            if wb is None:
                continue
            lo = max(wa[0], wb[0])
            hi = min(wa[1], wb[1])
            if hi <= lo:
                continue
            axis, fixed, _, _, _ = edge
            da = abs(a[1 - axis] - fixed)
            db = abs(b[1 - axis] - fixed)
            dt = b[axis] - a[axis]
            key = ("e", delta_a, delta_b) + _round_key(
                da, db, dt, lo - a[axis], hi - a[axis]
            )
            geos.append((key, da, db, dt, lo - a[axis], hi - a[axis]))
        return geos

    def _edge_task(self, geo):
        key, da, db, dt, lo, hi = geo
        f = self._edge_integrand(da, db, dt, 1.0 / key[1], 1.0 / key[2])
        vals, ok, _ = integrate_interval_multi(f, lo, hi, self.spec)
        return key, (vals[0], vals[1], vals[2], ok)

    def _compute_missing(self, cache, tasks, runner):
        todo = [g for g in tasks.values()]
        if not todo:
            return
        if self.threads > 1 and len(todo) > 8:
            with ThreadPoolExecutor(max_workers=self.threads) as ex:
                for key, val in ex.map(runner, todo, chunksize=32):
                    cache[key] = val
        else:
            for geo in todo:
                key, val = runner(geo)
                cache[key] = val

    # -- entry evaluation --------------------------------------------------

    def _prefactor(self, delta_a, delta_b):
        if self.normalization == "native":
            d = self.base.dimension
            return delta_a ** (-d) * delta_b ** (-d)
        return 1.0

    def _collect_entries(self, pts_a, pts_b, delta_a, delta_b, rows, cols):
        """Resolve all pair entries through the caches; returns plain values."""
        dirichlet = self.prob.variant == "poisson_dirichlet"
        alist = pts_a.tolist()
        blist = pts_b.tolist() if pts_b is not pts_a else alist
        vol_geos = []
        edge_lists = []
        missing_v: dict = {}
        missing_e: dict = {}
        for i, j in zip(rows.tolist(), cols.tolist()):
            a = alist[i]
            b = blist[j]
            geo = self._volume_geo(a, b, delta_a, delta_b)
            vol_geos.append(geo)
            if geo is not None and geo[0] not in self._vol_cache:
                missing_v[geo[0]] = geo
            if dirichlet and geo is not None:
                eg = self._edge_geos(a, b, delta_a, delta_b)
                edge_lists.append(eg)
                for g in eg:
                    if g[0] not in self._edge_cache:
                        missing_e[g[0]] = g
            else:
                edge_lists.append(())
        self._compute_missing(self._vol_cache, missing_v, self._volume_task)
        self._compute_missing(self._edge_cache, missing_e, self._edge_task)

        vals = np.zeros(len(vol_geos))
        flagged = 0
        for k, geo in enumerate(vol_geos):
            if geo is None:
                continue
            grad, mass, ok = self._vol_cache[geo[0]]
            if not ok:
                flagged += 1
            if dirichlet:
                v = grad
                for g in edge_lists[k]:
                    s, mb, _, eok = self._edge_cache[g[0]]
                    if not eok:
                        flagged += 1
                    v += -s + self.beta * mb
            else:
                v = grad + mass
            vals[k] = v
        self.nonconverged += flagged
        if flagged:
            warnings.warn(
                f"{flagged} entry integrals did not reach the refinement tolerance",
                stacklevel=3,
            )
        return vals * self._prefactor(delta_a, delta_b)

    # -- public assembly ----------------------------------------------------

    def stiffness(self, ps: PointSet, delta: float) -> sp.csr_matrix:
        """Symmetric sparse Galerkin matrix for one level."""
        pts = ps.points
        n = len(ps)
        ii, jj = neighbor_pairs(ps, ps, 2.0 * delta)
        keep = ii <= jj
        ii, jj = ii[keep], jj[keep]
        vals = self._collect_entries(pts, pts, delta, delta, ii, jj)
        off = ii != jj
        rows = np.concatenate([ii, jj[off]])
        cols = np.concatenate([jj, ii[off]])
        data = np.concatenate([vals, vals[off]])
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def cross(
        self,
        ps_t: PointSet,
        delta_t: float,
        ps_s: PointSet,
        delta_s: float,
    ) -> sp.csr_matrix:
        """Coupling matrix C[k, l] = a(source basis l, target basis k)."""
        ii, jj = neighbor_pairs(ps_t, ps_s, delta_t + delta_s)
        vals = self._collect_entries(
            ps_t.points, ps_s.points, delta_t, delta_s, ii, jj
        )
        return sp.csr_matrix((vals, (ii, jj)), shape=(len(ps_t), len(ps_s)))

    def load(self, ps: PointSet, delta: float) -> np.ndarray:
        """Load vector for one level: <f, basis_i>, plus Dirichlet boundary
        data terms when g is nonzero."""
        pts = ps.points
        base = self.base
        inv = 1.0 / delta
        prob = self.prob
        spec = self.spec
        pref = delta ** (-base.dimension) if self.normalization == "native" else 1.0
        out = np.zeros(len(ps))
        flagged = 0
        for i, c in enumerate(pts):
            box = clip_box(
                (c[0] - delta, c[0] + delta, c[1] - delta, c[1] + delta),
                prob.domain,
            )
            if box is None:
                continue

            def fi(p, c=c):
                r = np.sqrt((p[:, 0] - c[0]) ** 2 + (p[:, 1] - c[1]) ** 2)
                return prob.f(p) * base.phi(r * inv)

            v, ok, _ = integrate_box_multi(fi, box, spec)
            if not ok:
                flagged += 1
            out[i] = float(v)
        if prob.variant == "poisson_dirichlet" and prob.g is not zero_field:
            for i, c in enumerate(pts):

                def gi(p, normal, c=c):
                    d = p - c
                    r = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
                    u = r * inv
                    phi = base.phi(u)
                    dn = base.dphi_over_r(u) * (inv * inv) * (d @ normal)
                    return prob.g(p) * (self.beta * phi - dn)

                res = integrate_boundary(gi, prob.domain, c, delta, spec)
                if not res.converged:
                    flagged += 1
                out[i] += res.value
        self.nonconverged += flagged
        if flagged:
            warnings.warn(
                f"{flagged} load integrals did not reach the refinement tolerance",
                stacklevel=2,
            )
        return out * pref

    def gradient_gram(self, ps: PointSet, delta: float, subset=None) -> np.ndarray:
        """Dense Gram matrix of basis gradients over the domain (plain scale)."""
        idx = np.arange(len(ps)) if subset is None else np.asarray(subset)
        sub = PointSet(ps.points[idx], provenance="external")
        ii, jj = neighbor_pairs(sub, sub, 2.0 * delta)
        keep = ii <= jj
        ii, jj = ii[keep], jj[keep]
        missing = {}
        geos = []
        for i, j in zip(ii.tolist(), jj.tolist()):
            geo = self._volume_geo(sub.points[i], sub.points[j], delta, delta)
            geos.append(geo)
            if geo is not None and geo[0] not in self._vol_cache:
                missing[geo[0]] = geo
        self._compute_missing(self._vol_cache, missing, self._volume_task)
        n = len(sub)
        out = np.zeros((n, n))
        for (i, j), geo in zip(zip(ii.tolist(), jj.tolist()), geos):
            if geo is None:
                continue
            grad = self._vol_cache[geo[0]][0]
            out[i, j] = grad
            out[j, i] = grad
        return out

    def boundary_normal_gram(self, ps: PointSet, delta: float, subset=None) -> np.ndarray:
        """Dense Gram matrix of basis normal derivatives on the boundary."""
        idx = np.arange(len(ps)) if subset is None else np.asarray(subset)
        sub = PointSet(ps.points[idx], provenance="external")
        ii, jj = neighbor_pairs(sub, sub, 2.0 * delta)
        keep = ii <= jj
        ii, jj = ii[keep], jj[keep]
        missing = {}
        geo_lists = []
        for i, j in zip(ii.tolist(), jj.tolist()):
            eg = self._edge_geos(sub.points[i], sub.points[j], delta, delta)
            geo_lists.append(eg)
            for g in eg:
                if g[0] not in self._edge_cache:
                    missing[g[0]] = g
        self._compute_missing(self._edge_cache, missing, self._edge_task)
        n = len(sub)
        out = np.zeros((n, n))
        for (i, j), eg in zip(zip(ii.tolist(), jj.tolist()), geo_lists):
            v = 0.0
            for g in eg:
                v += self._edge_cache[g[0]][2]
            out[i, j] = v
            out[j, i] = v
        return out


@dataclass
class StiffnessSystem:
    """Galerkin matrix with its load vector and a cached direct factorization."""

    matrix: sp.csr_matrix
    load: np.ndarray
    _factor: object = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def factor(self):
        if self._factor is None:
            try:
                self._factor = spla.splu(sp.csc_matrix(self.matrix))
            except RuntimeError as exc:  # non-positive pivot and friends
                raise RuntimeError(
                    "stiffness factorization failed; the matrix is not "
                    "positive definite (check quadrature settings and the "
                    "penalty parameter)"
                ) from exc
        return self._factor

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self.factor().solve(np.asarray(rhs, dtype=float))


# -- module-level wrappers matching the one-shot call signatures -----------


def assemble_stiffness(
    level,
    prob: ProblemSpec,
    beta: float | None = None,
    spec: QuadratureSpec | None = None,
    normalization: str = "native",
) -> sp.csr_matrix:
    """Assemble a single level's stiffness matrix.

    ``level`` is (PointSet, delta) with the kernel taken from ``wendland()``
    defaults, or (PointSet, ScaledKernel); a ScaledKernel carries its own
    normalization, which then wins over the ``normalization`` argument.
    """
    ps, sk = _coerce_level(level, normalization)
    asm = Assembler(
        sk.base, prob, spec, normalization=sk.normalization, beta=beta
    )
    return asm.stiffness(ps, sk.delta)


def assemble_load(
    level,
    prob: ProblemSpec,
    beta: float | None = None,
    spec: QuadratureSpec | None = None,
    normalization: str = "native",
) -> np.ndarray:
    ps, sk = _coerce_level(level, normalization)
    asm = Assembler(
        sk.base, prob, spec, normalization=sk.normalization, beta=beta
    )
    return asm.load(ps, sk.delta)


def assemble_cross(
    target_level,
    source_level,
    prob: ProblemSpec,
    beta: float | None = None,
    spec: QuadratureSpec | None = None,
    normalization: str = "native",
) -> sp.csr_matrix:
    ps_t, sk_t = _coerce_level(target_level, normalization)
    ps_s, sk_s = _coerce_level(source_level, normalization)
    if sk_t.normalization != sk_s.normalization or sk_t.base != sk_s.base:
        raise ValueError("levels must share a kernel family and normalization")
    asm = Assembler(
        sk_t.base, prob, spec, normalization=sk_t.normalization, beta=beta
    )
    return asm.cross(ps_t, sk_t.delta, ps_s, sk_s.delta)


def _coerce_level(level, normalization: str = "native"):
    ps, second = level
    if isinstance(second, ScaledKernel):
        return ps, second
    from .kernels import wendland

    return ps, ScaledKernel(wendland(), float(second), normalization)


def dense_oracle_matrix(
    points: np.ndarray,
    sk_a: ScaledKernel,
    prob: ProblemSpec,
    beta: float | None = None,
    spec: QuadratureSpec | None = None,
    sk_b: ScaledKernel | None = None,
    points_b: np.ndarray | None = None,
) -> np.ndarray:
    """Brute-force assembly integrating every pair over the whole domain.

    Verification path: no support boxes, no caching, public kernel API only.
    """
    spec = spec or QuadratureSpec()
    sk_b = sk_b or sk_a
    pts_a = np.asarray(points, dtype=float)
    pts_b = pts_a if points_b is None else np.asarray(points_b, dtype=float)
    dom = prob.domain
    box = (dom.xmin, dom.xmax, dom.ymin, dom.ymax)
    dirichlet = prob.variant == "poisson_dirichlet"
    if dirichlet and beta is None:
        raise ValueError("beta required for the Dirichlet oracle")
    out = np.zeros((pts_a.shape[0], pts_b.shape[0]))
    for i, a in enumerate(pts_a):
        for j, b in enumerate(pts_b):

            def volume(p):
                ga = sk_a.gradient(p, a)
                gb = sk_b.gradient(p, b)
                v = (ga * gb).sum(axis=1)
                if not dirichlet:
                    v = v + sk_a.value(p, a) * sk_b.value(p, b)
                return v

            val = integrate_box(volume, box, spec).value
            if dirichlet:

                def bdry(p, normal):
                    ua = sk_a.value(p, a)
                    ub = sk_b.value(p, b)
                    na = sk_a.gradient(p, a) @ normal
                    nb = sk_b.gradient(p, b) @ normal
                    return -ub * na - ua * nb + beta * ua * ub

                val += integrate_boundary(
                    bdry, dom, a, max(sk_a.delta, sk_b.delta) + np.hypot(*(b - a)), spec
                ).value
            out[i, j] = val
    return out


def export_coo(matrix: sp.spmatrix, path) -> None:
    """Write a matrix as 0-based ``i j value`` lines."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{i} {j} {v:.17g}\n")

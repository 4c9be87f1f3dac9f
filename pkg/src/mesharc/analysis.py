"""Convergence-rate estimation and angles between approximation subspaces.

Rate estimates are successive L2 error ratios.  In a nested run with n
inner levels, the transitions back to the coarse level (step index i with
i = n+1, 2n+1, ...) measure the scale-increasing rate ("restart"); all
other transitions measure the scale-decreasing rate ("refine").  The final
refine estimate also yields the fill-distance convergence exponent

    sigma = -log(ratio / mu) / log(mu).

Subspace angles follow the whitened-coupling construction: with Gram blocks
K1 (one level, duplicate centres removed), K2 (union of all later levels)
and K12 (cross), and Cholesky factors K1 = L1 L1', K2 = L2 L2', the largest
singular value of L1^-1 K12 L2^-T is the supremum of the inner product over
unit elements of the two spans.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .assembly import Assembler, ProblemSpec
from .geometry import LevelSchedule, PointSet, neighbor_pairs, new_centres
from .kernels import WendlandKernel, wendland
from .quadrature import QuadratureSpec

__all__ = [
    "RateEntry",
    "RateReport",
    "rate_estimates",
    "SubspaceAngle",
    "subspace_angles",
    "angle_from_grams",
    "gram_matrix",
    "nested_rate_bound",
    "RATE_REFINE",
    "RATE_RESTART",
    "INNER_PRODUCTS",
]

RATE_REFINE = "refine"    # scale decreased at this transition
RATE_RESTART = "restart"  # scale increased (nested outer-pass restart)

INNER_PRODUCTS = ("kernel", "form", "h1", "l2")


@dataclass(frozen=True)
class RateEntry:
    step: int          # transition to this 1-based step
    ratio: float
    kind: str
    flagged: bool = False


@dataclass(frozen=True)
class RateReport:
    entries: tuple
    mu: float
    c3: float | None
    sigma: float | None

    def ratios(self, kind: str | None = None):
        return [e.ratio for e in self.entries if kind is None or e.kind == kind]


def rate_estimates(l2_errors, n: int | None = None, nested: bool = False,
                   mu: float = 0.5) -> RateReport:
    """Successive-error rate estimates with refine/restart classification."""
    errs = [float(e) for e in l2_errors]
    if len(errs) < 2:
        raise ValueError("need at least two error values")
    if nested and (n is None or n < 1):
        raise ValueError("nested classification needs the inner level count n")
    entries = []
    for i in range(2, len(errs) + 1):
        prev, cur = errs[i - 2], errs[i - 1]
        flagged = prev == 0.0
        ratio = float("nan") if flagged else cur / prev
        kind = RATE_RESTART if nested and (i - 1) % n == 0 else RATE_REFINE
        entries.append(RateEntry(i, ratio, kind, flagged))
    c3 = sigma = None
    refine = [e for e in entries if e.kind == RATE_REFINE and not e.flagged]
    if refine:
        c3 = refine[-1].ratio / mu
        if c3 > 0:
            sigma = -np.log(c3) / np.log(mu)
    return RateReport(tuple(entries), mu, c3, sigma)


# --- Gram matrices under selectable inner products -------------------------


def gram_matrix(
    sets,
    base: WendlandKernel | None = None,
    inner: str = "kernel",
    prob: ProblemSpec | None = None,
    spec: QuadratureSpec | None = None,
    beta: float | None = None,
) -> np.ndarray:
    """Dense Gram matrix of the union of per-level kernel expansions.

    ``sets`` is a sequence of (points (n_i, 2), delta_i).  Inner products:

    - "kernel": reproducing-kernel pairing; the entry for two centres is the
      plain kernel value at their separation, evaluated with the finer of
      the two scales (closed form, no quadrature).
    - "form": the problem's bilinear form (requires ``prob``; for the
      penalized Dirichlet form also ``beta``).
    - "h1": grad-grad plus mass over the domain, independent of the PDE.
    - "l2": plain L2 pairing over the domain.
    """
    if inner not in INNER_PRODUCTS:
        raise ValueError(f"inner must be one of {INNER_PRODUCTS}")
    base = base or wendland()
    blocks = [(np.asarray(p, dtype=float), float(d)) for p, d in sets]
    sizes = [p.shape[0] for p, _ in blocks]
    total = int(np.sum(sizes))
    out = np.zeros((total, total))
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    if inner == "kernel":
        for bi, (pa, da) in enumerate(blocks):
            for bj, (pb, db) in enumerate(blocks):
                if bj < bi:
                    continue
                dmin = min(da, db)
                diff = pa[:, None, :] - pb[None, :, :]
                r = np.sqrt((diff * diff).sum(axis=2))
                blk = base.phi(r / dmin)
                out[offs[bi]:offs[bi + 1], offs[bj]:offs[bj + 1]] = blk
                if bj != bi:
                    out[offs[bj]:offs[bj + 1], offs[bi]:offs[bi + 1]] = blk.T
        return out

    if prob is None:
        raise ValueError("quadrature-based inner products need a problem spec")
    if inner == "form":
        variant_prob = prob
        use_beta = beta
        if prob.variant == "poisson_dirichlet" and beta is None:
            raise ValueError("the penalized form needs beta")
    else:
        # neutral problem carrying only the domain; forms below pick the
        # components directly from the cached quadratures
        variant_prob = ProblemSpec(
            "helmholtz_neumann", f=prob.f, domain=prob.domain, exact=None
        )
        use_beta = None
    asm = Assembler(
        base, variant_prob, spec, normalization="plain", beta=use_beta
    )
    for bi, (pa, da) in enumerate(blocks):
        for bj, (pb, db) in enumerate(blocks):
            if bj < bi:
                continue
            psa = PointSet(pa, provenance="external")
            psb = PointSet(pb, provenance="external")
            if inner == "form":
                blk = asm.cross(psa, da, psb, db).toarray()
            else:
                ii, jj = neighbor_pairs(psa, psb, da + db)
                blk = np.zeros((pa.shape[0], pb.shape[0]))
                geos = []
                missing = {}
                for i, j in zip(ii.tolist(), jj.tolist()):
                    geo = asm._volume_geo(pa[i], pb[j], da, db)
                    geos.append(geo)
                    if geo is not None and geo[0] not in asm._vol_cache:
                        missing[geo[0]] = geo
                asm._compute_missing(asm._vol_cache, missing, asm._volume_task)
                for (i, j), geo in zip(zip(ii.tolist(), jj.tolist()), geos):
                    if geo is None:
                        continue
                    grad, mass, _ = asm._vol_cache[geo[0]]
                    blk[i, j] = grad + mass if inner == "h1" else mass
            out[offs[bi]:offs[bi + 1], offs[bj]:offs[bj + 1]] = blk
            if bj != bi:
                out[offs[bj]:offs[bj + 1], offs[bi]:offs[bi + 1]] = blk.T
    return out


@dataclass(frozen=True)
class SubspaceAngle:
    """One angle estimate: level i against the span of all later levels.

    ``sin_alpha`` is the largest singular value of the whitened coupling
    matrix, tabulated under that name for comparability with the reference
    tables.  By the definition of the angle between subspaces this supremum
    is the cosine of the principal angle, so the complementary reading
    sqrt(1 - sin_alpha^2) is carried alongside; both are reported.
    """

    index: int
    sin_alpha: float | None
    complement: float | None = None
    skipped: bool = False
    reason: str = ""


def angle_from_grams(K1: np.ndarray, K2: np.ndarray, K12: np.ndarray) -> float:
    """Largest singular value of L1^-1 K12 L2^-T with K = L L' Cholesky factors.

    Raises numpy.linalg.LinAlgError when either block is not positive
    definite.
    """
    L1 = np.linalg.cholesky(K1)
    L2 = np.linalg.cholesky(K2)
    m = la.solve_triangular(L1, K12, lower=True)
    m = la.solve_triangular(L2, m.T, lower=True).T
    if min(m.shape) == 0:
        return 0.0
    return float(la.svdvals(m)[0])


def subspace_angles(
    schedule: LevelSchedule,
    base: WendlandKernel | None = None,
    inner: str = "form",
    prob: ProblemSpec | None = None,
    spec: QuadratureSpec | None = None,
    beta: float | None = None,
) -> list:
    """Angle estimates between each level's span and the span of later levels.

    Centres already present at earlier levels are removed before the Gram
    blocks are formed (duplicate basis functions would make the blocks
    singular).  A non-positive-definite block flags and skips that index.
    """
    base = base or wendland()
    n = len(schedule)
    reduced = []  # (points array, delta) with earlier centres removed
    for i in range(n):
        lv = schedule[i]
        keep = new_centres(lv.points, [schedule[j].points for j in range(i)])
        reduced.append((lv.points.points[keep], lv.delta))
    out = []
    for i in range(n - 1):
        ua = reduced[i]
        later = reduced[i + 1:]
        if ua[0].shape[0] == 0 or sum(p.shape[0] for p, _ in later) == 0:
            out.append(SubspaceAngle(i + 1, None, None, True, "empty centre set"))
            continue
        gram = gram_matrix(
            [ua] + later, base=base, inner=inner, prob=prob, spec=spec, beta=beta
        )
        n1 = ua[0].shape[0]
        K1 = gram[:n1, :n1]
        K2 = gram[n1:, n1:]
        K12 = gram[:n1, n1:]
        try:
            np.linalg.cholesky(K1)
        except np.linalg.LinAlgError:
            out.append(SubspaceAngle(i + 1, None, None, True, "level Gram not PD"))
            continue
        try:
            smax = angle_from_grams(K1, K2, K12)
        except np.linalg.LinAlgError:
            out.append(SubspaceAngle(i + 1, None, None, True, "union Gram not PD"))
            continue
        comp = float(np.sqrt(max(0.0, 1.0 - smax * smax)))
        out.append(SubspaceAngle(i + 1, smax, comp, False, ""))
    return out


def nested_rate_bound(sin_alphas) -> float:
    """Linear-rate upper bound sqrt(1 - prod sin^2) from the angle estimates."""
    vals = np.asarray([s for s in sin_alphas if s is not None], dtype=float)
    prod = float(np.prod(vals * vals)) if vals.size else 0.0
    return float(np.sqrt(max(0.0, 1.0 - prod)))

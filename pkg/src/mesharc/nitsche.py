"""Penalty parameter selection for weakly imposed Dirichlet conditions.

The stability constant of the discrete trace inequality

    || grad v . n ||_{L2(boundary)}^2  <=  lam_max  || grad v ||_{L2(domain)}^2

over the span of boundary-overlapping basis functions is the largest
eigenvalue of the generalized problem B v = lam D v, with B the Gram matrix
of normal derivatives on the boundary and D the Gram matrix of gradients
over the domain.  A penalty beta > 2 * lam_max then makes the boundary-
penalized bilinear form positive definite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .assembly import Assembler, ProblemSpec
from .geometry import PointSet, RectDomain
from .kernels import WendlandKernel
from .quadrature import QuadratureSpec

__all__ = ["NitscheParams", "estimate_beta", "beta_schedule"]

MODES = ("sqrt", "literal")


@dataclass(frozen=True)
class NitscheParams:
    """Estimated trace constant and the resulting penalty.

    ``lambda_max`` is the largest generalized eigenvalue; its square root
    estimates the trace constant divided by sqrt(delta).  ``mode`` records
    how the penalty was derived: "sqrt" reads lambda_max as the squared
    trace quotient (beta = safety * 2 * lambda_max), "literal" reads
    sqrt(lambda_max) as the quotient itself (beta = safety * 2 *
    lambda_max^2), which is larger whenever lambda_max > 1.
    """

    lambda_max: float
    c_n_over_sqrt_delta: float
    beta: float
    safety: float
    mode: str = "sqrt"
    fallback: bool = False

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise ValueError("beta must be finite and positive")


def estimate_beta(
    finest_level,
    domain: RectDomain,
    safety: float = 1.25,
    spec: QuadratureSpec | None = None,
    base: WendlandKernel | None = None,
    mode: str = "sqrt",
    assembler: Assembler | None = None,
) -> NitscheParams:
    """Estimate the penalty from the finest level's boundary-overlapping basis.

    ``finest_level`` is (PointSet, delta).  Restricts to centres strictly
    closer than delta to the boundary, assembles the two Gram matrices, and
    solves the dense symmetric generalized eigenproblem.
    """
    if safety <= 1:
        raise ValueError("safety factor must exceed 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    ps, delta = finest_level
    if base is None:
        from .kernels import wendland

        base = wendland()
    band = np.nonzero(domain.boundary_distance(ps.points) < delta)[0]
    if band.size == 0:
        raise ValueError(
            "no basis function overlaps the boundary; the Dirichlet problem "
            "is ill-posed for this basis"
        )
    if assembler is None:
        prob = ProblemSpec(
            "poisson_dirichlet",
            f=lambda p: np.zeros(p.shape[:-1]),
            domain=domain,
            g=lambda p: np.zeros(p.shape[:-1]),
        )
        assembler = Assembler(base, prob, spec, normalization="plain", beta=0.0)
    B = assembler.boundary_normal_gram(ps, delta, subset=band)
    D = assembler.gradient_gram(ps, delta, subset=band)
    return params_from_grams(B, D, safety=safety, mode=mode, delta=delta)


def params_from_grams(
    B: np.ndarray,
    D: np.ndarray,
    safety: float = 1.25,
    mode: str = "sqrt",
    delta: float = 1.0,
) -> NitscheParams:
    """Solve B v = lam D v and turn the top eigenvalue into a penalty."""
    n = B.shape[0]
    dmin = np.min(la.eigvalsh(D))
    shifted = False
    if dmin <= 0:
        D = D + (1e-12 * np.trace(D) / n) * np.eye(n)
        shifted = True
        warnings.warn("gradient Gram numerically singular; shifted", stacklevel=2)
    lam = la.eigvalsh(B, D)
    lam_max = float(lam[-1])
    fallback = shifted
    if lam_max <= 0:
        # degenerate trace data: fall back to the minimal admissible penalty
        lam_max = max(lam_max, 0.0)
        beta = 1.0 / delta
        fallback = True
        warnings.warn(
            "trace eigenproblem degenerate; minimum-penalty fallback applied",
            stacklevel=2,
        )
    elif mode == "sqrt":
        beta = safety * 2.0 * lam_max
    else:
        beta = safety * 2.0 * lam_max**2
    return NitscheParams(
        lambda_max=lam_max,
        c_n_over_sqrt_delta=float(np.sqrt(lam_max)),
        beta=float(beta),
        safety=safety,
        mode=mode,
        fallback=fallback,
    )


def beta_schedule(
    schedule,
    safety: float = 1.25,
    spec: QuadratureSpec | None = None,
    base: WendlandKernel | None = None,
    mode: str = "sqrt",
    assembler: Assembler | None = None,
) -> NitscheParams:
    """One penalty for the whole run, computed from the finest level.

    The trace constant grows as the scale shrinks, so the finest level's
    penalty dominates and is reused at every level (the number of levels
    must therefore be known in advance).
    """
    finest = schedule[len(schedule) - 1]
    return estimate_beta(
        (finest.points, finest.delta),
        schedule.domain,
        safety=safety,
        spec=spec,
        base=base,
        mode=mode,
        assembler=assembler,
    )

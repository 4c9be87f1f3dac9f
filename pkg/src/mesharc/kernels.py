"""Compactly supported Wendland radial basis functions and their scaled forms.

The two family members used here are the C2 and C6 functions for dimension
d <= 3, expressed on the unit interval and cut off exactly at r = 1:

    C2:  phi(r) = (1-r)^4 (4r + 1)
    C6:  phi(r) = (1-r)^8 (32r^3 + 25r^2 + 8r + 1)

A scaled bivariate kernel with support radius ``delta`` is obtained by
substituting r -> ||x - y|| / delta, optionally with a delta^(-d) prefactor
("native" normalization) or without it ("plain").
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WendlandKernel",
    "ScaledKernel",
    "wendland",
    "kernel_value",
    "kernel_gradient",
]


def _check_radius(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radial distance must be nonnegative")
    return r


@dataclass(frozen=True)
class WendlandKernel:
    """A Wendland function phi: [0, inf) -> R with compact support [0, 1].

    Parameters
    ----------
    dimension : int
        Spatial dimension d the function is positive definite in (here d=2).
    smoothness : int
        Smoothness index k; k=1 gives the C2 member, k=3 the C6 member.

    Attributes
    ----------
    poly : tuple of float
        Coefficients (low order first) of the polynomial factor on [0, 1].
    sobolev_order : float
        The Sobolev exponent (d + 2k + 1) / 2 of the generated space.
    """

    dimension: int = 2
    smoothness: int = 3
    poly: tuple = field(init=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if self.smoothness == 1:
            object.__setattr__(self, "poly", (1.0, 4.0))
        elif self.smoothness == 3:
            object.__setattr__(self, "poly", (1.0, 8.0, 25.0, 32.0))
        else:
            raise ValueError("smoothness must be 1 (C2) or 3 (C6)")

    @property
    def sobolev_order(self) -> float:
        return (self.dimension + 2 * self.smoothness + 1) / 2

    @property
    def continuity(self) -> int:
        """Order of continuous differentiability (2k)."""
        return 2 * self.smoothness

    def _cut(self, r: np.ndarray) -> np.ndarray:
        # (1 - r)_+ evaluated once; powers built by repeated squaring so the
        # factor stays exact near the support edge.
        return np.maximum(0.0, 1.0 - r)

    def phi(self, r):
        """Evaluate phi(r). Exactly zero for r >= 1; raises for r < 0."""
        r = _check_radius(r)
        u = self._cut(r)
        u2 = u * u
        u4 = u2 * u2
        if self.smoothness == 1:
            return u4 * (4.0 * r + 1.0)
        u8 = u4 * u4
        return u8 * (((32.0 * r + 25.0) * r + 8.0) * r + 1.0)

    def dphi(self, r):
        """Evaluate dphi/dr. Zero at r = 0 and for r >= 1."""
        r = _check_radius(r)
        u = self._cut(r)
        if self.smoothness == 1:
            return -20.0 * r * u * u * u
        u2 = u * u
        u4 = u2 * u2
        return -22.0 * r * ((16.0 * r + 7.0) * r + 1.0) * (u4 * u2 * u)

    def dphi_over_r(self, r):
        """Evaluate dphi/dr / r, which extends smoothly through r = 0.

        This is the quantity entering gradients of the bivariate kernel,
        grad_x phi(||x-y||/delta) = (dphi/dr / r)(r) * (x-y) / delta^2 with
        r = ||x-y||/delta; the removable singularity at r=0 is eliminated
        analytically.
        """
        r = _check_radius(r)
        u = self._cut(r)
        if self.smoothness == 1:
            return -20.0 * u * u * u
        u2 = u * u
        u4 = u2 * u2
        return -22.0 * ((16.0 * r + 7.0) * r + 1.0) * (u4 * u2 * u)


def wendland(smoothness: int = 3, dimension: int = 2) -> WendlandKernel:
    """Construct a Wendland kernel (k=3 by default, the C6 member)."""
    return WendlandKernel(dimension=dimension, smoothness=smoothness)


@dataclass(frozen=True)
class ScaledKernel:
    """A Wendland kernel dilated to support radius ``delta``.

    With ``normalization == "native"`` the kernel carries the delta^(-d)
    prefactor; with ``"plain"`` it does not.  The two differ by an exact
    scalar factor, so Galerkin solutions and condition numbers are identical
    under either convention.
    """

    base: WendlandKernel
    delta: float
    normalization: str = "native"

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.normalization not in ("native", "plain"):
            raise ValueError("normalization must be 'native' or 'plain'")

    @property
    def prefactor(self) -> float:
        if self.normalization == "native":
            return self.delta ** (-self.base.dimension)
        return 1.0

    def value(self, x, y):
        """Kernel value Phi_delta(x, y); zero whenever ||x-y|| >= delta."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x - y
        r = np.sqrt(np.sum(d * d, axis=-1))
        return self.prefactor * self.base.phi(r / self.delta)

    def gradient(self, x, y):
        """Gradient of Phi_delta(., y) at x; the zero vector at x = y."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x - y
        r = np.sqrt(np.sum(d * d, axis=-1))
        s = self.base.dphi_over_r(r / self.delta) / self.delta**2
        return self.prefactor * np.expand_dims(s, -1) * d


def kernel_value(sk: ScaledKernel, x, y):
    """Evaluate a scaled kernel at a pair of points (or arrays of points)."""
    return sk.value(x, y)


def kernel_gradient(sk: ScaledKernel, x, y):
    """Gradient of the scaled kernel in its first argument."""
    return sk.gradient(x, y)

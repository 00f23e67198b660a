"""Composite tensor-product Gauss-Legendre quadrature on axis-aligned boxes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import IntegrandError, InvalidArgument

POINTS_PER_CELL = 4


class Estimate(NamedTuple):
    """A numerical value with its error estimate."""

    value: float
    error: float


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class Domain:
    """Box ``[lower, upper]`` with ``resolution`` quadrature nodes per axis.

    The box is split into ``resolution // 4`` equal cells per axis, each
    carrying a 4-point Gauss-Legendre rule.
    """

    lower: tuple
    upper: tuple
    resolution: int = 64

    def __post_init__(self):
        lo = tuple(float(v) for v in np.ravel(self.lower))
        hi = tuple(float(v) for v in np.ravel(self.upper))
        if len(lo) != len(hi) or len(lo) < 1:
            raise InvalidArgument("lower and upper must have the same positive length")
        if not all(a < b for a, b in zip(lo, hi)):
            raise InvalidArgument(f"need lower < upper componentwise, got {lo} and {hi}")
        if self.resolution < 8 or self.resolution % POINTS_PER_CELL:
            raise InvalidArgument(
                f"resolution must be a multiple of {POINTS_PER_CELL} and >= 8, got {self.resolution}"
            )
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, n, resolution=64):
        return cls((0.0,) * n, (1.0,) * n, resolution)

    @property
    def n(self):
        return len(self.lower)

    @property
    def sides(self):
        return np.subtract(self.upper, self.lower)

    @property
    def volume(self):
        return float(np.prod(self.sides))

    @property
    def center(self):
        return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))

    def with_resolution(self, resolution):
        return Domain(self.lower, self.upper, resolution)

    def coarse(self):
        """The same box at half resolution (at least one cell per axis)."""
        cells = max(1, self.resolution // POINTS_PER_CELL // 2)
        return _CoarseDomain(self.lower, self.upper, cells * POINTS_PER_CELL)

    def scaled(self, factor):
        """Box with the same center and sides multiplied by ``factor``."""
        c, half = self.center, 0.5 * factor * self.sides
        return Domain(tuple(c - half), tuple(c + half), self.resolution)

    def contains(self, x, margin=0.0):
        x = np.asarray(x)
        return np.all((x >= np.add(self.lower, margin)) & (x <= np.subtract(self.upper, margin)), axis=-1)

    def axis_nodes(self, axis):
        cells = self.resolution // POINTS_PER_CELL
        xi, wi = _gauss_legendre(POINTS_PER_CELL)
        h = self.sides[axis] / cells
        left = self.lower[axis] + h * np.arange(cells)
        return (left[:, None] + h * xi).ravel(), np.tile(h * wi, cells)

    def nodes(self):
        """Tensor grid nodes ``(N, n)`` and weights ``(N,)``."""
        axes = [self.axis_nodes(k) for k in range(self.n)]
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
        return pts, w

    def to_dict(self):
        return {"lower": list(self.lower), "upper": list(self.upper), "resolution": self.resolution}


class _CoarseDomain(Domain):
    # the half-resolution grid used for error estimates may drop below 8 nodes
    def __post_init__(self):
        lo = tuple(float(v) for v in np.ravel(self.lower))
        hi = tuple(float(v) for v in np.ravel(self.upper))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


def quadrature_sum(values, weights, points=None) -> float:
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = None if points is None else points[np.argmax(bad)]
        raise IntegrandError(f"integrand is not finite at {where}", point=where)
    # np.sum is pairwise, so the summation order is deterministic
    return float(np.sum(values * weights))


def integrate(f, dom: Domain) -> float:
    """Integrate a vectorised ``f: (N, n) -> (N,)`` over ``dom``.

    Examples
    --------
    >>> integrate(lambda x: x[:, 0], Domain.unit(2))
    0.5
    """
    pts, w = dom.nodes()
    return quadrature_sum(f(pts), w, pts)


def integrate_with_error(f, dom: Domain):
    """Return ``(value, error)`` with error ``|I(res) - I(res / 2)|``."""
    value = integrate(f, dom)
    return Estimate(value, abs(value - integrate(f, dom.coarse())))

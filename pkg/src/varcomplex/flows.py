"""Numerical diffeomorphisms: RK4 flows of compact fields, affine maps and
compositions, all returning values together with exact Jacobians.

Every map exposes ``value_and_jacobian(x) -> (y, J)`` on a batch ``(N, n)``
plus the conveniences ``__call__`` and ``jacobian``.  For a flow the Jacobian
comes from integrating the variational equation ``dM/dt = grad(eta)(y) M``
with the same RK4 scheme, so it is the exact derivative of the discrete map
(not merely an approximation of the true flow's derivative).
"""

from __future__ import annotations

import math

import numpy as np

from ._kernels import KIND_CODES, rk4_flow
from .errors import IntegrationBudgetExceeded, InvalidArgument
from .fields import CompactField
from .groups import GL, GroupSpec, residual

STEPS_PER_UNIT_TIME = 64
MAX_STEPS = 1_000_000


class Map:
    """Base class: subclasses implement ``value_and_jacobian``."""

    n: int
    group: GroupSpec | None = None

    def value_and_jacobian(self, x):
        raise NotImplementedError

    def __call__(self, x):
        single = np.ndim(x) == 1
        y, _ = self.value_and_jacobian(np.atleast_2d(x))
        return y[0] if single else y

    def jacobian(self, x):
        single = np.ndim(x) == 1
        _, J = self.value_and_jacobian(np.atleast_2d(x))
        return J[0] if single else J

    def membership_residual(self, x) -> float:
        """Worst group residual of the Jacobian over points ``x`` (0 if no group)."""
        if self.group is None:
            return 0.0
        return float(np.max(residual(self.group, self.jacobian(np.atleast_2d(x))), initial=0.0))


class IdentityMap(Map):
    def __init__(self, n):
        self.n = n

    def value_and_jacobian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x.copy(), np.broadcast_to(np.eye(self.n), x.shape + (self.n,)).copy()

    def inverse(self):
        return self

    def __repr__(self):
        return f"IdentityMap({self.n})"


class AffineMap(Map):
    """``x -> A @ (x - x0) + x1``; ``A = eps * I`` gives the homothety-translations."""

    def __init__(self, A, x0, x1, group: GroupSpec | None = None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.x0 = np.asarray(x0, dtype=float)
        self.x1 = np.asarray(x1, dtype=float)
        self.n = self.A.shape[0]
        if self.A.shape != (self.n, self.n) or self.x0.shape != (self.n,) or self.x1.shape != (self.n,):
            raise InvalidArgument("inconsistent affine map shapes")
        self.group = group

    @classmethod
    def homothety(cls, x0, x1, eps):
        """``f(x) = x1 + eps (x - x0)`` with ``eps > 0``."""
        if not eps > 0:
            raise InvalidArgument(f"homothety factor must be positive, got {eps}")
        x0 = np.asarray(x0, dtype=float)
        return cls(eps * np.eye(len(x0)), x0, x1)

    @classmethod
    def translation(cls, offset):
        offset = np.asarray(offset, dtype=float)
        return cls(np.eye(len(offset)), np.zeros_like(offset), offset)

    def value_and_jacobian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = (x - self.x0) @ self.A.T + self.x1
        return y, np.broadcast_to(self.A, x.shape + (self.n,)).copy()

    def inverse(self):
        return AffineMap(np.linalg.inv(self.A), self.x1, self.x0, self.group)

    def __repr__(self):
        return f"AffineMap(A={self.A.tolist()}, x0={self.x0.tolist()}, x1={self.x1.tolist()})"


class FlowMap(Map):
    """Time-``t`` map of the flow of a :class:`CompactField`, by fixed-step RK4.

    The step is ``h_ode`` (default ``1 / 64``); the number of steps is
    ``ceil(|t| / h_ode)``.  Points outside the field's support ball never move,
    so only the points inside it are integrated.
    """

    def __init__(self, field: CompactField, t: float = 1.0, h_ode: float | None = None):
        self.field = field
        self.t = float(t)
        self.h_ode = 1.0 / STEPS_PER_UNIT_TIME if h_ode is None else float(h_ode)
        if not self.h_ode > 0:
            raise InvalidArgument(f"h_ode must be positive, got {h_ode}")
        self.n = field.n
        self.group = field.group

    @property
    def steps(self):
        if self.t == 0.0:
            return 0
        steps = math.ceil(abs(self.t) / self.h_ode - 1e-9)
        if steps > MAX_STEPS:
            raise IntegrationBudgetExceeded(f"{steps} RK4 steps requested, cap is {MAX_STEPS}")
        return max(1, steps)

    def inverse(self):
        """Time reversal: the flow of the same field for ``-t``."""
        return FlowMap(self.field, -self.t, self.h_ode)

    def at(self, t):
        return FlowMap(self.field, t, self.h_ode)

    def value(self, x):
        return self._integrate(x, jacobian=False)[0]

    def value_and_jacobian(self, x):
        return self._integrate(x, jacobian=True)

    def _integrate(self, x, jacobian):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        N, n = x.shape
        if n != self.n:
            raise InvalidArgument(f"points have dimension {n}, flow has {self.n}")
        f = self.field
        steps = self.steps
        if steps == 0 or f.kind == "zero":
            return x.copy(), np.broadcast_to(np.eye(n), (N, n, n)).copy()
        fac = f.amplitude * f.radius ** (1 if f.kind == "gl" else 2)
        omega = f._omega if f._omega is not None else np.zeros((n, n))
        y, M = rk4_flow(
            KIND_CODES[f.kind], np.ascontiguousarray(x), np.asarray(f.center, dtype=float),
            float(f.radius), float(fac), f.basis.exponents, f._block, f.coeffs.shape[1],
            omega, self.t, steps, jacobian,
        )
        return y, M

    def __call__(self, x):
        single = np.ndim(x) == 1
        y = self.value(x)
        return y[0] if single else y

    def __repr__(self):
        return f"FlowMap(field={self.field.kind}:{self.field.group}, seed={self.field.seed}, t={self.t})"


def flow_eval(m: FlowMap, x):
    """``phi_t(x)``."""
    return m(x)


def flow_jacobian(m: FlowMap, x):
    """``grad phi_t(x)`` from the transported variational equation."""
    return m.jacobian(x)


class ComposedMap(Map):
    """``maps[0] o maps[1] o ... o maps[-1]``: evaluation runs right to left.

    The Jacobian follows the chain rule ``grad(f o g)(x) = grad f(g(x)) grad g(x)``.
    """

    def __init__(self, maps):
        maps = list(maps)
        if not maps:
            raise InvalidArgument("compose needs at least one map")
        dims = {m.n for m in maps}
        if len(dims) != 1:
            raise InvalidArgument(f"dimension mismatch among composed maps: {sorted(dims)}")
        self.maps = maps
        self.n = dims.pop()
        groups = {m.group for m in maps if m.group is not None}
        if len(groups) == 1:
            self.group = groups.pop()
        elif groups:
            self.group = GL(self.n)
        else:
            self.group = None

    def value_and_jacobian(self, x):
        y = np.atleast_2d(np.asarray(x, dtype=float))
        J = None
        for m in reversed(self.maps):
            y, Jm = m.value_and_jacobian(y)
            J = Jm if J is None else Jm @ J
        return y, J

    def inverse(self):
        return ComposedMap([m.inverse() for m in reversed(self.maps)])

    def __repr__(self):
        return "ComposedMap(" + ", ".join(map(repr, self.maps)) + ")"


def compose(maps) -> ComposedMap:
    """Compose maps right to left: ``compose([f, g])(x) == f(g(x))``."""
    return ComposedMap(maps)


def conjugate(f: AffineMap, phi: Map) -> ComposedMap:
    """``f . phi . f^{-1}`` (the action of the affine group on ``[M]_c``)."""
    return ComposedMap([f, phi, f.inverse()])


def probe_points(dom, seed=0, count=32, resolution=None):
    """Quadrature nodes of ``dom`` plus ``count`` seeded uniform points."""
    d = dom if resolution is None else dom.with_resolution(resolution)
    pts, _ = d.nodes()
    rng = np.random.default_rng(seed)
    extra = rng.uniform(dom.lower, dom.upper, size=(count, dom.n))
    return np.concatenate([pts, extra])

"""Smooth compactly supported vector fields tangent to a matrix group.

Every field is built from scalar potentials ``a * rho**p * bump * poly`` where
``bump`` is the standard mollifier on a ball of radius ``rho`` and ``poly`` is
a seeded polynomial of total degree <= 3 in the rescaled coordinate
``z = (x - center) / rho``.  The powers of ``rho`` make ``amplitude`` a
dimensionless strain scale independent of the ball size.  The steep mollifier
edge makes the constant large: at amplitude 0.2 the time-one flows have
``max |grad phi - I|`` between about 1 and 3.

Generators
----------
gl          each component is its own potential
hamiltonian ``eta = omega @ grad(H)``: symplectic, and divergence free in 2D
curl        ``eta = curl(A)`` in 3D: divergence free
zero        the conformal case, where only the identity is compactly supported
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, UnsupportedConfiguration
from .groups import GroupSpec, Tag, symplectic_matrix
from .quadrature import Domain

MAX_DEGREE = 3
SUPPORT_MARGIN = 0.05
# support radius as a fraction of the smallest side
RADIUS_RANGE = (0.35, 0.45)
# exp(-q) underflows to zero well before q = 700
_Q_CUTOFF = 700.0


def _bump_parts(center, radius, x, hessian=True):
    """Mollifier value, gradient and (optionally) Hessian at points ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x - center
    s = np.sum(d * d, axis=-1) / radius**2
    N, n = x.shape
    val = np.zeros(N)
    grad = np.zeros((N, n))
    hess = np.zeros((N, n, n)) if hessian else None
    with np.errstate(divide="ignore"):
        q = np.where(s < 1.0, 1.0 / (1.0 - s), np.inf)
    inside = q < _Q_CUTOFF
    if not np.any(inside):
        return val, grad, hess
    qi, si, di = q[inside], s[inside], d[inside]
    B = np.exp(-qi)
    dB = -B * qi**2
    ds = 2.0 * di / radius**2
    val[inside] = B
    grad[inside] = dB[:, None] * ds
    if hessian:
        d2B = B * (2.0 * si - 1.0) * qi**4
        hess[inside] = (
            d2B[:, None, None] * ds[:, :, None] * ds[:, None, :]
            + (2.0 * dB / radius**2)[:, None, None] * np.eye(n)
        )
    return val, grad, hess


def bump(center, radius, x):
    """Standard mollifier ``exp(-1 / (1 - r^2))`` with ``r = |x - c| / radius``.

    Returns ``(value, gradient)``; zero outside the open ball.  Accepts a single
    point or a batch ``(N, n)``.
    """
    if not radius > 0:
        raise InvalidArgument(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=float)
    single = np.ndim(x) == 1
    val, grad, _ = _bump_parts(center, radius, x, hessian=False)
    if single:
        return float(val[0]), grad[0]
    return val, grad


def monomial_exponents(n, degree=MAX_DEGREE):
    exps = [e for e in itertools.product(range(degree + 1), repeat=n) if sum(e) <= degree]
    return np.array(sorted(exps, key=lambda e: (sum(e), tuple(-v for v in e))), dtype=int)


class MonomialBasis:
    """Monomials of total degree <= 3 in ``z = (x - center) / scale``.

    Derivatives of a monomial are multiples of other monomials in the basis,
    so gradients and Hessians are column gathers of a single ``(N, M)`` table.
    """

    def __init__(self, n, center, scale, degree=MAX_DEGREE):
        self.n = n
        self.center = np.asarray(center, dtype=float)
        self.scale = float(scale)
        self.degree = degree
        self.exponents = monomial_exponents(n, degree)
        index = {tuple(e): i for i, e in enumerate(self.exponents)}
        M = len(self.exponents)
        self.d1_idx = np.zeros((n, M), dtype=int)
        self.d1_fac = np.zeros((n, M))
        self.d2_idx = np.zeros((n, n, M), dtype=int)
        self.d2_fac = np.zeros((n, n, M))
        for m, e in enumerate(self.exponents):
            for k in range(n):
                if e[k] == 0:
                    continue
                ek = e.copy()
                ek[k] -= 1
                self.d1_idx[k, m] = index[tuple(ek)]
                self.d1_fac[k, m] = e[k]
                for l in range(n):
                    if ek[l] == 0:
                        continue
                    ekl = ek.copy()
                    ekl[l] -= 1
                    self.d2_idx[k, l, m] = index[tuple(ekl)]
                    self.d2_fac[k, l, m] = e[k] * ek[l]

    def __len__(self):
        return len(self.exponents)

    def table(self, x):
        z = (np.atleast_2d(x) - self.center) / self.scale
        pw = [np.ones_like(z)]
        for _ in range(self.degree):
            pw.append(pw[-1] * z)
        pw = np.stack(pw)  # (degree + 1, N, n)
        T = np.ones((z.shape[0], len(self.exponents)))
        for j in range(self.n):
            T *= pw[self.exponents[:, j], :, j].T
        return T

    def derivative_coeffs(self, coeffs):
        """Stack coefficients of the polynomials, their first and their second
        derivatives (in ``z``) into one ``(M, P * (1 + n + n * n))`` block."""
        coeffs = np.asarray(coeffs, dtype=float)
        M, P = coeffs.shape
        n = self.n
        blocks = [coeffs]
        for k in range(n):
            D = np.zeros((M, P))
            np.add.at(D, self.d1_idx[k], self.d1_fac[k][:, None] * coeffs)
            blocks.append(D)
        for k in range(n):
            for l in range(n):
                D = np.zeros((M, P))
                np.add.at(D, self.d2_idx[k, l], self.d2_fac[k, l][:, None] * coeffs)
                blocks.append(D)
        return np.concatenate(blocks, axis=1)

    def parts(self, x, block, hessian=True):
        """Values ``(N, P)``, gradients ``(N, P, n)`` and Hessians ``(N, P, n, n)``
        in ``x`` of the polynomials encoded by ``derivative_coeffs``."""
        n = self.n
        P = block.shape[1] // (1 + n + n * n)
        T = self.table(x)
        cols = P * (1 + n + n * n) if hessian else P * (1 + n)
        R = T @ block[:, :cols]
        N = R.shape[0]
        val = R[:, :P]
        grad = R[:, P : P * (1 + n)].reshape(N, n, P).transpose(0, 2, 1) / self.scale
        hess = None
        if hessian:
            hess = R[:, P * (1 + n) :].reshape(N, n, n, P).transpose(0, 3, 1, 2) / self.scale**2
        return val, grad, hess


@dataclass(frozen=True, eq=False)
class CompactField:
    """A compactly supported field ``eta`` whose flow stays in ``[M](domain)``.

    Use :func:`sample_field` to construct one.  ``value``, ``gradient`` and
    ``value_and_gradient`` are vectorised over points ``(N, n)``.
    ``coeffs`` holds one column of polynomial coefficients per potential.
    """

    group: GroupSpec
    domain: Domain
    kind: str
    amplitude: float
    center: np.ndarray
    radius: float
    coeffs: np.ndarray
    seed: int | None = None

    @property
    def n(self):
        return self.group.n

    @cached_property
    def basis(self):
        return MonomialBasis(self.n, self.center, self.radius)

    @cached_property
    def _block(self):
        return self.basis.derivative_coeffs(self.coeffs)

    @cached_property
    def _omega(self):
        return symplectic_matrix(self.n) if self.kind == "hamiltonian" else None

    @property
    def support_box(self):
        return self.center - self.radius, self.center + self.radius

    def support_mask(self, x):
        d = np.atleast_2d(x) - self.center
        return np.sum(d * d, axis=-1) < self.radius**2

    def _potential_parts(self, x, hessian):
        """Derivatives of the scalar potentials ``a * rho**p * bump * poly``,
        stacked along axis 1."""
        b, db, hb = _bump_parts(self.center, self.radius, x, hessian=hessian)
        p, dp, hp = self.basis.parts(x, self._block, hessian=hessian)
        fac = self.amplitude * self.radius ** (1 if self.kind == "gl" else 2)
        val = fac * b[:, None] * p
        grad = fac * (db[:, None, :] * p[:, :, None] + b[:, None, None] * dp)
        hess = None
        if hessian:
            cross = db[:, None, :, None] * dp[:, :, None, :]
            hess = fac * (
                hb[:, None] * p[:, :, None, None]
                + cross
                + np.swapaxes(cross, -1, -2)
                + b[:, None, None, None] * hp
            )
        return val, grad, hess

    def _evaluate(self, x, jacobian):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        N, n = x.shape
        if n != self.n:
            raise InvalidArgument(f"points have dimension {n}, field has {self.n}")
        val = np.zeros((N, n))
        jac = np.zeros((N, n, n)) if jacobian else None
        if self.kind == "zero":
            return val, jac
        mask = self.support_mask(x)
        if not np.any(mask):
            return val, jac
        xm = x[mask]
        if self.kind == "gl":
            v, g, _ = self._potential_parts(xm, hessian=False)
            val[mask] = v
            if jacobian:
                jac[mask] = g
        elif self.kind == "hamiltonian":
            _, g, h = self._potential_parts(xm, hessian=jacobian)
            w = self._omega
            val[mask] = g[:, 0] @ w.T
            if jacobian:
                jac[mask] = w @ h[:, 0]
        elif self.kind == "curl":
            _, g, h = self._potential_parts(xm, hessian=jacobian)
            # eta_i = eps_ilk d_l A_k
            val[mask] = np.stack(
                [g[:, 2, 1] - g[:, 1, 2], g[:, 0, 2] - g[:, 2, 0], g[:, 1, 0] - g[:, 0, 1]], axis=-1
            )
            if jacobian:
                jac[mask] = np.stack(
                    [h[:, 2, 1] - h[:, 1, 2], h[:, 0, 2] - h[:, 2, 0], h[:, 1, 0] - h[:, 0, 1]], axis=1
                )
        else:
            raise UnsupportedConfiguration(f"unknown field kind {self.kind!r}")
        return val, jac

    def value(self, x):
        single = np.ndim(x) == 1
        v, _ = self._evaluate(x, jacobian=False)
        return v[0] if single else v

    def gradient(self, x):
        """Exact Jacobian ``d eta_i / d x_j``; shape ``(n, n)`` or ``(N, n, n)``."""
        single = np.ndim(x) == 1
        _, J = self._evaluate(x, jacobian=True)
        return J[0] if single else J

    def value_and_gradient(self, x):
        single = np.ndim(x) == 1
        v, J = self._evaluate(x, jacobian=True)
        return (v[0], J[0]) if single else (v, J)

    def divergence(self, x):
        return np.trace(self.gradient(x), axis1=-2, axis2=-1)

    def scaled(self, factor):
        """Same generator with amplitude multiplied by ``factor``."""
        return replace(self, amplitude=self.amplitude * factor)

    def to_dict(self):
        lo, hi = self.support_box
        return {
            "generator": self.kind,
            "group": str(self.group),
            "seed": self.seed,
            "amplitude": self.amplitude,
            "support_box": [lo.tolist(), hi.tolist()],
            "domain": self.domain.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        dom = data["domain"]
        return sample_field(
            GroupSpec.parse(data["group"]),
            Domain(dom["lower"], dom["upper"], dom["resolution"]),
            data["amplitude"],
            data["seed"],
        )


def _generator_kind(g: GroupSpec):
    if g.tag is Tag.GL:
        return "gl", g.n
    if g.tag is Tag.SP:
        return "hamiltonian", 1
    if g.tag is Tag.SL:
        if g.n == 2:
            return "hamiltonian", 1
        if g.n == 3:
            return "curl", 3
        raise UnsupportedConfiguration(f"no volume preserving generator for n = {g.n}")
    return "zero", 0


def sample_field(g: GroupSpec, dom: Domain, amplitude: float, seed: int) -> CompactField:
    """Seeded field in the tangent space of ``[g](dom)``.

    The support is a ball whose bounding box keeps a margin of at least 5 % of
    each side of ``dom``.  The random draws do not depend on ``amplitude``, so
    fields for different amplitudes and the same seed are proportional.
    """
    if not np.isfinite(amplitude):
        raise InvalidArgument(f"amplitude must be finite, got {amplitude}")
    if dom.n != g.n:
        raise InvalidArgument(f"domain dimension {dom.n} does not match group {g}")
    kind, count = _generator_kind(g)
    rng = np.random.default_rng(seed)
    sides = dom.sides
    radius = rng.uniform(RADIUS_RANGE[0], RADIUS_RANGE[1]) * float(np.min(sides))
    lo = np.asarray(dom.lower) + SUPPORT_MARGIN * sides + radius
    hi = np.asarray(dom.upper) - SUPPORT_MARGIN * sides - radius
    center = rng.uniform(lo, hi)
    coeffs = rng.uniform(-1.0, 1.0, size=(count, len(monomial_exponents(g.n)))).T
    return CompactField(g, dom, kind, float(amplitude), center, float(radius), coeffs, seed)

"""Potentials ``W(x, y, F)`` with derivatives in ``F`` and ``y``.

A :class:`Lagrangian` evaluates on batches: ``F`` has shape ``(..., n, n)``,
``y`` and ``x`` have shape ``(..., n)``.  Built-in families carry analytic
first and second ``F``-derivatives; :class:`Custom` falls back to central
differences with step ``1e-6 * max(1, |F|)`` for gradients and nested central
differences with step ``1e-4`` for Hessians.

Pairing convention: ``<A, B> = sum_ij A_ij B_ij``.
"""

from __future__ import annotations

import enum
import itertools
from typing import Callable

import numpy as np

from .errors import DomainError, InvalidArgument
from .groups import GroupSpec, residual

H_FD = 1e-6
H_FD2 = 1e-4
# step for the five-point stencils of det-weighted potentials
H_DET = 1e-3
DOMAIN_TOL = 1e-6


class Kind(str, enum.Enum):
    MINORS = "minors"
    AFFINE = "affine"
    DET_WEIGHTED_AFFINE = "det_weighted_affine"
    QUADRATIC = "quadratic"
    PULLBACK = "pullback"
    CUSTOM = "custom"


def _as_batch(F, n):
    F = np.asarray(F, dtype=float)
    if F.shape[-2:] != (n, n):
        raise InvalidArgument(f"expected matrices of shape (..., {n}, {n}), got {F.shape}")
    return F


def _points(y, F, n):
    """``y`` broadcast to the batch shape of ``F``; missing ``y`` means the origin."""
    shape = F.shape[:-2] + (n,)
    if y is None:
        return np.zeros(shape)
    y = np.asarray(y, dtype=float)
    if y.shape[-1:] != (n,):
        raise InvalidArgument(f"points must have trailing dimension {n}, got {y.shape}")
    return np.broadcast_to(y, shape)


# --------------------------------------------------------------------------
# minors


def _subdet(S, rows, cols):
    if len(rows) == 0:
        return np.ones(S.shape[:-2])
    return np.linalg.det(S[..., list(rows), :][..., list(cols)])


def minor_derivatives(S, hessian=True):
    """Determinant of square ``S`` with its gradient and Hessian in ``S``.

    Built from signed sub-minors, so it stays exact at singular ``S``:
    ``d det / dS_ab = (-1)^(a+b) det S[~a, ~b]`` and the second derivative
    removes two rows and two columns.
    """
    k = S.shape[-1]
    idx = tuple(range(k))
    det = _subdet(S, idx, idx)
    grad = np.zeros(S.shape)
    hess = np.zeros(S.shape[:-2] + (k, k, k, k)) if hessian else None
    for a, b in itertools.product(idx, idx):
        ra = idx[:a] + idx[a + 1:]
        cb = idx[:b] + idx[b + 1:]
        grad[..., a, b] = (-1) ** (a + b) * _subdet(S, ra, cb)
        if not hessian:
            continue
        for c, d in itertools.product(idx, idx):
            if c == a or d == b:
                continue
            # position of (c, d) inside S[~a, ~b]
            cp, dp = c - (c > a), d - (d > b)
            rows = tuple(r for r in ra if r != c)
            cols = tuple(q for q in cb if q != d)
            hess[..., a, b, c, d] = (-1) ** (a + b + cp + dp) * _subdet(S, rows, cols)
    return det, grad, hess


def cofactor(F):
    """Cofactor matrix: the gradient of ``det`` (no inverse needed)."""
    return minor_derivatives(np.asarray(F, dtype=float), hessian=False)[1]


def _parse_indices(text, n):
    digits = text.strip().strip("()")
    out = []
    for ch in digits.replace(",", "").replace(" ", ""):
        if not ch.isdigit() or not 1 <= int(ch) <= n:
            raise InvalidArgument(f"bad index {ch!r} in minor spec {text!r} for n={n}")
        out.append(int(ch) - 1)
    return tuple(out)


def parse_minor_key(key, n):
    """Normalise a minor key to zero-based ``(rows, cols)``.

    Accepted forms: ``"det"``; ``"const"`` or ``()`` for the order-0 minor;
    ``"ij"`` for the entry ``F_ij``; ``"r1r2|c1c2"`` (optionally in
    parentheses); or an explicit pair of one-based tuples.
    """
    if isinstance(key, tuple) and len(key) == 2 and all(isinstance(p, tuple) for p in key):
        rows = tuple(int(i) - 1 for i in key[0])
        cols = tuple(int(i) - 1 for i in key[1])
    elif key == () or key in ("const", "1", ""):
        rows = cols = ()
    elif key == "det":
        rows = cols = tuple(range(n))
    elif isinstance(key, str) and "|" in key:
        r, c = key.strip().strip("()").split("|")
        rows, cols = _parse_indices(r, n), _parse_indices(c, n)
    elif isinstance(key, str) and len(key.strip()) == 2:
        rows, cols = _parse_indices(key[0], n), _parse_indices(key[1], n)
    else:
        raise InvalidArgument(f"cannot parse minor key {key!r}")
    if len(rows) != len(cols):
        raise InvalidArgument(f"minor {key!r} is not square")
    for part in (rows, cols):
        if len(set(part)) != len(part) or any(not 0 <= i < n for i in part):
            raise InvalidArgument(f"invalid index set in minor {key!r} for n={n}")
        if list(part) != sorted(part):
            raise InvalidArgument(f"minor indices must be increasing, got {key!r}")
    return rows, cols


# --------------------------------------------------------------------------
# base class


class Lagrangian:
    """A potential ``W(x, y, F)``.

    Subclasses implement ``_value`` and may override ``_grad_F``, ``_hess_F``
    and ``_grad_y`` with analytic versions; the defaults are central
    differences.  ``group``, when set, restricts ``F`` to that group and
    evaluation elsewhere raises :class:`DomainError`.
    """

    kind: Kind = Kind.CUSTOM
    homogeneous: bool = True

    def __init__(self, n, name="W", group: GroupSpec | None = None):
        if int(n) != n or n < 1:
            raise InvalidArgument(f"dimension must be a positive integer, got {n!r}")
        self.n = int(n)
        self.name = name
        if group is not None and group.n != self.n:
            raise InvalidArgument(f"group {group} does not match dimension {n}")
        self.group = group

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, n={self.n})"

    def __str__(self):
        return self.name

    # -- public API -----------------------------------------------------

    def evaluate(self, x, y, F):
        F = self._checked(F)
        return self._value(_points(x, F, self.n), _points(y, F, self.n), F)

    def __call__(self, F, y=None, x=None):
        return self.evaluate(x, y, F)

    def dW_dF(self, y, F, x=None):
        """``dW / dF_ij`` with the same batch shape as ``F``."""
        F = self._checked(F)
        return self._grad_F(_points(x, F, self.n), _points(y, F, self.n), F)

    def d2W_dF2(self, y, F, x=None):
        """``d2W / dF_ij dF_kl`` with shape ``(..., n, n, n, n)``."""
        F = self._checked(F)
        return self._hess_F(_points(x, F, self.n), _points(y, F, self.n), F)

    def dW_dy(self, y, F, x=None):
        F = self._checked(F)
        return self._grad_y(_points(x, F, self.n), _points(y, F, self.n), F)

    def dW_dx(self, y, F, x=None):
        """Explicit ``x``-derivative (zero unless the potential depends on ``x``)."""
        F = self._checked(F)
        x = _points(x, F, self.n)
        y = _points(y, F, self.n)
        if not self._depends_on_x:
            return np.zeros(x.shape)
        return _fd_vector(lambda xx: self._value(xx, y, F), x)

    # -- overridable pieces ---------------------------------------------

    _depends_on_x = False

    def _value(self, x, y, F):
        raise NotImplementedError

    def _grad_F(self, x, y, F):
        return _fd_matrix(lambda G: self._value(x, y, G), F)

    def _hess_F(self, x, y, F):
        return _fd_hessian(lambda G: self._value(x, y, G), F)

    def _grad_y(self, x, y, F):
        if self.homogeneous:
            return np.zeros(y.shape)
        return _fd_vector(lambda yy: self._value(x, yy, F), y)

    def _checked(self, F):
        F = _as_batch(F, self.n)
        if self.group is not None:
            res = residual(self.group, F)
            if np.any(res > DOMAIN_TOL):
                raise DomainError(
                    f"{self.name}: matrix outside {self.group} (residual {float(np.max(res)):.3g})"
                )
        return F

    # linear combinations keep the analytic derivatives of the parts
    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, other)])

    def __mul__(self, c):
        return LinearCombination([(float(c), self)])

    __rmul__ = __mul__

    def __sub__(self, other):
        return LinearCombination([(1.0, self), (-1.0, other)])


def _fd_matrix(f, F):
    h = H_FD * np.maximum(1.0, np.sqrt(np.sum(F * F, axis=(-2, -1))))[..., None, None]
    n = F.shape[-1]
    out = np.empty(F.shape)
    for i, j in itertools.product(range(n), range(n)):
        E = np.zeros((n, n))
        E[i, j] = 1.0
        out[..., i, j] = (f(F + h * E) - f(F - h * E)) / (2.0 * h[..., 0, 0])
    return out


def _fd_hessian(f, F):
    n = F.shape[-1]
    h = H_FD2
    out = np.empty(F.shape[:-2] + (n, n, n, n))
    units = {}
    for i, j in itertools.product(range(n), range(n)):
        E = np.zeros((n, n))
        E[i, j] = h
        units[i, j] = E
    for (i, j), (k, l) in itertools.product(units, units):
        if (k, l) < (i, j):
            out[..., i, j, k, l] = out[..., k, l, i, j]
            continue
        A, B = units[i, j], units[k, l]
        out[..., i, j, k, l] = (f(F + A + B) - f(F + A - B) - f(F - A + B) + f(F - A - B)) / (4 * h * h)
    return out


def _fd_vector(f, y):
    h = H_FD * np.maximum(1.0, np.sqrt(np.sum(y * y, axis=-1)))[..., None]
    n = y.shape[-1]
    out = np.empty(y.shape)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        out[..., i] = (f(y + h * e) - f(y - h * e)) / (2.0 * h[..., 0])
    return out


# --------------------------------------------------------------------------
# families


class Minors(Lagrangian):
    """``W(F) = sum_sigma c_sigma minor_sigma(F)`` including the order-0 minor."""

    kind = Kind.MINORS

    def __init__(self, coeffs: dict, n, name=None, group=None):
        terms = {}
        for key, c in coeffs.items():
            rc = parse_minor_key(key, n)
            terms[rc] = terms.get(rc, 0.0) + float(c)
        self.terms = terms
        if name is None:
            name = " + ".join(f"{c:g}*{_minor_name(r, s, n)}" for (r, s), c in terms.items()) or "0"
        super().__init__(n, name, group)

    def _value(self, x, y, F):
        out = np.zeros(F.shape[:-2])
        for (r, c), coef in self.terms.items():
            out = out + coef * _subdet(F, r, c)
        return out

    def _parts(self, F, hessian):
        n = self.n
        g = np.zeros(F.shape)
        h = np.zeros(F.shape[:-2] + (n, n, n, n)) if hessian else None
        for (r, c), coef in self.terms.items():
            if not r:
                continue
            S = F[..., list(r), :][..., list(c)]
            _, gs, hs = minor_derivatives(S, hessian)
            g[..., np.ix_(r, c)[0], np.ix_(r, c)[1]] += coef * gs
            if hessian:
                ix = np.ix_(r, c, r, c)
                h[(Ellipsis,) + ix] += coef * hs
        return g, h

    def _grad_F(self, x, y, F):
        return self._parts(F, False)[0]

    def _hess_F(self, x, y, F):
        return self._parts(F, True)[1]


def _minor_name(rows, cols, n):
    if not rows:
        return "1"
    if len(rows) == n:
        return "det"
    r = "".join(str(i + 1) for i in rows)
    c = "".join(str(i + 1) for i in cols)
    return f"F{r}{c}" if len(rows) == 1 else f"M({r}|{c})"


def minors_lagrangian(coeffs: dict, n) -> Minors:
    """Linear combination of minors of ``F``.

    Examples
    --------
    >>> W = minors_lagrangian({"det": 1, "12|12": 2}, 3)
    >>> float(W(np.diag([1.0, 2.0, 3.0])))
    10.0
    """
    return Minors(coeffs, n)


class Affine(Lagrangian):
    """``W(F) = <a, F> + b``."""

    kind = Kind.AFFINE

    def __init__(self, a, b=0.0, name=None, group=None):
        self.a = np.atleast_2d(np.asarray(a, dtype=float))
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise InvalidArgument(f"affine coefficient must be square, got {self.a.shape}")
        self.b = float(b)
        if name is None:
            name = "affine:" + ",".join(f"{v:g}" for v in self.a.ravel()) + f":{self.b:g}"
        super().__init__(n, name, group)

    def _value(self, x, y, F):
        return np.einsum("...ij,ij->...", F, self.a) + self.b

    def _grad_F(self, x, y, F):
        return np.broadcast_to(self.a, F.shape).copy()

    def _hess_F(self, x, y, F):
        n = self.n
        return np.zeros(F.shape[:-2] + (n, n, n, n))


class Quadratic(Lagrangian):
    """``W(F) = sum Q_ijkl F_ij F_kl + <L, F> + c``."""

    kind = Kind.QUADRATIC

    def __init__(self, Q, L=None, c=0.0, name="quadratic", group=None):
        Q = np.asarray(Q, dtype=float)
        n = Q.shape[0]
        if Q.shape != (n, n, n, n):
            raise InvalidArgument(f"Q must have shape (n, n, n, n), got {Q.shape}")
        self.Q = Q
        self.L = np.zeros((n, n)) if L is None else np.asarray(L, dtype=float)
        self.c = float(c)
        # symmetric part drives both derivatives
        self._S = Q + Q.transpose(2, 3, 0, 1)
        super().__init__(n, name, group)

    @classmethod
    def frobenius(cls, n, scale=1.0):
        """``scale * |F|^2``."""
        eye = np.eye(n)
        return cls(scale * np.einsum("ik,jl->ijkl", eye, eye), name="frob2" if scale == 1 else f"{scale:g}*frob2")

    @classmethod
    def component_squared(cls, n, i=0, j=0):
        """``F_ij^2``."""
        Q = np.zeros((n, n, n, n))
        Q[i, j, i, j] = 1.0
        return cls(Q, name=f"comp{i + 1}{j + 1}sq")

    def _value(self, x, y, F):
        return (
            np.einsum("...ij,ijkl,...kl->...", F, self.Q, F)
            + np.einsum("...ij,ij->...", F, self.L)
            + self.c
        )

    def _grad_F(self, x, y, F):
        return np.einsum("ijkl,...kl->...ij", self._S, F) + self.L

    def _hess_F(self, x, y, F):
        return np.broadcast_to(self._S, F.shape[:-2] + self._S.shape).copy()


def _call_scalar_fn(fn, d, shape):
    """Evaluate ``fn`` on an array of determinants; vectorised when possible."""
    try:
        out = np.asarray(fn(d), dtype=float)
        if out.shape == d.shape + shape:
            return out
        if out.shape == shape:
            return np.broadcast_to(out, d.shape + shape).copy()
    except (TypeError, ValueError):
        pass
    flat = [np.asarray(fn(float(v)), dtype=float) for v in d.ravel()]
    return np.array(flat).reshape(d.shape + shape)


class DetWeightedAffine(Lagrangian):
    """``W(F) = <a(det F), F> + b(det F)``.

    ``a'`` and ``b'`` come from fourth-order central differences in ``d``;
    the Hessian differences that gradient the same way.
    """

    kind = Kind.DET_WEIGHTED_AFFINE

    def __init__(self, a: Callable, b: Callable, n, name="det_weighted_affine", group=None):
        self.a, self.b = a, b
        super().__init__(n, name, group)

    def _ab(self, d):
        return _call_scalar_fn(self.a, d, (self.n, self.n)), _call_scalar_fn(self.b, d, ())

    def _value(self, x, y, F):
        A, B = self._ab(np.linalg.det(F))
        return np.einsum("...ij,...ij->...", A, F) + B

    def _grad_F(self, x, y, F):
        d = np.linalg.det(F)
        h = H_DET * np.maximum(1.0, np.abs(d))
        dA = _five_point(lambda t: self._ab(t)[0], d, h)
        dB = _five_point(lambda t: self._ab(t)[1], d, h)
        A, _ = self._ab(d)
        s = np.einsum("...ij,...ij->...", dA, F) + dB
        return A + s[..., None, None] * cofactor(F)

    def _hess_F(self, x, y, F):
        n = self.n
        out = np.empty(F.shape[:-2] + (n, n, n, n))
        for k, l in itertools.product(range(n), range(n)):
            E = np.zeros((n, n))
            E[k, l] = 1.0
            # d2W/dF_ij dF_kl lands at [..., i, j, k, l]
            out[..., k, l] = _five_point(lambda t: self._grad_F(x, y, F + t[..., None, None] * E),
                                         np.zeros(F.shape[:-2]), np.full(F.shape[:-2], H_DET))
        return out


def _five_point(f, t, h):
    """Fourth-order central difference of ``f`` at ``t`` (``h`` shaped like ``t``)."""
    out = -f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)
    scale = 12 * np.asarray(h, dtype=float)
    return out / scale.reshape(scale.shape + (1,) * (out.ndim - scale.ndim))


def det_weighted_affine(a: Callable, b: Callable, n=2) -> DetWeightedAffine:
    """``W(F) = a_ij(det F) F_ij + b(det F)``.

    Examples
    --------
    >>> W = det_weighted_affine(lambda d: np.array([[d, 0.0], [0.0, 0.0]]), lambda d: d**2)
    >>> float(W(np.diag([2.0, 1.0])))
    8.0
    """
    return DetWeightedAffine(a, b, n)


class Custom(Lagrangian):
    """Wraps a vectorised callable ``f(x, y, F)``; all derivatives by differences."""

    kind = Kind.CUSTOM

    def __init__(self, fn: Callable, n, name="custom", homogeneous=True, depends_on_x=False, group=None):
        self.fn = fn
        self.homogeneous = bool(homogeneous)
        self._depends_on_x = bool(depends_on_x)
        super().__init__(n, name, group)

    def _value(self, x, y, F):
        return np.asarray(self.fn(x, y, F), dtype=float)


class Constant(Lagrangian):
    kind = Kind.MINORS

    def __init__(self, c, n):
        self.c = float(c)
        super().__init__(n, f"const:{self.c:g}")

    def _value(self, x, y, F):
        return np.full(F.shape[:-2], self.c)

    def _grad_F(self, x, y, F):
        return np.zeros(F.shape)

    def _hess_F(self, x, y, F):
        n = self.n
        return np.zeros(F.shape[:-2] + (n, n, n, n))


class LinearCombination(Lagrangian):
    """``sum_k c_k W_k`` with derivatives summed termwise."""

    def __init__(self, terms):
        flat = []
        for c, W in terms:
            if isinstance(W, LinearCombination):
                flat.extend((c * c2, W2) for c2, W2 in W.terms)
            else:
                flat.append((c, W))
        dims = {W.n for _, W in flat}
        if len(dims) != 1:
            raise InvalidArgument(f"cannot combine lagrangians of dimensions {sorted(dims)}")
        self.terms = flat
        self.homogeneous = all(W.homogeneous for _, W in flat)
        self._depends_on_x = any(W._depends_on_x for _, W in flat)
        kinds = {W.kind for _, W in flat}
        self.kind = kinds.pop() if len(kinds) == 1 else Kind.CUSTOM
        name = " + ".join(f"{c:g}*{W.name}" for c, W in flat)
        super().__init__(dims.pop(), name)

    def _combine(self, attr, x, y, F):
        return sum(c * getattr(W, attr)(x, y, F) for c, W in self.terms)

    def _value(self, x, y, F):
        return self._combine("_value", x, y, F)

    def _grad_F(self, x, y, F):
        return self._combine("_grad_F", x, y, F)

    def _hess_F(self, x, y, F):
        return self._combine("_hess_F", x, y, F)

    def _grad_y(self, x, y, F):
        return self._combine("_grad_y", x, y, F)


# --------------------------------------------------------------------------
# differential forms and their pullback potentials


class DifferentialForm:
    """An ``r``-form ``alpha = sum_I c_I(y) dy^I`` on ``R^n``.

    ``coefficients(y)`` returns a dict mapping increasing zero-based index
    tuples ``I`` to arrays broadcastable to ``y.shape[:-1]``.
    """

    def __init__(self, degree, coefficients: Callable, n, name="alpha"):
        if not 0 <= degree <= n:
            raise InvalidArgument(f"form degree {degree} not in [0, {n}]")
        self.degree, self.n, self.name = degree, n, name
        self.coefficients = coefficients

    @classmethod
    def constant(cls, comps: dict, n, name="alpha"):
        comps = {tuple(k): float(v) for k, v in comps.items()}
        degree = {len(k) for k in comps}
        if len(degree) != 1:
            raise InvalidArgument("all components of a form must share one degree")
        return cls(degree.pop(), lambda y: comps, n, name)

    def __call__(self, y, vectors):
        """``alpha(y)(w_1, ..., w_r)`` for ``vectors`` of shape ``(..., r, n)``."""
        y = np.asarray(y, dtype=float)
        w = np.asarray(vectors, dtype=float)
        out = np.zeros(np.broadcast_shapes(y.shape[:-1], w.shape[:-2]))
        for I, c in self.coefficients(y).items():
            if len(I) != self.degree:
                raise InvalidArgument(f"component {I} has the wrong degree")
            if self.degree == 0:
                out = out + c
                continue
            A = w[..., :, list(I)]  # (..., r, r): rows are vectors
            out = out + c * np.linalg.det(A)
        return out


def calabi_form() -> DifferentialForm:
    """The 1-form ``y dx`` on ``R^2`` (coordinates ``(x, y) = (y_1, y_2)``)."""
    return DifferentialForm(1, lambda y: {(0,): y[..., 1]}, 2, name="y dx")


class Pullback(Lagrangian):
    """``W(y, F) = alpha(y)(F v_1, ..., F v_r)``: the pullback of a form
    evaluated on fixed vectors.  Depends on ``y``, so not homogeneous."""

    kind = Kind.PULLBACK
    homogeneous = False

    def __init__(self, alpha: DifferentialForm, vectors, name=None):
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        if alpha.degree == 0:
            V = np.zeros((0, alpha.n))
        if V.shape != (alpha.degree, alpha.n):
            raise InvalidArgument(
                f"need {alpha.degree} vectors of length {alpha.n}, got shape {V.shape}"
            )
        self.alpha, self.V = alpha, V
        if name is None:
            name = f"pullback[{alpha.name}]"
        super().__init__(alpha.n, name)

    def _images(self, F):
        # rows F v_k
        return np.einsum("...ij,kj->...ki", F, self.V)

    def _value(self, x, y, F):
        return self.alpha(y, self._images(F))

    def _parts(self, y, F, hessian):
        n, r = self.n, self.alpha.degree
        g = np.zeros(F.shape)
        h = np.zeros(F.shape[:-2] + (n, n, n, n)) if hessian else None
        if r == 0:
            return g, h
        W = self._images(F)
        for I, c in self.alpha.coefficients(y).items():
            c = np.asarray(c, dtype=float)
            # B[p, k] = (F v_k)_{I_p}
            B = np.swapaxes(W[..., :, list(I)], -1, -2)
            _, gB, hB = minor_derivatives(B, hessian)
            # dB[p, k] / dF[i, j] = [i == I_p] v_kj
            g[..., list(I), :] += np.einsum("...pk,kj->...pj", c[..., None, None] * gB, self.V)
            if hessian:
                t = np.einsum("...pkql,kj,lm->...pjqm", c[..., None, None, None, None] * hB, self.V, self.V)
                ix = np.ix_(I, range(n), I, range(n))
                h[(Ellipsis,) + ix] += t
        return g, h

    def _grad_F(self, x, y, F):
        return self._parts(y, F, False)[0]

    def _hess_F(self, x, y, F):
        return self._parts(y, F, True)[1]


def pullback_potential(alpha: DifferentialForm, vectors) -> Pullback:
    """The potential ``(y, F) -> alpha(y)(F v_1, ..., F v_r)``."""
    return Pullback(alpha, vectors)


def calabi_potential(v=(1.0, 0.0)) -> Pullback:
    """Pullback of ``y dx`` on the vector ``v``: ``W = y_2 (F v)_1``."""
    return Pullback(calabi_form(), [v], name="calabi")


# --------------------------------------------------------------------------
# algebra-valued forms


class AlgebraForm:
    """A degree-``s`` form over the Lie algebra: ``(y, F, H_1..H_s) -> real``,
    alternating in the ``H`` arguments.

    ``grad_F(y, F, H)`` (degree 1 only) gives the ``F``-gradient of the frozen
    scalar ``(y, F) -> w(y, F)(H)``; without it that gradient is taken by
    central differences.
    """

    def __init__(self, degree, evaluator: Callable, n, grad_F: Callable | None = None, name="w"):
        if degree < 0:
            raise InvalidArgument("form degree must be non-negative")
        self.degree, self.n, self.name = degree, n, name
        self.evaluator = evaluator
        self._grad_F = grad_F

    def __call__(self, y, F, *H):
        if len(H) != self.degree:
            raise InvalidArgument(f"{self.name} takes {self.degree} algebra arguments, got {len(H)}")
        return self.evaluator(y, F, *H)

    def frozen(self, *H) -> Lagrangian:
        """The scalar potential ``(y, F) -> w(y, F)(H...)`` with ``H`` fixed."""
        H = tuple(np.asarray(h, dtype=float) for h in H)
        form = self

        class _Frozen(Lagrangian):
            homogeneous = False

            def _value(self, x, y, F):
                return np.asarray(form.evaluator(y, F, *H), dtype=float)

            def _grad_F(self, x, y, F):
                if form._grad_F is not None and len(H) == 1:
                    return form._grad_F(y, F, H[0])
                return _fd_matrix(lambda G: self._value(x, y, G), F)

        return _Frozen(self.n, name=f"{self.name}[frozen]")

    @classmethod
    def trace_form(cls, n):
        """``w(y, F)(H) = tr H``."""
        return cls(
            1,
            lambda y, F, H: np.broadcast_to(np.trace(H, axis1=-2, axis2=-1), np.shape(F)[:-2]),
            n,
            grad_F=lambda y, F, H: np.zeros(np.shape(F)),
            name="tr",
        )


# --------------------------------------------------------------------------
# name parsing


def parse_lagrangian(text: str, n: int) -> Lagrangian:
    """Build a lagrangian from its command-line name.

    ``det``, ``minor:<rows>|<cols>``, ``affine:<a row-major csv>:<b>``,
    ``frob2``, ``comp:<ij>``, ``comp11sq``, ``calabi``, ``const:<c>``.
    """
    t = text.strip()
    head, _, rest = t.partition(":")
    head = head.lower()
    try:
        if head == "det":
            W = Minors({"det": 1.0}, n, name="det")
        elif head == "minor":
            W = Minors({rest: 1.0}, n, name=f"minor:{rest}")
        elif head == "affine":
            a_txt, _, b_txt = rest.partition(":")
            a = np.array([float(v) for v in a_txt.split(",")])
            if a.size != n * n:
                raise InvalidArgument(f"affine coefficient needs {n * n} entries, got {a.size}")
            W = Affine(a.reshape(n, n), float(b_txt) if b_txt else 0.0, name=t)
        elif head == "frob2":
            W = Quadratic.frobenius(n)
        elif head == "comp":
            rows, cols = parse_minor_key(rest, n)
            if len(rows) != 1:
                raise InvalidArgument(f"comp needs a single entry, got {rest!r}")
            W = Minors({rest: 1.0}, n, name=f"comp:{rest}")
        elif head.startswith("comp") and head.endswith("sq") and len(head) == 8:
            i, j = int(head[4]) - 1, int(head[5]) - 1
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidArgument(f"component {head} out of range for n={n}")
            W = Quadratic.component_squared(n, i, j)
        elif head == "calabi":
            if n != 2:
                raise InvalidArgument("the calabi potential lives on R^2")
            W = calabi_potential()
        elif head == "const":
            W = Constant(float(rest), n)
        else:
            raise InvalidArgument(f"unknown lagrangian {text!r}")
    except ValueError as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise InvalidArgument(f"cannot parse lagrangian {text!r}: {exc}") from exc
    return W

"""The derivation D on potentials and algebra forms, Euler-Lagrange operators,
second variations and rank-one tests.

Conventions: ``(F H)_ij = F_ik H_kj``, ``<A, B> = sum_ij A_ij B_ij`` and
``[P, H] = P H - H P``.  The classical Euler-Lagrange operator takes the
divergence along the second index of ``dW/dF``::

    E_i = dW/dy_i - sum_j d/dx_j (dW/dF_ij)(x, u(x), grad u(x))

which is the form that vanishes identically on minors (the Piola identity
``div cof grad u = 0``).  With it, for ``eta`` compactly supported,

    d/dt I_W(u o phi_{-t}) |_{t=0} = - int E(u) . (grad u eta) dx
                                   = int D0 W(u, grad u)(grad eta) dx

(the last equality for potentials without explicit ``x`` dependence).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, InvalidArgument
from .fields import CompactField
from .flows import FlowMap, Map
from .groups import GL, GroupSpec, member, random_algebra_element, random_elements
from .lagrangians import AlgebraForm, Lagrangian
from .quadrature import Domain, Estimate, quadrature_sum

H_EL_REL = 1e-4
DELTA_T = 1e-3
RANK_ONE_T = (-1.0, -0.5, 0.0, 0.5, 1.0)


def _tr(H):
    return np.trace(H, axis1=-2, axis2=-1)


def _pair(A, B):
    return np.sum(A * B, axis=(-2, -1))


def D0(w: Lagrangian, y, F, H, x=None):
    """``D w(y, F) H = w(y, F) tr H - <dw/dF(y, F), F H>``."""
    F = np.asarray(F, dtype=float)
    H = np.asarray(H, dtype=float)
    return w.evaluate(x, y, F) * _tr(H) - _pair(w.dW_dF(y, F, x), F @ H)


class DerivedForm(AlgebraForm):
    """``D`` applied to a potential or to a degree-1 algebra form."""

    def __init__(self, base, degree, evaluator, n, grad_F=None):
        super().__init__(degree, evaluator, n, grad_F=grad_F, name=f"D({getattr(base, 'name', 'w')})")
        self.base = base


def D0_form(w: Lagrangian) -> DerivedForm:
    """``D w`` as a degree-1 algebra form.

    The ``F``-gradient of the frozen scalar ``(y, F) -> D w(y, F) H`` is
    analytic given the Hessian of ``w``::

        G tr H - K[F H] - G H^T,   G = dw/dF,  K = d2w/dF2
    """

    def evaluator(y, F, H):
        return D0(w, y, F, H)

    def grad_F(y, F, H):
        G = w.dW_dF(y, F)
        K = w.d2W_dF2(y, F)
        FH = np.asarray(F) @ H
        return G * _tr(H)[..., None, None] - np.einsum("...ijkl,...kl->...ij", K, FH) - G @ np.swapaxes(H, -1, -2)

    return DerivedForm(w, 1, evaluator, w.n, grad_F)


def D1(w: AlgebraForm, y, F, H, P):
    """``D w(y, F)(H, P) = D(w_H) P - D(w_P) H + w([P, H])`` for a degree-1 form,
    where ``w_H`` is the scalar ``(y, F) -> w(y, F)(H)``."""
    if w.degree != 1:
        raise InvalidArgument(f"D1 needs a degree-1 form, got degree {w.degree}")
    H = np.asarray(H, dtype=float)
    P = np.asarray(P, dtype=float)
    return D0(w.frozen(H), y, F, P) - D0(w.frozen(P), y, F, H) + w(y, F, P @ H - H @ P)


def D1_form(w: AlgebraForm) -> DerivedForm:
    return DerivedForm(w, 2, lambda y, F, H, P: D1(w, y, F, H, P), w.n)


def d_squared_residual(w: Lagrangian, samples: int = 50, seed: int = 0,
                       group: GroupSpec | None = None, scale: float = 0.5) -> float:
    """``max |D(D w)(y, F)(H, P)|`` over seeded samples.

    ``F`` is drawn from ``group`` (default GL), ``H, P`` from its algebra and
    ``y`` uniformly from ``[-1, 1]^n``.
    """
    if samples < 1:
        raise InvalidArgument(f"samples must be >= 1, got {samples}")
    g = GL(w.n) if group is None else group
    rng = np.random.default_rng(seed)
    F = random_elements(g, samples, scale, rng)
    H = np.stack([random_algebra_element(g, rng) for _ in range(samples)])
    P = np.stack([random_algebra_element(g, rng) for _ in range(samples)])
    y = rng.uniform(-1.0, 1.0, size=(samples, w.n))
    Dw = D0_form(w)
    return float(np.max(np.abs(D1(Dw, y, F, H, P))))


# --------------------------------------------------------------------------
# Euler-Lagrange


def _check_inside(dom: Domain | None, pts):
    if dom is not None and not np.all(dom.contains(pts)):
        raise DomainError("finite-difference probes leave the domain")


def _el(W: Lagrangian, u: Map, x, h, dom):
    """Classical operator at points ``x`` (N, n) with divergence step ``h``."""
    N, n = x.shape
    y, J = u.value_and_jacobian(x)
    out = W.dW_dy(y, J, x)
    # all 2n shifted copies in one batch
    shifts = np.concatenate([h * np.eye(n), -h * np.eye(n)])
    probes = (x[None, :, :] + shifts[:, None, :]).reshape(-1, n)
    _check_inside(dom, probes)
    yp, Jp = u.value_and_jacobian(probes)
    G = W.dW_dF(yp, Jp, probes).reshape(2 * n, N, n, n)
    for j in range(n):
        out = out - (G[j, :, :, j] - G[n + j, :, :, j]) / (2.0 * h)
    return out


def _el_step(dom, h_el):
    if h_el is not None:
        return float(h_el)
    side = 1.0 if dom is None else float(np.min(dom.sides))
    return H_EL_REL * side


def classical_EL(W: Lagrangian, u: Map, x, h_el: float | None = None, dom: Domain | None = None):
    """``E_i = dW/dy_i - sum_j d/dx_j (dW/dF_ij)`` along the map ``u``.

    The divergence is a central difference of ``x -> dW/dF(x, u(x), grad u(x))``
    with step ``h_el`` (default ``1e-4`` times the smallest side of ``dom``,
    or ``1e-4``).
    """
    single = np.ndim(x) == 1
    x = np.atleast_2d(np.asarray(x, dtype=float))
    E = _el(W, u, x, _el_step(dom, h_el), dom)
    return E[0] if single else E


@dataclass(frozen=True)
class ELPairing:
    """Both sides of the first-variation identity for one ``(W, u, eta)``.

    ``eula = int E(u) . (grad u eta)``; ``flow_derivative`` is
    ``d/dt I_W(u o phi_{-t})`` at 0; ``der = int D0 W(u, grad u)(grad eta)``
    (plus ``int dW/dx . eta`` for explicitly ``x``-dependent potentials).
    The identity predicts ``eula = -flow_derivative = -der``.
    """

    eula: float
    eula_error: float
    flow_derivative: float
    flow_error: float
    der: float
    der_error: float

    @property
    def discrepancy(self):
        return abs(self.eula + self.flow_derivative)

    @property
    def combined_error(self):
        return self.eula_error + self.flow_error

    def agrees(self, floor=1e-5, factor=3.0):
        return self.discrepancy <= max(floor, factor * self.combined_error)

    def to_dict(self):
        d = asdict(self)
        d.update(discrepancy=self.discrepancy, combined_error=self.combined_error)
        return d


def _support_nodes(eta: CompactField, dom: Domain):
    pts, w = dom.nodes()
    m = eta.support_mask(pts)
    return pts[m], w[m]


def _flow_integral(W, u, eta, t, pts, w):
    """``int [W(u o phi_{-t}) - W(u)]`` over the support nodes of ``eta``."""
    phi = FlowMap(eta, -t)
    z, Jphi = phi.value_and_jacobian(pts)
    y, Ju = u.value_and_jacobian(z)
    y0, J0 = u.value_and_jacobian(pts)
    return quadrature_sum(W.evaluate(pts, y, Ju @ Jphi) - W.evaluate(pts, y0, J0), w, pts)


def _five_point_derivative(f, d):
    return (-f(2 * d) + 8 * f(d) - 8 * f(-d) + f(-2 * d)) / (12 * d)


def _first_variation(W, u, eta, pts, w, d):
    return _five_point_derivative(lambda t: _flow_integral(W, u, eta, t, pts, w), d)


def EL_pairing(W: Lagrangian, u: Map, eta: CompactField, dom: Domain,
               delta_t: float = DELTA_T, h_el: float | None = None) -> ELPairing:
    """Quadrature of ``E(u) . (grad u eta)`` together with the flow derivative
    and the ``D0`` form, each with an error estimate.

    Error estimates add the change under halving the grid to the change under
    doubling the finite-difference step (``h_el`` for the divergence,
    ``delta_t`` for the time derivative).
    """
    h = _el_step(dom, h_el)
    fine = _support_nodes(eta, dom)
    coarse = _support_nodes(eta, dom.coarse())

    def eula_on(nodes, step):
        pts, w = nodes
        if len(pts) == 0:
            return 0.0
        E = _el(W, u, pts, step, dom)
        _, J = u.value_and_jacobian(pts)
        v = np.einsum("nij,nj->ni", J, eta.value(pts))
        return quadrature_sum(np.sum(E * v, axis=-1), w, pts)

    def der_on(nodes):
        pts, w = nodes
        if len(pts) == 0:
            return 0.0
        y, J = u.value_and_jacobian(pts)
        v, G = eta.value_and_gradient(pts)
        vals = D0(W, y, J, G, x=pts) + np.sum(W.dW_dx(y, J, pts) * v, axis=-1)
        return quadrature_sum(vals, w, pts)

    e = eula_on(fine, h)
    e_err = abs(e - eula_on(coarse, h)) + abs(e - eula_on(fine, 2 * h))
    f = _first_variation(W, u, eta, *fine, delta_t) if len(fine[0]) else 0.0
    f_coarse = _first_variation(W, u, eta, *coarse, delta_t) if len(coarse[0]) else 0.0
    f_half = _first_variation(W, u, eta, *fine, delta_t / 2) if len(fine[0]) else 0.0
    f_err = abs(f - f_coarse) + abs(f - f_half)
    d = der_on(fine)
    d_err = abs(d - der_on(coarse))
    return ELPairing(e, e_err, f, f_err, d, d_err)


# --------------------------------------------------------------------------
# second-order conditions


def legendre_hadamard(W: Lagrangian, F, a, b, y=None) -> float:
    """``d2W/dF_ij dF_kl a_i b_j a_k b_l``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.linalg.norm(a) > 0 and np.linalg.norm(b) > 0):
        raise InvalidArgument("legendre_hadamard needs nonzero a and b")
    K = W.d2W_dF2(y, F)
    return float(np.einsum("...ijkl,i,j,k,l->...", K, a, b, a, b))


def _second_variation(W, F, eta, pts, w, d):
    W0 = W.evaluate(None, None, F)

    def I(t):
        if t == 0.0:
            return 0.0
        J = FlowMap(eta, -t).jacobian(pts)
        return quadrature_sum(W.evaluate(None, None, F @ J) - W0, w, pts)

    return (-I(2 * d) + 16 * I(d) - 30 * I(0.0) + 16 * I(-d) - I(-2 * d)) / (12 * d * d)


def second_variation_residual(W: Lagrangian, F, eta: CompactField, dom: Domain,
                              delta_t: float = DELTA_T) -> Estimate:
    """``d2/dt2 int W(F grad phi_{-t}) dx`` at ``t = 0`` with an error bar.

    Five-point central difference in ``t``; the error bar adds the change
    under halving ``delta_t`` to the change under halving the grid.
    """
    if not W.homogeneous:
        raise InvalidArgument("second variation is defined here for homogeneous potentials")
    F = np.asarray(F, dtype=float)
    if W.group is not None and not member(W.group, F, tol=1e-6):
        raise DomainError(f"F is not in {W.group}")
    fine = _support_nodes(eta, dom)
    coarse = _support_nodes(eta, dom.coarse())
    if len(fine[0]) == 0:
        return Estimate(0.0, 0.0)
    s = _second_variation(W, F, eta, *fine, delta_t)
    err = abs(s - _second_variation(W, F, eta, *fine, delta_t / 2))
    if len(coarse[0]):
        err += abs(s - _second_variation(W, F, eta, *coarse, delta_t))
    return Estimate(s, err)


def rank_one_linearity_defect(W: Lagrangian, F, a, b, t_grid=RANK_ONE_T,
                              group: GroupSpec | None = None, y=None) -> float:
    """RMS residual of the best affine fit to ``t -> W(F (I + t a b^T))``.

    Requires ``a . b = 0`` so that the line stays in SL whenever ``F`` does.
    """
    F = np.asarray(F, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if abs(a @ b) > 1e-12:
        raise InvalidArgument(f"rank-one direction needs a . b = 0, got {a @ b:.3g}")
    t = np.asarray(t_grid, dtype=float)
    if t.size < 2:
        raise InvalidArgument("need at least two t values")
    n = F.shape[-1]
    line = F @ (np.eye(n) + t[:, None, None] * np.outer(a, b))
    if group is not None and not np.all(member(group, line, tol=1e-6)):
        raise DomainError(f"rank-one line leaves {group}")
    f = W.evaluate(None, y, line)
    A = np.stack([np.ones_like(t), t], axis=1)
    coef, *_ = np.linalg.lstsq(A, f, rcond=None)
    return float(np.sqrt(np.mean((f - A @ coef) ** 2)))


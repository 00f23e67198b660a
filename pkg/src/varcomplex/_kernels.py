"""Compiled kernels for RK4 flows of compact fields.

Points are processed in fixed-size chunks with the point index innermost, so
the polynomial and bump arithmetic vectorises.  The field formulas mirror
``CompactField._evaluate``; ``tests/test_flows.py`` checks the two against
each other.
"""

import math

import numpy as np
from numba import njit

KIND_CODES = {"zero": 0, "gl": 1, "hamiltonian": 2, "curl": 3}
_Q_CUTOFF = 700.0
CHUNK = 128


@njit(cache=True, error_model="numpy")
def _field_chunk(kind, Y, cnt, center, radius, fac, exps, block, P, omega, want_jac,
                 v, J, B0, B1, B2, D, Z, T, R, g, h):
    """Field values ``v[:, :cnt]`` and Jacobians ``J[:, :, :cnt]`` at ``Y[:, :cnt]``.

    ``D`` holds ``(y - c) / rho``; ``B0, B1, B2`` the bump and its derivatives
    with respect to ``s = |D|^2`` (all zero outside the ball).
    """
    n = Y.shape[0]
    M = exps.shape[0]
    r2 = radius * radius
    for a in range(cnt):
        s = 0.0
        for i in range(n):
            d = (Y[i, a] - center[i]) / radius
            D[i, a] = d
            s += d * d
        B0[a] = 0.0
        B1[a] = 0.0
        B2[a] = 0.0
        if s < 1.0:
            q = 1.0 / (1.0 - s)
            if q < _Q_CUTOFF:
                b = math.exp(-q)
                B0[a] = b
                B1[a] = -b * q * q
                B2[a] = b * (2.0 * s - 1.0) * q * q * q * q
    # powers z_j^e for e <= 3 (polynomial degree bound)
    for j in range(n):
        for a in range(cnt):
            z = D[j, a]
            Z[j, 0, a] = 1.0
            Z[j, 1, a] = z
            Z[j, 2, a] = z * z
            Z[j, 3, a] = z * z * z
    for m in range(M):
        for a in range(cnt):
            T[m, a] = Z[0, exps[m, 0], a]
        for j in range(1, n):
            e = exps[m, j]
            for a in range(cnt):
                T[m, a] *= Z[j, e, a]
    # only the derivative orders actually needed
    order = (1 if want_jac else 0) + (0 if kind == 1 else 1)
    ncols = P if order == 0 else (P * (1 + n) if order == 1 else P * (1 + n + n * n))
    for c in range(ncols):
        for a in range(cnt):
            R[c, a] = 0.0
        for m in range(M):
            bmc = block[m, c]
            if bmc == 0.0:
                continue
            for a in range(cnt):
                R[c, a] += bmc * T[m, a]
    # with s = |D|^2: ds_k = 2 D_k / rho, potentials differentiate as R / rho
    if kind == 1:
        for p in range(P):
            for a in range(cnt):
                v[p, a] = fac * B0[a] * R[p, a]
            if want_jac:
                for k in range(n):
                    for a in range(cnt):
                        dsk = 2.0 * D[k, a] / radius
                        dpk = R[P + k * P + p, a] / radius
                        J[p, k, a] = fac * (B1[a] * dsk * R[p, a] + B0[a] * dpk)
        return
    # potentials with second derivatives: gradient g[p, k], Hessian h[p, k, l]
    for p in range(P):
        for k in range(n):
            for a in range(cnt):
                dsk = 2.0 * D[k, a] / radius
                dpk = R[P + k * P + p, a] / radius
                g[p, k, a] = fac * (B1[a] * dsk * R[p, a] + B0[a] * dpk)
            if not want_jac:
                continue
            for l in range(n):
                hc = P * (1 + n) + (k * n + l) * P + p
                for a in range(cnt):
                    dsk = 2.0 * D[k, a] / radius
                    dpk = R[P + k * P + p, a] / radius
                    dsl = 2.0 * D[l, a] / radius
                    dpl = R[P + l * P + p, a] / radius
                    hb = B2[a] * dsk * dsl
                    if k == l:
                        hb += 2.0 * B1[a] / r2
                    hp = R[hc, a] / r2
                    h[p, k, l, a] = fac * (hb * R[p, a] + B1[a] * dsk * dpl + dpk * B1[a] * dsl + B0[a] * hp)
    if kind == 2:
        for i in range(n):
            for a in range(cnt):
                v[i, a] = 0.0
            for k in range(n):
                w = omega[i, k]
                if w == 0.0:
                    continue
                for a in range(cnt):
                    v[i, a] += w * g[0, k, a]
            if want_jac:
                for j in range(n):
                    for a in range(cnt):
                        J[i, j, a] = 0.0
                    for k in range(n):
                        w = omega[i, k]
                        if w == 0.0:
                            continue
                        for a in range(cnt):
                            J[i, j, a] += w * h[0, k, j, a]
    else:
        for a in range(cnt):
            v[0, a] = g[2, 1, a] - g[1, 2, a]
            v[1, a] = g[0, 2, a] - g[2, 0, a]
            v[2, a] = g[1, 0, a] - g[0, 1, a]
        if want_jac:
            for j in range(3):
                for a in range(cnt):
                    J[0, j, a] = h[2, 1, j, a] - h[1, 2, j, a]
                    J[1, j, a] = h[0, 2, j, a] - h[2, 0, j, a]
                    J[2, j, a] = h[1, 0, j, a] - h[0, 1, j, a]


@njit(cache=True, error_model="numpy")
def rk4_flow(kind, X, center, radius, fac, exps, block, P, omega, t, steps, want_jac):
    """Integrate ``dy/dt = eta(y)`` (and ``dM/dt = grad eta(y) M``) per point."""
    N, n = X.shape
    Y = X.copy()
    Mout = np.zeros((N, n, n))
    for a in range(N):
        for i in range(n):
            Mout[a, i, i] = 1.0
    if steps == 0 or kind == 0:
        return Y, Mout
    # points outside the support ball never move
    active = np.empty(N, dtype=np.int64)
    na = 0
    r2 = radius * radius
    for a in range(N):
        s = 0.0
        for i in range(n):
            d = X[a, i] - center[i]
            s += d * d
        if s < r2:
            active[na] = a
            na += 1
    h = t / steps
    C = CHUNK
    M = exps.shape[0]
    y = np.empty((n, C))
    yt = np.empty((n, C))
    Mm = np.empty((n, n, C))
    Mt = np.empty((n, n, C))
    v = np.zeros((4, n, C))
    K = np.zeros((4, n, n, C))
    G = np.zeros((n, n, C))
    B0 = np.empty(C)
    B1 = np.empty(C)
    B2 = np.empty(C)
    D = np.empty((n, C))
    Z = np.empty((n, 4, C))
    T = np.empty((M, C))
    R = np.empty((block.shape[1], C))
    g = np.empty((P, n, C))
    hw = np.empty((P, n, n, C))
    cst = np.array([0.0, 0.5, 0.5, 1.0])
    for start in range(0, na, C):
        cnt = min(C, na - start)
        for a in range(cnt):
            idx = active[start + a]
            for i in range(n):
                y[i, a] = X[idx, i]
                for j in range(n):
                    Mm[i, j, a] = 1.0 if i == j else 0.0
        for _ in range(steps):
            for st in range(4):
                c = cst[st] * h
                for i in range(n):
                    for a in range(cnt):
                        yt[i, a] = y[i, a] + (c * v[st - 1, i, a] if st > 0 else 0.0)
                _field_chunk(kind, yt, cnt, center, radius, fac, exps, block, P, omega, want_jac,
                             v[st], G, B0, B1, B2, D, Z, T, R, g, hw)
                if want_jac:
                    for i in range(n):
                        for j in range(n):
                            for a in range(cnt):
                                Mt[i, j, a] = Mm[i, j, a] + (c * K[st - 1, i, j, a] if st > 0 else 0.0)
                    for i in range(n):
                        for j in range(n):
                            for a in range(cnt):
                                K[st, i, j, a] = 0.0
                            for k in range(n):
                                for a in range(cnt):
                                    K[st, i, j, a] += G[i, k, a] * Mt[k, j, a]
            for i in range(n):
                for a in range(cnt):
                    y[i, a] += (h / 6.0) * (v[0, i, a] + 2.0 * v[1, i, a] + 2.0 * v[2, i, a] + v[3, i, a])
            if want_jac:
                for i in range(n):
                    for j in range(n):
                        for a in range(cnt):
                            Mm[i, j, a] += (h / 6.0) * (
                                K[0, i, j, a] + 2.0 * K[1, i, j, a] + 2.0 * K[2, i, j, a] + K[3, i, j, a]
                            )
        for a in range(cnt):
            idx = active[start + a]
            for i in range(n):
                Y[idx, i] = y[i, a]
                for j in range(n):
                    Mout[idx, i, j] = Mm[i, j, a]
    return Y, Mout

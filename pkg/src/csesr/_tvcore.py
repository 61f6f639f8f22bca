"""Jitted kernels for the nonnegative TV-regularized least squares solver."""

import numpy as np
from numba import njit


@njit(cache=True)
def tv_denoise(v, lam):
    """Exact minimizer of 0.5*||x - v||^2 + lam * sum|x[i+1] - x[i]|.

    Direct (taut-string style) algorithm of L. Condat, IEEE SPL 2013.
    """
    n = v.size
    out = np.empty(n)
    if n == 0:
        return out
    if lam <= 0.0:
        out[:] = v
        return out
    k = 0
    k0 = 0
    kplus = 0
    kminus = 0
    umin = lam
    umax = -lam
    vmin = v[0] - lam
    vmax = v[0] + lam
    twolam = 2.0 * lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                while True:
                    out[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = k0
                kminus = k0
                vmin = v[k0]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                while True:
                    out[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = k0
                kplus = k0
                vmax = v[k0]
                umax = -lam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while True:
                    out[k0] = vmin
                    k0 += 1
                    if k0 > k:
                        break
                return out
        umin += v[k + 1] - vmin
        if umin < -lam:
            while True:
                out[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = k0
            kminus = k0
            kplus = k0
            vmin = v[k0]
            vmax = vmin + twolam
            umin = lam
            umax = -lam
            continue
        umax += v[k + 1] - vmax
        if umax > lam:
            while True:
                out[k0] = vmax
                k0 += 1
                if k0 > kplus:
                    break
            k = k0
            kminus = k0
            kplus = k0
            vmax = v[k0]
            vmin = vmax - twolam
            umin = lam
            umax = -lam
            continue
        k += 1
        if umin >= lam:
            kminus = k
            vmin += (umin - lam) / (kminus - k0 + 1)
            umin = lam
        if umax <= -lam:
            kplus = k
            vmax += (umax + lam) / (kplus - k0 + 1)
            umax = -lam


@njit(cache=True)
def prox_tv_nonneg(v, lam):
    """Prox of lam*TV plus the nonnegativity indicator.

    In 1-D the TV prox is order preserving, so clipping its output gives
    the prox of the sum.
    """
    x = tv_denoise(v, lam)
    for i in range(x.size):
        if x[i] < 0.0:
            x[i] = 0.0
    return x


@njit(cache=True)
def total_variation(a):
    s = 0.0
    for i in range(a.size - 1):
        s += abs(a[i + 1] - a[i])
    return s


@njit(cache=True)
def _objective(r, a, lam):
    return np.dot(r, r) + lam * total_variation(a)


@njit(cache=True)
def mfista(A, y, lam, x0, lip, tol, max_iter, history):
    """Monotone FISTA with restart for ||A a - y||^2 + lam*TV(a), a >= 0.

    `lip` is an upper estimate of the gradient Lipschitz constant
    2*||A||^2; it is doubled whenever a plain proximal-gradient step from
    the current iterate fails to decrease the objective. Returns
    ``(a, objective, iterations, converged, lip)``; objective values are
    written to `history` when it has room.
    """
    x = np.maximum(x0, 0.0)
    Ax = A @ x
    fx = _objective(Ax - y, x, lam)
    yv = x.copy()
    Ay = Ax.copy()
    t = 1.0
    plain = True
    converged = False
    it = 0
    nh = history.size
    if lip <= 0.0:
        return x, fx, 0, True, lip
    while it < max_iter:
        g = 2.0 * (A.T @ (Ay - y))
        z = prox_tv_nonneg(yv - g / lip, lam / lip)
        Az = A @ z
        fz = _objective(Az - y, z, lam)
        if it < nh:
            history[it] = min(fz, fx)
        it += 1
        if fz <= fx:
            rel = (fx - fz) / fx if fx > 0.0 else 0.0
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            beta = (t - 1.0) / t_new
            yv = z + beta * (z - x)
            Ay = Az + beta * (Az - Ax)
            x = z
            Ax = Az
            fx = fz
            t = t_new
            plain = False
            if rel < tol:
                converged = True
                break
        else:
            if plain:
                lip *= 2.0
            yv = x.copy()
            Ay = Ax.copy()
            t = 1.0
            plain = True
    return x, fx, it, converged, lip

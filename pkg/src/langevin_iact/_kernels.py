"""Compiled inner loops for the chain generators.

Each kernel advances a chain over a block of pre-drawn standard normal
variates and writes the visited states into caller-owned buffers.  Keeping
the random draws outside the kernels makes the generated chains independent
of the compilation backend.
"""

import math

import numpy as np
from numba import njit

QUADRATIC = 0
LEMA = 1
THREE_GAUSS = 2

_SQRT3_2 = math.sqrt(3.0) / 2.0


@njit(cache=True, nogil=True)
def force_into(code, prm, q, out):
    dim = q.shape[0]
    if code == QUADRATIC:
        for i in range(dim):
            s = 0.0
            for j in range(dim):
                s += prm[i * dim + j] * q[j]
            out[i] = -s
    elif code == LEMA:
        x = q[0]
        out[0] = -x * x * x - 5.0 * math.cos(1.0 + 5.0 * x)
    else:
        d = prm[0]
        x = q[0]
        y = q[1]
        cx0 = d
        cy0 = 0.0
        cx1 = -0.5 * d
        cy1 = _SQRT3_2 * d
        cx2 = -0.5 * d
        cy2 = -_SQRT3_2 * d
        e0 = -0.5 * ((x - cx0) ** 2 + (y - cy0) ** 2)
        e1 = -0.5 * ((x - cx1) ** 2 + (y - cy1) ** 2)
        e2 = -0.5 * ((x - cx2) ** 2 + (y - cy2) ** 2)
        top = max(e0, max(e1, e2))
        w0 = math.exp(e0 - top)
        w1 = math.exp(e1 - top)
        w2 = math.exp(e2 - top)
        tot = w0 + w1 + w2
        out[0] = -(w0 * (x - cx0) + w1 * (x - cx1) + w2 * (x - cx2)) / tot
        out[1] = -(w0 * (y - cy0) + w1 * (y - cy1) + w2 * (y - cy2)) / tot


@njit(cache=True, nogil=True)
def _matvec(a, x, out):
    n = x.shape[0]
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += a[i, j] * x[j]
        out[i] = s


@njit(cache=True, nogil=True)
def baoab_block(code, prm, q, p, f, minv, mh, dt, c1, c3, noise, q_out, p_out, stride, record):
    """Advance ``noise.shape[0]`` BAOAB steps in place.

    ``f`` must hold the force at ``q`` on entry and holds the force at the
    final ``q`` on exit.  Every ``stride``-th state is stored when ``record``.
    Returns the index of the first non-finite step, or -1.
    """
    dim = q.shape[0]
    h = 0.5 * dt
    v = np.empty(dim)
    r = np.empty(dim)
    k = 0
    for n in range(noise.shape[0]):
        for i in range(dim):
            p[i] += h * f[i]
        _matvec(minv, p, v)
        for i in range(dim):
            q[i] += h * v[i]
        _matvec(mh, noise[n], r)
        for i in range(dim):
            p[i] = c1 * p[i] + c3 * r[i]
        _matvec(minv, p, v)
        for i in range(dim):
            q[i] += h * v[i]
        force_into(code, prm, q, f)
        ok = True
        for i in range(dim):
            p[i] += h * f[i]
            if not (math.isfinite(q[i]) and math.isfinite(p[i])):
                ok = False
        if not ok:
            return n
        if record and (n + 1) % stride == 0:
            for i in range(dim):
                q_out[k, i] = q[i]
                p_out[k, i] = p[i]
            k += 1
    return -1


@njit(cache=True, nogil=True)
def baoab_replica_block(code, prm, q, p, f, minv, mh, dt, c1, c3, noise, noise2, q_out, p_out, q2_out, p2_out):
    """BAOAB steps that also record an independent one-step replica.

    The replica of step ``n`` shares the B and first A substeps with the main
    branch, draws its own O-step noise ``noise2[n]``, and is never fed back.
    """
    dim = q.shape[0]
    h = 0.5 * dt
    v = np.empty(dim)
    r = np.empty(dim)
    q2 = np.empty(dim)
    p2 = np.empty(dim)
    f2 = np.empty(dim)
    for n in range(noise.shape[0]):
        for i in range(dim):
            p[i] += h * f[i]
        _matvec(minv, p, v)
        for i in range(dim):
            q[i] += h * v[i]
        _matvec(mh, noise2[n], r)
        for i in range(dim):
            p2[i] = c1 * p[i] + c3 * r[i]
        _matvec(mh, noise[n], r)
        for i in range(dim):
            p[i] = c1 * p[i] + c3 * r[i]
        _matvec(minv, p2, v)
        for i in range(dim):
            q2[i] = q[i] + h * v[i]
        _matvec(minv, p, v)
        for i in range(dim):
            q[i] += h * v[i]
        force_into(code, prm, q2, f2)
        force_into(code, prm, q, f)
        ok = True
        for i in range(dim):
            p[i] += h * f[i]
            p2[i] += h * f2[i]
            if not (math.isfinite(q[i]) and math.isfinite(p[i]) and math.isfinite(q2[i]) and math.isfinite(p2[i])):
                ok = False
        if not ok:
            return n
        for i in range(dim):
            q_out[n, i] = q[i]
            p_out[n, i] = p[i]
            q2_out[n, i] = q2[i]
            p2_out[n, i] = p2[i]
    return -1


@njit(cache=True, nogil=True)
def linear_block(z, trans, chol, noise, z_out, stride, record):
    """``z <- trans @ z + chol @ xi`` for each row ``xi`` of ``noise``."""
    a = trans[0, 0]
    b = trans[0, 1]
    c = trans[1, 0]
    d = trans[1, 1]
    l00 = chol[0, 0]
    l10 = chol[1, 0]
    l11 = chol[1, 1]
    z0 = z[0]
    z1 = z[1]
    k = 0
    for n in range(noise.shape[0]):
        x0 = noise[n, 0]
        x1 = noise[n, 1]
        y0 = a * z0 + b * z1 + l00 * x0
        y1 = c * z0 + d * z1 + l10 * x0 + l11 * x1
        z0 = y0
        z1 = y1
        if record and (n + 1) % stride == 0:
            z_out[k, 0] = z0
            z_out[k, 1] = z1
            k += 1
    z[0] = z0
    z[1] = z1
    return -1


@njit(cache=True, nogil=True)
def linear_replica_block(z, trans, chol, noise, noise2, z_out, z2_out):
    a = trans[0, 0]
    b = trans[0, 1]
    c = trans[1, 0]
    d = trans[1, 1]
    l00 = chol[0, 0]
    l10 = chol[1, 0]
    l11 = chol[1, 1]
    z0 = z[0]
    z1 = z[1]
    for n in range(noise.shape[0]):
        m0 = a * z0 + b * z1
        m1 = c * z0 + d * z1
        x0 = noise2[n, 0]
        x1 = noise2[n, 1]
        z2_out[n, 0] = m0 + l00 * x0
        z2_out[n, 1] = m1 + l10 * x0 + l11 * x1
        x0 = noise[n, 0]
        x1 = noise[n, 1]
        z0 = m0 + l00 * x0
        z1 = m1 + l10 * x0 + l11 * x1
        z_out[n, 0] = z0
        z_out[n, 1] = z1
    z[0] = z0
    z[1] = z1
    return -1

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: unicycle rollout and the fused guidance objective.

Mirrors ``advscene.kernels.pure`` operation for operation; keep both in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, exp, fabs, M_PI

cnp.import_array()

BACKEND_NAME = "cython"

cdef double HALF_PI = M_PI / 2.0


cdef inline double _sign(double x) nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def rollout_unicycle(double[:, ::1] init, double[:, :, ::1] actions, double dt):
    cdef Py_ssize_t T = actions.shape[0]
    cdef Py_ssize_t N = actions.shape[1]
    out = np.empty((T, N, 4), dtype=np.float64)
    cdef double[:, :, ::1] states = out
    cdef Py_ssize_t t, n
    cdef double x, y, th, v
    for n in range(N):
        x = init[n, 0]
        y = init[n, 1]
        th = init[n, 2]
        v = init[n, 3]
        for t in range(T):
            x = x + v * cos(th) * dt
            y = y + v * sin(th) * dt
            th = th + actions[t, n, 1] * dt
            v = v + actions[t, n, 0] * dt
            if v < 0.0:
                v = 0.0
            states[t, n, 0] = x
            states[t, n, 1] = y
            states[t, n, 2] = th
            states[t, n, 3] = v
    return out


cdef inline double _proj_radius(double psi, double length, double width) nogil:
    return 0.5 * length * fabs(cos(psi)) + 0.5 * width * fabs(sin(psi))


cdef inline double _proj_radius_dpsi(double psi, double length, double width) nogil:
    cdef double c = cos(psi)
    cdef double s = sin(psi)
    return -0.5 * length * s * _sign(c) + 0.5 * width * c * _sign(s)


cdef double _smooth_pair_gap(
    double xi, double yi, double ti, double li, double wi,
    double xj, double yj, double tj, double lj, double wj,
    double temp, double* grad6,
) nogil:
    cdef double[4] phis
    cdef double[4] g
    cdef double[4] ux
    cdef double[4] uy
    cdef double[4] sgn
    cdef double[4] w
    cdef double dx = xj - xi
    cdef double dy = yj - yi
    cdef double s, zmax, wsum, gap, dgm, rot
    cdef Py_ssize_t m
    cdef bint owner_i

    phis[0] = ti
    phis[1] = ti + HALF_PI
    phis[2] = tj
    phis[3] = tj + HALF_PI
    for m in range(4):
        ux[m] = cos(phis[m])
        uy[m] = sin(phis[m])
        s = ux[m] * dx + uy[m] * dy
        sgn[m] = _sign(s)
        g[m] = fabs(s) - _proj_radius(phis[m] - ti, li, wi) - _proj_radius(phis[m] - tj, lj, wj)

    zmax = g[0]
    for m in range(1, 4):
        if g[m] > zmax:
            zmax = g[m]
    wsum = 0.0
    for m in range(4):
        w[m] = exp((g[m] - zmax) / temp)
        wsum += w[m]
    gap = 0.0
    for m in range(4):
        w[m] /= wsum
        gap += w[m] * g[m]

    for m in range(6):
        grad6[m] = 0.0
    for m in range(4):
        dgm = w[m] * (1.0 + (g[m] - gap) / temp)
        owner_i = m < 2
        grad6[0] += dgm * (-sgn[m] * ux[m])
        grad6[1] += dgm * (-sgn[m] * uy[m])
        grad6[3] += dgm * (sgn[m] * ux[m])
        grad6[4] += dgm * (sgn[m] * uy[m])
        rot = sgn[m] * (-uy[m] * dx + ux[m] * dy)
        if owner_i:
            grad6[2] += dgm * (rot - _proj_radius_dpsi(phis[m] - tj, lj, wj))
            grad6[5] += dgm * _proj_radius_dpsi(phis[m] - tj, lj, wj)
        else:
            grad6[2] += dgm * _proj_radius_dpsi(phis[m] - ti, li, wi)
            grad6[5] += dgm * (rot - _proj_radius_dpsi(phis[m] - ti, li, wi))
    return gap


def smooth_pair_gap(double xi, double yi, double ti, double li, double wi,
                    double xj, double yj, double tj, double lj, double wj,
                    double temp):
    cdef double[6] grad6
    cdef double gap = _smooth_pair_gap(xi, yi, ti, li, wi, xj, yj, tj, lj, wj, temp, grad6)
    out = np.empty(6, dtype=np.float64)
    cdef Py_ssize_t m
    for m in range(6):
        out[m] = grad6[m]
    return gap, out


def guidance_eval(
    double[:, :, ::1] actions,
    double[:, ::1] init,
    double dt,
    double[:, ::1] dims,
    long[::1] anchor_agent,
    long[::1] anchor_t,
    double[:, ::1] anchor_xy,
    long[:, ::1] pairs,
    double[:, ::1] bounds,
    double lam_anchor,
    double lam_avoid,
    double lam_boundary,
    double d_safe,
    double sigma,
    double delta_boundary,
    double temp,
):
    cdef Py_ssize_t T = actions.shape[0]
    cdef Py_ssize_t N = actions.shape[1]
    states_arr = rollout_unicycle(init, actions, dt)
    cdef double[:, :, ::1] states = states_arr
    dstate_arr = np.zeros((T, N, 4), dtype=np.float64)
    cdef double[:, :, ::1] dstate = dstate_arr
    grad_arr = np.zeros((T, N, 2), dtype=np.float64)
    cdef double[:, :, ::1] grad = grad_arr

    cdef double j_anchor = 0.0
    cdef double j_avoid = 0.0
    cdef double j_boundary = 0.0
    cdef Py_ssize_t m, t, p, i, j, n
    cdef double ex, ey, gap, deficit, e, coeff, hi, lo, yv
    cdef double[6] grad6

    for m in range(anchor_agent.shape[0]):
        i = anchor_agent[m]
        t = anchor_t[m]
        ex = states[t, i, 0] - anchor_xy[m, 0]
        ey = states[t, i, 1] - anchor_xy[m, 1]
        j_anchor += ex * ex + ey * ey
        dstate[t, i, 0] += lam_anchor * 2.0 * ex
        dstate[t, i, 1] += lam_anchor * 2.0 * ey

    for t in range(T):
        for p in range(pairs.shape[0]):
            i = pairs[p, 0]
            j = pairs[p, 1]
            gap = _smooth_pair_gap(
                states[t, i, 0], states[t, i, 1], states[t, i, 2],
                dims[i, 0], dims[i, 1],
                states[t, j, 0], states[t, j, 1], states[t, j, 2],
                dims[j, 0], dims[j, 1],
                temp, grad6,
            )
            deficit = d_safe - gap
            if deficit <= 0.0:
                continue
            e = exp(deficit / sigma)
            j_avoid += deficit * e
            coeff = -lam_avoid * e * (1.0 + deficit / sigma)
            dstate[t, i, 0] += coeff * grad6[0]
            dstate[t, i, 1] += coeff * grad6[1]
            dstate[t, i, 2] += coeff * grad6[2]
            dstate[t, j, 0] += coeff * grad6[3]
            dstate[t, j, 1] += coeff * grad6[4]
            dstate[t, j, 2] += coeff * grad6[5]

    for t in range(T):
        for n in range(N):
            hi = bounds[n, 1] - delta_boundary
            lo = bounds[n, 0] + delta_boundary
            yv = states[t, n, 1]
            if yv > hi:
                j_boundary += yv - hi
                dstate[t, n, 1] += lam_boundary
            elif yv < lo:
                j_boundary += lo - yv
                dstate[t, n, 1] -= lam_boundary

    # adjoint sweep through the Euler dynamics
    cdef double lam0, lam1, lam2, lam3, c, sn, pv, pth, alive
    for n in range(N):
        lam0 = 0.0
        lam1 = 0.0
        lam2 = 0.0
        lam3 = 0.0
        for t in range(T - 1, -1, -1):
            lam0 += dstate[t, n, 0]
            lam1 += dstate[t, n, 1]
            lam2 += dstate[t, n, 2]
            lam3 += dstate[t, n, 3]
            if t > 0:
                pv = states[t - 1, n, 3]
                pth = states[t - 1, n, 2]
            else:
                pv = init[n, 3]
                pth = init[n, 2]
            alive = 1.0 if (pv + actions[t, n, 0] * dt) > 0.0 else 0.0
            grad[t, n, 0] = lam3 * dt * alive
            grad[t, n, 1] = lam2 * dt
            c = cos(pth)
            sn = sin(pth)
            lam2 = lam2 + pv * dt * (lam1 * c - lam0 * sn)
            lam3 = lam3 * alive + dt * (lam0 * c + lam1 * sn)

    cdef double total = lam_anchor * j_anchor + lam_avoid * j_avoid + lam_boundary * j_boundary
    components = np.array([j_anchor, j_avoid, j_boundary])
    return total, grad_arr, components

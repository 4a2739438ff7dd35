"""Pure NumPy implementations of the hot kernels.

Reference backend: the compiled extension in ``_speedups.pyx`` mirrors this
math operation for operation. Keep the two in sync; the equivalence tests in
``tests/test_kernels.py`` compare them on random inputs.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np

BACKEND_NAME = "pure"

HALF_PI = math.pi / 2.0


def rollout_unicycle(init: np.ndarray, actions: np.ndarray, dt: float) -> np.ndarray:
    """Integrate unicycle actions frame by frame.

    init: (N, 4) [x, y, theta, v]; actions: (T, N, 2) [accel, yaw_rate].
    Returns states (T, N, 4). Position uses the pre-update heading/speed;
    speed clamps at zero.
    """
    T, N = actions.shape[0], actions.shape[1]
    states = np.empty((T, N, 4), dtype=np.float64)
    x = init[:, 0].copy()
    y = init[:, 1].copy()
    th = init[:, 2].copy()
    v = init[:, 3].copy()
    for t in range(T):
        x = x + v * np.cos(th) * dt
        y = y + v * np.sin(th) * dt
        th = th + actions[t, :, 1] * dt
        v = np.maximum(0.0, v + actions[t, :, 0] * dt)
        states[t, :, 0] = x
        states[t, :, 1] = y
        states[t, :, 2] = th
        states[t, :, 3] = v
    return states


def _proj_radius(psi: np.ndarray, length: float, width: float) -> np.ndarray:
    return 0.5 * length * np.abs(np.cos(psi)) + 0.5 * width * np.abs(np.sin(psi))


def _proj_radius_dpsi(psi: np.ndarray, length: float, width: float) -> np.ndarray:
    c, s = np.cos(psi), np.sin(psi)
    return -0.5 * length * s * np.sign(c) + 0.5 * width * c * np.sign(s)


def smooth_pair_gap(
    xi: float,
    yi: float,
    ti: float,
    li: float,
    wi: float,
    xj: float,
    yj: float,
    tj: float,
    lj: float,
    wj: float,
    temp: float,
) -> Tuple[float, np.ndarray]:
    """Soft-min SAT gap between two oriented boxes plus its pose gradient.

    Returns (gap, grad) with grad = d gap / d (xi, yi, ti, xj, yj, tj).
    The gap is the Boltzmann-weighted mean of the four axis separations at
    temperature ``temp``: negative of the softened penetration depth when
    overlapping, a lower bound on the Euclidean gap when separated.
    """
    phis = np.array([ti, ti + HALF_PI, tj, tj + HALF_PI])
    owner_i = np.array([True, True, False, False])
    ux, uy = np.cos(phis), np.sin(phis)
    dx, dy = xj - xi, yj - yi
    s = ux * dx + uy * dy
    sgn = np.sign(s)
    ri = _proj_radius(phis - ti, li, wi)
    rj = _proj_radius(phis - tj, lj, wj)
    g = np.abs(s) - ri - rj

    z = g / temp
    z -= z.max()
    w = np.exp(z)
    w /= w.sum()
    gap = float(np.dot(w, g))
    # d gap / d g_m for the Boltzmann-weighted mean
    dg = w * (1.0 + (g - gap) / temp)

    # per-axis pose derivatives
    d_xi = -sgn * ux
    d_yi = -sgn * uy
    d_xj = sgn * ux
    d_yj = sgn * uy
    # axis rotation: u' = (-uy, ux); own-box radius is constant along its own axes
    rot = sgn * (-uy * dx + ux * dy)
    dri = _proj_radius_dpsi(phis - ti, li, wi)
    drj = _proj_radius_dpsi(phis - tj, lj, wj)
    d_ti = np.where(owner_i, rot - drj, dri)
    d_tj = np.where(owner_i, drj, rot - dri)

    grad = np.array(
        [
            np.dot(dg, d_xi),
            np.dot(dg, d_yi),
            np.dot(dg, d_ti),
            np.dot(dg, d_xj),
            np.dot(dg, d_yj),
            np.dot(dg, d_tj),
        ]
    )
    return gap, grad


def guidance_eval(
    actions: np.ndarray,
    init: np.ndarray,
    dt: float,
    dims: np.ndarray,
    anchor_agent: np.ndarray,
    anchor_t: np.ndarray,
    anchor_xy: np.ndarray,
    pairs: np.ndarray,
    bounds: np.ndarray,
    lam_anchor: float,
    lam_avoid: float,
    lam_boundary: float,
    d_safe: float,
    sigma: float,
    delta_boundary: float,
    temp: float,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Composite guidance objective and its exact action-space gradient.

    actions: (T, N, 2); init: (N, 4); dims: (N, 2) [length, width];
    anchor_*: parallel arrays of anchor agent index / frame / target position;
    pairs: (P, 2) agent index pairs for the avoidance term; bounds: (N, 2)
    lateral drivable interval per agent.

    Returns (J, grad, components) where grad is dJ/d actions (T, N, 2) chained
    through the forward-Euler dynamics and components stacks the unweighted
    anchor / avoid / boundary terms.
    """
    T, N = actions.shape[0], actions.shape[1]
    states = rollout_unicycle(init, actions, dt)
    dstate = np.zeros((T, N, 4), dtype=np.float64)

    j_anchor = 0.0
    for m in range(anchor_agent.shape[0]):
        a = int(anchor_agent[m])
        t = int(anchor_t[m])
        ex = states[t, a, 0] - anchor_xy[m, 0]
        ey = states[t, a, 1] - anchor_xy[m, 1]
        j_anchor += ex * ex + ey * ey
        dstate[t, a, 0] += lam_anchor * 2.0 * ex
        dstate[t, a, 1] += lam_anchor * 2.0 * ey

    j_avoid = 0.0
    if pairs.shape[0]:
        for t in range(T):
            for p in range(pairs.shape[0]):
                i = int(pairs[p, 0])
                j = int(pairs[p, 1])
                gap, grad6 = smooth_pair_gap(
                    states[t, i, 0],
                    states[t, i, 1],
                    states[t, i, 2],
                    dims[i, 0],
                    dims[i, 1],
                    states[t, j, 0],
                    states[t, j, 1],
                    states[t, j, 2],
                    dims[j, 0],
                    dims[j, 1],
                    temp,
                )
                deficit = d_safe - gap
                if deficit <= 0.0:
                    continue
                e = math.exp(deficit / sigma)
                j_avoid += deficit * e
                # d term / d gap = -(1 + deficit/sigma) * exp(deficit/sigma)
                coeff = -lam_avoid * e * (1.0 + deficit / sigma)
                dstate[t, i, 0] += coeff * grad6[0]
                dstate[t, i, 1] += coeff * grad6[1]
                dstate[t, i, 2] += coeff * grad6[2]
                dstate[t, j, 0] += coeff * grad6[3]
                dstate[t, j, 1] += coeff * grad6[4]
                dstate[t, j, 2] += coeff * grad6[5]

    j_boundary = 0.0
    y = states[:, :, 1]
    hi = bounds[:, 1][None, :] - delta_boundary
    lo = bounds[:, 0][None, :] + delta_boundary
    over = np.maximum(0.0, y - hi)
    under = np.maximum(0.0, lo - y)
    j_boundary = float(over.sum() + under.sum())
    dstate[:, :, 1] += lam_boundary * ((y > hi).astype(np.float64) - (y < lo).astype(np.float64))

    # adjoint sweep through the Euler dynamics
    grad = np.zeros((T, N, 2), dtype=np.float64)
    lam = np.zeros((N, 4), dtype=np.float64)
    for t in range(T - 1, -1, -1):
        lam += dstate[t]
        prev = states[t - 1] if t > 0 else init
        alive = (prev[:, 3] + actions[t, :, 0] * dt) > 0.0
        grad[t, :, 0] = lam[:, 3] * dt * alive
        grad[t, :, 1] = lam[:, 2] * dt
        c = np.cos(prev[:, 2])
        s = np.sin(prev[:, 2])
        new_lam = np.empty_like(lam)
        new_lam[:, 0] = lam[:, 0]
        new_lam[:, 1] = lam[:, 1]
        new_lam[:, 2] = lam[:, 2] + prev[:, 3] * dt * (lam[:, 1] * c - lam[:, 0] * s)
        new_lam[:, 3] = lam[:, 3] * alive + dt * (lam[:, 0] * c + lam[:, 1] * s)
        lam = new_lam

    total = lam_anchor * j_anchor + lam_avoid * j_avoid + lam_boundary * j_boundary
    components = np.array([j_anchor, j_avoid, j_boundary])
    return float(total), grad, components

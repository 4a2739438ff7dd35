"""Oriented-box geometry: overlap, signed gap, lateral-bound violation.

The signed gap is the Euclidean distance between the two rectangles when
separated and the negative minimum translation distance when overlapping,
so avoidance penalties keep a usable slope through contact.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np

from advscene.scene.types import AgentDims, VehicleState


def box_corners(x: float, y: float, theta: float, length: float, width: float) -> np.ndarray:
    """Corner coordinates (4, 2) in CCW order."""
    c, s = math.cos(theta), math.sin(theta)
    hl, hw = length / 2.0, width / 2.0
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([x, y])


def _axis_gaps(
    s1: VehicleState, d1: AgentDims, s2: VehicleState, d2: AgentDims
) -> Tuple[np.ndarray, np.ndarray]:
    """Signed projection gap on each of the 4 edge normals (positive = separated)."""
    phis = np.array(
        [s1.theta, s1.theta + math.pi / 2.0, s2.theta, s2.theta + math.pi / 2.0]
    )
    ux, uy = np.cos(phis), np.sin(phis)
    dx, dy = s2.x - s1.x, s2.y - s1.y
    proj = np.abs(ux * dx + uy * dy)
    r1 = 0.5 * d1.length * np.abs(np.cos(phis - s1.theta)) + 0.5 * d1.width * np.abs(
        np.sin(phis - s1.theta)
    )
    r2 = 0.5 * d2.length * np.abs(np.cos(phis - s2.theta)) + 0.5 * d2.width * np.abs(
        np.sin(phis - s2.theta)
    )
    return proj - r1 - r2, phis


def obb_overlap(s1: VehicleState, d1: AgentDims, s2: VehicleState, d2: AgentDims) -> bool:
    """Separating-axis test over the 4 edge normals; touching counts as overlap."""
    gaps, _ = _axis_gaps(s1, d1, s2, d2)
    return bool(np.all(gaps <= 0.0))


def _segment_distance(p1, p2, q1, q2) -> float:
    """Minimum distance between segments [p1, p2] and [q1, q2]."""
    d1 = p2 - p1
    d2 = q2 - q1
    r = p1 - q1
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    if a == 0.0 and e == 0.0:
        return float(np.linalg.norm(r))
    if a == 0.0:
        t = min(1.0, max(0.0, f / e))
        return float(np.linalg.norm(p1 - (q1 + t * d2)))
    c = float(d1 @ r)
    if e == 0.0:
        s = min(1.0, max(0.0, -c / a))
        return float(np.linalg.norm(p1 + s * d1 - q1))
    b = float(d1 @ d2)
    den = a * e - b * b
    s = min(1.0, max(0.0, (b * f - c * e) / den)) if den > 0.0 else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
    elif t > 1.0:
        t = 1.0
        s = min(1.0, max(0.0, (b - c) / a))
    return float(np.linalg.norm((p1 + s * d1) - (q1 + t * d2)))


def bbox_gap(s1: VehicleState, d1: AgentDims, s2: VehicleState, d2: AgentDims) -> float:
    """Signed gap between two oriented rectangles.

    Positive: Euclidean distance between the boxes. Negative: penetration
    (minimum translation distance to separate). Zero exactly at contact.
    """
    gaps, _ = _axis_gaps(s1, d1, s2, d2)
    max_gap = float(gaps.max())
    if max_gap <= 0.0:
        # overlapping: the minimum translation vector lies along an edge normal
        return max_gap
    c1 = box_corners(s1.x, s1.y, s1.theta, d1.length, d1.width)
    c2 = box_corners(s2.x, s2.y, s2.theta, d2.length, d2.width)
    best = math.inf
    for i in range(4):
        p1, p2 = c1[i], c1[(i + 1) % 4]
        for j in range(4):
            best = min(best, _segment_distance(p1, p2, c2[j], c2[(j + 1) % 4]))
    return best


def contact_axis(
    s1: VehicleState, d1: AgentDims, s2: VehicleState, d2: AgentDims
) -> Tuple[float, float]:
    """Unit contact normal (minimum-penetration axis) oriented from box 1 to box 2.

    Meaningful when the boxes overlap; used to classify collision geometry.
    """
    gaps, phis = _axis_gaps(s1, d1, s2, d2)
    m = int(np.argmax(gaps))
    ux, uy = math.cos(phis[m]), math.sin(phis[m])
    if ux * (s2.x - s1.x) + uy * (s2.y - s1.y) < 0.0:
        ux, uy = -ux, -uy
    return ux, uy


def boundary_violation(y: float, bounds: Tuple[float, float], margin: float = 0.0) -> float:
    """Distance outside the safe zone [y_lower + margin, y_upper - margin].

    Zero on the closed safe zone, slope +-1 outside.
    """
    y_lower, y_upper = bounds
    if not y_lower < y_upper:
        raise ValueError(f"boundary_violation: bounds not ordered: [{y_lower}, {y_upper}]")
    return max(0.0, y - (y_upper - margin)) + max(0.0, (y_lower + margin) - y)

"""Independent oracles used to freeze expected values.

These deliberately avoid the closed forms under test: section properties
come from polygon integration, cantilever stiffness from a discretized
unit-load integral, and statics from direct linear solves.
"""

from __future__ import annotations

import numpy as np


def polygon_second_moment_x(vertices) -> float:
    """Second moment of area about the x axis via the shoelace formula.

    Vertices must be ordered counter-clockwise.  For a section centred on
    the origin this is the centroidal moment.
    """
    ix = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        ix += (y0 * y0 + y0 * y1 + y1 * y1) * cross
    return ix / 12.0


def square_tube_second_moment_oracle(a: float, t: float) -> float:
    """Outer square minus inner square, each integrated as a polygon."""
    def square(half):
        return [(-half, -half), (half, -half), (half, half), (-half, half)]

    outer = polygon_second_moment_x(square(a / 2.0))
    inner = polygon_second_moment_x(square(a / 2.0 - t))
    return outer - inner


def cantilever_tip_stiffness_oracle(ei: float, length: float, segments: int = 100) -> float:
    """Tip stiffness of an end-loaded cantilever from the unit-load integral.

    deflection = integral of M(x)^2 / EI dx for a unit tip load, evaluated
    with midpoint quadrature on a uniform discretization.
    """
    xs = (np.arange(segments) + 0.5) * (length / segments)
    moments = length - xs
    deflection = float(np.sum(moments * moments) / ei * (length / segments))
    return 1.0 / deflection


def three_contact_loads_oracle(feet_xy, com_xy, weight: float) -> np.ndarray:
    """Unique static vertical loads for exactly three contacts."""
    feet = np.asarray(feet_xy, dtype=float)
    assert feet.shape == (3, 2)
    a = np.vstack(
        [
            np.ones(3),
            feet[:, 0] - com_xy[0],
            feet[:, 1] - com_xy[1],
        ]
    )
    return np.linalg.solve(a, np.array([weight, 0.0, 0.0]))


def point_segment_distance_oracle(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    t = float(np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))

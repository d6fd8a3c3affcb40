"""
Minimal solvers and residuals
=============================

Lines need two points, ellipses five. Both models expose a geometric
distance used for verification and for the error metric.
"""

import numpy as np

from exactstop.models import EllipseModel, fit_ellipse, fit_line

line = fit_line((0.0, 1.0), (4.0, 3.0))
print("line normal", line.normal, "offset", round(line.offset, 4))
print("distance of (2, 0):", line.distance(np.array([2.0, 0.0])))

truth = EllipseModel.from_geometry(center=(5, -2), semi_axes=(30, 12), angle=0.4)
t = np.linspace(0, 2 * np.pi, 5, endpoint=False) + 0.3
c, s = np.cos(truth.angle), np.sin(truth.angle)
x, y = 30 * np.cos(t), 12 * np.sin(t)
pts = np.column_stack([5 + c * x - s * y, -2 + s * x + c * y])

# five exact points recover the conic
est = fit_ellipse(pts)
print("center", np.round(est.center, 6), "axes", np.round(est.semi_axes, 6), "angle", round(est.angle, 6))

# orthogonal distance, inside and outside
queries = np.array([[5.0, -2.0], [5 + 40 * c, -2 + 40 * s]])
print("distances:", est.distance(queries))

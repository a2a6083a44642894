"""KAN edge functions: the spline grid, its basis and a trained-looking edge.

    python3 demos/01_kan_edges.py
"""

import numpy as np

from aasist3.kan import KanLayer, bspline_basis, build_grid, phi_edge
from aasist3.numerics import Tensor

grid = build_grid()  # range [-1, 1], 16 intervals, degree 4
print(f"{grid.n_knots} knots, spacing {grid.h}, {grid.n_basis} basis functions")
print("knots:", np.round(grid.knots, 3))

# The basis sums to one inside the grid range and vanishes past the extended knots.
x = np.linspace(-1.0, 1.0, 9)
basis = bspline_basis(x, grid)
print("row sums on [-1, 1]:", np.round(basis.sum(axis=1), 12))
print("outside the knot span:", bspline_basis(np.array([-1.6, 1.6]), grid).sum(axis=1))

# An edge is a PReLU residual plus a spline.  With smooth coefficients the
# spline part tracks a curve; outside the grid only the residual survives.
coeffs = np.sin(np.linspace(-np.pi, np.pi, grid.n_basis))
for xv in (-2.0, -0.5, 0.0, 0.5, 2.0):
    print(f"phi({xv:+.1f}) = {phi_edge(xv, 1.0, 1.0, coeffs, 0.25, grid):+.4f}")

# A layer sums one edge per input into each output.
layer = KanLayer(3, 2, np.random.default_rng(0))
inputs = np.random.default_rng(1).uniform(-1, 1, (4, 3))
print("layer output:\n", np.round(layer(Tensor(inputs)).data, 4))

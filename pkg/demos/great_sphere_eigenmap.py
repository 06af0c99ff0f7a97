"""
Gauss map of the totally geodesic S^6
=====================================

On the great sphere x_7 = 0 the unit normal is the constant e7, and the
Gauss map gamma(x) = conj(x) e7 is linear in x.  Linear functions restricted
to S^6 are eigenfunctions of the Laplacian with eigenvalue 6.
"""

import numpy as np

from octoverify.algebra import cd_conj, octonion_mul
from octoverify.catalog import build_chart, parse_spec
from octoverify.gauss import GaussMapField, gauss_laplacian

chart, hints = build_chart(parse_spec("great:6"), grid=8)
u = chart.nodes()[::50]
print("chart dim", chart.dim, "nodes sampled", u.shape[0])

# gamma as an explicit 8x8 matrix acting on x
A = np.stack([octonion_mul(cd_conj(np.eye(8)[i]), np.eye(8)[7]) for i in range(8)], axis=1)
x = chart.immersion(u)
gamma = GaussMapField(chart, hints[0])
print("|gamma - A x|     ", np.abs(gamma.values(u) - x @ A.T).max())

# Laplace-Beltrami by central differences, h = 1e-3
lap = gauss_laplacian(chart, gamma, u)
print("|lap + 6 gamma|   ", np.abs(lap + 6 * gamma.values(u)).max())

# the image lies on the unit sphere of Im O
g = gamma.values(u)
print("max |Re gamma|    ", np.abs(g[:, 0]).max())
print("max ||gamma| - 1| ", np.abs(np.linalg.norm(g, axis=1) - 1).max())

"""
Why the normal must be an eigen-direction
=========================================

compose:great:3/product:1,1 is a Clifford torus S^1 x S^1 inside a great S^3.
Its normal bundle splits into four directions with sigma = 0 (the ambient
great sphere directions) and the in-sphere normal with sigma = 2.

Each eigen-direction gives an eigenmap.  A 45 degree blend of a sigma = 0 and
the sigma = 2 direction is still a unit parallel normal, but its Gauss map is
not harmonic and fails the eigen-equation for any single eigenvalue.
"""

import math

import numpy as np

from octoverify.catalog import build_chart, parse_spec
from octoverify.gauss import eigen_normal, eigenmap_residual, eigenmap_verify, harmonicity_defect
from octoverify.spectra import gram_spectrum, spectrum_from_gram

chart, hints = build_chart(parse_spec("compose:great:3/product:1,1"), grid=24)
u = chart.nodes()
spec = spectrum_from_gram(gram_spectrum(chart, None, hints, u[:1]).gram[0], hints.labels)
print("sigma", np.round(spec.sigma, 10))

for j in range(len(spec.sigma)):
    v = eigenmap_verify(chart, hints, spec, j, u=u)
    print(f"  eta{j + 1}: lambda {v.eigenvalue:.1f}  residual {v.residual_l2:.2e}")

c = (spec.vectors[:, 0] + spec.vectors[:, -1]) / math.sqrt(2)
mix = eigen_normal(hints, c, "mix")
print("mixture harmonicity defect", f"{np.max(harmonicity_defect(chart, mix, u)):.3f}")
for lam in (2.0, 3.0, 4.0):
    r = eigenmap_residual(chart, mix, lam, u=u)
    print(f"  mixture vs lambda {lam}: residual {r.residual_l2:.3f}")

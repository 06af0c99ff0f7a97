"""
Shape operator spectrum of the Clifford torus S^3 x S^3
=======================================================

With radii 1/sqrt(2) the product is minimal in S^7.  Its shape operator has
principal curvatures -1 (three times) and +1 (three times), so |S|^2 = 6 and
the Gauss map should satisfy Delta gamma = -(6 + 6) gamma = -12 gamma.
"""

import numpy as np

from octoverify.catalog import build_chart, parse_spec
from octoverify.charts import frames_at
from octoverify.gauss import eigenmap_verify
from octoverify.spectra import gram_matrix, gram_spectrum, shape_operators, spectrum_from_gram

chart, hints = build_chart(parse_spec("product:3,3"), grid=8)
u = chart.nodes()
print(chart.name, "d =", chart.dim, "k =", len(hints), "nodes", u.shape[0])

S = shape_operators(chart, frames_at(chart, u[:1]), hints, u[:1])
print("principal curvatures", np.round(np.linalg.eigvalsh(S[0, 0]), 10))
print("trace (mean curvature)", np.trace(S[0, 0]))
print("Gram", gram_matrix(S)[0])

spec = spectrum_from_gram(gram_spectrum(chart, None, hints, u[:1]).gram[0], hints.labels)
v = eigenmap_verify(chart, hints, spec, 0, u=u[::20])
print("eigenvalue", v.eigenvalue, "residual", f"{v.residual_l2:.2e}", "pass", v.passed)

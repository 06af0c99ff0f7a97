"""
Is the Gauss image inside an open hemisphere?
=============================================

For a Gauss map that is an eigenmap, every component integrates to zero over
the compact submanifold, so the image cannot sit inside any open hemisphere
of S^6.  We check this by sampling: for a quasi-random set of directions w we
take min <gamma(x), w> over the grid.  A positive value would exhibit a
containing hemisphere.  A constant map serves as a control.
"""

import numpy as np

from octoverify.catalog import build_chart, parse_spec
from octoverify.gauss import GaussMapField, eigen_normal
from octoverify.hemisphere import hemisphere_scan, mean_zero_check
from octoverify.spectra import gram_spectrum, spectrum_from_gram

for name in ("great:6", "product:3,3", "product:1,1,3"):
    chart, hints = build_chart(parse_spec(name), grid=8)
    spec = spectrum_from_gram(gram_spectrum(chart, None, hints, chart.nodes()[:1]).gram[0])
    for j in range(len(hints)):
        gamma = GaussMapField(chart, eigen_normal(hints, spec.vectors[:, j]))
        rep = hemisphere_scan(chart, gamma, k=len(hints), entry=name, normal_label=f"eta{j + 1}")
        print(f"{name:14s} eta{j + 1}  margin {rep.best_margin:+.3f}  "
              f"mean {mean_zero_check(chart, gamma):.1e}  {rep.verdict}")

chart, _ = build_chart(parse_spec("great:3"), grid=16)
const = lambda u: np.broadcast_to(np.eye(8)[1], (u.shape[0], 8))
rep = hemisphere_scan(chart, const)
print(f"{'constant e1':14s}       margin {rep.best_margin:+.3f}  {rep.verdict}")

"""Named numerical tolerances used throughout the package."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # algebra identities
    algebra: float = 1e-12
    division: float = 1e-10
    # chart geometry
    sphere: float = 1e-12
    tangency: float = 1e-10
    frame: float = 1e-10
    metric: float = 1e-10
    covariant: float = 1e-8
    # second fundamental form and normal bundle
    minimality: float = 1e-8
    parallel: float = 1e-8
    symmetry: float = 1e-8
    curvature_spread: float = 1e-8
    commutator: float = 1e-8
    sigma_match: float = 1e-8
    eigencheck: float = 1e-8
    constancy: float = 1e-6
    gram_psd: float = 1e-10
    jacobi: float = 1e-14
    # Gauss map
    gauss_norm: float = 1e-12
    gauss_re: float = 1e-10
    eigenmap: float = 1e-4
    harmonic: float = 1e-4
    lemma: float = 1e-4
    # hemisphere
    hemisphere: float = 1e-3
    mean_zero: float = 1e-5

    def override(self, **values: float) -> "Tolerances":
        names = {f.name for f in dataclasses.fields(self)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise KeyError(f"unknown tolerance name(s): {', '.join(unknown)}")
        for name, value in values.items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value}")
        return dataclasses.replace(self, **{k: float(v) for k, v in values.items()})

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()

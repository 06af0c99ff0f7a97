"""Ambient vector fields on R^8 with analytic Jacobians.

Normal sections, Killing fields and the position field are all represented
this way; charts pull them back through the immersion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebra import right_matrix


@dataclass(frozen=True, eq=False)
class AmbientField:
    """A map ``x -> value(x)`` from R^8 to R^8.

    ``jacobian(x)`` returns the (..., 8, 8) derivative.  When it is None,
    consumers fall back to central differences along chart curves.
    ``parallel`` records whether the field is known to be parallel in the
    normal connection of the manifold it was built for (None: unknown).
    """

    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = ""
    parallel: Optional[bool] = None
    affine: Optional[tuple] = field(default=None, repr=False)

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))


def affine_field(a, b=None, label: str = "", parallel: Optional[bool] = None) -> AmbientField:
    """``x -> a x + b`` with constant matrix ``a`` and vector ``b``."""
    a = np.array(a, dtype=float)
    b = np.zeros(a.shape[0]) if b is None else np.array(b, dtype=float)
    a.setflags(write=False)
    b.setflags(write=False)

    def value(x):
        return x @ a.T + b

    def jac(x):
        return np.broadcast_to(a, np.shape(x)[:-1] + a.shape)

    return AmbientField(value, jac, label, parallel, affine=(a, b))


def constant_field(c, label: str = "", parallel: Optional[bool] = None) -> AmbientField:
    c = np.asarray(c, dtype=float)
    return affine_field(np.zeros((c.size, c.size)), c, label, parallel)


def position_field() -> AmbientField:
    return affine_field(np.eye(8), label="x")


def killing_vector_field(v) -> AmbientField:
    """``V(x) = x v``; linear in x with matrix ``R_v``."""
    v = np.asarray(v, dtype=float)
    return affine_field(right_matrix(v), label="killing")


def combine(fields, coeffs, label: str = "") -> AmbientField:
    """Constant-coefficient combination ``sum c_i f_i``.

    Affine inputs give an affine result, so constant combinations of
    parallel sections stay exactly representable.
    """
    coeffs = [float(c) for c in coeffs]
    if len(coeffs) != len(fields):
        raise ValueError("one coefficient per field required")
    parallel = all(f.parallel for f in fields) or None
    if all(f.affine is not None for f in fields):
        a = sum(c * f.affine[0] for c, f in zip(coeffs, fields))
        b = sum(c * f.affine[1] for c, f in zip(coeffs, fields))
        return affine_field(a, b, label, parallel)

    def value(x):
        return sum(c * f.value(x) for c, f in zip(coeffs, fields))

    jac = None
    if all(f.jacobian is not None for f in fields):
        def jac(x):
            return sum(c * f.jacobian(x) for c, f in zip(coeffs, fields))

    return AmbientField(value, jac, label, parallel)


def rotated_pair(f1: AmbientField, f2: AmbientField, w, label: str = "rotated") -> AmbientField:
    """``cos(a) f1 + sin(a) f2`` with the non-constant angle ``a(x) = <w, x>``.

    Unit and normal whenever ``f1, f2`` are orthonormal normals, but not
    parallel: it is the negative control for the normal-connection test.
    """
    w = np.asarray(w, dtype=float)

    def value(x):
        a = x @ w
        return np.cos(a)[..., None] * f1.value(x) + np.sin(a)[..., None] * f2.value(x)

    def jac(x):
        a = x @ w
        c, s = np.cos(a)[..., None], np.sin(a)[..., None]
        turn = -s * f1.value(x) + c * f2.value(x)
        return (
            c[..., None] * f1.jacobian(x)
            + s[..., None] * f2.jacobian(x)
            + turn[..., :, None] * w
        )

    return AmbientField(value, jac, label, parallel=False)

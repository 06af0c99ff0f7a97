"""Cayley-Dickson algebras, octonions and their translation maps.

Array-level functions (``cd_mul``, ``cd_conj``, ``octonion_mul``, ...) act on
the last axis of numpy arrays and broadcast over leading axes, which is what
the geometry code uses on whole grids of points.  ``CDElement`` wraps a single
immutable element for the scalar-style API.

Coordinates are ordered so that index 0 is the real unit ``1`` and indices
``1..2**n - 1`` are the imaginary units produced by the doubling.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LevelMismatchError
from .tolerances import DEFAULT_TOLERANCES

MAX_LEVEL = 4


def _level_of(size: int) -> int:
    level = int(size).bit_length() - 1
    if size < 1 or 2**level != size:
        raise LevelMismatchError(f"length {size} is not a power of two")
    if level > MAX_LEVEL:
        raise LevelMismatchError(f"level {level} exceeds supported maximum {MAX_LEVEL}")
    return level


def cd_conj(x):
    """Conjugate ``(x1, x2) -> (conj(x1), -x2)``.

    Unrolling the recursion leaves the real coordinate and negates all others.
    """
    x = np.asarray(x, dtype=float)
    out = -x
    out[..., 0] = x[..., 0]
    return out


def cd_mul(x, y):
    """Cayley-Dickson product by direct recursion.

    ``(x1, x2)(y1, y2) = (x1 y1 - conj(y2) x2, y2 x1 + x2 conj(y1))``,
    bottoming out in real multiplication at level 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise LevelMismatchError(
            f"cannot multiply elements of length {x.shape[-1]} and {y.shape[-1]}"
        )
    n = x.shape[-1]
    _level_of(n)
    return _mul_rec(x, y)


def _mul_rec(x, y):
    n = x.shape[-1]
    if n == 1:
        return x * y
    h = n // 2
    x1, x2 = x[..., :h], x[..., h:]
    y1, y2 = y[..., :h], y[..., h:]
    a = _mul_rec(x1, y1) - _mul_rec(cd_conj(y2), x2)
    b = _mul_rec(y2, x1) + _mul_rec(x2, cd_conj(y1))
    a, b = np.broadcast_arrays(a, b)
    return np.concatenate([a, b], axis=-1)


@functools.lru_cache(maxsize=None)
def structure_constants(level: int = 3) -> np.ndarray:
    """Tensor ``C[i, j, k]`` with ``e_i e_j = sum_k C[i, j, k] e_k``.

    Generated from the recursion on basis units; never hand-typed.
    """
    if not 0 <= level <= MAX_LEVEL:
        raise LevelMismatchError(f"level {level} outside 0..{MAX_LEVEL}")
    n = 2**level
    eye = np.eye(n)
    c = cd_mul(eye[:, None, :], eye[None, :, :])
    c.setflags(write=False)
    return c


@functools.lru_cache(maxsize=None)
def multiplication_table(level: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(index, sign)`` with ``e_i e_j = sign[i, j] * e_{index[i, j]}``."""
    c = structure_constants(level)
    index = np.argmax(np.abs(c), axis=-1)
    sign = np.take_along_axis(c, index[..., None], axis=-1)[..., 0].astype(int)
    index.setflags(write=False)
    sign.setflags(write=False)
    return index, sign


# Built eagerly so the cached octonion table exists before any worker threads.
_OCT = structure_constants(3)
multiplication_table(3)


def left_matrix(x) -> np.ndarray:
    """Matrix of ``L_x: v -> x v`` (batched over leading axes)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    c = structure_constants(_level_of(n))
    m = x @ c.reshape(n, n * n)
    return np.swapaxes(m.reshape(x.shape[:-1] + (n, n)), -1, -2)


def right_matrix(x) -> np.ndarray:
    """Matrix of ``R_x: v -> v x`` (batched over leading axes)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    c = structure_constants(_level_of(n))
    m = x @ np.ascontiguousarray(c.transpose(1, 0, 2)).reshape(n, n * n)
    return np.swapaxes(m.reshape(x.shape[:-1] + (n, n)), -1, -2)


def octonion_mul(x, y) -> np.ndarray:
    """Table-driven product; agrees with :func:`cd_mul` at any level."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise LevelMismatchError(
            f"cannot multiply elements of length {x.shape[-1]} and {y.shape[-1]}"
        )
    return np.einsum("...kj,...j->...k", left_matrix(x), y)


def cd_norm(x) -> np.ndarray:
    return np.linalg.norm(np.asarray(x, dtype=float), axis=-1)


def cd_inv(x) -> np.ndarray:
    """``conj(x) / |x|^2``; raises DomainError on the zero element."""
    x = np.asarray(x, dtype=float)
    n2 = np.sum(x * x, axis=-1)
    if np.any(n2 == 0.0):
        raise DomainError("zero element has no inverse")
    return cd_conj(x) / n2[..., None]


def re_part(x) -> np.ndarray:
    """``Re(x) = (x + conj(x)) / 2`` as an element (only coordinate 0 survives)."""
    x = np.asarray(x, dtype=float)
    return (x + cd_conj(x)) / 2


def im_part(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (x - cd_conj(x)) / 2


def basis(i: int, level: int = 3) -> np.ndarray:
    e = np.zeros(2**level)
    e[i] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class CDElement:
    """Immutable element of the Cayley-Dickson algebra on ``R^(2**level)``."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=float).reshape(-1)
        _level_of(arr.size)
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @classmethod
    def one(cls, level: int = 3) -> CDElement:
        return cls(basis(0, level))

    @classmethod
    def unit(cls, i: int, level: int = 3) -> CDElement:
        return cls(basis(i, level))

    @classmethod
    def from_json(cls, data) -> CDElement:
        return cls(np.asarray(data, dtype=float))

    def to_json(self) -> list:
        return [float(c) for c in self.coords]

    @property
    def level(self) -> int:
        return _level_of(self.coords.size)

    def conj(self) -> CDElement:
        return CDElement(cd_conj(self.coords))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def re(self) -> CDElement:
        return CDElement(re_part(self.coords))

    def im(self) -> CDElement:
        return CDElement(im_part(self.coords))

    def inverse(self) -> CDElement:
        return cd_inverse(self)

    def __mul__(self, other):
        if isinstance(other, CDElement):
            return cd_multiply(self, other)
        if np.isscalar(other):
            return CDElement(self.coords * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return CDElement(self.coords * other)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, CDElement):
            return NotImplemented
        _same_level(self, other)
        return CDElement(self.coords + other.coords)

    def __sub__(self, other):
        if not isinstance(other, CDElement):
            return NotImplemented
        _same_level(self, other)
        return CDElement(self.coords - other.coords)

    def __neg__(self):
        return CDElement(-self.coords)

    def __eq__(self, other):
        if not isinstance(other, CDElement):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(
            np.array_equal(self.coords, other.coords)
        )

    __hash__ = None

    def allclose(self, other: CDElement, atol: float = DEFAULT_TOLERANCES.algebra) -> bool:
        return self.coords.shape == other.coords.shape and bool(
            np.allclose(self.coords, other.coords, rtol=0.0, atol=atol)
        )

    def __repr__(self):
        return f"CDElement(level={self.level}, coords={self.coords.tolist()})"


def _as_element(x) -> CDElement:
    return x if isinstance(x, CDElement) else CDElement(x)


def _same_level(x: CDElement, y: CDElement):
    if x.coords.size != y.coords.size:
        raise LevelMismatchError(f"level mismatch: {x.level} vs {y.level}")


def cd_multiply(x, y) -> CDElement:
    x, y = _as_element(x), _as_element(y)
    _same_level(x, y)
    return CDElement(cd_mul(x.coords, y.coords))


def cd_conjugate(x) -> CDElement:
    return _as_element(x).conj()


def cd_inverse(x) -> CDElement:
    return CDElement(cd_inv(_as_element(x).coords))


def _require_unit(x: CDElement, what: str, tol: float):
    if abs(x.norm() - 1.0) > tol:
        raise DomainError(f"{what} must be a unit element, |{what}| = {x.norm()!r}")


def gamma_map(x, v, tol: float = DEFAULT_TOLERANCES.division) -> CDElement:
    """``Gamma_x(v) = x^{-1} v`` for a unit ``x``; an isometry of ``R^8``."""
    x, v = _as_element(x), _as_element(v)
    _same_level(x, v)
    _require_unit(x, "x", tol)
    # For |x| = 1 the inverse is the conjugate; no division needed.
    return CDElement(cd_mul(cd_conj(x.coords), v.coords))


def killing_field(v, x, tol: float = DEFAULT_TOLERANCES.division) -> CDElement:
    """``V(x) = x v``: the Killing field of the sphere generated by imaginary ``v``."""
    v, x = _as_element(v), _as_element(x)
    _same_level(x, v)
    if abs(v.coords[0]) > tol:
        raise DomainError(f"v must be purely imaginary, Re(v) = {v.coords[0]!r}")
    _require_unit(x, "x", tol)
    return CDElement(cd_mul(x.coords, v.coords))


def is_imaginary(v, tol: float = DEFAULT_TOLERANCES.algebra) -> bool:
    """Membership in the tangent space at 1 of the unit sphere: ``Re(v) = 0``."""
    return bool(abs(np.asarray(_as_element(v).coords)[0]) <= tol)


@dataclass(frozen=True, eq=False)
class TranslationMatrix:
    kind: str
    base: CDElement
    entries: np.ndarray

    def apply(self, v) -> CDElement:
        return CDElement(self.entries @ _as_element(v).coords)

    def is_orthogonal(self, tol: float = DEFAULT_TOLERANCES.algebra) -> bool:
        m = self.entries
        return bool(np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) < tol)

    def is_skew(self, tol: float = DEFAULT_TOLERANCES.algebra) -> bool:
        m = self.entries
        return bool(np.max(np.abs(m + m.T)) < tol)


def translation_matrix(base, kind: str = "left") -> TranslationMatrix:
    base = _as_element(base)
    if kind == "left":
        m = left_matrix(base.coords)
    elif kind == "right":
        m = right_matrix(base.coords)
    else:
        raise ValueError(f"kind must be 'left' or 'right', got {kind!r}")
    m = np.array(m)
    m.setflags(write=False)
    return TranslationMatrix(kind, base, m)


def sedenion_zero_divisor() -> tuple[np.ndarray, np.ndarray]:
    """Find nonzero ``a, b`` at level 4 with ``a b = 0``.

    Searches ``(e_i + s e_j)(e_k + t e_l)`` over imaginary units; the first hit
    in lexicographic order is returned so the witness is reproducible.
    """
    eye = np.eye(16)
    c = structure_constants(4)
    pairs = [
        (i, j, s)
        for i, j in itertools.combinations(range(1, 16), 2)
        for s in (1.0, -1.0)
    ]
    for i, j, s in pairs:
        a = eye[i] + s * eye[j]
        la = np.einsum("i,ijk->kj", a, c)
        for k, l, t in pairs:
            b = eye[k] + t * eye[l]
            if not np.any(la @ b):
                return a, b
    raise RuntimeError("no zero divisor found")  # pragma: no cover

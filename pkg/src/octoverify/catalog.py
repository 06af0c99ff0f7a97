"""Explicit minimal isoparametric submanifolds of S^7.

Shipped families: totally geodesic great spheres, products of round spheres,
and minimal two-factor products sitting inside a great sphere.  Every entry
comes with an analytic chart and an analytic parallel normal frame.

Block convention: R^8 = R^(n_1+1) + ... + R^(n_p+1) in factor order, each
factor parametrized by polyspherical angles; great spheres and compositions
occupy the leading coordinates and leave the trailing ones zero.

Spec grammar::

    spec := "great:" m
          | "product:" n1[,n2...] ["@" r1,r2,...]
          | "compose:great:" m "/product:" p "," q
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .charts import Chart
from .errors import SpecError
from .fields import AmbientField, affine_field, constant_field

AMBIENT = 8
_MINIMAL_TOL = 1e-12
_RADII_TOL = 1e-2
NODE_CAP = 200_000


def default_grid(dim: int) -> int:
    if dim <= 3:
        return 24
    if dim <= 5:
        return 12
    return 8


def effective_grid(requested, dim: int, cap: int = NODE_CAP) -> tuple:
    """Per-axis counts after coarsening so the node count stays within ``cap``."""
    if requested is None:
        requested = default_grid(dim)
    counts = [int(requested)] * dim if np.isscalar(requested) else [int(c) for c in requested]
    if len(counts) == 1 and dim > 1:
        counts = counts * dim
    if len(counts) != dim:
        raise ValueError(f"grid has {len(counts)} entries for a {dim}-dimensional chart")
    while int(np.prod(counts)) > cap:
        i = int(np.argmax(counts))
        counts[i] -= 1
    return tuple(counts)


# -- polyspherical jets -------------------------------------------------------

_ONE, _SIN, _COS = 0, 1, 2


def _factor_kinds(n: int) -> np.ndarray:
    kinds = np.zeros((n + 1, n), dtype=int)
    for j in range(n + 1):
        for l in range(n):
            if l < j:
                kinds[j, l] = _SIN
            elif l == j:
                kinds[j, l] = _COS
    return kinds


def sphere_jet(phi: np.ndarray, radius: float, order: int = 2):
    """Polyspherical parametrization of S^n(radius) in R^(n+1) and its jet.

    ``x_1 = r cos p_1``, ``x_j = r sin p_1 ... sin p_(j-1) cos p_j``,
    ``x_(n+1) = r sin p_1 ... sin p_n``.
    """
    phi = np.asarray(phi, dtype=float)
    n = phi.shape[-1]
    kinds = _factor_kinds(n)
    s, c = np.sin(phi)[..., None, :], np.cos(phi)[..., None, :]
    shape = phi.shape[:-1] + (n + 1, n)
    one = np.ones(shape)
    zero = np.zeros(shape)
    vals = np.where(kinds == _SIN, s, np.where(kinds == _COS, c, one))
    d1 = np.where(kinds == _SIN, c, np.where(kinds == _COS, -s, zero))
    d2 = -np.where(kinds == _ONE, zero, vals)

    def prod_except(skip):
        keep = [l for l in range(n) if l not in skip]
        if not keep:
            return np.ones(phi.shape[:-1] + (n + 1,))
        return np.prod(vals[..., keep], axis=-1)

    x = radius * prod_except(())
    if order < 1:
        return x, None, None
    dx = np.stack([radius * d1[..., a] * prod_except((a,)) for a in range(n)], axis=-1)
    if order < 2:
        return x, dx, None
    d2x = np.empty(phi.shape[:-1] + (n + 1, n, n))
    for a in range(n):
        d2x[..., a, a] = radius * d2[..., a] * prod_except((a,))
        for b in range(a + 1, n):
            t = radius * d1[..., a] * d1[..., b] * prod_except((a, b))
            d2x[..., a, b] = t
            d2x[..., b, a] = t
    return x, dx, d2x


def _sphere_domain(n: int):
    if n == 1:
        return [0.0], [2 * math.pi], [True]
    lower = [0.0] * n
    upper = [math.pi] * (n - 1) + [2 * math.pi]
    periodic = [False] * (n - 1) + [True]
    return lower, upper, periodic


def product_chart(factors, radii, ambient: int = AMBIENT, grid=None, name: str = "") -> Chart:
    """Chart of S^n1(r1) x ... x S^np(rp) in the leading coordinates of R^ambient."""
    factors = tuple(int(n) for n in factors)
    radii = tuple(float(r) for r in radii)
    d = sum(factors)
    rows = [sum(n + 1 for n in factors[:i]) for i in range(len(factors))]
    cols = [sum(factors[:i]) for i in range(len(factors))]

    def jet_fn(u, order):
        u = np.asarray(u, dtype=float)
        lead = u.shape[:-1]
        f = np.zeros(lead + (ambient,))
        df = np.zeros(lead + (ambient, d)) if order >= 1 else None
        d2f = np.zeros(lead + (ambient, d, d)) if order >= 2 else None
        for n, r, r0, c0 in zip(factors, radii, rows, cols):
            x, dx, d2x = sphere_jet(u[..., c0 : c0 + n], r, order)
            f[..., r0 : r0 + n + 1] = x
            if order >= 1:
                df[..., r0 : r0 + n + 1, c0 : c0 + n] = dx
            if order >= 2:
                d2f[..., r0 : r0 + n + 1, c0 : c0 + n, c0 : c0 + n] = d2x
        return f, df, d2f

    lower, upper, periodic, loci, powers = [], [], [], [], []
    for i, n in enumerate(factors):
        lo, hi, per = _sphere_domain(n)
        lower += lo
        upper += hi
        periodic += per
        # the metric density of S^n carries sin(phi_a)**(n - 1 - a)
        powers += [n - 1 - a for a in range(n - 1)] + [0]
        for a in range(n - 1):
            loci.append(f"u{cols[i] + a} in {{0, pi}}")
    if grid is None:
        grid = default_grid(d)
    if np.isscalar(grid):
        grid = (int(grid),) * d
    # reference parameter: every polar angle at pi/2, azimuths at 0
    ustar = np.zeros(d)
    for n, c0 in zip(factors, cols):
        ustar[c0 : c0 + n - 1] = math.pi / 2
    ystar = jet_fn(ustar, 0)[0]

    def recenter(x):
        # blockwise Householder reflections sending F(ustar) to x
        x = np.asarray(x, dtype=float)
        q = np.broadcast_to(np.eye(ambient), x.shape[:-1] + (ambient, ambient)).copy()
        for n, r0 in zip(factors, rows):
            blk = slice(r0, r0 + n + 1)
            w = ystar[blk] - x[..., blk]
            ww = np.sum(w * w, axis=-1)
            keep = ww > 1e-24
            scale = np.where(keep, 2.0 / np.where(keep, ww, 1.0), 0.0)
            q[..., blk, blk] -= scale[..., None, None] * w[..., :, None] * w[..., None, :]
        return ustar, q

    return Chart(
        d, tuple(lower), tuple(upper), tuple(periodic), jet_fn, tuple(grid), name, tuple(loci),
        recenter=recenter, polar_powers=tuple(powers),
    )


# -- specs ---------------------------------------------------------------------

def minimal_radii(factors) -> list:
    """Radii ``sqrt(n_i / d)`` making the product of spheres minimal.

    A single factor is a great sphere and gets radius 1.
    """
    factors = [int(n) for n in factors]
    if not factors or any(n < 1 for n in factors):
        raise SpecError(f"factor dimensions must be positive integers, got {factors}")
    if len(factors) == 1:
        if factors[0] + 1 > AMBIENT - 1:
            raise SpecError(f"a single factor S^{factors[0]} is not a proper great sphere of S^7")
        return [1.0]
    total = sum(n + 1 for n in factors)
    if total != AMBIENT:
        raise SpecError(f"sum of (n_i + 1) is {total}, must be {AMBIENT}")
    d = sum(factors)
    return [math.sqrt(n / d) for n in factors]


def _hyperplane_rows(r: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``{a : sum a_i r_i = 0}``, Gram-Schmidt on e_1, e_2, ..."""
    rhat = r / np.linalg.norm(r)
    rows = [rhat]
    out = []
    for e in np.eye(r.size):
        v = e.copy()
        for w in rows:
            v = v - w * (w @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-9:
            v = v / nv
            rows.append(v)
            out.append(v)
        if len(out) == r.size - 1:
            break
    return np.array(out)


def _nu_matrix(factors, radii, row, ambient: int = AMBIENT) -> np.ndarray:
    a = np.zeros((ambient, ambient))
    start = 0
    for n, r, c in zip(factors, radii, row):
        a[start : start + n + 1, start : start + n + 1] = np.eye(n + 1) * (c / r)
        start += n + 1
    return a


@dataclass(frozen=True)
class NormalHintSet:
    """Analytic unit normal fields, all parallel for shipped entries."""

    fields: tuple
    coefficient_rows: Optional[np.ndarray] = field(default=None, compare=False)

    @property
    def labels(self) -> list:
        return [f.label for f in self.fields]

    def __len__(self):
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)

    def __getitem__(self, i):
        return self.fields[i]


@dataclass(frozen=True)
class ProductSphereSpec:
    factors: tuple
    radii: Optional[tuple] = None
    ambient: int = AMBIENT

    kind = "product"

    def __post_init__(self):
        factors = tuple(int(n) for n in self.factors)
        object.__setattr__(self, "factors", factors)
        if len(factors) < 2:
            raise SpecError("a product needs at least two factors (use great:m for one)")
        if any(n < 1 for n in factors):
            raise SpecError(f"factor dimensions must be >= 1, got {list(factors)}")
        total = sum(n + 1 for n in factors)
        if total != self.ambient:
            raise SpecError(f"sum of (n_i + 1) is {total}, must be {self.ambient}")
        if self.radii is not None:
            radii = tuple(float(r) for r in self.radii)
            object.__setattr__(self, "radii", radii)
            if len(radii) != len(factors):
                raise SpecError(f"{len(radii)} radii given for {len(factors)} factors")
            if any(not r > 0 for r in radii):
                raise SpecError("radii must be positive")
            s = sum(r * r for r in radii)
            if abs(s - 1.0) > _RADII_TOL:
                raise SpecError(f"sum of squared radii is {s!r}, must be 1")

    @property
    def d(self) -> int:
        return sum(self.factors)

    @property
    def k(self) -> int:
        return AMBIENT - 1 - self.d

    @property
    def unit_radii(self) -> tuple:
        """Radii rescaled to lie exactly on the unit sphere."""
        if self.radii is None:
            d = self.d
            return tuple(math.sqrt(n / d) for n in self.factors)
        r = np.array(self.radii)
        return tuple((r / np.linalg.norm(r)).tolist())

    @property
    def minimal(self) -> bool:
        d = self.d
        return all(abs(r * r - n / d) <= _MINIMAL_TOL for n, r in zip(self.factors, self.unit_radii))

    isoparametric = True

    @property
    def name(self) -> str:
        return format_spec(self)


@dataclass(frozen=True)
class GreatSphereSpec:
    m: int
    inner: Optional[ProductSphereSpec] = None

    isoparametric = True

    def __post_init__(self):
        m = int(self.m)
        object.__setattr__(self, "m", m)
        if self.inner is None:
            if not 1 <= m <= 6:
                raise SpecError(f"great sphere dimension must be in 1..6, got {m}")
        else:
            if not 3 <= m <= 7:
                raise SpecError(f"composition needs 3 <= m <= 7, got {m}")
            if self.inner.ambient != m + 1:
                raise SpecError(
                    f"inner hypersurface lives in R^{self.inner.ambient}, expected R^{m + 1}"
                )
            if len(self.inner.factors) != 2:
                raise SpecError("inner hypersurface must have exactly two factors")

    @property
    def kind(self) -> str:
        return "great" if self.inner is None else "compose"

    @property
    def d(self) -> int:
        return self.m if self.inner is None else self.m - 1

    @property
    def k(self) -> int:
        return AMBIENT - 1 - self.d

    @property
    def minimal(self) -> bool:
        return self.inner is None or self.inner.minimal

    @property
    def name(self) -> str:
        return format_spec(self)


@dataclass(frozen=True)
class CustomSpec:
    """Extension point for manifolds given by a user-supplied builder.

    ``builder(grid)`` returns ``(Chart, NormalHintSet)``.
    """

    label: str
    d: int
    builder: Callable = field(compare=False)
    minimal: bool = False
    isoparametric: bool = False

    kind = "custom"

    @property
    def k(self) -> int:
        return AMBIENT - 1 - self.d

    @property
    def name(self) -> str:
        return f"custom:{self.label}"


def build_chart(spec, grid=None):
    """Chart and normal hint set of a catalog spec.

    ``grid`` (a count or per-axis counts) is coarsened to the node cap.
    """
    if isinstance(spec, CustomSpec):
        return spec.builder(grid)
    grid = effective_grid(grid, spec.d)
    if isinstance(spec, ProductSphereSpec):
        radii = spec.unit_radii
        chart = product_chart(spec.factors, radii, grid=grid, name=spec.name)
        rows = _hyperplane_rows(np.array(radii))
        hints = tuple(
            affine_field(_nu_matrix(spec.factors, radii, row), label=f"nu{j + 1}", parallel=True)
            for j, row in enumerate(rows)
        )
        return chart, NormalHintSet(hints, rows)
    if isinstance(spec, GreatSphereSpec):
        m = spec.m
        eye = np.eye(AMBIENT)
        tail = tuple(
            constant_field(eye[i], label=f"e{i}", parallel=True) for i in range(m + 1, AMBIENT)
        )
        if spec.inner is None:
            chart = product_chart((m,), (1.0,), grid=grid, name=spec.name)
            return chart, NormalHintSet(tail)
        inner = spec.inner
        radii = inner.unit_radii
        chart = product_chart(inner.factors, radii, grid=grid, name=spec.name)
        row = _hyperplane_rows(np.array(radii))[0]
        nu = affine_field(_nu_matrix(inner.factors, radii, row), label="nu", parallel=True)
        return chart, NormalHintSet((nu,) + tail)
    raise TypeError(f"not a catalog spec: {spec!r}")


SHIPPED = (
    "great:2",
    "great:3",
    "great:4",
    "great:5",
    "great:6",
    "product:3,3",
    "product:1,5",
    "product:2,4",
    "product:1,1,3",
    "product:1,2,2",
    "product:1,1,1,1",
    "compose:great:3/product:1,1",
    "compose:great:4/product:1,2",
    "compose:great:5/product:2,2",
    "compose:great:6/product:2,3",
)


def catalog_list() -> list:
    return [parse_spec(s) for s in SHIPPED]


# -- grammar ---------------------------------------------------------------------

_INT = re.compile(r"[0-9]+")
_NUM = re.compile(r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message):
        raise SpecError(message, self.text, self.pos)

    def accept(self, literal: str) -> bool:
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str):
        if not self.accept(literal):
            self.fail(f"expected {literal!r}")

    def integer(self) -> int:
        m = _INT.match(self.text, self.pos)
        if not m:
            self.fail("expected an integer")
        self.pos = m.end()
        return int(m.group())

    def number(self) -> float:
        m = _NUM.match(self.text, self.pos)
        if not m:
            self.fail("expected a number")
        self.pos = m.end()
        return float(m.group())

    def end(self):
        if self.pos != len(self.text):
            self.fail("unexpected trailing input")


def parse_spec(text: str):
    """Parse a manifold spec string; raises SpecError with a position."""
    text = text.strip()
    s = _Scanner(text)
    if s.accept("compose:"):
        s.expect("great:")
        m = s.integer()
        s.expect("/product:")
        p = s.integer()
        s.expect(",")
        q = s.integer()
        s.end()
        inner = ProductSphereSpec((p, q), ambient=m + 1)
        return GreatSphereSpec(m, inner)
    if s.accept("great:"):
        m = s.integer()
        s.end()
        return GreatSphereSpec(m)
    if s.accept("product:"):
        factors = [s.integer()]
        while s.accept(","):
            factors.append(s.integer())
        radii = None
        if s.accept("@"):
            radii = [s.number()]
            while s.accept(","):
                radii.append(s.number())
        s.end()
        return ProductSphereSpec(tuple(factors), None if radii is None else tuple(radii))
    s.fail("expected 'great:', 'product:' or 'compose:great:'")


def format_spec(spec) -> str:
    if isinstance(spec, ProductSphereSpec):
        out = "product:" + ",".join(str(n) for n in spec.factors)
        if spec.radii is not None:
            out += "@" + ",".join(repr(r) for r in spec.radii)
        return out
    if isinstance(spec, GreatSphereSpec):
        if spec.inner is None:
            return f"great:{spec.m}"
        p, q = spec.inner.factors
        return f"compose:great:{spec.m}/product:{p},{q}"
    if isinstance(spec, CustomSpec):
        return spec.name
    raise TypeError(f"not a catalog spec: {spec!r}")


def in_sphere_normal(spec, hints: NormalHintSet) -> Optional[AmbientField]:
    """Normal of M inside the smallest great sphere containing it as a hypersurface.

    None when M is not a hypersurface of a totally geodesic sphere.
    """
    if isinstance(spec, ProductSphereSpec):
        return hints[0] if spec.k == 1 else None
    if isinstance(spec, GreatSphereSpec):
        return hints[0]
    return None

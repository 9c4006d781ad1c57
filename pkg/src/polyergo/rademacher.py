"""Constructive dyadic decompositions behind the Rademacher-Menshov inequalities.

Families live on the dyadic lattice of the cube [1, 1+2^L]^{k0} at resolution
L0 <= L: the grid 1 + j*2^(L-L0), j = 0..2^L0, on every axis.  The classical
one-parameter inequality bounds the 2-variation by sqrt(2) times a sum of
scale-wise l^2 square functions of dyadic increments; the multiparameter
version requires the family to vanish on the lower faces (a_s = 0 whenever
some coordinate equals 1) and carries the constant 2^(k0/2).

The two-parameter proof device is materialized in
:func:`rectangle_decomposition`: an increment a_{s'} - a_s of a vanishing
family is an exact signed sum of mixed differences over dyadic rectangles,
at most four per scale pair, and the rectangles used by consecutive chain
increments are pairwise disjoint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FormatError, OrderError, PreconditionError
from .lattice import ParamGrid, SampleFamily
from .seminorms import variation


@dataclass
class DyadicBlockFamily:
    """Samples on the dyadic lattice of [1, 1+2^L]^{k0} at resolution L0.

    ``values`` has shape (2^L0 + 1,) * k0; entry j corresponds to the point
    with coordinates 1 + j_i * 2^(L - L0).
    """

    L: int
    L0: int
    values: np.ndarray

    def __post_init__(self):
        if self.L < 0 or self.L0 < 0 or self.L0 > self.L:
            raise DomainError(f"need 0 <= L0 <= L, got L={self.L}, L0={self.L0}")
        vals = np.asarray(self.values, dtype=complex)
        side = 2 ** self.L0 + 1
        if vals.ndim == 0 or any(n != side for n in vals.shape):
            raise FormatError(
                f"values must be a k0-cube of side 2^L0+1={side}, got shape {vals.shape}"
            )
        self.values = vals

    @property
    def k0(self) -> int:
        return self.values.ndim

    @property
    def step(self) -> float:
        return float(2 ** (self.L - self.L0))

    def axis(self) -> np.ndarray:
        return 1.0 + self.step * np.arange(2 ** self.L0 + 1)

    def family(self) -> SampleFamily:
        ax = self.axis()
        return SampleFamily(ParamGrid(tuple(ax.copy() for _ in range(self.k0))), self.values)

    def has_vanishing_property(self) -> bool:
        """True when a_s = 0 on every face with some coordinate equal to 1."""
        for axis in range(self.k0):
            face = np.take(self.values, 0, axis=axis)
            if np.any(face != 0):
                return False
        return True


def rm_bound_1d(fam: DyadicBlockFamily):
    """Both sides of the one-parameter dyadic inequality lhs <= sqrt(2) * rhs.

    lhs is the exact 2-variation over the lattice.  rhs sums, over scales
    l = 1..L0, the l^2 norm of the increments between consecutive points
    1 + (j-1) 2^(L-l) and 1 + j 2^(L-l); finer scales do not exist on lattice
    data, so the scale sum is truncated at the data resolution.
    """
    if fam.k0 != 1:
        raise FormatError("rm_bound_1d expects a one-parameter family")
    lhs = variation(fam.family(), 2.0).value
    vals = fam.values
    rhs = 0.0
    for l in range(1, fam.L0 + 1):
        stride = 2 ** (fam.L0 - l)
        coarse = vals[::stride]
        rhs += float(np.sqrt(np.sum(np.abs(np.diff(coarse)) ** 2)))
    return lhs, rhs


def rm_bound_multi(fam: DyadicBlockFamily):
    """Both sides of the multiparameter dyadic inequality lhs <= 2^(k0/2) * rhs.

    Requires the vanishing property.  rhs sums, over scale vectors
    l in [1..L0]^k0, the l^2 norm of the mixed differences of dyadic blocks
    with side 2^(L-l_i) along axis i.
    """
    if fam.k0 < 2:
        raise FormatError("rm_bound_multi expects at least two parameters")
    if not fam.has_vanishing_property():
        raise PreconditionError("family must vanish whenever some coordinate equals 1")
    lhs = variation(fam.family(), 2.0).value
    vals = fam.values
    k0 = fam.k0
    rhs = 0.0
    scale_axes = [range(1, fam.L0 + 1)] * k0
    for l in itertools.product(*scale_axes):
        strides = [2 ** (fam.L0 - li) for li in l]
        block = np.zeros(tuple(2 ** li for li in l), dtype=complex)
        for corner_bits in range(1 << k0):
            sign = (-1) ** (k0 - bin(corner_bits).count("1"))
            slices = []
            for i in range(k0):
                off = strides[i] if corner_bits >> i & 1 else 0
                slices.append(slice(off, off + (2 ** l[i]) * strides[i], strides[i]))
            block = block + sign * vals[tuple(slices)]
        rhs += float(np.sqrt(np.sum(np.abs(block) ** 2)))
    return lhs, rhs


@dataclass(frozen=True)
class DyadicRectangle:
    """Half-open rectangle [x0, x1) x [y0, y1) in lattice coordinates, with sign.

    Sides are dyadic: x1 - x0 = 2^(L-l1), y1 - y0 = 2^(L-l2), aligned to the
    offset-1 dyadic grid.  ``scale`` stores (l1, l2); ``part`` records which of
    the three corner rectangles the piece subdivides (0 the main block, 1 the
    left strip, 2 the bottom strip) -- the at-most-four-per-scale-pair count
    holds within each part.
    """

    sign: int
    x: tuple
    y: tuple
    scale: tuple
    part: int = 0

    def mixed_difference(self, fam: DyadicBlockFamily) -> complex:
        step = fam.step
        vals = fam.values

        def idx(coord: float) -> int:
            j = (coord - 1.0) / step
            return int(round(j))

        x0, x1 = idx(self.x[0]), idx(self.x[1])
        y0, y1 = idx(self.y[0]), idx(self.y[1])
        return complex(vals[x1, y1] - vals[x0, y1] - vals[x1, y0] + vals[x0, y0])


def _maximal_dyadic_intervals(a: int, b: int, L0: int):
    """Greedy maximal dyadic split of [a, b) in lattice units, as (start, m) pieces.

    Units are multiples of the base cell; a piece (start, m) covers
    [start, start + 2^m).  Any dyadic interval decomposition produced this way
    uses at most two pieces of each size.
    """
    pieces = []
    c = a
    while c < b:
        if c == 0:
            align = L0
        else:
            align = (c & -c).bit_length() - 1
        room = (b - c).bit_length() - 1
        m = min(align, room)
        pieces.append((c, m))
        c += 1 << m
    return pieces


def rectangle_decomposition(fam: DyadicBlockFamily, s, s_prime):
    """Signed dyadic rectangles whose mixed differences rebuild a_{s'} - a_s.

    Two-parameter only.  For lattice points (1,1) < s < s' the increment of a
    vanishing family equals the sum of mixed differences over the rectangles
    [s1,s1')x[s2,s2'), [1,s1)x[s2,s2'), and [s1,s1')x[1,s2), each split into
    maximal dyadic rectangles; at most four rectangles share any scale pair.
    """
    if fam.k0 != 2:
        raise FormatError("rectangle decomposition is materialized for two parameters")
    s = np.asarray(s, dtype=float)
    sp = np.asarray(s_prime, dtype=float)
    step = fam.step
    top = 1.0 + 2.0 ** fam.L

    def to_units(p):
        u = (p - 1.0) / step
        r = np.rint(u)
        if np.any(np.abs(u - r) > 1e-9):
            raise FormatError(f"point {p} is not on the lattice")
        return r.astype(int)

    su, spu = to_units(s), to_units(sp)
    if not (np.all(su > 0) and np.all(spu > su) and np.all(sp <= top)):
        raise PreconditionError("need (1,1) < s < s' <= 1 + 2^L on the lattice")

    L0 = fam.L0
    rects = []
    corner_rects = [
        ((su[0], spu[0]), (su[1], spu[1])),
        ((0, su[0]), (su[1], spu[1])),
        ((su[0], spu[0]), (0, su[1])),
    ]
    for part, ((xa, xb), (ya, yb)) in enumerate(corner_rects):
        xs = _maximal_dyadic_intervals(int(xa), int(xb), L0)
        ys = _maximal_dyadic_intervals(int(ya), int(yb), L0)
        for cx, mx in xs:
            for cy, my in ys:
                rects.append(
                    DyadicRectangle(
                        sign=1,
                        x=(1.0 + cx * step, 1.0 + (cx + (1 << mx)) * step),
                        y=(1.0 + cy * step, 1.0 + (cy + (1 << my)) * step),
                        scale=(L0 - mx, L0 - my),
                        part=part,
                    )
                )
    return rects


def reconstruct_increment(fam: DyadicBlockFamily, rects) -> complex:
    """Signed sum of mixed differences over a rectangle list."""
    return sum((r.sign * r.mixed_difference(fam) for r in rects), 0.0 + 0.0j)


def rectangles_disjoint(rects_a, rects_b) -> bool:
    """True when no rectangle of one list overlaps a rectangle of the other."""
    for ra in rects_a:
        for rb in rects_b:
            if (
                ra.x[0] < rb.x[1]
                and rb.x[0] < ra.x[1]
                and ra.y[0] < rb.y[1]
                and rb.y[0] < ra.y[1]
            ):
                return False
    return True

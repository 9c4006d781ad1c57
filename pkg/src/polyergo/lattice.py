"""Multi-index arithmetic, monomial maps, product grids, and the difference calculus.

Scale parameters live in the open positive cone of R^k.  All seminorms in this
package are computed over finite product grids of such parameters, with complex
sample values attached to every grid point.  The partial order is the
coordinatewise one: x <= y iff x_i <= y_i for every axis, strict when every
coordinate increases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError, FormatError, OffGridError

# Monomial values outside this window are treated as overflow and rejected.
_VALUE_FLOOR = 1e-300
_VALUE_CEIL = 1e300


def as_param_vector(s) -> np.ndarray:
    """Validate and return a strictly positive finite parameter vector."""
    arr = np.asarray(s, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"parameter vector must be 1-d and nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"parameter vector must be finite and strictly positive, got {arr}")
    return arr


def tensor_scale(s, u) -> np.ndarray:
    """Componentwise product of two parameter vectors of equal length."""
    sv, uv = as_param_vector(s), as_param_vector(u)
    if sv.shape != uv.shape:
        raise DimensionMismatch(f"length mismatch: {sv.shape[0]} vs {uv.shape[0]}")
    return sv * uv


def scalar_dilate(lam: float, s) -> np.ndarray:
    """Multiply every coordinate of ``s`` by the positive scalar ``lam``."""
    if not np.isfinite(lam) or lam <= 0.0:
        raise DomainError(f"dilation factor must be positive and finite, got {lam}")
    return lam * as_param_vector(s)


def precedes(x, y, strict: bool = False) -> bool:
    """Coordinatewise comparison: x_i <= y_i for all i (`<` when strict)."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape:
        raise DimensionMismatch(f"length mismatch: {xv.shape} vs {yv.shape}")
    if strict:
        return bool(np.all(xv < yv))
    return bool(np.all(xv <= yv))


def _int_pow(base: float, exponent: int) -> float:
    """base**exponent for integer exponent >= 0 by repeated squaring."""
    result = 1.0
    b = base
    e = int(exponent)
    while e > 0:
        if e & 1:
            result *= b
        e >>= 1
        if e:
            b *= b
    return result


def as_exponent_matrix(entries) -> np.ndarray:
    """Validate a d x k matrix of nonnegative integer monomial exponents."""
    mat = np.asarray(entries)
    if mat.ndim != 2 or mat.size == 0:
        raise DimensionMismatch(f"exponent matrix must be 2-d and nonempty, got shape {mat.shape}")
    if not np.issubdtype(mat.dtype, np.integer):
        as_int = np.asarray(entries, dtype=np.int64)
        if not np.array_equal(as_int, np.asarray(entries, dtype=float)):
            raise DomainError("exponent matrix entries must be integers")
        mat = as_int
    if np.any(mat < 0):
        raise DomainError("exponent matrix entries must be nonnegative")
    return mat.astype(np.int64)


def normalize_exponent_matrix(raw):
    """Drop zero columns (unused parameters) and zero rows (frozen output axes).

    Returns ``(matrix, kept_rows, kept_cols)`` with 0-based indices into the
    input.  The result has no zero rows or columns; it may be empty when every
    row or column vanishes, which is legal and reported through the index lists.
    """
    mat = as_exponent_matrix(raw)
    kept_rows = [i for i in range(mat.shape[0]) if mat[i].any()]
    kept_cols = [j for j in range(mat.shape[1]) if mat[:, j].any()]
    return mat[np.ix_(kept_rows, kept_cols)], tuple(kept_rows), tuple(kept_cols)


@dataclass(frozen=True)
class MonomialMap:
    """A d-tuple of coefficient-one monomials P_i(s) = prod_j s_j^{a_ij}.

    The exponent matrix has one row per monomial.  Construction does not
    normalize; callers that require no zero rows/columns should pass the
    matrix through :func:`normalize_exponent_matrix` first.
    """

    exponents: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "exponents", as_exponent_matrix(self.exponents))

    @property
    def d(self) -> int:
        return self.exponents.shape[0]

    @property
    def k(self) -> int:
        return self.exponents.shape[1]

    @property
    def degree(self) -> int:
        return int(self.exponents.sum(axis=1).max())

    @property
    def row_sums(self) -> np.ndarray:
        return self.exponents.sum(axis=1)

    def __call__(self, s) -> np.ndarray:
        return evaluate_monomials(self, s)


def evaluate_monomials(mapping, s) -> np.ndarray:
    """Evaluate every monomial of ``mapping`` at the positive vector ``s``."""
    mat = mapping.exponents if isinstance(mapping, MonomialMap) else as_exponent_matrix(mapping)
    sv = as_param_vector(s)
    if sv.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"vector has {sv.shape[0]} coordinates, matrix expects {mat.shape[1]}")
    out = np.empty(mat.shape[0], dtype=float)
    for i in range(mat.shape[0]):
        value = 1.0
        for j in range(mat.shape[1]):
            if mat[i, j]:
                value *= _int_pow(float(sv[j]), int(mat[i, j]))
        out[i] = value
    if np.any(out < _VALUE_FLOOR) or np.any(out > _VALUE_CEIL):
        raise DomainError("monomial value outside the supported range [1e-300, 1e300]")
    return out


@dataclass(frozen=True)
class ParamGrid:
    """A finite product grid: one sorted, strictly increasing positive axis per parameter."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(np.asarray(ax, dtype=float) for ax in self.axes)
        if not axes:
            raise DimensionMismatch("grid needs at least one axis")
        for ax in axes:
            if ax.ndim != 1 or ax.size == 0:
                raise FormatError("every grid axis must be a nonempty 1-d array")
            if np.any(ax <= 0.0) or not np.all(np.isfinite(ax)):
                raise DomainError("grid coordinates must be finite and strictly positive")
            if np.any(np.diff(ax) <= 0.0):
                raise FormatError("grid axes must be strictly increasing")
        object.__setattr__(self, "axes", axes)

    @property
    def k(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(ax) for ax in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod([len(ax) for ax in self.axes]))

    def points(self) -> np.ndarray:
        """All grid points as a (size, k) array in C (row-major) order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def index_of(self, point) -> tuple:
        """Multi-index of an exactly matching grid point, else OffGridError."""
        p = np.asarray(point, dtype=float)
        if p.shape != (self.k,):
            raise DimensionMismatch(f"point has shape {p.shape}, grid has {self.k} axes")
        idx = []
        for ax, coord in zip(self.axes, p):
            pos = int(np.searchsorted(ax, coord))
            if pos >= len(ax) or ax[pos] != coord:
                raise OffGridError(f"coordinate {coord} not on axis {ax}")
            idx.append(pos)
        return tuple(idx)

    def contains(self, point) -> bool:
        try:
            self.index_of(point)
        except (OffGridError, DimensionMismatch):
            return False
        return True

    @staticmethod
    def dyadic(k: int, exponents) -> "ParamGrid":
        """Product grid with coordinates 2**e for e in ``exponents`` on every axis."""
        ax = np.array([2.0 ** e for e in exponents], dtype=float)
        return ParamGrid(tuple(ax.copy() for _ in range(k)))


@dataclass
class SampleFamily:
    """Complex sample values attached to every point of a product grid."""

    grid: ParamGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise DimensionMismatch(
                f"values shape {vals.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("sample values must be finite")
        self.values = vals

    @property
    def k(self) -> int:
        return self.grid.k

    @property
    def size(self) -> int:
        return self.grid.size

    def flat_points(self) -> np.ndarray:
        return self.grid.points()

    def flat_values(self) -> np.ndarray:
        return self.values.ravel()

    def value_at(self, point) -> complex:
        return complex(self.values[self.grid.index_of(point)])

    @staticmethod
    def from_function(grid: ParamGrid, func) -> "SampleFamily":
        pts = grid.points()
        vals = np.array([func(p) for p in pts], dtype=complex).reshape(grid.shape)
        return SampleFamily(grid, vals)


def _subset_offsets(k: int, K, h: np.ndarray):
    """Offsets s -> s + sum_{j in K'} e_j h_j for K' over subsets of K, with parity."""
    K = sorted(set(int(j) for j in K))
    if K and (K[0] < 0 or K[-1] >= k):
        raise DimensionMismatch(f"axis subset {K} out of range for k={k}")
    for mask in range(1 << len(K)):
        offset = np.zeros(k)
        bits = 0
        for pos, j in enumerate(K):
            if mask >> pos & 1:
                offset[j] = h[j]
                bits += 1
        yield offset, bits


def _as_step_vector(h, K) -> np.ndarray:
    """Steps must be finite, nonnegative, and strictly positive on the axes in K."""
    arr = np.asarray(h, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"step vector must be 1-d and nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise DomainError(f"step vector must be finite and nonnegative, got {arr}")
    for j in set(int(j) for j in K):
        if arr[j] <= 0.0:
            raise DomainError(f"step along axis {j} must be strictly positive")
    return arr


def shift(family: SampleFamily, K, h, s) -> complex:
    """Shift operator: the sample at s moved forward by h_j along every axis j in K."""
    hv = _as_step_vector(h, K)
    sv = as_param_vector(s)
    target = sv.copy()
    for j in set(int(j) for j in K):
        target[j] += hv[j]
    return family.value_at(target)


def mixed_difference(family: SampleFamily, K, h, s) -> complex:
    """Mixed partial difference along the axes in K with step vector h.

    Composes the single-axis forward differences a_{s+e_j h} - a_s over j in K;
    the empty set gives the sample itself.  Every referenced point must lie on
    the family's grid.
    """
    hv = _as_step_vector(h, K)
    sv = as_param_vector(s)
    if hv.shape != sv.shape:
        raise DimensionMismatch("step vector and base point must have equal length")
    m = len(set(int(j) for j in K))
    total = 0.0 + 0.0j
    for offset, bits in _subset_offsets(family.k, K, hv):
        total += (-1) ** (m - bits) * family.value_at(sv + offset)
    return total


def product_indices(shape):
    """Iterate all multi-indices of a shape in C order."""
    return itertools.product(*(range(n) for n in shape))

"""Parameter gluing: rank of the exponent matrix, scale selectors, and cubes.

Among the d monomials only r = rank of the exponent matrix independent scale
directions survive; the r selected rows define a surjection P^r onto the
positive cone of R^r.  For every integer vector n a scale s(n) is chosen with
P^r(s(n)) = 2^n, and a cube Q_n of fixed multiplicative width around s(n)
supports the long/short splitting of the 2-variation.

All linear algebra here (rank, basis rows, minimum-norm solves) runs in exact
rational arithmetic; conversion to floats happens only at the boundary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, DomainError, PreconditionError
from .lattice import MonomialMap, SampleFamily, as_param_vector, evaluate_monomials
from .seminorms import variation_points


def _frac_matrix(rows):
    return [[Fraction(int(x)) for x in row] for row in rows]


def _solve_square(A, b):
    """Exact solution of a square rational system, or None when singular."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col]
        M[col] = [x / inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def rank_and_basis_rows(matrix):
    """Rank of an integer matrix and the lexicographically first independent rows.

    Elimination is exact over the rationals; rows are scanned top-down and kept
    whenever they enlarge the span, so the returned 0-based row indices are the
    greedy (lexicographically first) independent set.
    """
    mat = np.asarray(matrix, dtype=np.int64)
    if mat.ndim != 2 or mat.size == 0:
        raise DimensionMismatch("rank needs a nonempty 2-d matrix")
    rows = _frac_matrix(mat)
    k = mat.shape[1]
    basis = []        # reduced echelon rows spanning the kept rows
    kept = []
    for i, row in enumerate(rows):
        red = row[:]
        for b in basis:
            lead = next(j for j in range(k) if b[j] != 0)
            if red[lead] != 0:
                f = red[lead] / b[lead]
                red = [x - f * y for x, y in zip(red, b)]
        if any(x != 0 for x in red):
            basis.append(red)
            kept.append(i)
    return len(kept), tuple(kept)


def _min_inf_norm(A, t):
    """Exact minimum of the max-norm of x subject to A x = t (A full row rank).

    Solved by vertex enumeration of the linear program min z, -z <= x_i <= z:
    a vertex makes k+1-r of the sign constraints tight, so every subset/sign
    pattern yields a square rational system whose feasible solutions are
    candidate vertices.  The feasible region contains no lines, hence the
    optimum sits at an enumerated vertex.
    """
    r = len(A)
    k = len(A[0])
    if all(x == 0 for x in t):
        return Fraction(0)
    best = None
    need = k + 1 - r
    for subset in itertools.combinations(range(k), need):
        for signs in itertools.product((1, -1), repeat=need):
            # unknowns: x_0..x_{k-1}, z
            M = [row[:] + [Fraction(0)] for row in A]
            rhs = list(t)
            for idx, sgn in zip(subset, signs):
                row = [Fraction(0)] * (k + 1)
                row[idx] = Fraction(1)
                row[k] = Fraction(-sgn)
                M.append(row)
                rhs.append(Fraction(0))
            sol = _solve_square(M, rhs)
            if sol is None:
                continue
            x, z = sol[:k], sol[k]
            if z < 0 or any(abs(xi) > z for xi in x):
                continue
            if best is None or z < best:
                best = z
    if best is None:
        raise PreconditionError("infinity-norm program had no vertex; matrix not full row rank?")
    return best


@dataclass(frozen=True)
class Cube:
    """Axis-parallel cube {left <= s <= right} with right = (1+2^L) * left."""

    left: np.ndarray
    right: np.ndarray

    def contains(self, s) -> bool:
        sv = np.asarray(s, dtype=float)
        return bool(np.all(self.left <= sv) and np.all(sv <= self.right))


@dataclass(frozen=True)
class GluingData:
    """Rank data, the dyadic-cover constant N0, and exact solver matrices.

    ``pinv_rows`` is A^T (A A^T)^{-1} for the selected r x k submatrix A, kept
    as exact rationals so that scale selection is reproducible bit for bit.
    """

    mapping: MonomialMap
    r: int
    basis_rows: tuple
    n0: int
    pinv_rows: tuple

    @property
    def L(self) -> int:
        return 4 * self.n0

    @property
    def selected(self) -> MonomialMap:
        return MonomialMap(self.mapping.exponents[list(self.basis_rows)])


def compute_n0(matrix_r) -> int:
    """Smallest admissible cover constant for the selected exponent rows.

    In log2 coordinates P^r(2^x) = 2^{A x}, so covering the unit frequency
    cube amounts to solving A x = t with bounded max-norm.  The minimum
    max-norm is convex in t, so its maximum over [0,1]^r sits at a vertex;
    N0 is the ceiling of that maximum, never below 2.
    """
    A = _frac_matrix(np.asarray(matrix_r, dtype=np.int64))
    r = len(A)
    rank, _ = rank_and_basis_rows(matrix_r)
    if rank != r:
        raise PreconditionError("selected rows must be linearly independent")
    if any(all(row[j] == 0 for row in A) for j in range(len(A[0]))):
        raise PreconditionError("selected rows must have no zero column")
    worst = Fraction(0)
    for vertex in itertools.product((0, 1), repeat=r):
        t = [Fraction(v) for v in vertex]
        norm = _min_inf_norm(A, t)
        worst = max(worst, norm)
    return max(2, math.ceil(worst))


def gluing_data(mapping: MonomialMap) -> GluingData:
    """Assemble rank, basis rows, N0, and the exact minimum-l2 solver."""
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    mat = mapping.exponents
    if not all(mat[i].any() for i in range(mat.shape[0])) or not all(
        mat[:, j].any() for j in range(mat.shape[1])
    ):
        raise PreconditionError("exponent matrix must be normalized (no zero rows/columns)")
    r, rows = rank_and_basis_rows(mat)
    sub = mat[list(rows)]
    # no zero column can survive in the selected rows: every row of the full
    # matrix is a rational combination of them
    assert all(sub[:, j].any() for j in range(sub.shape[1]))
    n0 = compute_n0(sub)
    A = _frac_matrix(sub)
    k = sub.shape[1]
    gram = [[sum(A[i][m] * A[j][m] for m in range(k)) for j in range(r)] for i in range(r)]
    gram_inv_cols = []
    for j in range(r):
        e = [Fraction(int(i == j)) for i in range(r)]
        gram_inv_cols.append(_solve_square(gram, e))
    # pinv = A^T gram^{-1}: k x r
    pinv = tuple(
        tuple(sum(A[m][i] * gram_inv_cols[j][m] for m in range(r)) for j in range(r))
        for i in range(k)
    )
    return GluingData(mapping, r, rows, n0, pinv)


def select_scale(gluing: GluingData, n) -> np.ndarray:
    """The scale s(n) = 2^x with x the minimum-l2 solution of A x = n.

    Exact rationals all the way to x; the only float steps are the final
    2**x per coordinate.  P^r(s(n)) = 2^n up to roundoff, and the choice is a
    homomorphism: s(n+m) = s(n) (x) s(m) exactly in exponent space.
    """
    nv = np.asarray(n, dtype=np.int64).ravel()
    if nv.size != gluing.r:
        raise DimensionMismatch(f"n must have {gluing.r} entries, got {nv.size}")
    x = [sum(row[j] * int(nv[j]) for j in range(gluing.r)) for row in gluing.pinv_rows]
    return np.array([2.0 ** float(xi) for xi in x])


def cube(gluing: GluingData, n) -> Cube:
    """The cube around s(n): left = 2^{-2N0} s(n), right = 2^{-2N0}(1+2^{4N0}) s(n)."""
    s = select_scale(gluing, n)
    lo = 2.0 ** (-2 * gluing.n0)
    return Cube(lo * s, lo * (1.0 + 2.0 ** (4 * gluing.n0)) * s)


def locate_box(gluing: GluingData, s) -> np.ndarray:
    """The unique n with P^r(s) in [2^n, 2^{n+1}) componentwise."""
    vals = evaluate_monomials(gluing.selected, as_param_vector(s))
    out = np.empty(gluing.r, dtype=np.int64)
    for i, v in enumerate(vals):
        mantissa, exp = math.frexp(v)   # v = mantissa * 2^exp, mantissa in [0.5, 1)
        out[i] = exp - 1
    return out


def compatibility_check(family: SampleFamily, mapping: MonomialMap, tol: float = 1e-9) -> bool:
    """True when samples agree wherever the monomial map (nearly) collides.

    Pairs of grid points with relatively tol-close monomial images must carry
    tol-close sample values; families of the form a_s = g(P(s)) pass by
    construction.
    """
    pts = family.flat_points()
    vals = family.flat_values()
    images = np.array([evaluate_monomials(mapping, p) for p in pts])
    n = len(pts)
    for i in range(n):
        diff = np.abs(images - images[i]).max(axis=1)
        close = diff <= tol * np.abs(images[i]).max()
        bad = close & (np.abs(vals - vals[i]) > tol)
        if bad.any():
            return False
    return True


@dataclass
class SplitVariationResult:
    long: float
    short_l2: float
    active: tuple   # integer vectors n whose cubes meet the grid

    def __iter__(self):
        return iter((self.long, self.short_l2))


def _candidate_boxes(gluing: GluingData, pts: np.ndarray):
    """Integer boxes of n that could place some grid point inside Q_n.

    Membership of s in Q_n forces, per selected row j with exponent sum rho_j,
    log2 P_j(s) - rho_j (log2(1+2^{4N0}) - 2N0) <= n_j <= log2 P_j(s) + 2N0 rho_j.
    """
    row_sums = gluing.selected.row_sums
    up = np.ceil(2 * gluing.n0 * row_sums).astype(int) + 1
    down = np.ceil(
        (math.log2(1.0 + 2.0 ** (4 * gluing.n0)) - 2 * gluing.n0) * row_sums
    ).astype(int) + 1
    cands = set()
    for p in pts:
        center = locate_box(gluing, p)
        ranges = [
            range(int(center[j] - down[j]), int(center[j] + up[j]) + 1)
            for j in range(gluing.r)
        ]
        cands.update(itertools.product(*ranges))
    return sorted(cands)


def split_variation_multi(family: SampleFamily, gluing: GluingData,
                          compat_tol: float = 1e-9) -> SplitVariationResult:
    """Long/short split of the 2-variation over the gluing cubes.

    The long part is the 2-variation, over the r-dimensional integer index n,
    of the samples at the grid point nearest (in log distance) to s(n), for
    every n whose cube meets the grid.  The short part combines per-cube
    2-variations in l^2.  Requires a compatible family: samples must be a
    function of the monomial image.
    """
    if not compatibility_check(family, gluing.mapping, compat_tol):
        raise PreconditionError("family is not compatible with the monomial map")
    pts = family.flat_points()
    vals = family.flat_values()
    logs = np.log2(pts)
    active = []
    long_values = []
    shorts = []
    for n in _candidate_boxes(gluing, pts):
        q = cube(gluing, np.array(n))
        inside = np.all(pts >= q.left, axis=1) & np.all(pts <= q.right, axis=1)
        if not inside.any():
            continue
        active.append(n)
        sel = np.where(inside)[0]
        shorts.append(variation_points(pts[sel], vals[sel], 2.0).value)
        s_n = select_scale(gluing, np.array(n))
        dist = np.sum((logs - np.log2(s_n)) ** 2, axis=1)
        long_values.append(vals[int(np.argmin(dist))])
    if not active:
        return SplitVariationResult(0.0, 0.0, ())
    npts = np.asarray(active, dtype=float)
    long_cert = variation_points(npts, np.asarray(long_values), 2.0)
    short_l2 = float(np.sqrt(np.sum(np.square(shorts))))
    return SplitVariationResult(long_cert.value, short_l2, tuple(active))

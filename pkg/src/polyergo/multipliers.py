"""Oscillatory-integral multipliers of polynomial averaging operators.

The averaging operator at scale s acts in frequency through

    m_s(xi) = integral over the unit cube of e(P(s (x) u) . xi) du,

with e(z) = exp(2 pi i z).  Evaluation is tensor-panel Gauss-Legendre with
panel counts proportional to the phase range per axis; axes along which the
phase is linear and uncoupled are integrated in closed form first.

A fixed Gaussian bump with unit integral supplies low-frequency projections:
the inclusion-exclusion alternating sum over coordinate subsets produces an
error multiplier with two-sided power decay in every P_i(s) xi_i, which is
probed empirically by :func:`decay_scan` and drives the off-diagonal bounds
on sharp frequency boxes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import BudgetError, DimensionMismatch, DomainError, PreconditionError
from .gluing import GluingData, select_scale
from .lattice import MonomialMap, as_param_vector, evaluate_monomials


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor Gauss-Legendre settings.

    ``order`` nodes per panel; panels per axis are 1 + ceil(phase range in
    cycles along that axis), so each panel sees about one oscillation.
    ``phase_cap`` rejects evaluations whose total phase range (in cycles)
    would make plain quadrature unreliable; ``max_nodes`` guards the tensor
    size.
    """

    order: int = 16
    phase_cap: float = 1e5
    max_nodes: int = 8_000_000
    abs_tol: float = 1e-10

    def __post_init__(self):
        if self.order < 2:
            raise DomainError("quadrature order must be >= 2")

    def panels_for(self, cycles: float) -> int:
        return int(math.ceil(1.0 + max(0.0, cycles)))


DEFAULT_QUAD = QuadratureSpec()


@lru_cache(maxsize=256)
def _panel_rule(order: int, panels: int):
    """Nodes and weights of a composite Gauss-Legendre rule on [0, 1].

    Cached; callers must not mutate the returned arrays.
    """
    base_x, base_w = leggauss(order)
    width = 1.0 / panels
    starts = width * np.arange(panels)
    nodes = (starts[:, None] + 0.5 * width * (base_x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * width * base_w, panels)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _unit_phase_integral(z):
    """integral_0^1 e(z u) du evaluated stably; equals 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    x = 2.0 * np.pi * z
    num = np.sin(x) + 2.0j * np.sin(0.5 * x) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / x
    return np.where(x == 0.0, 1.0 + 0.0j, out)


def bump_transform(xi):
    """Fourier transform of the canonical unit-mass Gaussian profile.

    The profile exp(-pi x^2) is self-dual, so the transform is exp(-pi xi^2):
    positive, even, equal to 1 at the origin.
    """
    return np.exp(-np.pi * np.square(np.asarray(xi, dtype=float)))


@dataclass(frozen=True)
class BumpProfile:
    """The fixed Schwartz profile exp(-pi x^2) and its transform."""

    def density(self, x):
        return np.exp(-np.pi * np.square(np.asarray(x, dtype=float)))

    def transform(self, xi):
        return bump_transform(xi)


def _elimination_plan(exponents: np.ndarray):
    """Axes integrable in closed form: column is a single 1 in an unused row."""
    d, k = exponents.shape
    used_rows = set()
    plan = []      # (axis j, row i)
    rest = []
    for j in range(k):
        col = exponents[:, j]
        nz = np.nonzero(col)[0]
        if len(nz) == 1 and col[nz[0]] == 1 and int(nz[0]) not in used_rows:
            plan.append((j, int(nz[0])))
            used_rows.add(int(nz[0]))
        else:
            rest.append(j)
    return plan, rest


_RADON_MEMO: dict = {}
_RADON_MEMO_CAP = 65536


def radon_multiplier(mapping: MonomialMap, s, xi, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """The oscillatory integral of e(P(s (x) u) . xi) over the unit cube.

    Always 1 at xi = 0 and bounded by 1 in modulus.  Panel counts per axis
    follow the phase-range bound sum_i |xi_i| P_i(s) restricted to monomials
    that involve the axis.  Raises BudgetError past the configured phase cap.
    """
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    sv = as_param_vector(s)
    xv = np.asarray(xi, dtype=float).ravel()
    if xv.size != mapping.d:
        raise DimensionMismatch(f"xi must have {mapping.d} coordinates, got {xv.size}")
    coeff = evaluate_monomials(mapping, sv) * xv
    if np.all(coeff == 0.0):
        return 1.0 + 0.0j
    total_cycles = float(np.abs(coeff).sum())
    if total_cycles > quad.phase_cap:
        raise BudgetError(
            f"phase range {total_cycles:.3g} cycles exceeds cap {quad.phase_cap:.3g}"
        )

    exps = mapping.exponents
    # the value depends on (s, xi) only through the phase coefficients
    memo_key = (exps.tobytes(), coeff.tobytes(), quad.order)
    cached = _RADON_MEMO.get(memo_key)
    if cached is not None:
        return cached
    plan, rest = _elimination_plan(exps)
    elim_rows = {i for _, i in plan}
    free_rows = [i for i in range(mapping.d) if i not in elim_rows]

    if not rest:
        value = complex(np.prod([_unit_phase_integral(coeff[i]) for _, i in plan]))
        _RADON_MEMO[memo_key] = value
        return value

    axis_nodes, axis_weights = [], []
    for j in rest:
        cycles = float(np.abs(coeff[exps[:, j] > 0]).sum())
        panels = quad.panels_for(cycles)
        n, w = _panel_rule(quad.order, panels)
        axis_nodes.append(n)
        axis_weights.append(w)
    n_total = int(np.prod([len(n) for n in axis_nodes]))
    if n_total > quad.max_nodes:
        raise BudgetError(f"tensor rule would need {n_total} nodes (cap {quad.max_nodes})")

    def monomial_grid(i: int):
        grid = 1.0
        for pos, j in enumerate(rest):
            e = exps[i, j]
            if e:
                shape = [1] * len(rest)
                shape[pos] = -1
                grid = grid * (axis_nodes[pos] ** e).reshape(shape)
        return grid

    phase = 0.0
    for i in free_rows:
        if coeff[i] != 0.0:
            phase = phase + coeff[i] * monomial_grid(i)
    integrand = np.exp(2j * np.pi * phase) * np.ones([1] * len(rest), dtype=complex)
    for j, i in plan:
        integrand = integrand * _unit_phase_integral(coeff[i] * monomial_grid(i))

    # Axes the integrand never picked up hold a constant; their weights sum to 1.
    for pos in range(len(rest) - 1, -1, -1):
        if integrand.shape[pos] == 1:
            integrand = integrand.take(0, axis=pos) * float(axis_weights[pos].sum())
        else:
            integrand = np.tensordot(integrand, axis_weights[pos], axes=([pos], [0]))
    value = complex(integrand)
    if len(_RADON_MEMO) >= _RADON_MEMO_CAP:
        _RADON_MEMO.clear()
    _RADON_MEMO[memo_key] = value
    return value


def projection(xi, D):
    """pi^D: zero the coordinates listed in D."""
    out = np.asarray(xi, dtype=float).copy()
    for i in set(int(i) for i in D):
        out[i] = 0.0
    return out


def projected_multiplier(mapping: MonomialMap, s, xi, D,
                         quad: QuadratureSpec = DEFAULT_QUAD,
                         bump=bump_transform) -> complex:
    """Bump-projected multiplier: prod_{i in D} Upsilon(P_i(s) xi_i) * m_s(pi^D xi).

    ``bump`` is the transform of the smoothing profile; the canonical Gaussian
    is the default and any unit-at-zero Schwartz transform may replace it.
    """
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    sv = as_param_vector(s)
    xv = np.asarray(xi, dtype=float).ravel()
    P = evaluate_monomials(mapping, sv)
    factor = 1.0
    for i in set(int(i) for i in D):
        factor *= float(bump(P[i] * xv[i]))
    return factor * radon_multiplier(mapping, sv, projection(xv, D), quad)


def inclusion_exclusion_terms(mapping: MonomialMap, s, xi,
                              quad: QuadratureSpec = DEFAULT_QUAD,
                              bump=bump_transform):
    """All 2^d bump-projected multipliers, keyed by the coordinate subset D."""
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    d = mapping.d
    return {
        D: projected_multiplier(mapping, s, xi, D, quad, bump)
        for D in (tuple(c) for r in range(d + 1) for c in itertools.combinations(range(d), r))
    }


def error_multiplier(mapping: MonomialMap, s, xi,
                     quad: QuadratureSpec = DEFAULT_QUAD,
                     bump=bump_transform) -> complex:
    """Alternating sum over coordinate subsets of the projected multipliers.

    Internally re-checks that the full multiplier equals the nonempty-subset
    rearrangement plus this error term to 1e-10; the identity is algebraic,
    so a larger residual signals a quadrature inconsistency.
    """
    terms = inclusion_exclusion_terms(mapping, s, xi, quad, bump)
    tilde = sum((-1) ** len(D) * v for D, v in terms.items())
    main = sum((-1) ** (len(D) + 1) * v for D, v in terms.items() if D)
    residual = abs(terms[()] - (main + tilde))
    if residual > 1e-10:
        raise ArithmeticError(f"inclusion-exclusion identity residual {residual:.3g}")
    return tilde


def box_difference_multiplier(mapping: MonomialMap, s, xi, D,
                              quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """Iterated frequency difference: sum_{D' subset D} (-1)^{|D'|} m_s(pi^{D'} xi)."""
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    D = sorted(set(int(i) for i in D))
    total = 0.0 + 0.0j
    for r in range(len(D) + 1):
        for sub in itertools.combinations(D, r):
            total += (-1) ** r * radon_multiplier(mapping, s, projection(xi, sub), quad)
    return total


@dataclass
class DecayFit:
    """Empirical two-sided decay exponent for the error multiplier.

    ``constant`` is the largest observed ratio |error(xi)| over the product
    prod_i min(|P_i(s) xi_i|^delta, |P_i(s) xi_i|^-delta); the witness sample
    reproduces it.
    """

    delta: float
    constant: float
    samples: int
    witness_s: np.ndarray
    witness_xi: np.ndarray
    per_delta: dict = field(default_factory=dict)


def _dyadic_axis(exponents) -> np.ndarray:
    return np.array([2.0 ** e for e in exponents], dtype=float)


def decay_scan(mapping: MonomialMap, deltas=None, s_exponents=None, xi_exponents=None,
               quad: QuadratureSpec | None = None) -> DecayFit:
    """Fit the two-sided decay of the error multiplier over dyadic samples.

    Scale vectors and frequencies run over dyadic lattices (frequencies with
    all sign patterns up to global conjugation).  For every candidate delta in
    (0, 1/2) the worst ratio against the two-sided decay envelope is recorded;
    the returned fit minimizes that constant.
    """
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    deltas = np.arange(0.05, 0.5, 0.05) if deltas is None else np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0.0) or np.any(deltas >= 0.5):
        raise DomainError("decay exponents must lie strictly inside (0, 1/2)")
    if s_exponents is None:
        s_exponents = range(-6, 7) if mapping.k == 1 else range(-6, 7, 3)
    if xi_exponents is None:
        xi_exponents = range(-6, 7) if mapping.d == 1 else range(-6, 7, 2)
    quad = quad or QuadratureSpec(phase_cap=1e6)

    s_axis = _dyadic_axis(s_exponents)
    xi_axis = _dyadic_axis(xi_exponents)
    signs = [(1.0,) + rest for rest in itertools.product((1.0, -1.0), repeat=mapping.d - 1)]

    best = {float(dl): (0.0, None, None) for dl in deltas}
    count = 0
    seen = set()
    for s_tuple in itertools.product(s_axis, repeat=mapping.k):
        sv = np.array(s_tuple)
        P = evaluate_monomials(mapping, sv)
        for xi_mag in itertools.product(xi_axis, repeat=mapping.d):
            for sg in signs:
                xv = np.array(xi_mag) * np.array(sg)
                # the multiplier depends on (s, xi) only through P_i(s) xi_i,
                # so scale-compensated duplicates are skipped
                key = (P * xv).tobytes()
                if key in seen:
                    continue
                seen.add(key)
                count += 1
                val = abs(error_multiplier(mapping, sv, xv, quad))
                prods = np.abs(P * xv)
                for dl in deltas:
                    envelope = float(np.prod(np.minimum(prods ** dl, prods ** (-dl))))
                    ratio = val / envelope if envelope > 0 else np.inf
                    if ratio > best[float(dl)][0]:
                        best[float(dl)] = (ratio, sv.copy(), xv.copy())
    per_delta = {dl: b[0] for dl, b in best.items()}
    dl_star = min(per_delta, key=per_delta.get)
    ratio, ws, wxi = best[dl_star]
    return DecayFit(dl_star, ratio, count, ws, wxi, per_delta)


def off_diagonal_constant(mapping: MonomialMap, gluing: GluingData, h,
                          n_budget: int = 3, box_samples: int = 4,
                          cross_exponents=range(-6, 7, 2),
                          quad: QuadratureSpec | None = None) -> float:
    """Estimated operator bound of the error multiplier on shifted frequency boxes.

    For every n with |n|_inf <= n_budget the error multiplier at scale s(n) is
    sampled over frequencies whose selected coordinates lie in the dyadic box
    [2^(-n-h), 2^(-n-h+1)) (geometric interior points plus the corners) and
    whose remaining coordinates run over a signed dyadic lattice.  Because the
    operators act diagonally in frequency, the sampled supremum bounds the l^2
    operator norm of the box-restricted sum.
    """
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    quad = quad or QuadratureSpec(phase_cap=1e6)
    hv = np.asarray(h, dtype=np.int64).ravel()
    if hv.size != gluing.r:
        raise DimensionMismatch(f"h must have {gluing.r} entries, got {hv.size}")
    sel = list(gluing.basis_rows)
    others = [i for i in range(mapping.d) if i not in sel]
    cross_axis = _dyadic_axis(cross_exponents)
    cross_choices = [c * sgn for c in cross_axis for sgn in (1.0, -1.0)] if others else [None]
    frac = np.linspace(0.0, 1.0, box_samples, endpoint=False)
    interior = np.concatenate([2.0 ** frac, [2.0 * (1.0 - 1e-9)]])

    sup = 0.0
    for n in itertools.product(range(-n_budget, n_budget + 1), repeat=gluing.r):
        nv = np.array(n, dtype=np.int64)
        s_n = select_scale(gluing, nv)
        base = 2.0 ** (-(nv + hv).astype(float))
        for sel_frac in itertools.product(interior, repeat=gluing.r):
            xi = np.zeros(mapping.d)
            for pos, i in enumerate(sel):
                xi[i] = base[pos] * sel_frac[pos]
            if others:
                for combo in itertools.product(cross_choices, repeat=len(others)):
                    for i, c in zip(others, combo):
                        xi[i] = c
                    sup = max(sup, abs(error_multiplier(mapping, s_n, xi, quad)))
            else:
                sup = max(sup, abs(error_multiplier(mapping, s_n, xi, quad)))
    return sup


@dataclass
class OffDiagonalProfile:
    shifts: list
    raw: np.ndarray
    normalized: np.ndarray
    slope: float


def off_diagonal_profile(mapping: MonomialMap, gluing: GluingData, shifts,
                         **kwargs) -> OffDiagonalProfile:
    """Sampled box constants over a family of shifts, normalized by the global sup.

    ``slope`` is the least-squares slope of log2(c_h) against |h|_1 over the
    strictly positive entries; two-sided decay shows up as a negative slope.
    """
    raw = np.array([off_diagonal_constant(mapping, gluing, h, **kwargs) for h in shifts])
    top = raw.max()
    normalized = raw / top if top > 0 else raw
    dists = np.array([np.abs(np.asarray(h)).sum() for h in shifts], dtype=float)
    mask = raw > 0
    if mask.sum() >= 2 and np.ptp(dists[mask]) > 0:
        slope = float(np.polyfit(dists[mask], np.log2(raw[mask]), 1)[0])
    else:
        slope = 0.0
    return OffDiagonalProfile(list(shifts), raw, normalized, slope)


def cancellation_norm(exponent_row, s, h, K, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """L^1 size of the mixed difference of dilated bumps, relative to prod h_i/s_i.

    The bump density at scale t is Phi(x / P(t)) / P(t) with the canonical
    Gaussian profile.  The mixed difference over the axes in K (step h) is
    expanded as the alternating corner sum and integrated in |.| over the
    line; the return value divides by prod_{i in K} h_i / s_i.  Requires
    h_i <= s_i on the differenced axes (one cube scale).
    """
    row = np.asarray(exponent_row, dtype=np.int64).ravel()
    mapping = MonomialMap(row.reshape(1, -1))
    sv = as_param_vector(s)
    hv = np.asarray(h, dtype=float).ravel()
    if hv.shape != sv.shape:
        raise DimensionMismatch("step vector and scale must have equal length")
    K = sorted(set(int(i) for i in K))
    for i in K:
        if hv[i] <= 0:
            raise DomainError(f"step along axis {i} must be positive")
        if hv[i] > sv[i]:
            raise PreconditionError(f"step along axis {i} exceeds one cube scale (h_i > s_i)")

    widths, signs = [], []
    for mask in range(1 << len(K)):
        t = sv.copy()
        bits = 0
        for pos, j in enumerate(K):
            if mask >> pos & 1:
                t[j] += hv[j]
                bits += 1
        widths.append(float(evaluate_monomials(mapping, t)[0]))
        signs.append((-1) ** (len(K) - bits))
    widths = np.array(widths)
    signs = np.array(signs, dtype=float)

    wmax, wmin = widths.max(), widths.min()
    half_span = 8.0 * wmax
    panels = max(16, int(math.ceil(2.0 * half_span / wmin)))
    nodes, wts = _panel_rule(quad.order, panels)
    x = half_span * nodes
    dens = np.zeros_like(x)
    diff = np.zeros_like(x)
    for w, sgn in zip(widths, signs):
        diff = diff + sgn * np.exp(-np.pi * (x / w) ** 2) / w
    l1 = 2.0 * half_span * float(np.sum(wts * np.abs(diff)))
    scale = float(np.prod([hv[i] / sv[i] for i in K])) if K else 1.0
    return l1 / scale


@dataclass
class PeriodicField:
    """Uniform complex samples on a flat torus with half-period ``extents``.

    Axis i holds samples at -E_i + j * (2 E_i / n_i); the associated spectrum
    lives on the frequency lattice fftfreq(n_i, spacing_i) in cycles per unit.
    """

    samples: np.ndarray
    extents: tuple

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        ext = tuple(float(e) for e in np.atleast_1d(self.extents))
        if len(ext) != self.samples.ndim:
            raise DimensionMismatch("one extent per sample axis is required")
        if any(e <= 0 for e in ext):
            raise DomainError("extents must be positive")
        self.extents = ext
        self._spectrum = None

    @property
    def d(self) -> int:
        return self.samples.ndim

    @property
    def shape(self) -> tuple:
        return self.samples.shape

    def spacings(self) -> tuple:
        return tuple(2.0 * e / n for e, n in zip(self.extents, self.shape))

    def axes(self) -> list:
        return [
            -e + sp * np.arange(n)
            for e, sp, n in zip(self.extents, self.spacings(), self.shape)
        ]

    def frequencies(self) -> list:
        return [np.fft.fftfreq(n, d=sp) for n, sp in zip(self.shape, self.spacings())]

    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            self._spectrum = np.fft.fftn(self.samples)
        return self._spectrum

    def roundtrip_error(self) -> float:
        back = np.fft.ifftn(self.spectrum())
        norm = np.abs(self.samples).max() or 1.0
        return float(np.abs(back - self.samples).max() / norm)

    def mean(self) -> complex:
        return complex(self.samples.mean())

    @staticmethod
    def from_function(extents, shape, func) -> "PeriodicField":
        ext = tuple(float(e) for e in np.atleast_1d(extents))
        field = PeriodicField(np.zeros(tuple(shape), dtype=complex), ext)
        mesh = np.meshgrid(*field.axes(), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        vals = np.asarray(func(pts), dtype=complex)
        return PeriodicField(vals.reshape(tuple(shape)), ext)


def apply_multiplier_periodic(field: PeriodicField, rule) -> PeriodicField:
    """Diagonal action in frequency: multiply each spectral line by rule(theta).

    ``rule`` maps a frequency vector (d,) to a complex factor; the identity
    rule reproduces the field and composition of rules is pointwise product.
    """
    freqs = field.frequencies()
    weights = np.empty(field.shape, dtype=complex)
    cache = {}
    for idx in np.ndindex(field.shape):
        theta = tuple(float(freqs[ax][i]) for ax, i in enumerate(idx))
        if theta in cache:
            weights[idx] = cache[theta]
        else:
            w = complex(rule(np.array(theta)))
            cache[theta] = w
            weights[idx] = w
    out = np.fft.ifftn(field.spectrum() * weights)
    return PeriodicField(out, field.extents)


def multiplier_operator_norm(field_shape, extents, rule) -> float:
    """Exact l^2 operator norm of a diagonal rule on the sample lattice."""
    probe = PeriodicField(np.zeros(tuple(field_shape), dtype=complex), extents)
    freqs = probe.frequencies()
    worst = 0.0
    for idx in np.ndindex(tuple(field_shape)):
        theta = np.array([freqs[ax][i] for ax, i in enumerate(idx)])
        worst = max(worst, abs(complex(rule(theta))))
    return worst

"""Commuting torus translation flows and their polynomial averages.

A system is a finite family of translation flows x -> x + t * alpha_j on the
D-torus; translations commute and preserve the uniform measure, so finitely
supported trigonometric polynomials diagonalize every averaging operator.
Averages over parameter boxes are computed two independent ways: direct
tensor quadrature of the composed observable, and the spectral form in which
each frequency is damped by the oscillatory multiplier of the monomial map.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, DimensionMismatch, DomainError
from .lattice import MonomialMap, as_param_vector, evaluate_monomials
from .multipliers import (
    DEFAULT_QUAD,
    PeriodicField,
    QuadratureSpec,
    _panel_rule,
    apply_multiplier_periodic,
    radon_multiplier,
)


@dataclass(frozen=True)
class TorusSystem:
    """d commuting translation flows on the D-torus, one direction row each."""

    directions: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.directions, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionMismatch("directions must be a (d, D) array")
        object.__setattr__(self, "directions", arr)

    @property
    def d(self) -> int:
        return self.directions.shape[0]

    @property
    def torus_dim(self) -> int:
        return self.directions.shape[1]

    def translate(self, x, exponents_dot_t) -> np.ndarray:
        """Apply T_1^{t_1} ... T_d^{t_d}: x + sum_j t_j alpha_j (mod 1 implicit)."""
        t = np.asarray(exponents_dot_t, dtype=float)
        return np.asarray(x, dtype=float) + t @ self.directions

    def commutator_defect(self, x, t, order=None) -> float:
        """Largest mod-1 discrepancy between the two application orders.

        Translations commute exactly; this is a numerical spot check used by
        the validation suite.
        """
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        fwd = x.copy()
        for j in range(self.d):
            fwd = fwd + t[j] * self.directions[j]
        bwd = x.copy()
        for j in reversed(range(self.d)):
            bwd = bwd + t[j] * self.directions[j]
        diff = np.abs(fwd - bwd) % 1.0
        return float(np.minimum(diff, 1.0 - diff).max())

    def frequency_vector(self, m) -> np.ndarray:
        """theta with theta_j = m . alpha_j for an integer frequency m."""
        mv = np.asarray(m, dtype=float)
        return self.directions @ mv


@dataclass
class TrigPolynomial:
    """Finitely supported spectral observable: sum of c_m e(m . x)."""

    terms: dict

    def __post_init__(self):
        clean = {}
        dim = None
        for m, c in self.terms.items():
            key = tuple(int(v) for v in np.atleast_1d(m))
            if dim is None:
                dim = len(key)
            elif len(key) != dim:
                raise DimensionMismatch("all frequencies must share one dimension")
            clean[key] = complex(c)
        if not clean:
            raise DomainError("a trigonometric polynomial needs at least one term")
        self.terms = clean

    @property
    def torus_dim(self) -> int:
        return len(next(iter(self.terms)))

    @property
    def mean(self) -> complex:
        return self.terms.get((0,) * self.torus_dim, 0.0 + 0.0j)

    def coefficient_mass(self) -> float:
        return float(sum(abs(c) for c in self.terms.values()))

    def __call__(self, x):
        """Evaluate at points; x has shape (..., D)."""
        xv = np.asarray(x, dtype=float)
        out = np.zeros(xv.shape[:-1], dtype=complex)
        for m, c in self.terms.items():
            out = out + c * np.exp(2j * np.pi * (xv @ np.asarray(m, dtype=float)))
        return out

    def sup_norm(self, samples_per_axis: int = 64) -> float:
        """Max modulus over a uniform torus grid (dense sampling stand-in)."""
        axes = [np.linspace(0.0, 1.0, samples_per_axis, endpoint=False)] * self.torus_dim
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        return float(np.abs(self(pts)).max())


def _flow_phase_budget(system: TorusSystem, f: TrigPolynomial, P_at_M: np.ndarray) -> float:
    worst = 0.0
    for m in f.terms:
        theta = system.frequency_vector(m)
        worst = max(worst, float(np.abs(theta * P_at_M).sum()))
    return worst


def ergodic_average_quadrature(system: TorusSystem, f: TrigPolynomial, mapping: MonomialMap,
                               M, x, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """Average of f along the polynomial orbit over the box prod [0, M_j].

    Substituting t = M (x) u reduces the box average to the unit cube; the
    integrand f(x + sum_i P_i(M (x) u) alpha_i) is integrated by tensor
    Gauss-Legendre with oscillation-proportional panel counts.  This is the
    direct route, independent of the spectral form.
    """
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    if mapping.d != system.d:
        raise DimensionMismatch("one monomial per flow is required")
    Mv = as_param_vector(M)
    xv = np.asarray(x, dtype=float)
    P_at_M = evaluate_monomials(mapping, Mv)
    budget = _flow_phase_budget(system, f, P_at_M)
    if budget > quad.phase_cap:
        raise BudgetError(f"phase range {budget:.3g} cycles exceeds cap {quad.phase_cap:.3g}")
    panels = quad.panels_for(budget)
    nodes, weights = _panel_rule(quad.order, panels)

    k = mapping.k
    n = len(nodes)
    if n ** k > quad.max_nodes:
        raise BudgetError(f"tensor rule would need {n ** k} nodes (cap {quad.max_nodes})")
    mesh = np.meshgrid(*([nodes] * k), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    orbit_shift = np.zeros((len(pts), system.torus_dim))
    for i in range(mapping.d):
        mono = np.ones(len(pts))
        for j in range(k):
            e = mapping.exponents[i, j]
            if e:
                mono = mono * pts[:, j] ** e
        orbit_shift += np.outer(P_at_M[i] * mono, system.directions[i])
    vals = f(xv[None, :] + orbit_shift)
    wmesh = np.meshgrid(*([weights] * k), indexing="ij")
    wprod = np.ones(len(pts))
    for g in wmesh:
        wprod = wprod * g.ravel()
    return complex(np.sum(wprod * vals))


@dataclass
class SpectralAverage:
    """The averaging operator applied to a trig polynomial, in closed spectral form.

    Each frequency m of the observable is scaled by the multiplier evaluated
    at theta_m = (m . alpha_1, ..., m . alpha_d); evaluation at any point is
    then exact up to the quadrature inside the multiplier.
    """

    terms: dict   # m -> damped coefficient

    def __call__(self, x):
        xv = np.asarray(x, dtype=float)
        out = np.zeros(xv.shape[:-1], dtype=complex)
        for m, c in self.terms.items():
            out = out + c * np.exp(2j * np.pi * (xv @ np.asarray(m, dtype=float)))
        return out

    @property
    def mean(self) -> complex:
        dim = len(next(iter(self.terms)))
        return self.terms.get((0,) * dim, 0.0 + 0.0j)


def ergodic_average_spectral(system: TorusSystem, f: TrigPolynomial, mapping: MonomialMap,
                             M, quad: QuadratureSpec = DEFAULT_QUAD) -> SpectralAverage:
    """Spectral form of the box average: frequency m is damped by m_M(theta_m)."""
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    if mapping.d != system.d:
        raise DimensionMismatch("one monomial per flow is required")
    Mv = as_param_vector(M)
    damped = {}
    for m, c in f.terms.items():
        theta = system.frequency_vector(m)
        damped[m] = c * radon_multiplier(mapping, Mv, theta, quad)
    return SpectralAverage(damped)


def ergodic_average_discrete(system: TorusSystem, f: TrigPolynomial, mapping: MonomialMap,
                             M, x, budget: int = 20_000_000) -> complex:
    """Discrete polynomial average over the integer box prod {1..M_j}.

    Direct summation of f along the orbit; the number of lattice points is
    guarded by ``budget``.
    """
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    if mapping.d != system.d:
        raise DimensionMismatch("one monomial per flow is required")
    Ms = [int(v) for v in np.atleast_1d(M)]
    if len(Ms) != mapping.k or any(v < 1 for v in Ms):
        raise DomainError("box sides must be positive integers, one per parameter")
    total = int(np.prod([float(v) for v in Ms]))
    if total > budget:
        raise BudgetError(f"{total} lattice points exceeds budget {budget}")
    axes = [np.arange(1, v + 1, dtype=float) for v in Ms]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    xv = np.asarray(x, dtype=float)
    orbit_shift = np.zeros((len(pts), system.torus_dim))
    for i in range(mapping.d):
        mono = np.ones(len(pts))
        for j in range(mapping.k):
            e = mapping.exponents[i, j]
            if e:
                mono = mono * pts[:, j] ** e
        orbit_shift += np.outer(mono, system.directions[i])
    vals = f(xv[None, :] + orbit_shift)
    return complex(vals.mean())


def radon_average_grid(field: PeriodicField, mapping: MonomialMap, M,
                       quad: QuadratureSpec = DEFAULT_QUAD) -> PeriodicField:
    """Box average of a periodic field along the polynomial surface.

    Acts diagonally on the spectrum: the line at frequency theta is scaled by
    the multiplier at -theta, matching convolution with the orbit measure
    (f translated by -P(t)).
    """
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    Mv = as_param_vector(M)

    def rule(theta):
        return radon_multiplier(mapping, Mv, -np.asarray(theta, dtype=float), quad)

    return apply_multiplier_periodic(field, rule)


def radon_average_direct(field_poly: TrigPolynomial, extents, mapping: MonomialMap, M, x,
                         quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """Direct spatial quadrature of the box average of a trig-polynomial field.

    Oracle companion to :func:`radon_average_grid`: evaluates
    integral over the unit cube of f(x - P(M (x) u)) du with f given in closed
    form on the torus of half-periods ``extents`` (frequencies are lattice
    points m / (2 E)).
    """
    if not isinstance(mapping, MonomialMap):
        mapping = MonomialMap(mapping)
    Mv = as_param_vector(M)
    ext = np.atleast_1d(np.asarray(extents, dtype=float))
    P_at_M = evaluate_monomials(mapping, Mv)
    budget = 0.0
    for m in field_poly.terms:
        theta = np.asarray(m, dtype=float) / (2.0 * ext)
        budget = max(budget, float(np.abs(theta * P_at_M).sum()))
    panels = quad.panels_for(budget)
    nodes, weights = _panel_rule(quad.order, panels)
    k = mapping.k
    mesh = np.meshgrid(*([nodes] * k), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    surface = np.zeros((len(pts), mapping.d))
    for i in range(mapping.d):
        mono = np.ones(len(pts))
        for j in range(k):
            e = mapping.exponents[i, j]
            if e:
                mono = mono * pts[:, j] ** e
        surface[:, i] = P_at_M[i] * mono
    xv = np.asarray(x, dtype=float)
    # evaluate the closed-form field at x - P, frequencies scaled to the torus
    args = (xv[None, :] - surface) / (2.0 * ext[None, :])
    vals = np.zeros(len(pts), dtype=complex)
    for m, c in field_poly.terms.items():
        vals += c * np.exp(2j * np.pi * (args @ np.asarray(m, dtype=float)))
    wmesh = np.meshgrid(*([weights] * k), indexing="ij")
    wprod = np.ones(len(pts))
    for g in wmesh:
        wprod = wprod * g.ravel()
    return complex(np.sum(wprod * vals))


@dataclass
class ConvergencePoint:
    M: tuple
    deviation: float


def convergence_experiment(system: TorusSystem, f: TrigPolynomial, mapping: MonomialMap,
                           schedule, x_samples: int = 32,
                           quad: QuadratureSpec = DEFAULT_QUAD):
    """Deviation of box averages from the observable's mean along a schedule.

    For every M in the schedule the spectral average is evaluated on a uniform
    torus grid and the largest deviation |A_M f - mean f| is recorded.  The
    emitted series supports trend fits of the form C / min(M).
    """
    axes = [np.linspace(0.0, 1.0, x_samples, endpoint=False)] * system.torus_dim
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    series = []
    for M in schedule:
        avg = ergodic_average_spectral(system, f, mapping, M, quad)
        dev = np.abs(avg(pts) - f.mean)
        series.append(ConvergencePoint(tuple(float(v) for v in np.atleast_1d(M)),
                                       float(dev.max())))
    return series


def fit_inverse_min_constant(series) -> float:
    """Smallest C with deviation <= C / min(M) across the series tail."""
    best = 0.0
    for pt in series:
        best = max(best, pt.deviation * min(pt.M))
    return best


def lacunary_chain(J: int, k: int, rng, base: float = 1.0) -> np.ndarray:
    """A random gauge chain I_j = base * 2^(j + sigma_j) per axis, sigma in [0,1)."""
    out = np.empty((J + 1, k))
    for ax in range(k):
        sigma = rng.uniform(0.0, 1.0, size=J + 1)
        out[:, ax] = base * 2.0 ** (np.arange(J + 1) + sigma)
    return out


@dataclass
class OscillationStatistics:
    ratios: np.ndarray          # one entry per gauge chain
    max_ratio: float
    J: int
    p: float


def oscillation_statistics(field: PeriodicField, mapping: MonomialMap, M_grid,
                           chains, p: float = 2.0,
                           quad: QuadratureSpec = DEFAULT_QUAD) -> OscillationStatistics:
    """Normalized L^p size of the oscillation of box averages over an M-grid.

    The averages are computed spectrally for every M in the product grid; for
    each gauge chain the pointwise oscillation over the M-family is measured
    at every field sample, its discrete L^p norm over the samples is divided
    by ||f||_p, and the worst ratio over the chain ensemble is reported.
    Chain anchors are evaluated directly as averages, so they need not lie on
    the M-grid.
    """
    from .seminorms import oscillation_terms

    pts_M = M_grid.points()
    stack = np.stack(
        [radon_average_grid(field, mapping, Mv, quad).samples for Mv in pts_M], axis=-1
    )
    flat = stack.reshape(-1, len(pts_M))
    f_norm = float(np.mean(np.abs(field.samples) ** p) ** (1.0 / p))
    ratios = []
    for chain in chains:
        chain = np.asarray(chain, dtype=float)
        anchors = np.stack(
            [radon_average_grid(field, mapping, chain[j], quad).samples.reshape(-1)
             for j in range(len(chain) - 1)],
            axis=-1,
        )
        terms, _ = oscillation_terms(pts_M, flat, chain, anchor_values=anchors)
        osc = np.sqrt(np.sum(terms ** 2, axis=-1))
        norm = float(np.mean(osc ** p) ** (1.0 / p))
        ratios.append(norm / f_norm if f_norm > 0 else 0.0)
    ratios = np.asarray(ratios)
    J = max(len(np.asarray(c)) - 1 for c in chains)
    return OscillationStatistics(ratios, float(ratios.max()), J, p)

import numpy as np
import pytest

from polyergo.errors import BudgetError, DimensionMismatch, DomainError, PreconditionError
from polyergo.gluing import gluing_data
from polyergo.lattice import MonomialMap, evaluate_monomials
from polyergo.multipliers import (
    PeriodicField,
    QuadratureSpec,
    apply_multiplier_periodic,
    box_difference_multiplier,
    bump_transform,
    cancellation_norm,
    decay_scan,
    error_multiplier,
    multiplier_operator_norm,
    off_diagonal_constant,
    off_diagonal_profile,
    projected_multiplier,
    radon_multiplier,
)
from polyergo.rng import substream


def closed_form_1d(z):
    return (np.exp(2j * np.pi * z) - 1.0) / (2j * np.pi * z)


def test_bump_profile():
    assert bump_transform(0.0) == 1.0
    assert bump_transform(1.0) == pytest.approx(np.exp(-np.pi), rel=1e-15)
    assert bump_transform(-2.3) == bump_transform(2.3)
    xs = np.linspace(-4, 4, 101)
    vals = bump_transform(xs)
    assert np.all(vals > 0.0) and np.all(vals <= 1.0)


def test_multiplier_at_zero_and_modulus():
    m = MonomialMap([[1, 1], [2, 0]])
    assert radon_multiplier(m, [1.5, 2.0], [0.0, 0.0]) == 1.0
    rng = substream(41, 0)
    for _ in range(40):
        s = 2.0 ** rng.uniform(-2, 2, size=2)
        xi = rng.normal(0, 5, size=2)
        assert abs(radon_multiplier(m, s, xi)) <= 1.0 + 1e-12


def test_multiplier_1d_closed_form():
    m = MonomialMap([[1]])
    for s, xi in [(1.0, 0.7), (2.0, 3.3), (0.5, -11.0), (4.0, 100.0)]:
        got = radon_multiplier(m, [s], [xi])
        assert abs(got - closed_form_1d(s * xi)) <= 1e-8


def test_multiplier_conjugate_symmetry():
    m = MonomialMap([[1, 1], [2, 0]])
    s, xi = np.array([1.3, 0.7]), np.array([2.2, -1.4])
    assert np.conj(radon_multiplier(m, s, xi)) == radon_multiplier(m, s, -xi)


def test_multiplier_product_factorization():
    # separated variables: the integral factors into 1-d closed forms
    m = MonomialMap([[1, 0], [0, 1]])
    s, xi = np.array([2.0, 3.0]), np.array([1.7, -0.4])
    want = closed_form_1d(2.0 * 1.7) * closed_form_1d(3.0 * -0.4)
    assert abs(radon_multiplier(m, s, xi) - want) <= 1e-14


def test_panel_doubling_stability():
    m = MonomialMap([[1], [2]])
    rng = substream(41, 1)
    for _ in range(25):
        s = 2.0 ** rng.uniform(-2, 3, size=1)
        xi = rng.normal(0, 30, size=2)
        a = radon_multiplier(m, s, xi, QuadratureSpec(order=16))
        b = radon_multiplier(m, s, xi, QuadratureSpec(order=32))
        assert abs(a - b) <= 1e-9


def test_budget_guards():
    m = MonomialMap([[1], [2]])
    with pytest.raises(BudgetError):
        radon_multiplier(m, [2.0 ** 6], [2.0 ** 12, 2.0 ** 12])
    wide = MonomialMap([[1, 0, 0], [0, 1, 0], [0, 0, 2], [1, 1, 1]])
    with pytest.raises(BudgetError):
        radon_multiplier(wide, [4.0, 4.0, 4.0], [900.0, 900.0, 900.0, 900.0],
                         QuadratureSpec(max_nodes=10_000))
    with pytest.raises(DimensionMismatch):
        radon_multiplier(m, [1.0], [1.0])


def test_projected_multiplier():
    m = MonomialMap([[1, 1], [2, 0]])
    s, xi = np.array([1.2, 0.8]), np.array([1.4, -2.2])
    assert projected_multiplier(m, s, xi, ()) == radon_multiplier(m, s, xi)
    assert projected_multiplier(m, s, np.zeros(2), (0, 1)) == 1.0
    P = evaluate_monomials(m, s)
    want = bump_transform(P[0] * xi[0]) * radon_multiplier(m, s, [0.0, xi[1]])
    assert projected_multiplier(m, s, xi, (0,)) == pytest.approx(want, abs=1e-15)


def test_error_multiplier_identities():
    m = MonomialMap([[1, 1], [2, 0]])
    s = np.array([1.2, 0.8])
    assert error_multiplier(m, s, np.zeros(2)) == 0.0
    # d = 1: the error term is the multiplier minus the bump factor
    m1 = MonomialMap([[1, 1]])
    xi = np.array([0.9])
    P = evaluate_monomials(m1, s)
    want = radon_multiplier(m1, s, xi) - bump_transform(P[0] * xi[0])
    assert error_multiplier(m1, s, xi) == pytest.approx(want, abs=1e-14)
    # vanishing along each frequency axis
    for axis in (0, 1):
        xs = [10.0 ** (-e) for e in range(1, 6)]
        vals = []
        for x in xs:
            xi2 = np.zeros(2)
            xi2[axis] = x
            vals.append(abs(error_multiplier(m, s, xi2)))
        assert vals[-1] <= 1e-3 and vals[-1] <= vals[0]


def test_error_multiplier_resummation_randomized():
    m = MonomialMap([[1, 1], [2, 0]])
    rng = substream(42, 0)
    from polyergo.multipliers import inclusion_exclusion_terms
    for _ in range(60):
        s = 2.0 ** rng.uniform(-2, 2, size=2)
        xi = rng.normal(0, 4, size=2)
        terms = inclusion_exclusion_terms(m, s, xi)
        tilde = sum((-1) ** len(D) * v for D, v in terms.items())
        main = sum((-1) ** (len(D) + 1) * v for D, v in terms.items() if D)
        assert abs(terms[()] - (main + tilde)) <= 1e-10
        assert abs(tilde) <= 2.0 ** m.d


def test_box_difference():
    m = MonomialMap([[1, 1], [2, 0]])
    s, xi = np.array([1.1, 1.7]), np.array([0.8, -0.6])
    assert box_difference_multiplier(m, s, xi, ()) == radon_multiplier(m, s, xi)
    # a zero frequency inside D makes the terms cancel in pairs
    assert box_difference_multiplier(m, s, [0.0, xi[1]], (0,)) == 0.0
    assert box_difference_multiplier(m, s, [xi[0], 0.0], (0, 1)) == 0.0
    # first-order smallness in the differenced coordinate
    P = evaluate_monomials(m, s)
    for x in (1e-1, 1e-2, 1e-3):
        v = abs(box_difference_multiplier(m, s, [x, xi[1]], (0,)))
        assert v <= 2.0 * np.pi * abs(P[0] * x) + 1e-12


def test_decay_scan_small():
    m = MonomialMap([[1], [2]])
    fit = decay_scan(m, deltas=[0.1, 0.2, 0.3], s_exponents=range(-3, 4),
                     xi_exponents=range(-3, 4, 2))
    assert 0.0 < fit.delta < 0.5
    assert fit.constant < 10.0
    # witness reproduces the recorded ratio
    val = abs(error_multiplier(m, fit.witness_s, fit.witness_xi,
                               QuadratureSpec(phase_cap=1e6)))
    prods = np.abs(evaluate_monomials(m, fit.witness_s) * fit.witness_xi)
    env = float(np.prod(np.minimum(prods ** fit.delta, prods ** (-fit.delta))))
    assert val / env == pytest.approx(fit.constant, rel=1e-12)
    with pytest.raises(DomainError):
        decay_scan(m, deltas=[0.6])


def test_decay_constant_scale_invariance():
    # dilating s while compensating xi leaves the ratio unchanged
    m = MonomialMap([[1], [2]])
    s = np.array([1.7])
    xi = np.array([2.1, -1.3])
    lam = 2.0
    P = evaluate_monomials(m, s)
    P2 = evaluate_monomials(m, lam * s)
    xi2 = xi * P / P2
    a = error_multiplier(m, s, xi)
    b = error_multiplier(m, lam * s, xi2)
    assert abs(a - b) <= 1e-12


def test_off_diagonal_profile_decays():
    m = MonomialMap([[1], [2]])
    g = gluing_data(m)
    shifts = [np.array([h]) for h in range(-5, 6)]
    prof = off_diagonal_profile(m, g, shifts, n_budget=2)
    assert prof.slope < 0.0
    assert prof.normalized.max() == 1.0
    assert np.all(prof.normalized <= 1.0 + 1e-12)
    # h = 0 is consistent with a direct recomputation
    c0 = off_diagonal_constant(m, g, [0], n_budget=2)
    at0 = prof.raw[shifts.index(shifts[5])]
    assert c0 == pytest.approx(prof.raw[5], rel=1e-12)


def test_cancellation_norm_values():
    # K empty: the bump is a probability density
    assert cancellation_norm([1, 1], [1.0, 2.0], [0.5, 0.5], ()) == pytest.approx(1.0, abs=1e-10)
    # small-step limit: d/dy of the dilated Gaussian has L1 mass
    # 4 e^{-1/2} / sqrt(2 pi), scaled by the monomial exponent
    const = 4.0 * np.exp(-0.5) / np.sqrt(2.0 * np.pi)
    got = cancellation_norm([1], [1.0], [1e-4], (0,))
    assert got == pytest.approx(const, rel=1e-3)
    got2 = cancellation_norm([2], [1.0], [1e-4], (0,))
    assert got2 == pytest.approx(2.0 * const, rel=1e-3)
    with pytest.raises(PreconditionError):
        cancellation_norm([1, 1], [1.0, 1.0], [2.0, 0.5], (0,))


def test_cancellation_norm_bounded_over_scan():
    import itertools
    worst = 0.0
    for row in [(1,), (3,), (1, 1), (3, 1), (2, 0, 1)]:
        k = len(row)
        s = np.ones(k)
        for size in range(0, k + 1):
            for K in itertools.combinations(range(k), size):
                for ratio in (0.125, 0.5, 1.0):
                    h = np.full(k, 0.25)
                    for j in K:
                        h[j] = ratio
                    worst = max(worst, cancellation_norm(list(row), s, h, K))
    assert worst <= 20.0


def test_periodic_field_roundtrip_and_mean():
    rng = substream(43, 0)
    field = PeriodicField(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)), (1.0, 2.0))
    assert field.roundtrip_error() <= 1e-10
    out = apply_multiplier_periodic(field, lambda th: 1.0)
    assert np.abs(out.samples - field.samples).max() <= 1e-10
    smooth = apply_multiplier_periodic(field, lambda th: bump_transform(80.0 * np.sqrt(th @ th)))
    assert np.abs(smooth.samples - field.mean()).max() <= 1e-10
    assert abs(smooth.mean() - field.mean()) <= 1e-10


def test_periodic_composition_commutes():
    rng = substream(43, 1)
    field = PeriodicField(rng.normal(size=(16,)), (2.0,))
    r1 = lambda th: bump_transform(2.0 * th[0])
    r2 = lambda th: np.exp(2j * np.pi * 0.4 * th[0])
    a = apply_multiplier_periodic(apply_multiplier_periodic(field, r1), r2)
    b = apply_multiplier_periodic(apply_multiplier_periodic(field, r2), r1)
    c = apply_multiplier_periodic(field, lambda th: r1(th) * r2(th))
    assert np.abs(a.samples - c.samples).max() <= 1e-10
    assert np.abs(b.samples - c.samples).max() <= 1e-10


def test_diagonal_operator_norm_identity():
    # the l2 operator norm of a diagonal rule equals the max modulus over the
    # lattice, and the bound is attained on a pure frequency
    rule = lambda th: bump_transform(th[0]) * (0.3 + 0.7 * np.cos(2 * np.pi * th[0]))
    shape, extents = (16,), (2.0,)
    norm = multiplier_operator_norm(shape, extents, rule)
    rng = substream(43, 2)
    probe = PeriodicField(rng.normal(size=shape), extents)
    out = apply_multiplier_periodic(probe, rule)
    ratio = np.linalg.norm(out.samples) / np.linalg.norm(probe.samples)
    assert ratio <= norm + 1e-12
    freqs = probe.frequencies()[0]
    best = freqs[int(np.argmax([abs(rule(np.array([t]))) for t in freqs]))]
    pure = PeriodicField(np.exp(2j * np.pi * best * probe.axes()[0]), extents)
    out = apply_multiplier_periodic(pure, rule)
    ratio = np.linalg.norm(out.samples) / np.linalg.norm(pure.samples)
    assert ratio == pytest.approx(norm, rel=1e-12)

import numpy as np
import pytest

from polyergo.dynamics import (
    ConvergencePoint,
    TorusSystem,
    TrigPolynomial,
    convergence_experiment,
    ergodic_average_discrete,
    ergodic_average_quadrature,
    ergodic_average_spectral,
    fit_inverse_min_constant,
    lacunary_chain,
    oscillation_statistics,
    radon_average_direct,
    radon_average_grid,
)
from polyergo.errors import BudgetError, DimensionMismatch, DomainError
from polyergo.lattice import MonomialMap, ParamGrid
from polyergo.multipliers import PeriodicField
from polyergo.rng import substream

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def test_flow_group_law_and_commutativity():
    sys2 = TorusSystem(np.array([[GOLDEN, 0.1], [0.2, np.sqrt(2) - 1]]))
    rng = substream(51, 0)
    for _ in range(50):
        x = rng.uniform(0, 1, size=2)
        t = rng.uniform(-3, 3, size=2)
        assert sys2.commutator_defect(x, t) <= 1e-12
    # group law T^a T^b = T^{a+b} for each flow
    a, b = 0.7, -1.9
    one = sys2.translate(sys2.translate([0.3, 0.4], [a, 0.0]), [b, 0.0])
    two = sys2.translate([0.3, 0.4], [a + b, 0.0])
    wrapped = np.abs(one - two) % 1.0
    assert np.max(np.minimum(wrapped, 1.0 - wrapped)) <= 1e-12


def test_trig_polynomial_basics():
    f = TrigPolynomial({(0, 0): 1.5, (1, 0): 2.0})
    assert f.mean == 1.5
    assert f(np.zeros(2)) == pytest.approx(3.5)
    assert f.coefficient_mass() == pytest.approx(3.5)
    with pytest.raises(DomainError):
        TrigPolynomial({})
    with pytest.raises(DimensionMismatch):
        TrigPolynomial({(1,): 1.0, (1, 2): 2.0})


def test_average_of_constant_is_one():
    system = TorusSystem(np.array([[GOLDEN]]))
    f = TrigPolynomial({(0,): 1.0})
    m = MonomialMap([[1]])
    for M in ([0.5], [2.3], [17.0]):
        assert ergodic_average_quadrature(system, f, m, M, np.array([0.2])) == pytest.approx(1.0)


def test_average_elementary_closed_form():
    system = TorusSystem(np.array([[GOLDEN]]))
    f = TrigPolynomial({(1,): 1.0})
    m = MonomialMap([[1]])
    x = np.array([0.37])
    M = 3.7
    got = ergodic_average_quadrature(system, f, m, [M], x)
    z = M * GOLDEN
    want = np.exp(2j * np.pi * x[0]) * (np.exp(2j * np.pi * z) - 1.0) / (2j * np.pi * z)
    assert abs(got - want) <= 1e-12


def test_quadrature_matches_spectral_randomized():
    worst = 0.0
    for rep in range(40):
        rng = substream(52, rep)
        k, d, D = (int(rng.integers(1, 4)) for _ in range(3))
        D = max(D, 1)
        exps = rng.integers(0, 3, size=(d, k))
        for i in range(d):
            if not exps[i].any():
                exps[i, int(rng.integers(0, k))] = 1
        mapping = MonomialMap(exps)
        system = TorusSystem(rng.uniform(-0.6, 0.6, size=(d, D)))
        terms = {tuple(int(v) for v in rng.integers(-1, 2, size=D)): complex(rng.normal(), rng.normal())
                 for _ in range(2)}
        f = TrigPolynomial(terms)
        M = rng.uniform(0.5, 1.6, size=k)
        x = rng.uniform(0, 1, size=D)
        qa = ergodic_average_quadrature(system, f, mapping, M, x)
        sa = ergodic_average_spectral(system, f, mapping, M)(x)
        worst = max(worst, abs(qa - sa))
    assert worst <= 1e-6


def test_spectral_mean_preservation_and_linearity():
    system = TorusSystem(np.array([[GOLDEN, 0.0], [0.0, np.sqrt(2) - 1]]))
    mapping = MonomialMap([[1, 1], [2, 0]])
    f = TrigPolynomial({(0, 0): 0.7, (1, 0): 0.5, (0, 1): -0.25j})
    avg = ergodic_average_spectral(system, f, mapping, [1.5, 2.5])
    assert avg.mean == pytest.approx(0.7)
    one = TrigPolynomial({(1, 0): 0.5})
    avg1 = ergodic_average_spectral(system, one, mapping, [1.5, 2.5])
    assert avg1.terms[(1, 0)] == pytest.approx(avg.terms[(1, 0)])


def test_contraction_property():
    system = TorusSystem(np.array([[GOLDEN, 0.2]]))
    mapping = MonomialMap([[2]])
    f = TrigPolynomial({(1, 0): 1.0, (0, 1): 0.5, (0, 0): 0.1})
    sup = f.sup_norm()
    rng = substream(53, 0)
    for _ in range(10):
        M = 2.0 ** rng.uniform(-1, 3)
        x = rng.uniform(0, 1, size=2)
        val = ergodic_average_quadrature(system, f, mapping, [M], x)
        assert abs(val) <= sup + 1e-9


def test_separable_map_factorizes():
    # when each monomial uses its own parameter, the multiplier is a product
    # of the 1-d closed forms
    system = TorusSystem(np.array([[GOLDEN, 0.0], [0.0, np.sqrt(2) - 1]]))
    mapping = MonomialMap([[1, 0], [0, 1]])
    f = TrigPolynomial({(1, 1): 1.0})
    M = np.array([3.0, 5.0])
    theta = system.frequency_vector((1, 1))
    avg = ergodic_average_spectral(system, f, mapping, M)
    want = 1.0
    for j in range(2):
        z = M[j] * theta[j]
        want *= (np.exp(2j * np.pi * z) - 1.0) / (2j * np.pi * z)
    assert abs(avg.terms[(1, 1)] - want) <= 1e-8


def test_discrete_average_single_point_and_budget():
    system = TorusSystem(np.array([[GOLDEN]]))
    f = TrigPolynomial({(1,): 1.0})
    m = MonomialMap([[2]])
    got = ergodic_average_discrete(system, f, m, [1], np.array([0.1]))
    assert got == pytest.approx(np.exp(2j * np.pi * (0.1 + GOLDEN)))
    assert ergodic_average_discrete(system, TrigPolynomial({(0,): 1.0}), m, [5],
                                    np.array([0.0])) == pytest.approx(1.0)
    with pytest.raises(BudgetError):
        ergodic_average_discrete(system, f, m, [100], np.array([0.0]), budget=50)


def test_discrete_weyl_decay_trend():
    system = TorusSystem(np.array([[GOLDEN]]))
    f = TrigPolynomial({(1,): 1.0})
    m = MonomialMap([[2]])
    mags = [abs(ergodic_average_discrete(system, f, m, [2 ** e], np.array([0.0])))
            for e in (4, 8, 12)]
    assert mags[-1] < mags[0]
    assert mags[-1] < 0.1


def test_radon_average_grid_against_direct():
    fp = TrigPolynomial({(1, 0): 0.8, (0, 2): 0.4j, (0, 0): 0.3})
    extents = (1.0, 1.0)
    field = PeriodicField.from_function(extents, (16, 16),
                                        lambda p: fp(p / (2 * np.array(extents))))
    mapping = MonomialMap([[1, 1], [2, 0]])
    M = np.array([0.9, 1.4])
    out = radon_average_grid(field, mapping, M)
    assert abs(out.mean() - field.mean()) <= 1e-10
    axes = out.axes()
    rng = substream(54, 0)
    for _ in range(10):
        idx = tuple(int(rng.integers(0, 16)) for _ in range(2))
        x = np.array([axes[0][idx[0]], axes[1][idx[1]]])
        direct = radon_average_direct(fp, extents, mapping, M, x)
        assert abs(direct - out.samples[idx]) <= 1e-6


def test_convergence_experiment_and_fit():
    system = TorusSystem(np.array([[GOLDEN, 0.0], [0.0, np.sqrt(2) - 1]]))
    mapping = MonomialMap([[1, 0], [0, 1]])
    const = TrigPolynomial({(0, 0): 2.0})
    series = convergence_experiment(system, const, mapping, [(1.0, 1.0), (4.0, 4.0)])
    assert all(pt.deviation == 0.0 for pt in series)
    f = TrigPolynomial({(1, 0): 0.7, (0, 1): -0.4})
    schedule = [(2.0 ** j, 2.0 ** j) for j in range(0, 11)]
    series = convergence_experiment(system, f, mapping, schedule)
    devs = [pt.deviation for pt in series]
    assert devs[-1] <= 0.05 * f.sup_norm()
    assert devs[-1] < devs[0]
    assert fit_inverse_min_constant(series) > 0.0


def test_lacunary_chain_is_strictly_increasing():
    rng = substream(55, 0)
    for J in (1, 3, 8):
        chain = lacunary_chain(J, 2, rng)
        assert chain.shape == (J + 1, 2)
        assert np.all(np.diff(chain, axis=0) > 0.0)


def test_oscillation_statistics_constant_field():
    mapping = MonomialMap([[1, 1], [2, 0]])
    field = PeriodicField(np.full((8, 8), 1.5 + 0.5j), (2.0, 2.0))
    m_grid = ParamGrid((np.array([1.0, 2.0, 4.0]), np.array([1.0, 2.0, 4.0])))
    rng = substream(55, 1)
    chains = [lacunary_chain(2, 2, rng) for _ in range(5)]
    stats = oscillation_statistics(field, mapping, m_grid, chains)
    assert stats.max_ratio <= 1e-12


def test_oscillation_statistics_homogeneous():
    mapping = MonomialMap([[1, 1], [2, 0]])
    f = TrigPolynomial({(1, 0): 0.7, (0, 1): -0.4 + 0.2j})
    ext = np.array([2.0, 2.0])
    field = PeriodicField.from_function(ext, (8, 8), lambda p: f(p / (2 * ext)))
    scaled = PeriodicField(3.0 * field.samples, tuple(ext))
    m_grid = ParamGrid((np.array([1.0, 2.0, 4.0]), np.array([1.0, 2.0, 4.0])))
    rng = substream(55, 2)
    chains = [lacunary_chain(2, 2, rng) for _ in range(4)]
    a = oscillation_statistics(field, mapping, m_grid, chains)
    b = oscillation_statistics(scaled, mapping, m_grid, chains)
    assert np.allclose(a.ratios, b.ratios, rtol=1e-10)

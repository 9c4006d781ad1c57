"""Experiment runner: one subcommand per verification path, deterministic outputs.

Exit codes: 0 all checks passed, 1 an inequality check failed, 2 usage error,
3 invalid configuration or precondition, 4 budget/size guard, 5 I/O error.
Results land in --out (or $POLYERGO_OUT, or ./polyergo-results) as one JSON
record plus CSV series with rendered PNG figures alongside.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
import time

import numpy as np

from .config import SUBCOMMANDS, ExperimentConfig
from .dynamics import (
    TorusSystem,
    TrigPolynomial,
    convergence_experiment,
    fit_inverse_min_constant,
    lacunary_chain,
    oscillation_statistics,
    radon_average_direct,
    radon_average_grid,
)
from .errors import BudgetError, ConfigError, GuardError, PolyergoError
from .gluing import cube, gluing_data, select_scale, split_variation_multi
from .lattice import MonomialMap, ParamGrid, SampleFamily, evaluate_monomials
from .multipliers import (
    PeriodicField,
    QuadratureSpec,
    apply_multiplier_periodic,
    cancellation_norm,
    decay_scan,
    error_multiplier,
    inclusion_exclusion_terms,
    off_diagonal_profile,
    radon_multiplier,
)
from .rademacher import DyadicBlockFamily, rm_bound_1d, rm_bound_multi
from .reporting import ResultRecord, Series, emit
from .rng import random_complex, substream
from .seminorms import (
    pointwise_max_bound_check,
    sup_oscillation,
    variation,
    variation_bruteforce,
)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0

# 3x3 sample bundled with the runner; its certificate is frozen from the
# chain-enumeration oracle and re-checked on every run.
FIXTURE_AXES = (np.array([1.0, 2.0, 4.0]), np.array([1.0, 2.0, 4.0]))
FIXTURE_VALUES = np.array(
    [
        [0.25 + 0.50j, -1.00 + 0.25j, 0.75 - 0.75j],
        [-0.50 - 0.25j, 1.25 + 1.00j, -0.25 + 0.50j],
        [1.00 - 1.00j, -0.75 - 0.50j, 0.50 + 1.25j],
    ]
)
FIXTURE_CERTIFICATE = {
    1.0: (1.90860340379199, [[1.0, 1.0], [2.0, 2.0], [4.0, 4.0]]),
    2.0: (1.8027756377319948, [[1.0, 2.0], [4.0, 4.0]]),
}


def _random_grid(rng, k: int, max_axis: int = 3) -> ParamGrid:
    axes = []
    for _ in range(k):
        n = int(rng.integers(2, max_axis + 1))
        exps = np.sort(rng.choice(np.arange(-2, 5), size=n, replace=False))
        axes.append(2.0 ** exps)
    return ParamGrid(tuple(axes))


def _random_family(rng, grid: ParamGrid) -> SampleFamily:
    return SampleFamily(grid, random_complex(rng, grid.shape))


def run_variation(cfg: ExperimentConfig) -> ResultRecord:
    rho = float(cfg.extra.get("rho", "2.0"))
    fam = SampleFamily(ParamGrid(FIXTURE_AXES), FIXTURE_VALUES)
    cert = variation(fam, rho)
    expected_value, expected_chain = FIXTURE_CERTIFICATE.get(rho, (None, None))
    fixture_ok = True
    if expected_value is not None:
        fixture_ok = (
            abs(cert.value - expected_value) <= 1e-12
            and cert.chain.tolist() == expected_chain
        )
    rows = []
    violations = 0
    worst_residual = 0.0
    for t in range(cfg.trials):
        rng = substream(cfg.seed, t)
        grid = _random_grid(rng, int(rng.integers(1, 4)))
        f = _random_family(rng, grid)
        c = variation(f, rho)
        oracle = variation_bruteforce(f, rho=rho)
        agree = c.value == oracle
        residual = abs(c.reevaluate() - c.value)
        worst_residual = max(worst_residual, residual)
        if not agree or residual > 1e-12:
            violations += 1
        rows.append([t, grid.k, grid.size, c.value, oracle, int(agree)])
    outputs = {
        "rho": rho,
        "fixture_value": cert.value,
        "fixture_chain": cert.chain,
        "fixture_ok": fixture_ok,
        "violations": violations,
        "worst_certificate_residual": worst_residual,
    }
    series = {
        "trials": Series(["trial", "k", "points", "value", "oracle", "agree"], rows,
                         ylabel="variation")
    }
    return ResultRecord("variation", cfg, outputs, series,
                        passed=fixture_ok and violations == 0)


def run_oscillation(cfg: ExperimentConfig) -> ResultRecord:
    J = int(cfg.extra.get("J", "2"))
    rows = []
    violations = 0
    for t in range(cfg.trials):
        rng = substream(cfg.seed, t)
        k = int(rng.integers(1, 3))
        grid = _random_grid(rng, k)
        f = _random_family(rng, grid)
        so = sup_oscillation(f, J)
        v2 = variation(f, 2.0).value
        mb = pointwise_max_bound_check(f)
        dominated = so.value <= v2 + cfg.tolerance
        # the discrete domination is provable only in one parameter
        if k == 1 and not dominated:
            violations += 1
        if not mb.holds:
            violations += 1
        rows.append([t, k, so.value, v2, so.value / v2 if v2 > 0 else 0.0,
                     int(dominated), mb.slack])
    series = {
        "trials": Series(
            ["trial", "k", "sup_oscillation", "variation2", "ratio", "dominated", "max_bound_slack"],
            rows, ylabel="seminorm value")
    }
    return ResultRecord("oscillation", cfg, {"J": J, "violations": violations},
                        series, passed=violations == 0)


def _random_dyadic_family(rng, k0: int, L: int, L0: int, vanishing: bool) -> DyadicBlockFamily:
    side = 2 ** L0 + 1
    vals = random_complex(rng, (side,) * k0)
    if vanishing:
        for axis in range(k0):
            idx = [slice(None)] * k0
            idx[axis] = 0
            vals[tuple(idx)] = 0.0
    return DyadicBlockFamily(L, L0, vals)


def run_rm_check(cfg: ExperimentConfig) -> ResultRecord:
    k0 = int(cfg.extra.get("k0", "2"))
    L = int(cfg.extra.get("L", "4"))
    default_l0 = {1: min(L, 6), 2: min(L, 3)}.get(k0, min(L, 2))
    L0 = int(cfg.extra.get("L0", str(default_l0)))
    constant = np.sqrt(2.0) if k0 == 1 else 2.0 ** (k0 / 2.0)
    rows = []
    violations = 0
    worst = 0.0
    for t in range(cfg.trials):
        rng = substream(cfg.seed, t)
        fam = _random_dyadic_family(rng, k0, L, L0, vanishing=k0 >= 2)
        lhs, rhs = rm_bound_1d(fam) if k0 == 1 else rm_bound_multi(fam)
        ratio = lhs / rhs if rhs > 0 else 0.0
        worst = max(worst, ratio)
        ok = lhs <= constant * rhs + cfg.tolerance
        if not ok:
            violations += 1
        rows.append([t, lhs, rhs, ratio, int(ok)])
    outputs = {"k0": k0, "L": L, "L0": L0, "constant": constant,
               "worst_ratio": worst, "violations": violations}
    series = {"trials": Series(["trial", "lhs", "rhs", "ratio", "ok"], rows,
                               ylabel="lhs/rhs")}
    return ResultRecord("rm-check", cfg, outputs, series, passed=violations == 0)


def run_gluing(cfg: ExperimentConfig) -> ResultRecord:
    matrix = cfg.matrix or [[1, 0], [3, 1]]
    mapping = MonomialMap(matrix)
    g = gluing_data(mapping)
    nmax = cfg.budget
    rows = []
    worst = 0.0
    member_failures = 0
    for n in itertools.product(range(-nmax, nmax + 1), repeat=g.r):
        nv = np.array(n)
        s = select_scale(g, nv)
        p = evaluate_monomials(g.selected, s)
        rel = float(np.max(np.abs(p - 2.0 ** nv) / 2.0 ** nv))
        worst = max(worst, rel)
        inside = cube(g, nv).contains(s)
        if not inside:
            member_failures += 1
        rows.append([" ".join(str(v) for v in n), rel, int(inside)])
    outputs = {
        "matrix": matrix,
        "rank": g.r,
        "basis_rows": list(g.basis_rows),
        "n0": g.n0,
        "L": g.L,
        "max_scale_relative_error": worst,
        "cube_membership_failures": member_failures,
    }
    series = {"scales": Series(["n", "relative_error", "in_cube"], rows,
                               ylabel="relative error", logy=True)}
    passed = worst <= 1e-12 and member_failures == 0
    return ResultRecord("gluing", cfg, outputs, series, passed=passed)


def _compatible_family(rng, grid: ParamGrid, mapping: MonomialMap) -> SampleFamily:
    """a_s = g(P(s)) with g a random trigonometric function of log2 P."""
    n_waves = 3
    freqs = rng.uniform(-1.0, 1.0, size=(n_waves, mapping.d))
    coefs = random_complex(rng, n_waves)

    def g(point):
        img = np.log2(evaluate_monomials(mapping, point))
        return complex(np.sum(coefs * np.exp(2j * np.pi * (freqs @ img))))

    return SampleFamily.from_function(grid, g)


def run_splitting_check(cfg: ExperimentConfig) -> ResultRecord:
    matrix = cfg.matrix or [[1, 1]]
    mapping = MonomialMap(matrix)
    axes = cfg.axes or [[1.0, 2.0, 4.0, 8.0]] * mapping.k
    grid = ParamGrid(tuple(np.asarray(ax) for ax in axes))
    g = gluing_data(mapping)
    limit = float(cfg.extra.get("climit", "16"))
    rows = []
    worst = 0.0
    for t in range(cfg.trials):
        rng = substream(cfg.seed, t)
        fam = _compatible_family(rng, grid, mapping)
        full = variation(fam, 2.0).value
        res = split_variation_multi(fam, g)
        denom = res.long + res.short_l2
        ratio = full / denom if denom > 0 else 0.0
        worst = max(worst, ratio)
        rows.append([t, full, res.long, res.short_l2, ratio])
    outputs = {"matrix": matrix, "n0": g.n0, "rank": g.r,
               "recorded_constant": worst, "limit": limit}
    series = {"trials": Series(["trial", "full", "long", "short_l2", "ratio"], rows,
                               ylabel="V2 and split parts")}
    return ResultRecord("splitting-check", cfg, outputs, series, passed=worst <= limit)


def run_multiplier(cfg: ExperimentConfig) -> ResultRecord:
    matrix = cfg.matrix or [[1], [2]]
    mapping = MonomialMap(matrix)
    quad = QuadratureSpec()
    s_setting = [float(v) for v in cfg.extra.get("s", "").split()]
    s0 = np.array(s_setting) if len(s_setting) == mapping.k else np.full(mapping.k, 1.5)
    rows = []
    at_zero = radon_multiplier(mapping, s0, np.zeros(mapping.d), quad)
    ok_all = abs(at_zero - 1.0) <= 1e-10
    worst_resid = 0.0
    worst_mod = 0.0
    worst_double = 0.0
    for t in range(cfg.trials):
        rng = substream(cfg.seed, t)
        s = 2.0 ** rng.uniform(-2, 2, size=mapping.k)
        xi = rng.normal(0.0, 4.0, size=mapping.d)
        m_val = radon_multiplier(mapping, s, xi, quad)
        worst_mod = max(worst_mod, abs(m_val))
        terms = inclusion_exclusion_terms(mapping, s, xi, quad)
        tilde = sum((-1) ** len(D) * v for D, v in terms.items())
        main = sum((-1) ** (len(D) + 1) * v for D, v in terms.items() if D)
        worst_resid = max(worst_resid, abs(terms[()] - (main + tilde)))
        doubled = radon_multiplier(mapping, s, xi, QuadratureSpec(order=2 * quad.order))
        worst_double = max(worst_double, abs(m_val - doubled))
        rows.append([t, abs(m_val), abs(tilde), abs(m_val - doubled)])
    ok_all &= worst_mod <= 1.0 + 1e-12 and worst_double <= 1e-9 and worst_resid <= 1e-10
    outputs = {
        "matrix": matrix,
        "value_at_zero": at_zero,
        "max_modulus": worst_mod,
        "max_identity_residual": worst_resid,
        "max_order_doubling_delta": worst_double,
    }
    series = {"samples": Series(["trial", "abs_multiplier", "abs_error_multiplier",
                                 "order_doubling_delta"], rows, ylabel="modulus")}
    return ResultRecord("multiplier", cfg, outputs, series, passed=bool(ok_all))


def run_decay_scan(cfg: ExperimentConfig) -> ResultRecord:
    matrix = cfg.matrix or [[1], [2]]
    mapping = MonomialMap(matrix)
    b = cfg.budget
    fit = decay_scan(mapping, s_exponents=range(-b, b + 1),
                     xi_exponents=range(-b, b + 1) if mapping.d == 1 else range(-b, b + 1, 2))
    climit = float(cfg.extra.get("climit", "10"))
    usable = {dl: c for dl, c in fit.per_delta.items() if dl >= 0.1 and c <= climit}
    rows = [[dl, fit.per_delta[dl]] for dl in sorted(fit.per_delta)]
    outputs = {
        "matrix": matrix,
        "best_delta": fit.delta,
        "best_constant": fit.constant,
        "samples": fit.samples,
        "witness_s": fit.witness_s,
        "witness_xi": fit.witness_xi,
        "usable_deltas": sorted(usable),
    }
    series = {"per_delta": Series(["delta", "constant"], rows, ylabel="fitted constant",
                                  logy=True)}
    return ResultRecord("decay-scan", cfg, outputs, series, passed=bool(usable))


def run_offdiag_scan(cfg: ExperimentConfig) -> ResultRecord:
    matrix = cfg.matrix or [[1], [2]]
    mapping = MonomialMap(matrix)
    g = gluing_data(mapping)
    b = cfg.budget
    if g.r == 1:
        shifts = [np.array([h]) for h in range(-b, b + 1)]
    else:
        half = max(1, b // 2)
        shifts = [np.array(h) for h in itertools.product(range(-half, half + 1), repeat=g.r)]
    prof = off_diagonal_profile(mapping, g, shifts, n_budget=int(cfg.extra.get("n_budget", "2")))
    rows = [
        [" ".join(str(v) for v in np.atleast_1d(h)), float(np.abs(h).sum()), r, c]
        for h, r, c in zip(prof.shifts, prof.raw, prof.normalized)
    ]
    outputs = {"matrix": matrix, "slope": prof.slope,
               "max_normalized": float(prof.normalized.max())}
    series = {"profile": Series(["h", "h_l1", "raw", "normalized"], rows,
                                xlabel="h", ylabel="box constant", logy=True)}
    return ResultRecord("offdiag-scan", cfg, outputs, series, passed=prof.slope < 0.0)


def run_cancellation(cfg: ExperimentConfig) -> ResultRecord:
    rows_spec = cfg.matrix or [[1], [2], [1, 1], [3, 1], [2, 0, 1]]
    limit = float(cfg.extra.get("climit", "20"))
    ratios = (0.125, 0.25, 0.5, 1.0)
    rows = []
    worst = 0.0
    for row in rows_spec:
        k = len(row)
        s = np.ones(k)
        for size in range(0, k + 1):
            for K in itertools.combinations(range(k), size):
                combos = list(itertools.product(ratios, repeat=len(K))) if K else [()]
                for combo in combos:
                    h = np.full(k, 0.5)
                    for pos, j in enumerate(K):
                        h[j] = combo[pos] * s[j]
                    val = cancellation_norm(row, s, h, K)
                    worst = max(worst, val)
                    rows.append([" ".join(map(str, row)), " ".join(map(str, K)),
                                 " ".join(repr(c) for c in combo), val])
    outputs = {"rows": rows_spec, "worst_ratio": worst, "limit": limit}
    series = {"ratios": Series(["monomial", "K", "h_over_s", "ratio"], rows,
                               xlabel="case", ylabel="normalized L1")}
    return ResultRecord("cancellation", cfg, outputs, series, passed=worst <= limit)


def _default_observable() -> TrigPolynomial:
    return TrigPolynomial({
        (1, 0): 0.7,
        (0, 1): -0.4 + 0.2j,
        (1, 1): 0.3j,
        (-1, 1): 0.15,
    })


def run_ergodic_run(cfg: ExperimentConfig) -> ResultRecord:
    top = max(4, cfg.budget)
    system = TorusSystem(np.array([[GOLDEN, 0.0], [0.0, np.sqrt(2.0) - 1.0]]))
    mapping = MonomialMap(cfg.matrix or [[1, 0], [0, 1]])
    f = _default_observable()
    sup = f.sup_norm()
    schedule = [(2.0 ** j, 2.0 ** j) for j in range(0, top + 1)]
    schedule += [(2.0 ** top, 2.0 ** j) for j in range(0, top)]
    schedule += [(2.0 ** j, 2.0 ** top) for j in range(0, top)]
    series_pts = convergence_experiment(system, f, mapping, schedule)
    fitC = fit_inverse_min_constant(series_pts)
    final_dev = next(p.deviation for p in series_pts if p.M == (2.0 ** top, 2.0 ** top))
    rows = [[min(p.M), p.M[0], p.M[1], p.deviation] for p in series_pts]
    outputs = {
        "sup_norm": sup,
        "final_deviation": final_dev,
        "deviation_bound": 0.05 * sup,
        "fit_constant": fitC,
        "top_exponent": top,
    }
    series = {"deviation": Series(["min_M", "M1", "M2", "deviation"], rows,
                                  xlabel="min(M)", ylabel="sup deviation", logy=True)}
    passed = final_dev <= 0.05 * sup and fitC > 0
    return ResultRecord("ergodic-run", cfg, outputs, series, passed=passed)


def run_radon_run(cfg: ExperimentConfig) -> ResultRecord:
    mapping = MonomialMap(cfg.matrix or [[1, 1], [2, 0]])
    fp = TrigPolynomial({(1, 0): 0.8, (0, 2): 0.4j, (0, 0): 0.3, (2, -1): 0.2})
    extents = (1.0, 1.0)
    shape = (16, 16)
    field = PeriodicField.from_function(extents, shape,
                                        lambda p: fp(p / (2 * np.array(extents))))
    M = np.array([float(v) for v in cfg.extra.get("M", "0.9 1.4").split()])
    out = radon_average_grid(field, mapping, M)
    mean_dev = abs(out.mean() - field.mean())
    axes = out.axes()
    rng = substream(cfg.seed, 0)
    rows = []
    worst = 0.0
    for _ in range(10):
        idx = tuple(int(rng.integers(0, n)) for n in shape)
        xpt = np.array([axes[0][idx[0]], axes[1][idx[1]]])
        direct = radon_average_direct(fp, extents, mapping, M, xpt)
        delta = abs(direct - out.samples[idx])
        worst = max(worst, delta)
        rows.append([idx[0], idx[1], abs(out.samples[idx]), abs(direct), delta])
    ident = apply_multiplier_periodic(field, lambda th: 1.0)
    ident_dev = float(np.abs(ident.samples - field.samples).max())
    outputs = {
        "matrix": mapping.exponents,
        "M": M,
        "mean_deviation": mean_dev,
        "max_direct_delta": worst,
        "identity_deviation": ident_dev,
        "spectrum_roundtrip": field.roundtrip_error(),
    }
    series = {"pointchecks": Series(["i", "j", "grid_value", "direct_value", "delta"],
                                    rows, ylabel="|value|")}
    passed = mean_dev <= 1e-10 and worst <= 1e-6 and ident_dev <= 1e-10
    return ResultRecord("radon-run", cfg, outputs, series, passed=passed)


def run_osc_stats(cfg: ExperimentConfig) -> ResultRecord:
    mapping = MonomialMap(cfg.matrix or [[1, 1], [2, 0]])
    p = float(cfg.extra.get("p", "2"))
    j_list = [int(v) for v in cfg.extra.get("J", "2 4 8").split()]
    f = _default_observable()
    extents = (2.0, 2.0)
    field = PeriodicField.from_function(extents, (8, 8),
                                        lambda pt: f(pt / (2 * np.array(extents))))
    m_grid = ParamGrid(tuple(2.0 ** np.arange(0, 6, dtype=float) for _ in range(mapping.k)))
    rows = []
    per_j = {}
    for J in j_list:
        rng = substream(cfg.seed, J)
        chains = [lacunary_chain(J, mapping.k, rng, base=0.25) for _ in range(cfg.trials)]
        stats = oscillation_statistics(field, mapping, m_grid, chains, p=p)
        per_j[J] = stats.max_ratio
        rows.append([J, stats.max_ratio, float(stats.ratios.mean())])
    ratios = [per_j[J] for J in j_list]
    # a family with square-root oscillation growth would gain a factor ~1.41
    # per doubling of J; saturation below 1.25 marks the bounded regime
    trend_ok = ratios[-1] <= 1.25 * ratios[-2] + 1e-9 if len(ratios) > 1 else True
    outputs = {"matrix": mapping.exponents, "p": p,
               "max_ratio": max(ratios), "per_J": {str(J): per_j[J] for J in j_list},
               "trend_ok": trend_ok}
    series = {"ratios": Series(["J", "max_ratio", "mean_ratio"], rows,
                               xlabel="J", ylabel="oscillation ratio")}
    return ResultRecord("osc-stats", cfg, outputs, series, passed=trend_ok)


RUNNERS = {
    "variation": run_variation,
    "oscillation": run_oscillation,
    "rm-check": run_rm_check,
    "gluing": run_gluing,
    "splitting-check": run_splitting_check,
    "multiplier": run_multiplier,
    "decay-scan": run_decay_scan,
    "offdiag-scan": run_offdiag_scan,
    "cancellation": run_cancellation,
    "ergodic-run": run_ergodic_run,
    "radon-run": run_radon_run,
    "osc-stats": run_osc_stats,
}

DEFAULTS = {
    "variation": dict(trials=40, budget=6),
    "oscillation": dict(trials=40, budget=6),
    "rm-check": dict(trials=500, budget=6),
    "gluing": dict(trials=1, budget=8),
    "splitting-check": dict(trials=100, budget=6),
    "multiplier": dict(trials=60, budget=6),
    "decay-scan": dict(trials=1, budget=6),
    "offdiag-scan": dict(trials=1, budget=6),
    "cancellation": dict(trials=1, budget=6),
    "ergodic-run": dict(trials=1, budget=10),
    "radon-run": dict(trials=1, budget=6),
    "osc-stats": dict(trials=20, budget=6),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyergo",
        description="Verification experiments for multiparameter polynomial averages",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="INI config file; flags override its values")
        sp.add_argument("--seed", type=int, help="RNG seed (Philox streams)")
        sp.add_argument("--out", help="output directory (default $POLYERGO_OUT)")
        sp.add_argument("--trials", type=int, help="number of randomized trials")
        sp.add_argument("--budget", type=int, help="size/range budget (meaning per subcommand)")
        sp.add_argument("--tolerance", type=float, help="comparison tolerance")
        sp.add_argument("--no-plot", action="store_true", help="skip figure rendering")
        sp.add_argument("--matrix", help="exponent matrix, rows ';'-separated: '1 0; 3 1'")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="extra subcommand-specific settings")
        if name == "rm-check":
            sp.add_argument("--k0", type=int, help="number of parameters")
            sp.add_argument("--L", type=int, help="dyadic cube depth")
            sp.add_argument("--L0", type=int, help="data resolution (defaults per k0)")
    return parser


def load_config(args) -> ExperimentConfig:
    if args.config is not None:
        try:
            text = open(args.config).read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not text.strip():
            raise ConfigError("config file is empty")
        cfg = ExperimentConfig.from_ini(text)
        if cfg.subcommand != args.subcommand:
            raise ConfigError(
                f"config is for {cfg.subcommand!r} but {args.subcommand!r} was invoked"
            )
    else:
        d = DEFAULTS[args.subcommand]
        cfg = ExperimentConfig(subcommand=args.subcommand, trials=d["trials"],
                               budget=d["budget"])
    matrix = None
    if args.matrix:
        try:
            matrix = [[int(v) for v in row.split()] for row in args.matrix.split(";")]
        except ValueError as exc:
            raise ConfigError(f"bad --matrix value: {exc}") from exc
    extra = dict(cfg.extra)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        extra[key] = val
    for key in ("k0", "L", "L0"):
        if getattr(args, key, None) is not None:
            extra[key] = str(getattr(args, key))
    cfg = cfg.with_overrides(
        seed=args.seed, trials=args.trials, budget=args.budget,
        tolerance=args.tolerance, out=args.out, matrix=matrix,
    )
    cfg.extra = extra
    if args.no_plot:
        cfg = cfg.with_overrides(plot=False)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        outdir = cfg.out or os.environ.get("POLYERGO_OUT", "polyergo-results")
        started = time.perf_counter()
        record = RUNNERS[cfg.subcommand](cfg)
        record.wall_time = time.perf_counter() - started
        emit([record], outdir, plot=cfg.plot)
        return 0 if record.passed else 1
    except ConfigError as exc:
        print(f"polyergo: invalid configuration: {exc}", file=sys.stderr)
        return 3
    except (BudgetError, GuardError) as exc:
        print(f"polyergo: budget exceeded: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"polyergo: I/O error: {exc}", file=sys.stderr)
        return 5
    except PolyergoError as exc:
        print(f"polyergo: validation error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"polyergo: validation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``.  Every tolerance is
stated inline; seeds are frozen so the suite is reproducible.
"""

import time

import numpy as np
import pytest
from scipy import stats

from hughop.diagnostics import ess
from hughop.harness import (
    ExperimentConfig,
    grid_tune,
    run_chain,
    stability_experiment,
    theorem2_experiment,
)
from hughop.hug import HugParams, hug_trajectory
from hughop.metric import local_covariance
from hughop.models import (
    CauchitPosterior,
    RaschPosterior,
    SpatialProbitModel,
    simulate_cauchit,
    simulate_rasch,
    simulate_spatial,
)
from hughop.targets import Banana2D, GaussianDiag, LogisticGaussian, standard_suite

from conftest import fd_gradient, fd_jacobian, rel_err


def report(index, name, detail):
    print(f"\n[criterion {index:2d}] {name}: {detail}")


def random_spd(rng, d):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return (q * np.exp(rng.uniform(-0.7, 0.7, d))) @ q.T


def draw_start(target, rng):
    if target.has_exact_sampler:
        return target.sample_exact(rng, 1)[0]
    scales = getattr(target, "scales", None)
    x = rng.standard_normal(target.dim)
    return x * scales if scales is not None else x


def test_criterion_01_skew_reversibility():
    """Forward-then-reversed hug trajectories retrace the start, all modes,
    all eleven comparison targets, 100 random draws each, rel. err <= 1e-10."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2101)
    suite = standard_suite(25)
    worst = 0.0
    for name, target in suite.items():
        sigma0 = random_spd(rng, target.dim)
        for mode in ("plain", "precond", "hessian"):
            kwargs = {"precond_cov": sigma0} if mode == "precond" else {}
            for _ in range(100):
                params = HugParams(
                    total_time=float(rng.uniform(0.1, 1.2)),
                    n_bounces=int(rng.integers(1, 9)),
                    mode=mode,
                    **kwargs,
                )
                x0 = draw_start(target, rng)
                v0 = rng.standard_normal(target.dim)
                fwd = hug_trajectory(target, x0, v0, params)
                back = hug_trajectory(target, fwd.x, -fwd.v, params)
                err = max(
                    np.linalg.norm(back.x - x0) / (1 + np.linalg.norm(x0)),
                    np.linalg.norm(back.v + v0) / (1 + np.linalg.norm(v0)),
                )
                worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    report(1, "skew-reversibility", f"worst relative error {worst:.2e} (tol 1e-10), {elapsed:.1f}s")
    assert worst <= 1e-10
    assert elapsed < 60.0


def test_criterion_02_volume_preservation():
    """Numerical phase-space Jacobian of the d=2 hug map is 1 within 1e-4."""
    rng = np.random.default_rng(2102)
    worst = 0.0
    cases = [
        (Banana2D(a=1.0, c=1.0), HugParams(0.6, 4)),
        (LogisticGaussian(a=5.0, scales=[1.0, 0.6]), HugParams(0.6, 4, mode="hessian")),
    ]
    for target, params in cases:
        def phase_map(q):
            traj = hug_trajectory(target, q[:2], q[2:], params)
            return np.concatenate([traj.x, traj.v])

        for _ in range(10):
            q0 = rng.standard_normal(4)
            jac = fd_jacobian(phase_map, q0, step=1e-6)
            worst = max(worst, abs(np.linalg.det(jac) - 1.0))
    report(2, "volume preservation", f"worst |det J - 1| = {worst:.2e} (tol 1e-4)")
    assert worst < 1e-4


def test_criterion_03_integration_error_second_order():
    """Median |delta log pi| of full hug trajectories scales as step^2
    (log-log slope 2 +/- 0.3) at fixed total time."""
    target = LogisticGaussian(a=5.0, scales=1.0, dim=25)
    rng = np.random.default_rng(2103)
    n_trials = 200
    x0s = rng.standard_normal((n_trials, 25))
    v0s = rng.standard_normal((n_trials, 25))
    bounce_counts = [5, 10, 20, 40]
    medians = []
    for n_bounces in bounce_counts:
        params = HugParams(total_time=1.0, n_bounces=n_bounces)
        errs = [
            abs(
                target.log_density(hug_trajectory(target, x0s[i], v0s[i], params).x)
                - target.log_density(x0s[i])
            )
            for i in range(n_trials)
        ]
        medians.append(np.median(errs))
    steps = [1.0 / b for b in bounce_counts]
    slope = np.polyfit(np.log(steps), np.log(medians), 1)[0]
    report(3, "trajectory error order", f"log-log slope {slope:.3f} (target 2 +/- 0.3)")
    assert 1.7 <= slope <= 2.3


def test_criterion_04_hessian_bounce_third_order():
    """Single curvature-aware bounce: median |delta log pi| ~ step^3
    (slope 3 +/- 0.4)."""
    target = LogisticGaussian(a=5.0, scales=1.0, dim=25)
    rng = np.random.default_rng(2104)
    n_trials = 200
    x0s = rng.standard_normal((n_trials, 25))
    z0s = rng.standard_normal((n_trials, 25))
    steps = [0.4, 0.2, 0.1, 0.05]
    medians = []
    for step in steps:
        params = HugParams(total_time=step, n_bounces=1, mode="hessian")
        errs = []
        for i in range(n_trials):
            metric = local_covariance(target.hessian(x0s[i]), 1e-6)
            v0 = metric.unwhiten(z0s[i])
            traj = hug_trajectory(target, x0s[i], v0, params)
            errs.append(abs(target.log_density(traj.x) - target.log_density(x0s[i])))
        medians.append(np.median(errs))
    slope = np.polyfit(np.log(steps), np.log(medians), 1)[0]
    report(4, "hessian bounce order", f"log-log slope {slope:.3f} (target 3 +/- 0.4)")
    assert 2.6 <= slope <= 3.4


def test_criterion_05_limiting_acceptance():
    """Raw-guard hop from fresh stationary draws on a random-precision
    Gaussian, d=200, lam=2: mean acceptance within 0.03 of 2 Phi(-kappa/2)."""
    t0 = time.perf_counter()
    limits = {0.5: 0.8026, 1.0: 0.6171, 2.0: 0.3173}
    details = []
    for kappa, limit in limits.items():
        result = theorem2_experiment(
            {"dist": "uniform", "low": 0.5, "high": 5.0},
            dim=200,
            lam=2.0,
            kappa=kappa,
            iterations=100_000,
            seed=2105,
        )
        details.append(
            f"kappa={kappa}: {result['mean_acceptance']:.4f} vs {limit:.4f}"
        )
        assert abs(result["mean_acceptance"] - limit) <= 0.03
    elapsed = time.perf_counter() - t0
    report(5, "limiting acceptance", "; ".join(details) + f", {elapsed:.1f}s")
    assert elapsed < 120.0


def _exactness_checks(kernels_spec, seed):
    cfg = ExperimentConfig.from_dict(
        {
            "target": {"target": "gauss", "dim": 5, "scales": "U"},
            "kernels": kernels_spec,
            "iterations": 200_000,
            "burn_in": 5_000,
            "seed": seed,
            "init": "exact",
        }
    )
    trace, summary = run_chain(cfg)
    n = trace.n_recorded
    worst_z = 0.0
    worst_var = 0.0
    worst_p = 1.0
    for j in range(5):
        series = trace.positions[:, j]
        component_ess = summary.ess_x[j]
        se = series.std() / np.sqrt(component_ess)
        worst_z = max(worst_z, abs(series.mean()) / se)
        worst_var = max(worst_var, abs(series.var() - 1.0))
        thin = max(1, int(np.ceil(2.0 * n / component_ess)))
        p_value = stats.kstest(series[::thin], "norm").pvalue
        worst_p = min(worst_p, p_value)
    return worst_z, worst_var, worst_p, summary


def test_criterion_06_exactness_of_all_kernels():
    """Hug+hop, HMC, RWM and MALA leave the unit Gaussian invariant:
    means within 3 MC standard errors, variances within 5 percent, KS at
    level 0.01 on thinned marginals, 200k iterations each."""
    t0 = time.perf_counter()
    samplers = {
        "hug+hop": [
            {"kernel": "hug", "T": 1.0, "B": 10},
            {"kernel": "hop", "lambda": 2.0, "kappa": 0.5},
        ],
        "hmc": [{"kernel": "hmc", "L": 10, "step_size": 0.2}],
        "rwm": [{"kernel": "rwm", "step_scale": 1.05}],
        "mala": [{"kernel": "mala", "step_scale": 0.9}],
    }
    lines = []
    for name, spec in samplers.items():
        worst_z, worst_var, worst_p, _ = _exactness_checks(spec, seed=2106)
        lines.append(
            f"{name}: max|z|={worst_z:.2f}, max var dev={worst_var:.3f}, min KS p={worst_p:.3f}"
        )
        assert worst_z <= 3.0, f"{name}: mean outside 3 MC standard errors"
        assert worst_var <= 0.05, f"{name}: variance off by more than 5%"
        assert worst_p > 0.01, f"{name}: KS test rejected at level 0.01"
    elapsed = time.perf_counter() - t0
    report(6, "stationarity of all kernels", "; ".join(lines) + f", {elapsed:.0f}s")
    assert elapsed < 300.0


def test_criterion_07_hop_dimensional_robustness():
    """Per-dimension tuned hop ESS(log pi) per iteration: the d=100 optimum
    retains at least 60 percent of the d=10 optimum (200k iterations)."""
    t0 = time.perf_counter()
    lam_grid = [4.0, 6.0, 9.0, 14.0, 20.0, 30.0]
    kappa_grid = [0.25, 0.5, 1.0]
    per_dim = {}
    for dim in (10, 100):
        cfg = ExperimentConfig.from_dict(
            {
                "target": {"target": "lg", "a": 1.0, "dim": dim, "scales": "U"},
                "kernels": [{"kernel": "hop", "lambda": 9.0, "kappa": 0.5}],
                "iterations": 10,
                "seed": 2107,
                "record": "logpi",
                "grid": {
                    "kernels.0.lambda": lam_grid,
                    "kernels.0.kappa": kappa_grid,
                },
                "pilot_iterations": 20_000,
                "objective": "ess_per_iteration",
            }
        )
        tuned = grid_tune(
            cfg, objective=lambda s: np.nan if s.ess_logpi is None else s.ess_logpi
        )
        final = ExperimentConfig.from_dict(
            {
                "target": {"target": "lg", "a": 1.0, "dim": dim, "scales": "U"},
                "kernels": [
                    {
                        "kernel": "hop",
                        "lambda": tuned.best["kernels.0.lambda"],
                        "kappa": tuned.best["kernels.0.kappa"],
                    }
                ],
                "iterations": 200_000,
                "burn_in": 20_000,
                "seed": 2207,
                "record": "logpi",
            }
        )
        _, summary = run_chain(final)
        per_dim[dim] = {
            "lam": tuned.best["kernels.0.lambda"],
            "kappa": tuned.best["kernels.0.kappa"],
            "ess_rate": summary.ess_logpi / summary.iterations,
        }
    ratio = per_dim[100]["ess_rate"] / per_dim[10]["ess_rate"]
    elapsed = time.perf_counter() - t0
    report(
        7,
        "hop dimensional robustness",
        f"d=10 opt lam={per_dim[10]['lam']}, d=100 opt lam={per_dim[100]['lam']}, "
        f"ESS(logpi)/iter ratio {ratio:.3f} (need >= 0.6), {elapsed:.0f}s",
    )
    assert ratio >= 0.6
    assert elapsed < 900.0


def test_criterion_08_tuning_bands():
    """Grid tuning recovers the qualitative optima: best kappa in [0.25, 1]
    on the isotropic logistic-Gaussian, and some hug step reaches acceptance
    in [0.6, 0.85] on a 25-dimensional anisotropic Gaussian."""
    t0 = time.perf_counter()
    hop_cfg = ExperimentConfig.from_dict(
        {
            "target": {"target": "lg", "a": 1.0, "dim": 25, "scales": "U"},
            "kernels": [{"kernel": "hop", "lambda": 4.0, "kappa": 0.5}],
            "iterations": 10,
            "seed": 2108,
            "grid": {
                "kernels.0.lambda": [1.0, 2.0, 4.0, 8.0, 16.0],
                "kernels.0.kappa": [0.25, 0.5, 1.0, 2.0],
            },
            "pilot_iterations": 10_000,
            "objective": "ess_per_iteration",
        }
    )
    hop_result = grid_tune(hop_cfg)
    best_kappa = hop_result.best["kernels.0.kappa"]

    hug_cfg = ExperimentConfig.from_dict(
        {
            "target": {
                "target": "gauss",
                "dim": 25,
                "scales": list(np.linspace(0.25, 2.5, 25)),
            },
            "kernels": [
                {"kernel": "hug", "T": 1.0, "B": 3},
                {"kernel": "hop", "lambda": 2.5, "kappa": 0.5},
            ],
            "iterations": 10,
            "seed": 2118,
            "grid": {"kernels.0.T": [0.7, 1.0, 1.4], "kernels.0.B": [1, 2, 3, 5, 8]},
            "pilot_iterations": 10_000,
            "objective": "ess_per_iteration",
        }
    )
    hug_result = grid_tune(hug_cfg)
    in_band = [
        (row["kernels.0.T"], row["kernels.0.B"], row["acceptance"]["hug"])
        for row in hug_result.table
        if 0.60 <= row["acceptance"]["hug"] <= 0.85
    ]
    elapsed = time.perf_counter() - t0
    report(
        8,
        "tuning bands",
        f"best kappa {best_kappa} (need within [0.25, 1]); "
        f"{len(in_band)} hug cells with acceptance in [0.6, 0.85], "
        f"e.g. {in_band[:2]}, {elapsed:.0f}s",
    )
    assert 0.25 <= best_kappa <= 1.0
    assert len(in_band) >= 1
    assert elapsed < 600.0


def test_criterion_09_cauchit_ordering():
    """On the simulated cauchit posterior, tuned hug+hop beats tuned HMC on
    min ESS(X) per iteration while HMC beats hug+hop on ESS(log pi)."""
    from hughop.model_runs import run_cauchit_comparison

    t0 = time.perf_counter()
    rep = run_cauchit_comparison(seed=2109, iterations=50_000)
    hh_x = rep["hug_hop"]["min_ess_x_per_1000"]
    hmc_x = rep["hmc"]["min_ess_x_per_1000"]
    hh_l = rep["hug_hop"]["ess_logpi_per_1000"]
    hmc_l = rep["hmc"]["ess_logpi_per_1000"]
    elapsed = time.perf_counter() - t0
    report(
        9,
        "cauchit efficiency ordering",
        f"minESS(X)/1000: hug+hop {hh_x:.0f} vs hmc {hmc_x:.0f}; "
        f"ESS(logpi)/1000: hmc {hmc_l:.0f} vs hug+hop {hh_l:.0f}; "
        f"tuned {rep['tuned']}, {elapsed:.0f}s",
    )
    assert hh_x > hmc_x, "hug+hop should win component mixing per iteration"
    assert hmc_l > hh_l, "hmc should win log-density mixing per iteration"
    assert elapsed < 1200.0


def test_criterion_10_derivative_oracles():
    """Analytic gradients (rel. err < 1e-5) and Hessians (< 1e-4) match
    finite differences at 20 random points for every target and model."""
    rng = np.random.default_rng(2110)
    problems = list(standard_suite(12).items())
    problems.append(("cauchit", CauchitPosterior(simulate_cauchit(60, 5, 1.0, rng))))
    problems.append(("rasch", RaschPosterior(simulate_rasch(5, 10, 1.0, rng))))
    spatial = SpatialProbitModel(simulate_spatial(3, 3, np.log(2.0), np.log(0.2), 1.0, rng))
    problems.append(("spatial-z", spatial.conditional_target((np.log(2.0), np.log(0.2)))))

    worst_grad = 0.0
    worst_hess = 0.0
    for name, target in problems:
        for _ in range(20):
            x = rng.standard_normal(target.dim)
            worst_grad = max(
                worst_grad, rel_err(fd_gradient(target.log_density, x), target.gradient(x))
            )
            worst_hess = max(
                worst_hess, rel_err(fd_jacobian(target.gradient, x), target.hessian(x))
            )
    report(
        10,
        "derivative oracles",
        f"worst gradient rel err {worst_grad:.2e} (tol 1e-5), "
        f"worst hessian rel err {worst_hess:.2e} (tol 1e-4)",
    )
    assert worst_grad < 1e-5
    assert worst_hess < 1e-4


def test_criterion_11_stability_traces():
    """Inner-loop log-density drift stays bounded over 10k bounces at step
    0.1: no growth beyond 10x the early-window amplitude (floor 1e-8)."""
    t0 = time.perf_counter()
    targets = {
        "lg-U": {"target": "lg", "a": 5.0, "dim": 25, "scales": "U"},
        "lg-L": {"target": "lg", "a": 5.0, "dim": 25, "scales": "L"},
        "gauss-U": {"target": "gauss", "dim": 25, "scales": "U"},
        "gauss-L": {"target": "gauss", "dim": 25, "scales": "L"},
    }
    from hughop.targets import make_target

    lines = []
    for name, spec in targets.items():
        result = stability_experiment(make_target(spec), step=0.1, steps=10_000, seed=2111)
        delta = result["delta"]
        assert delta.size == 10_000 and np.all(np.isfinite(delta))
        early = np.max(np.abs(delta[:100]))
        late = np.max(np.abs(delta))
        lines.append(f"{name}: early {early:.2e}, overall {late:.2e}")
        assert late <= max(10.0 * early, 1e-8), f"{name}: log-density drift"
        assert not result["diverged"]
    elapsed = time.perf_counter() - t0
    report(11, "stability traces", "; ".join(lines) + f", {elapsed:.1f}s")
    assert elapsed < 120.0


def test_criterion_12_ess_estimator():
    """AR(1) with rho=0.5: ESS within 10 percent of n/3; white noise within
    5 percent of n (n = 100k)."""
    rng = np.random.default_rng(2112)
    n = 100_000
    noise = rng.standard_normal(n)
    ar = np.empty(n)
    ar[0] = noise[0]
    for i in range(1, n):
        ar[i] = 0.5 * ar[i - 1] + np.sqrt(0.75) * noise[i]
    ess_ar = ess(ar)
    white = rng.standard_normal(n)
    ess_white = ess(white)
    report(
        12,
        "ESS estimator",
        f"AR(1): {ess_ar:.0f} vs {n / 3:.0f}; white noise: {ess_white:.0f} vs {n}",
    )
    assert abs(ess_ar - n / 3.0) <= 0.10 * (n / 3.0)
    assert abs(ess_white - n) <= 0.05 * n

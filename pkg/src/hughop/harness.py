"""Config-driven experiment harness.

Builds targets and kernels from declarative specs, runs (possibly composite)
chains, grid-tunes kernel parameters on short pilot runs, and reproduces the
desk-scale versions of the benchmarking procedures: the hug efficiency sweep,
inner-loop stability traces, the hop dimension-scaling table, and the
limiting-acceptance check for hop on random-precision Gaussians.

Randomness policy: every entry point takes a single master seed; independent
pieces of work (grid cells, replicates) draw their generators from
``np.random.SeedSequence(seed).spawn(...)`` in declaration order, so results
are reproducible and cells are independent.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dataclass_field
from itertools import product
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from . import __version__
from .baselines import HmcKernel, HmcParams, MalaKernel, MalaParams, RwmKernel, RwmParams
from .diagnostics import RunSummary, Trace, summarize_run
from .exceptions import (
    ConfigError,
    DegenerateSeriesError,
    NonFiniteInputError,
    TrajectoryError,
)
from .hop import HopKernel, HopParams, default_lam
from .hug import HugKernel, HugParams, hug_trajectory
from .state import ChainState
from .targets import TargetModel, make_target

__all__ = [
    "ExperimentConfig",
    "make_kernel",
    "run_chain",
    "run_kernels",
    "grid_tune",
    "TuneResult",
    "hug_efficiency_experiment",
    "stability_experiment",
    "hop_scaling_experiment",
    "theorem2_experiment",
    "write_trace_csv",
    "append_summary",
]


# ---------------------------------------------------------------------------
# Kernel registry
# ---------------------------------------------------------------------------


def _hug_from_spec(spec: dict, where: str) -> HugKernel:
    kwargs = dict(
        total_time=float(spec.pop("T", 1.0)),
        n_bounces=int(spec.pop("B", 10)),
        mode=str(spec.pop("mode", "plain")),
        eps=float(spec.pop("eps", 1e-6)),
        velocity=str(spec.pop("velocity", "local")),
    )
    if "precond_cov" in spec:
        kwargs["precond_cov"] = np.asarray(spec.pop("precond_cov"), dtype=float)
    if "zero_grad_tol" in spec:
        kwargs["zero_grad_tol"] = float(spec.pop("zero_grad_tol"))
    try:
        return HugKernel(HugParams(**kwargs))
    except ValueError as exc:
        raise ConfigError(where, str(exc))


def _hop_from_spec(spec: dict, where: str, dim: int | None) -> HopKernel:
    lam = spec.pop("lambda", spec.pop("lam", None))
    if lam is None:
        lam = default_lam(dim) if dim else 1.0
    kwargs = dict(
        lam=float(lam),
        use_hessian=bool(spec.pop("hessian", spec.pop("use_hessian", False))),
        eps=float(spec.pop("eps", 1e-6)),
        guard=str(spec.pop("guard", "plus1")),
    )
    if "mu" in spec:
        kwargs["mu"] = float(spec.pop("mu"))
    else:
        kwargs["kappa"] = float(spec.pop("kappa", 0.5))
    try:
        return HopKernel(HopParams(**kwargs))
    except ValueError as exc:
        raise ConfigError(where, str(exc))


def make_kernel(spec: dict, dim: int | None = None, where: str = "kernel"):
    """Build a kernel from a config mapping like ``{"kernel": "hug", ...}``."""
    spec = dict(spec)
    try:
        name = str(spec.pop("kernel")).lower()
    except KeyError:
        raise ConfigError(where, "missing 'kernel' name entry")
    try:
        if name == "hug":
            built = _hug_from_spec(spec, where)
        elif name == "hop":
            built = _hop_from_spec(spec, where, dim)
        elif name == "hmc":
            mass = spec.pop("mass_matrix", None)
            built = HmcKernel(
                HmcParams(
                    n_steps=int(spec.pop("L", 10)),
                    step_size=float(spec.pop("step_size", spec.pop("delta", 0.1))),
                    mass_matrix=None if mass is None else np.asarray(mass, dtype=float),
                )
            )
        elif name == "rwm":
            cov = spec.pop("cov", None)
            built = RwmKernel(
                RwmParams(
                    step_scale=float(spec.pop("step_scale", 1.0)),
                    local_cov=str(spec.pop("local_cov", "none")),
                    cov=None if cov is None else np.asarray(cov, dtype=float),
                    eps=float(spec.pop("eps", 1e-6)),
                )
            )
        elif name == "mala":
            built = MalaKernel(MalaParams(step_scale=float(spec.pop("step_scale", 0.5))))
        else:
            raise ConfigError(where, f"unknown kernel {name!r}")
    except ValueError as exc:
        raise ConfigError(where, str(exc))
    if spec:
        raise ConfigError(where, f"unknown parameters for kernel {name!r}: {sorted(spec)}")
    return built


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Declarative description of one chain run (plus an optional grid).

    ``kernels`` are applied in order within each iteration; one full sweep
    counts as one iteration.  ``grid`` maps dotted paths into the config
    (e.g. ``"kernels.1.lambda"``) to lists of values for :func:`grid_tune`.
    """

    target: dict
    kernels: list
    iterations: int
    burn_in: int = 0
    thin: int = 1
    seed: int = 0
    record: str = "full"  # "full" records positions, "logpi" only the log-density
    init: object = "auto"  # "auto" | "zero" | explicit vector
    out: str | None = None
    grid: dict | None = None
    pilot_iterations: int = 10_000
    pilot_burn_fraction: float = 0.2
    objective: str = "ess_per_second"

    def __post_init__(self):
        if not isinstance(self.target, dict):
            raise ConfigError("target", "must be a mapping")
        if not isinstance(self.kernels, (list, tuple)) or not self.kernels:
            raise ConfigError("kernels", "must be a nonempty list of kernel specs")
        if int(self.iterations) < 1:
            raise ConfigError("iterations", "must be a positive integer")
        if int(self.burn_in) < 0:
            raise ConfigError("burn_in", "must be nonnegative")
        if int(self.thin) < 1:
            raise ConfigError("thin", "must be a positive integer")
        if self.record not in ("full", "logpi"):
            raise ConfigError("record", "must be 'full' or 'logpi'")
        if int(self.pilot_iterations) < 1:
            raise ConfigError("pilot_iterations", "must be positive")
        if not 0.0 <= float(self.pilot_burn_fraction) < 1.0:
            raise ConfigError("pilot_burn_fraction", "must lie in [0, 1)")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        unknown = set(raw) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        missing = [k for k in ("target", "kernels", "iterations") if k not in raw]
        if missing:
            raise ConfigError(missing[0], "required key is missing")
        return cls(**raw)

    def to_dict(self) -> dict:
        return {
            "target": dict(self.target),
            "kernels": [dict(k) for k in self.kernels],
            "iterations": int(self.iterations),
            "burn_in": int(self.burn_in),
            "thin": int(self.thin),
            "seed": int(self.seed),
            "record": self.record,
            "init": self.init if isinstance(self.init, str) else list(self.init),
            "out": self.out,
            "grid": self.grid,
            "pilot_iterations": int(self.pilot_iterations),
            "pilot_burn_fraction": float(self.pilot_burn_fraction),
            "objective": self.objective,
        }

    def build_target(self) -> TargetModel:
        try:
            return make_target(self.target)
        except (ValueError, TypeError) as exc:
            raise ConfigError("target", str(exc))

    def build_kernels(self, dim: int):
        return [
            make_kernel(spec, dim=dim, where=f"kernels[{i}]")
            for i, spec in enumerate(self.kernels)
        ]


def _initial_position(target: TargetModel, init, rng: np.random.Generator) -> np.ndarray:
    if isinstance(init, str):
        if init == "zero":
            return np.zeros(target.dim)
        if init == "auto":
            # an exact draw where possible, otherwise a scale-aware Gaussian
            # draw: deterministic mode starts can sit exactly on a zero
            # gradient, which hop's guarded proposal cannot escape
            if target.has_exact_sampler:
                return target.sample_exact(rng, 1)[0]
            scales = getattr(target, "scales", None)
            draw = rng.standard_normal(target.dim)
            return draw * scales if scales is not None else draw
        if init == "exact":
            return target.sample_exact(rng, 1)[0]
        raise ConfigError("init", f"unknown init mode {init!r}")
    x0 = np.asarray(init, dtype=float)
    if x0.shape != (target.dim,):
        raise ConfigError("init", f"expected length {target.dim}, got shape {x0.shape}")
    return x0


def _kernel_labels(kernels) -> list[str]:
    labels = []
    for kernel in kernels:
        label = kernel.name
        if label in labels:
            label = f"{label}{sum(l.startswith(kernel.name) for l in labels) + 1}"
        labels.append(label)
    return labels


def run_kernels(
    target: TargetModel,
    kernels,
    iterations: int,
    rng: np.random.Generator,
    burn_in: int = 0,
    thin: int = 1,
    record: str = "full",
    init="auto",
) -> tuple[Trace, RunSummary]:
    """Run a kernel sweep chain against an already-built target.

    This is the engine behind :func:`run_chain`; it also serves targets that
    are not registry-constructible (the statistical models).
    """
    labels = _kernel_labels(kernels)
    state = ChainState.at(target, _initial_position(target, init, rng))

    iterations = int(iterations)
    burn_in = int(burn_in)
    thin = int(thin)
    n_recorded = max(0, (iterations - burn_in + thin - 1) // thin)
    record_positions = record == "full"

    log_target = np.empty(n_recorded)
    positions = np.empty((n_recorded, target.dim)) if record_positions else None
    accept = {label: np.zeros(n_recorded, dtype=bool) for label in labels}

    start = time.perf_counter()
    row = 0
    for it in range(iterations):
        flags = []
        for kernel in kernels:
            state, outcome = kernel.step(target, state, rng)
            flags.append(outcome.accepted)
        if it >= burn_in and (it - burn_in) % thin == 0:
            log_target[row] = state.logp
            if record_positions:
                positions[row] = state.position
            for label, flag in zip(labels, flags):
                accept[label][row] = flag
            row += 1
    wall_time = time.perf_counter() - start

    trace = Trace(
        log_target=log_target[:row],
        positions=None if positions is None else positions[:row],
        accept={k: v[:row] for k, v in accept.items()},
        wall_time=wall_time,
        burn_in_fraction=burn_in / iterations if iterations else 0.0,
        thin=thin,
    )
    return trace, summarize_run(trace)


def run_chain(config: ExperimentConfig) -> tuple[Trace, RunSummary]:
    """Run the configured chain and summarise it.

    The kernels are applied in order within each iteration; burn-in sweeps
    are discarded, then every ``thin``-th iteration is recorded.  Identical
    configs (including the seed) produce identical traces.
    """
    target = config.build_target()
    kernels = config.build_kernels(target.dim)
    rng = np.random.default_rng(config.seed)
    trace, summary = run_kernels(
        target,
        kernels,
        iterations=config.iterations,
        rng=rng,
        burn_in=config.burn_in,
        thin=config.thin,
        record=config.record,
        init=config.init,
    )
    if config.out:
        out_dir = Path(config.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_trace_csv(out_dir / "trace.csv", trace, config)
        append_summary(out_dir / "results.jsonl", summary, config)
    return trace, summary


# ---------------------------------------------------------------------------
# Grid tuning
# ---------------------------------------------------------------------------


def _set_by_path(tree: dict, path: str, value) -> None:
    keys = path.split(".")
    node = tree
    for key in keys[:-1]:
        node = node[int(key)] if isinstance(node, list) else node[key]
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


OBJECTIVES = ("ess_per_second", "ess_per_iteration")


def _objective_value(summary: RunSummary, objective) -> float:
    if callable(objective):
        return float(objective(summary))
    if objective == "ess_per_second":
        a, b = summary.min_ess_x_per_sec, summary.ess_logpi_per_sec
    elif objective == "ess_per_iteration":
        a, b = summary.min_ess_x_per_1000, summary.ess_logpi_per_1000
    else:
        raise ConfigError("objective", f"unknown objective {objective!r}")
    if a is None or b is None or not (np.isfinite(a) and np.isfinite(b)):
        return np.nan
    return float(np.sqrt(a * b))


@dataclass
class TuneResult:
    """Outcome of a grid tune: the winning cell and the full table."""

    best: dict
    best_score: float
    table: list[dict] = dataclass_field(default_factory=list)
    objective: str = "ess_per_second"


def grid_tune(config: ExperimentConfig, objective=None) -> TuneResult:
    """Score every grid cell with a pilot run and return the argmax.

    Each cell overrides the configured kernel parameters via its dotted
    paths, runs ``pilot_iterations`` sweeps (with ``pilot_burn_fraction``
    discarded) on its own spawned RNG stream, and is ranked by the declared
    objective: the geometric mean of min ESS(X) and ESS(log pi), per second
    by default or per iteration.  Degenerate cells score NaN and are kept in
    the table with their failure notes.
    """
    if not config.grid:
        raise ConfigError("grid", "grid_tune needs a nonempty grid")
    objective = objective if objective is not None else config.objective
    if not callable(objective) and objective not in OBJECTIVES:
        raise ConfigError("objective", f"unknown objective {objective!r}")

    paths = list(config.grid.keys())
    value_lists = [config.grid[p] for p in paths]
    if any(len(v) == 0 for v in value_lists):
        raise ConfigError("grid", "grid value lists must be nonempty")

    seeds = np.random.SeedSequence(config.seed).spawn(int(np.prod([len(v) for v in value_lists])))
    table: list[dict] = []
    best = None
    best_score = -np.inf

    for cell_index, combo in enumerate(product(*value_lists)):
        cell_cfg = config.to_dict()
        for path, value in zip(paths, combo):
            try:
                _set_by_path(cell_cfg, path, value)
            except (KeyError, IndexError, ValueError):
                raise ConfigError("grid", f"path {path!r} does not resolve in the config")
        cell_cfg.update(
            iterations=int(config.pilot_iterations),
            burn_in=int(config.pilot_iterations * config.pilot_burn_fraction),
            grid=None,
            out=None,
            seed=None,
        )
        cell_cfg.pop("seed")
        cell = ExperimentConfig.from_dict({**cell_cfg, "seed": 0})
        cell.seed = seeds[cell_index]  # SeedSequence accepted by default_rng

        row = {path: value for path, value in zip(paths, combo)}
        try:
            _, summary = run_chain(cell)
            score = _objective_value(summary, objective)
            row.update(
                score=score,
                min_ess_x=summary.min_ess_x,
                ess_logpi=summary.ess_logpi,
                min_ess_x_per_1000=summary.min_ess_x_per_1000,
                ess_logpi_per_1000=summary.ess_logpi_per_1000,
                wall_time=summary.wall_time,
                acceptance=summary.acceptance,
                note="; ".join(summary.notes),
            )
        except (DegenerateSeriesError, ValueError) as exc:
            score = np.nan
            row.update(score=score, note=str(exc))
        table.append(row)
        if np.isfinite(score) and score > best_score:
            best_score = score
            best = {path: value for path, value in zip(paths, combo)}

    if best is None:
        failures = "; ".join(
            f"{ {p: r.get(p) for p in paths} }: {r.get('note', 'NaN score')}" for r in table
        )
        raise ConfigError("grid", f"all grid cells degenerate: {failures}")
    name = objective.__name__ if callable(objective) else objective
    return TuneResult(best=best, best_score=best_score, table=table, objective=name)


# ---------------------------------------------------------------------------
# Experiment procedures
# ---------------------------------------------------------------------------


def hug_efficiency_experiment(
    target: TargetModel,
    n_bounces_grid,
    total_time_grid,
    n_reps: int,
    seed: int = 0,
    mode: str = "plain",
    eps: float = 1e-6,
) -> list[dict]:
    """Proposal-quality sweep over (bounce count, integration time).

    For every grid cell, draws ``n_reps`` exact target samples, applies one
    hug proposal to each, and records the acceptance probability ``alpha``
    and the squared jump distance.  The efficiency column is
    mean(alpha * ||x' - x||^2) / (dim * n_bounces): acceptance-weighted
    squared movement per unit of gradient work.
    """
    if not target.has_exact_sampler:
        raise ValueError(f"{target.name}: hug efficiency sweep needs exact sampling")
    rows = []
    seeds = np.random.SeedSequence(seed).spawn(len(n_bounces_grid) * len(total_time_grid))
    cell = 0
    for n_bounces in n_bounces_grid:
        for total_time in total_time_grid:
            rng = np.random.default_rng(seeds[cell])
            cell += 1
            # isotropic velocities keep the acceptance a pure log-density
            # difference in every mode
            params = HugParams(
                total_time=float(total_time),
                n_bounces=int(n_bounces),
                mode=mode,
                eps=eps,
                velocity="isotropic",
            )
            alphas = np.empty(n_reps)
            sq_jumps = np.empty(n_reps)
            starts = target.sample_exact(rng, n_reps)
            for i in range(n_reps):
                x0 = starts[i]
                v0 = rng.standard_normal(target.dim)
                try:
                    traj = hug_trajectory(target, x0, v0, params)
                    log_alpha = (
                        target.log_density(traj.x)
                        - 0.5 * float(traj.v @ traj.v)
                        - target.log_density(x0)
                        + 0.5 * float(v0 @ v0)
                    )
                    alphas[i] = np.exp(min(0.0, log_alpha))
                    sq_jumps[i] = float(np.sum((traj.x - x0) ** 2))
                except (TrajectoryError, NonFiniteInputError):
                    alphas[i] = 0.0
                    sq_jumps[i] = 0.0
            rows.append(
                {
                    "n_bounces": int(n_bounces),
                    "total_time": float(total_time),
                    "mean_alpha": float(np.mean(alphas)),
                    "efficiency": float(np.mean(alphas * sq_jumps) / (target.dim * n_bounces)),
                    "n_reps": int(n_reps),
                }
            )
    return rows


def stability_experiment(
    target: TargetModel,
    step: float,
    steps: int,
    seed: int = 0,
    x0=None,
    divergence_threshold: float = 1e8,
) -> dict:
    """Track the log-density drift of the raw bounce loop, no accept/reject.

    Returns the per-bounce drift ``delta[b] = l(x_b) - l(x_0)`` for
    b = 1..steps, plus a divergence flag when |delta| crosses the threshold
    (recorded, not fatal) and the index where the loop lost finiteness, if
    it did.
    """
    rng = np.random.default_rng(seed)
    if x0 is None:
        x0 = (
            target.sample_exact(rng, 1)[0]
            if target.has_exact_sampler
            else np.zeros(target.dim)
        )
    x = np.asarray(x0, dtype=float).copy()
    v = rng.standard_normal(target.dim)
    logp0 = target.log_density(x)
    params = HugParams(total_time=step, n_bounces=1)

    deltas = np.full(steps, np.nan)
    diverged = False
    failed_at = None
    recorded = 0
    for b in range(steps):
        try:
            traj = hug_trajectory(target, x, v, params)
        except (TrajectoryError, NonFiniteInputError):
            failed_at = b
            break
        x, v = traj.x, traj.v
        with np.errstate(over="ignore", invalid="ignore"):
            deltas[b] = target.log_density(x) - logp0
        recorded = b + 1
        if np.isfinite(deltas[b]) and abs(deltas[b]) > divergence_threshold:
            diverged = True
    return {
        "delta": deltas[:recorded],
        "diverged": diverged,
        "failed_at": failed_at,
        "step": float(step),
    }


def hop_scaling_experiment(
    target_template: dict,
    dims,
    lam_grid,
    kappa_grid,
    iterations: int,
    seed: int = 0,
    burn_fraction: float = 0.2,
) -> list[dict]:
    """ESS(log pi) of hop-only chains over (dim, lambda, kappa).

    ``target_template`` is a target spec without the ``dim`` entry.  Returns
    one row per cell; degenerate cells carry a note instead of an ESS.
    """
    rows = []
    combos = list(product(dims, lam_grid, kappa_grid))
    seeds = np.random.SeedSequence(seed).spawn(len(combos))
    for cell_index, (dim, lam, kappa) in enumerate(combos):
        config = ExperimentConfig(
            target={**target_template, "dim": int(dim)},
            kernels=[{"kernel": "hop", "lambda": float(lam), "kappa": float(kappa)}],
            iterations=int(iterations),
            burn_in=int(iterations * burn_fraction),
            record="logpi",
            seed=0,
        )
        config.seed = seeds[cell_index]
        row = {"dim": int(dim), "lambda": float(lam), "kappa": float(kappa)}
        try:
            _, summary = run_chain(config)
            row.update(
                ess_logpi=summary.ess_logpi,
                ess_logpi_per_1000=summary.ess_logpi_per_1000,
                acceptance=summary.acceptance.get("hop"),
                note="; ".join(summary.notes),
            )
        except (DegenerateSeriesError, ValueError) as exc:
            row.update(ess_logpi=np.nan, ess_logpi_per_1000=np.nan, note=str(exc))
        rows.append(row)
    return rows


def theorem2_experiment(
    precision_law,
    dim: int,
    lam: float,
    kappa: float,
    iterations: int,
    seed: int = 0,
) -> dict:
    """Mean hop acceptance under fresh stationary draws vs. its 2 Phi(-kappa/2) limit.

    The target is a centred Gaussian whose per-component precisions are drawn
    once from ``precision_law`` (a spec like ``{"dist": "uniform", "low":
    0.5, "high": 5.0}`` or a callable ``(rng, dim) -> array``).  Every
    iteration draws a fresh exact sample, proposes one raw-guard hop, and
    averages the acceptance probability, so the estimate targets the exact
    expectation under the stationary law rather than a chain average.
    """
    rng = np.random.default_rng(seed)
    if callable(precision_law):
        precisions = np.asarray(precision_law(rng, dim), dtype=float)
    else:
        law = dict(precision_law)
        dist = law.pop("dist", "uniform")
        if dist != "uniform":
            raise ConfigError("precision_law", f"unsupported distribution {dist!r}")
        precisions = rng.uniform(law.get("low", 0.5), law.get("high", 5.0), size=dim)
    if np.any(precisions <= 0):
        raise ConfigError("precision_law", "precisions must be positive")

    params = HopParams(lam=float(lam), kappa=float(kappa), guard="raw")
    mu = params.mu
    sd = 1.0 / np.sqrt(precisions)

    # Vectorised over iterations: all draws are independent. x ~ N(0, P^-1),
    # g = -P x, the jump is s [mu z + (lam - mu) ghat (ghat . z)].
    x = rng.standard_normal((iterations, dim)) * sd
    z = rng.standard_normal((iterations, dim))
    g_x = -precisions * x
    gx_norm = np.linalg.norm(g_x, axis=1, keepdims=True)
    ghat = g_x / gx_norm
    jump = (mu * z + (params.lam - mu) * ghat * np.sum(ghat * z, axis=1, keepdims=True)) / gx_norm
    y = x + jump
    g_y = -precisions * y

    def _logq(w, g):
        # rowwise version of the raw-guard hop log-density (constants kept)
        gn2 = np.sum(g * g, axis=1)
        dot = np.sum(w * g, axis=1)
        wn2 = np.sum(w * w, axis=1)
        quad = (wn2 / mu**2 + (1.0 / params.lam**2 - 1.0 / mu**2) * dot * dot / gn2) * gn2
        log_det = -dim * np.log(gn2) + 2.0 * np.log(params.lam) + 2.0 * (dim - 1) * np.log(mu)
        return -0.5 * quad - 0.5 * log_det

    delta_logpi = -0.5 * np.sum((y * y - x * x) * precisions, axis=1)
    log_r = delta_logpi + _logq(x - y, g_y) - _logq(y - x, g_x)
    alphas = np.exp(np.minimum(0.0, log_r))
    limit = 2.0 * ndtr(-kappa / 2.0)
    return {
        "dim": int(dim),
        "lambda": float(lam),
        "kappa": float(kappa),
        "iterations": int(iterations),
        "mean_acceptance": float(np.mean(alphas)),
        "limit": float(limit),
        "abs_error": float(abs(np.mean(alphas) - limit)),
    }


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------


def _config_header(config) -> str:
    resolved = config.to_dict() if isinstance(config, ExperimentConfig) else dict(config)
    return (
        f"# hughop {__version__}\n"
        f"# config: {json.dumps(resolved, sort_keys=True, default=str)}\n"
    )


def write_trace_csv(path, trace: Trace, config) -> None:
    """Write a trace as delimited text with a config-embedding header.

    Columns: iteration, x1..xd (when recorded), logpi, then one accept flag
    per kernel.  Identical configs produce byte-identical files.
    """
    path = Path(path)
    labels = sorted(trace.accept.keys())
    columns = ["iteration"]
    if trace.positions is not None:
        columns += [f"x{j + 1}" for j in range(trace.positions.shape[1])]
    columns += ["logpi"] + [f"accept_{label}" for label in labels]
    with path.open("w") as handle:
        handle.write(_config_header(config))
        handle.write(",".join(columns) + "\n")
        n = trace.n_recorded
        for i in range(n):
            fields = [str(i)]
            if trace.positions is not None:
                fields += [f"{v:.17g}" for v in trace.positions[i]]
            fields.append(f"{trace.log_target[i]:.17g}")
            fields += [str(int(trace.accept[label][i])) for label in labels]
            handle.write(",".join(fields) + "\n")


def append_summary(path, summary: RunSummary, config) -> None:
    """Append one JSON summary record (with the resolved config) to a results file."""
    path = Path(path)
    record = {
        "version": __version__,
        "config": config.to_dict() if isinstance(config, ExperimentConfig) else dict(config),
        "summary": summary.to_dict(),
    }
    with path.open("a") as handle:
        handle.write(json.dumps(record, sort_keys=True, default=str) + "\n")


def write_rows_csv(path, rows: list[dict], config=None) -> None:
    """Write a list of homogeneous dict rows as CSV (config header optional)."""
    path = Path(path)
    if not rows:
        raise ValueError("no rows to write")
    columns = list(rows[0].keys())
    with path.open("w") as handle:
        if config is not None:
            handle.write(_config_header(config))
        handle.write(",".join(columns) + "\n")
        for row in rows:
            handle.write(",".join(_format_cell(row.get(c)) for c in columns) + "\n")


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True).replace(",", ";")
    return str(value)

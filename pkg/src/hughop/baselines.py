"""Reference kernels: HMC with a leapfrog integrator, random-walk
Metropolis (optionally with a local Hessian covariance), and MALA."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .exceptions import FactorizationError, NonFiniteInputError, TrajectoryError
from .metric import factor, local_covariance
from .state import ChainState, StepOutcome, metropolis_accept
from .targets import TargetModel

__all__ = [
    "HmcParams",
    "RwmParams",
    "MalaParams",
    "leapfrog",
    "hmc_step",
    "rwm_step",
    "mala_step",
    "HmcKernel",
    "RwmKernel",
    "MalaKernel",
]

logger = logging.getLogger(__name__)


def _as_mass_matrix(mass, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (M, lower Cholesky of M); accepts None, a diagonal, or a matrix."""
    if mass is None:
        eye = np.eye(dim)
        return eye, eye
    m = np.asarray(mass, dtype=float)
    if m.ndim == 1:
        if m.size != dim or np.any(m <= 0):
            raise ValueError("diagonal mass matrix must be positive with matching length")
        return np.diag(m), np.diag(np.sqrt(m))
    if m.shape != (dim, dim):
        raise ValueError(f"mass matrix must be {dim}x{dim}")
    try:
        return m, np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"mass matrix is not positive definite: {exc}") from exc


@dataclass(frozen=True)
class HmcParams:
    """Leapfrog steps, step size and mass matrix; trajectory time is n_steps * step_size."""

    n_steps: int
    step_size: float
    mass_matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.n_steps < 0 or int(self.n_steps) != self.n_steps:
            raise ValueError("n_steps must be a nonnegative integer")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")


@dataclass(frozen=True)
class RwmParams:
    """Random-walk proposal scale with an optional local covariance.

    ``local_cov`` is ``"none"`` (isotropic), ``"fixed"`` (covariance ``cov``)
    or ``"hessian"`` (local covariance from the Hessian, floor ``eps``).
    """

    step_scale: float
    local_cov: str = "none"
    cov: np.ndarray | None = None
    eps: float = 1e-6

    def __post_init__(self):
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")
        if self.local_cov not in ("none", "fixed", "hessian"):
            raise ValueError("local_cov must be 'none', 'fixed' or 'hessian'")
        if self.local_cov == "fixed" and self.cov is None:
            raise ValueError("local_cov='fixed' requires cov")


@dataclass(frozen=True)
class MalaParams:
    """Langevin proposal scale."""

    step_scale: float

    def __post_init__(self):
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")


def leapfrog(
    target: TargetModel,
    x: np.ndarray,
    p: np.ndarray,
    params: HmcParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Run n_steps of the half-kick / drift / half-kick integrator.

    Momenta follow p ~ N(0, M) with kinetic energy p' M^-1 p / 2, so the
    drift is x += step_size * M^-1 p.

    Raises:
        TrajectoryError: on a non-finite state, identifying the step index.
    """
    x = np.asarray(x, dtype=float).copy()
    p = np.asarray(p, dtype=float).copy()
    mass, _ = _as_mass_matrix(params.mass_matrix, x.size)
    solve = (lambda q: q) if params.mass_matrix is None else (
        lambda q: np.linalg.solve(mass, q)
    )
    delta = params.step_size
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        g = target.gradient(x)
        for step in range(params.n_steps):
            p_half = p + 0.5 * delta * g
            x = x + delta * solve(p_half)
            if not np.all(np.isfinite(x)):
                raise TrajectoryError("non-finite position in leapfrog", step)
            g = target.gradient(x)
            if not np.all(np.isfinite(g)):
                raise TrajectoryError("non-finite gradient in leapfrog", step)
            p = p_half + 0.5 * delta * g
            if not np.all(np.isfinite(p)):
                raise TrajectoryError("non-finite momentum in leapfrog", step)
    return x, p


def hmc_step(
    target: TargetModel,
    state: ChainState,
    params: HmcParams,
    rng: np.random.Generator,
) -> tuple[ChainState, StepOutcome]:
    """One HMC move: sample momentum, integrate, accept on the energy error."""
    x = state.position
    mass, chol = _as_mass_matrix(params.mass_matrix, x.size)
    z = rng.standard_normal(x.size)
    p0 = chol @ z
    kinetic0 = 0.5 * float(z @ z)  # p0' M^-1 p0 / 2 computed in whitened form

    log_alpha = -np.inf
    proposal = x.copy()
    y_logp = None
    energy_error = np.nan
    try:
        y, p1 = leapfrog(target, x, p0, params)
        with np.errstate(over="ignore", invalid="ignore"):
            y_logp = target.log_density(y)
            if params.mass_matrix is None:
                kinetic1 = 0.5 * float(p1 @ p1)
            else:
                kinetic1 = 0.5 * float(p1 @ np.linalg.solve(mass, p1))
        energy_error = (y_logp - kinetic1) - (state.logp - kinetic0)
        proposal = y
        log_alpha = min(0.0, energy_error) if np.isfinite(energy_error) else -np.inf
    except (TrajectoryError, NonFiniteInputError) as exc:
        logger.warning("hmc: trajectory rejected (%s)", exc)

    accepted = metropolis_accept(rng, log_alpha)
    if accepted and y_logp is not None and np.isfinite(y_logp):
        new_state = ChainState(position=proposal, logp=float(y_logp))
    else:
        accepted = False
        new_state = state
    outcome = StepOutcome(
        proposal=proposal,
        log_alpha=log_alpha,
        accepted=accepted,
        extras={"energy_error": energy_error},
    )
    return new_state, outcome


def rwm_step(
    target: TargetModel,
    state: ChainState,
    params: RwmParams,
    rng: np.random.Generator,
) -> tuple[ChainState, StepOutcome]:
    """One random-walk move, with the generic Hastings correction when the
    proposal covariance depends on position."""
    x = state.position
    s = params.step_scale
    z = rng.standard_normal(x.size)
    log_alpha = -np.inf
    y = x.copy()
    y_logp = None

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        try:
            if params.local_cov == "none":
                y = x + s * z
                correction = 0.0
            elif params.local_cov == "fixed":
                a0 = factor(np.asarray(params.cov, dtype=float))
                y = x + s * (a0.T @ z)
                correction = 0.0
            else:
                metric_x = local_covariance(target.hessian(x), params.eps)
                y = x + s * metric_x.unwhiten(z)
                metric_y = local_covariance(target.hessian(y), params.eps)
                # log q(x|y) - log q(y|x); the -d log s terms cancel
                fwd = -0.5 * metric_x.quad_inv(y - x) / s**2 - 0.5 * metric_x.log_det
                rev = -0.5 * metric_y.quad_inv(x - y) / s**2 - 0.5 * metric_y.log_det
                correction = rev - fwd
            y_logp = target.log_density(y)
            if np.isfinite(y_logp):
                raw = y_logp - state.logp + correction
                log_alpha = min(0.0, raw) if np.isfinite(raw) else -np.inf
        except (FactorizationError, NonFiniteInputError) as exc:
            logger.warning("rwm: proposal rejected (%s)", exc)

    accepted = metropolis_accept(rng, log_alpha)
    if accepted and y_logp is not None and np.isfinite(y_logp):
        new_state = ChainState(position=y, logp=float(y_logp))
    else:
        accepted = False
        new_state = state
    return new_state, StepOutcome(proposal=y, log_alpha=log_alpha, accepted=accepted)


def mala_step(
    target: TargetModel,
    state: ChainState,
    params: MalaParams,
    rng: np.random.Generator,
) -> tuple[ChainState, StepOutcome]:
    """One Langevin move y ~ N(x + s^2 g(x)/2, s^2 I) with the asymmetric
    drift corrected in the ratio."""
    x = state.position
    g_x = state.ensure_grad(target)
    s = params.step_scale
    log_alpha = -np.inf
    y_logp = None
    y_grad = None

    with np.errstate(over="ignore", invalid="ignore"):
        mean_fwd = x + 0.5 * s**2 * g_x
        y = mean_fwd + s * rng.standard_normal(x.size)
        if np.all(np.isfinite(y)):
            y_logp = target.log_density(y)
            y_grad = target.gradient(y)
            if np.isfinite(y_logp) and np.all(np.isfinite(y_grad)):
                mean_rev = y + 0.5 * s**2 * y_grad
                fwd = -0.5 * float(np.sum((y - mean_fwd) ** 2)) / s**2
                rev = -0.5 * float(np.sum((x - mean_rev) ** 2)) / s**2
                raw = y_logp - state.logp + rev - fwd
                log_alpha = min(0.0, raw) if np.isfinite(raw) else -np.inf
        else:
            logger.warning("mala: non-finite drift; rejecting")

    accepted = metropolis_accept(rng, log_alpha)
    if accepted and y_logp is not None and np.isfinite(y_logp):
        new_state = ChainState(position=y, logp=float(y_logp), grad=y_grad)
    else:
        accepted = False
        new_state = state
    return new_state, StepOutcome(
        proposal=y if np.all(np.isfinite(y)) else x.copy(),
        log_alpha=log_alpha,
        accepted=accepted,
    )


class HmcKernel:
    name = "hmc"

    def __init__(self, params: HmcParams):
        self.params = params

    def step(self, target, state, rng):
        return hmc_step(target, state, self.params, rng)


class RwmKernel:
    name = "rwm"

    def __init__(self, params: RwmParams):
        self.params = params

    def step(self, target, state, rng):
        return rwm_step(target, state, self.params, rng)


class MalaKernel:
    name = "mala"

    def __init__(self, params: MalaParams):
        self.params = params

    def step(self, target, state, rng):
        return mala_step(target, state, self.params, rng)

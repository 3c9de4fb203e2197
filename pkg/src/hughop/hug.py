"""The contour-hugging kernel.

A velocity is repeatedly bounced off the hyperplane tangent to the local
gradient while the position drifts in half-steps, so the proposal travels a
long way while staying close to one contour of the log-density.  Because the
inner loop is an exact involution under velocity flip and every sub-move has
unit Jacobian, a simple two-point Metropolis correction makes the kernel
exact.

Three bounce modes are provided:

* ``plain``: reflections in the Euclidean metric, velocity drawn N(0, I).
* ``precond``: a fixed covariance reshapes both the velocity draw and the
  reflections.
* ``hessian``: every bounce uses the local covariance built from the Hessian
  at the bounce point, and the velocity is drawn from the local covariance
  at the current state (an isotropic draw is available as an option).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import FactorizationError, NonFiniteInputError, TrajectoryError
from .metric import LocalMetric, factor, local_covariance
from .state import ChainState, StepOutcome, metropolis_accept
from .targets import TargetModel

__all__ = [
    "HugParams",
    "HugOutcome",
    "HugTrajectory",
    "reflect",
    "reflect_in_metric",
    "hug_trajectory",
    "hug_kernel_step",
    "HugKernel",
]

logger = logging.getLogger(__name__)

MODES = ("plain", "precond", "hessian")


@dataclass(frozen=True)
class HugParams:
    """Tuning parameters for the hug kernel.

    Attributes:
        total_time: trajectory duration; the proposal travels roughly
            ``total_time * ||v||``.
        n_bounces: number of bounce steps; the step size is
            ``total_time / n_bounces`` (plain division).
        mode: one of ``plain``, ``precond``, ``hessian``.
        precond_cov: fixed SPD covariance, required in ``precond`` mode.
        eps: regularisation floor for the local metric (``hessian`` mode).
        velocity: ``local`` draws the velocity from the local covariance,
            ``isotropic`` from N(0, I) (``hessian`` mode only).
        zero_grad_tol: gradient norms at or below this leave the velocity
            unreflected, keeping the bounce map an involution where the
            reflection direction is undefined.
        record_bounces: store every bounce point in the outcome.
    """

    total_time: float
    n_bounces: int
    mode: str = "plain"
    precond_cov: np.ndarray | None = None
    eps: float = 1e-6
    velocity: str = "local"
    zero_grad_tol: float = 1e-12
    record_bounces: bool = False

    def __post_init__(self):
        if self.total_time < 0:
            raise ValueError("total_time must be nonnegative")
        if self.n_bounces < 1 or int(self.n_bounces) != self.n_bounces:
            raise ValueError("n_bounces must be a positive integer")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "precond":
            if self.precond_cov is None:
                raise ValueError("precond mode requires precond_cov")
            cov = np.asarray(self.precond_cov, dtype=float)
            if np.max(np.abs(cov - cov.T)) > 1e-10:
                raise ValueError("precond_cov must be symmetric")
            object.__setattr__(self, "precond_cov", cov)
        if self.velocity not in ("local", "isotropic"):
            raise ValueError("velocity must be 'local' or 'isotropic'")

    @property
    def step(self) -> float:
        return self.total_time / self.n_bounces


@dataclass
class HugOutcome(StepOutcome):
    """Hug step result; optionally carries the bounce points."""

    proposed_velocity: np.ndarray | None = None
    bounces: list | None = None
    zero_grad_bounces: int = 0


@dataclass
class HugTrajectory:
    """Endpoint of the deterministic bounce trajectory."""

    x: np.ndarray
    v: np.ndarray
    bounces: list | None = None
    zero_grad_bounces: int = 0


def reflect(v: np.ndarray, g: np.ndarray, zero_grad_tol: float = 1e-12) -> np.ndarray:
    """Reflect ``v`` in the hyperplane orthogonal to ``g``.

    Returns v - 2 (v . ghat) ghat with ghat the unit gradient.  A gradient
    norm at or below ``zero_grad_tol`` returns ``v`` unchanged.
    """
    v = np.asarray(v, dtype=float)
    g = np.asarray(g, dtype=float)
    if v.shape != g.shape:
        raise ValueError(f"shape mismatch: v {v.shape} vs g {g.shape}")
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(g))):
        raise NonFiniteInputError("reflect: non-finite input")
    norm_g = np.linalg.norm(g)
    if norm_g <= zero_grad_tol:
        return v.copy()
    ghat = g / norm_g
    return v - 2.0 * (v @ ghat) * ghat


def reflect_in_metric(
    v: np.ndarray,
    g: np.ndarray,
    sigma: np.ndarray,
    zero_grad_tol: float = 1e-12,
) -> np.ndarray:
    """Reflection reshaped by an SPD covariance: v - 2 (v.g)/(g' S g) S g.

    Equivalent to whitening with any factor of ``sigma``, reflecting, and
    mapping back.  A quadratic form g' S g at or below ``zero_grad_tol``
    falls back to the identity.
    """
    v = np.asarray(v, dtype=float)
    g = np.asarray(g, dtype=float)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(g))):
        raise NonFiniteInputError("reflect_in_metric: non-finite input")
    sg = sigma @ g
    denom = g @ sg
    if not np.isfinite(denom) or denom <= zero_grad_tol:
        return v.copy()
    return v - (2.0 * (v @ g) / denom) * sg


def hug_trajectory(
    target: TargetModel,
    x0: np.ndarray,
    v0: np.ndarray,
    params: HugParams,
) -> HugTrajectory:
    """Run the deterministic inner loop: half-step, bounce, half-step.

    The map (x0, v0) -> (xB, vB) has unit Jacobian and is skew-reversible:
    rerunning it from (xB, -vB) returns (x0, -v0) exactly.

    Raises:
        TrajectoryError: when an intermediate state becomes non-finite; the
            error identifies the failing bounce index.
    """
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    if params.total_time == 0.0:
        return HugTrajectory(x=x, v=v, bounces=[] if params.record_bounces else None)
    half = 0.5 * params.step
    bounces = [] if params.record_bounces else None
    zero_grad = 0

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for b in range(params.n_bounces):
            x_mid = x + half * v
            if not np.all(np.isfinite(x_mid)):
                raise TrajectoryError("non-finite bounce point", b)
            g = target.gradient(x_mid)
            if not np.all(np.isfinite(g)):
                raise TrajectoryError("non-finite gradient at bounce point", b)
            if np.linalg.norm(g) <= params.zero_grad_tol:
                zero_grad += 1
            if params.mode == "plain":
                v = reflect(v, g, params.zero_grad_tol)
            elif params.mode == "precond":
                v = reflect_in_metric(v, g, params.precond_cov, params.zero_grad_tol)
            else:
                metric = local_covariance(target.hessian(x_mid), params.eps)
                v = reflect_in_metric(v, g, metric.sigma, params.zero_grad_tol)
            if not np.all(np.isfinite(v)):
                raise TrajectoryError("non-finite velocity after bounce", b)
            x = x_mid + half * v
            if bounces is not None:
                bounces.append(x_mid)

    if not np.all(np.isfinite(x)):
        raise TrajectoryError("non-finite final position", params.n_bounces - 1)
    return HugTrajectory(x=x, v=v, bounces=bounces, zero_grad_bounces=zero_grad)


def _draw_velocity(
    target: TargetModel,
    x0: np.ndarray,
    params: HugParams,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, LocalMetric | None, np.ndarray | None]:
    """Sample v0 ~ q(.|x0) and return (v0, log q(v0|x0), metric, chol of cov).

    The returned log-density drops the dimension constant, which cancels in
    the acceptance ratio.
    """
    d = x0.size
    z = rng.standard_normal(d)
    if params.mode == "plain" or (params.mode == "hessian" and params.velocity == "isotropic"):
        return z, -0.5 * float(z @ z), None, None
    if params.mode == "precond":
        a0 = factor(params.precond_cov)
        return a0.T @ z, -0.5 * float(z @ z), None, a0
    metric = local_covariance(target.hessian(x0), params.eps)
    v0 = metric.unwhiten(z)
    logq = -0.5 * float(z @ z) - 0.5 * metric.log_det
    return v0, logq, metric, None


def _velocity_log_density(
    target: TargetModel,
    x: np.ndarray,
    v: np.ndarray,
    params: HugParams,
    a0: np.ndarray | None,
) -> float:
    """log q(v|x) under the mode's velocity distribution (constants dropped)."""
    if params.mode == "plain" or (params.mode == "hessian" and params.velocity == "isotropic"):
        return -0.5 * float(v @ v)
    if params.mode == "precond":
        w = np.linalg.solve(a0.T, v)
        return -0.5 * float(w @ w)
    metric = local_covariance(target.hessian(x), params.eps)
    return -0.5 * metric.quad_inv(v) - 0.5 * metric.log_det


def hug_kernel_step(
    target: TargetModel,
    state: ChainState,
    params: HugParams,
    rng: np.random.Generator,
) -> tuple[ChainState, HugOutcome]:
    """One Metropolis-corrected hug move from ``state``.

    The acceptance ratio compares log-density plus velocity log-density at
    both endpoints; in hessian mode the velocity density includes the
    position-dependent log-determinant.  Numerical failures during the
    trajectory are treated as log alpha = -inf: the failure set is symmetric
    under the skew-reversal, so rejecting preserves detailed balance.
    """
    x0 = state.position
    log_alpha = -np.inf
    traj = None
    proposal_logp = None

    try:
        v0, logq0, _, a0 = _draw_velocity(target, x0, params, rng)
    except FactorizationError:
        logger.warning("hug: velocity draw failed at current state; rejecting")
        v0 = None

    if v0 is not None:
        try:
            traj = hug_trajectory(target, x0, v0, params)
            with np.errstate(over="ignore", invalid="ignore"):
                proposal_logp = target.log_density(traj.x)
                logq_end = _velocity_log_density(target, traj.x, traj.v, params, a0)
            raw = (proposal_logp + logq_end) - (state.logp + logq0)
            log_alpha = min(0.0, raw) if np.isfinite(raw) else -np.inf
        except (TrajectoryError, FactorizationError, NonFiniteInputError) as exc:
            logger.warning("hug: trajectory rejected (%s)", exc)
            traj = None

    accepted = metropolis_accept(rng, log_alpha)
    if accepted and traj is not None and np.isfinite(proposal_logp):
        new_state = ChainState(position=traj.x, logp=proposal_logp)
    else:
        accepted = False
        new_state = state

    outcome = HugOutcome(
        proposal=traj.x if traj is not None else x0.copy(),
        log_alpha=log_alpha,
        accepted=accepted,
        proposed_velocity=traj.v if traj is not None else None,
        bounces=traj.bounces if traj is not None else None,
        zero_grad_bounces=traj.zero_grad_bounces if traj is not None else 0,
    )
    return new_state, outcome


class HugKernel:
    """Stateless wrapper binding :func:`hug_kernel_step` to fixed params."""

    name = "hug"

    def __init__(self, params: HugParams):
        self.params = params

    def step(self, target, state, rng):
        return hug_kernel_step(target, state, self.params, rng)

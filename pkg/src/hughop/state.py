"""Chain state and step outcome containers shared by all kernels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .targets import TargetModel

__all__ = ["ChainState", "StepOutcome"]


@dataclass
class ChainState:
    """Current position with cached log-density and (lazily) its gradient.

    Kernels read the caches instead of re-evaluating the target; the gradient
    is filled in on first use so gradient-free kernels never pay for it.
    """

    position: np.ndarray
    logp: float
    grad: np.ndarray | None = None

    @classmethod
    def at(cls, target: TargetModel, x, with_grad: bool = False) -> "ChainState":
        x = np.asarray(x, dtype=float)
        state = cls(position=x, logp=target.log_density(x))
        if with_grad:
            state.grad = target.gradient(x)
        return state

    def ensure_grad(self, target: TargetModel) -> np.ndarray:
        if self.grad is None:
            self.grad = target.gradient(self.position)
        return self.grad

    @property
    def dim(self) -> int:
        return self.position.size


@dataclass
class StepOutcome:
    """Result of one Metropolis-Hastings kernel application.

    ``log_alpha`` is the log acceptance probability, capped at zero.
    """

    proposal: np.ndarray
    log_alpha: float
    accepted: bool
    extras: dict = field(default_factory=dict)

    @property
    def alpha(self) -> float:
        """Acceptance probability min(1, r)."""
        return float(np.exp(self.log_alpha))


def metropolis_accept(rng: np.random.Generator, log_alpha: float) -> bool:
    """Single accept/reject decision; always consumes one uniform draw."""
    u = rng.random()
    if log_alpha >= 0.0:
        return True
    if np.isnan(log_alpha) or log_alpha == -np.inf:
        return False
    if u == 0.0:
        return True
    return np.log(u) < log_alpha

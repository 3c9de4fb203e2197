"""Position-dependent covariance built from the local Hessian.

When the negative Hessian is safely positive definite the local covariance
is its inverse; otherwise curvature magnitudes are kept through a spectral
regularisation so the result is always usable as a proposal covariance.
The factor ``A`` satisfies A' A = Sigma, which is the only property the
reflection and whitening algebra relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import FactorizationError, NonFiniteInputError

__all__ = ["LocalMetric", "local_covariance", "factor"]

# eigenvalue magnitudes below this are clamped before inversion so that
# inflection points do not overflow
EIG_FLOOR = 1e-12


@dataclass
class LocalMetric:
    """A local covariance, a matrix square root of it, and its log-det.

    Attributes:
        sigma: d x d symmetric positive-definite covariance.
        a: d x d factor with a.T @ a == sigma.
        log_det: log determinant of sigma.
        eps: regularisation floor used to build sigma.
        regularized: True when the spectral-regularisation branch was taken.
    """

    sigma: np.ndarray
    a: np.ndarray
    log_det: float
    eps: float
    regularized: bool = False
    _at_inv: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    def whiten(self, v: np.ndarray) -> np.ndarray:
        """Map v to (A^T)^-1 v, the coordinates in which sigma is identity."""
        if self._at_inv is None:
            self._at_inv = np.linalg.inv(self.a.T)
        return self._at_inv @ v

    def unwhiten(self, w: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`whiten`: returns A^T w."""
        return self.a.T @ w

    def quad_inv(self, v: np.ndarray) -> float:
        """Quadratic form v' sigma^-1 v."""
        w = self.whiten(v)
        return float(w @ w)


def factor(sigma: np.ndarray, method: str = "cholesky") -> np.ndarray:
    """A matrix square root A of ``sigma`` with A.T @ A == sigma.

    ``method="cholesky"`` returns the transpose of the lower Cholesky factor
    (so A is upper triangular); ``method="spectral"`` returns the symmetric
    eigenvalue square root.  Either choice is valid anywhere a factor is
    needed: the algebra downstream only uses A.T @ A.
    """
    sigma = np.asarray(sigma, dtype=float)
    if method == "cholesky":
        try:
            return np.linalg.cholesky(sigma).T
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(f"covariance is not positive definite: {exc}") from exc
    if method == "spectral":
        eigvals, eigvecs = np.linalg.eigh(sigma)
        if eigvals[0] <= 0:
            raise FactorizationError(
                "covariance is not positive definite", detail=float(eigvals[0])
            )
        return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    raise ValueError(f"unknown factor method {method!r}")


def local_covariance(
    hess: np.ndarray,
    eps: float = 1e-6,
    factor_method: str = "cholesky",
) -> LocalMetric:
    """Local covariance derived from a log-density Hessian.

    If every eigenvalue of ``-hess`` exceeds ``eps`` the covariance is the
    exact inverse (-hess)^-1.  Otherwise each Hessian eigenvalue lambda is
    replaced by 1/max(|lambda|, floor) + eps on the same eigenbasis, which
    keeps the curvature scale per principal direction while guaranteeing
    positive definiteness.  No continuity across the branch switch is
    claimed; Metropolis corrections remain exact regardless.

    Args:
        hess: symmetric d x d Hessian of the log-density.
        eps: positive regularisation floor.
        factor_method: passed through to :func:`factor`.

    Raises:
        FactorizationError: if ``hess`` is not symmetric to 1e-8 or contains
            non-finite entries.
    """
    hess = np.asarray(hess, dtype=float)
    if hess.ndim != 2 or hess.shape[0] != hess.shape[1]:
        raise FactorizationError(f"Hessian must be square, got shape {hess.shape}")
    if not np.all(np.isfinite(hess)):
        raise NonFiniteInputError("Hessian contains non-finite entries")
    if eps <= 0:
        raise ValueError("eps must be positive")
    asym = np.max(np.abs(hess - hess.T)) if hess.size else 0.0
    if asym > 1e-8:
        raise FactorizationError(f"Hessian is not symmetric (asymmetry {asym:.3e})")

    sym = 0.5 * (hess + hess.T)
    eigvals, eigvecs = np.linalg.eigh(sym)

    if eigvals[-1] < -eps:  # -H strictly positive definite with margin eps
        sigma_eigs = 1.0 / (-eigvals)
        regularized = False
    else:
        sigma_eigs = 1.0 / np.maximum(np.abs(eigvals), EIG_FLOOR) + eps
        regularized = True

    sigma = (eigvecs * sigma_eigs) @ eigvecs.T
    sigma = 0.5 * (sigma + sigma.T)
    log_det = float(np.sum(np.log(sigma_eigs)))
    a = factor(sigma, method=factor_method)
    return LocalMetric(sigma=sigma, a=a, log_det=log_det, eps=eps, regularized=regularized)

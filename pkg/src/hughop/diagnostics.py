"""Effective sample size estimation and run summaries.

The primary estimator is Geyer's initial monotone positive sequence: the
integrated autocorrelation time is built from consecutive-lag pairs of
empirical autocorrelations, truncated at the first nonpositive pair and
forced nonincreasing.  A batch-means estimator is kept alongside as a
cross-check.  ESS values are clamped to [1, n]; a nonpositive estimated
autocorrelation time (an antithetic series) clamps to n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len

from .exceptions import DegenerateSeriesError

__all__ = ["ess", "ess_batch_means", "Trace", "RunSummary", "summarize_run"]

MIN_SERIES_LENGTH = 100


def _check_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if x.size < MIN_SERIES_LENGTH:
        raise DegenerateSeriesError(
            f"series too short for ESS: {x.size} < {MIN_SERIES_LENGTH}"
        )
    if not np.all(np.isfinite(x)):
        raise DegenerateSeriesError("series contains non-finite values")
    if np.max(x) == np.min(x):
        raise DegenerateSeriesError("series has zero variance")
    return x


def _autocorrelations(x: np.ndarray) -> np.ndarray:
    """Empirical autocorrelations rho_0..rho_{n-1} via FFT."""
    n = x.size
    centred = x - x.mean()
    m = next_fast_len(2 * n)
    f = np.fft.rfft(centred, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n]
    return acov / acov[0]


def ess(series) -> float:
    """Effective sample size n / (1 + 2 sum rho_k) with monotone truncation.

    Args:
        series: scalar chain values, length >= 100 and non-constant.

    Returns:
        Estimated ESS, clamped to [1, n].
    """
    x = _check_series(series)
    n = x.size
    rho = _autocorrelations(x)

    n_pairs = n // 2
    pair_sums = rho[0 : 2 * n_pairs : 2] + rho[1 : 2 * n_pairs : 2]
    tau = -1.0
    running_min = np.inf
    for gamma in pair_sums:
        if gamma <= 0.0:
            break
        running_min = min(running_min, gamma)
        tau += 2.0 * running_min
    if tau <= 0.0:
        return float(n)
    return float(np.clip(n / tau, 1.0, n))


def ess_batch_means(series, n_batches: int = 50) -> float:
    """Batch-means ESS: n Var(x) / (batch_size Var(batch means))."""
    x = _check_series(series)
    n = x.size
    if n_batches < 2 or n // n_batches < 2:
        raise DegenerateSeriesError("too few observations per batch")
    batch_size = n // n_batches
    trimmed = x[: n_batches * batch_size].reshape(n_batches, batch_size)
    means = trimmed.mean(axis=1)
    var_means = means.var(ddof=1)
    var_x = x.var(ddof=1)
    if var_means == 0.0:
        return float(n)
    tau = batch_size * var_means / var_x
    return float(np.clip(n / tau, 1.0, n))


@dataclass
class Trace:
    """Recorded output of one chain run.

    ``positions`` may be None when a run records only the log-density
    (memory-saving mode).  ``accept`` maps kernel labels to per-iteration
    acceptance flags.
    """

    log_target: np.ndarray
    positions: np.ndarray | None = None
    accept: dict[str, np.ndarray] = field(default_factory=dict)
    wall_time: float = 0.0
    burn_in_fraction: float = 0.0
    thin: int = 1

    @property
    def n_recorded(self) -> int:
        return int(np.asarray(self.log_target).size)


@dataclass
class RunSummary:
    """Per-run efficiency record: ESS, acceptance rates, timings."""

    iterations: int
    wall_time: float
    acceptance: dict[str, float]
    min_ess_x: float | None
    ess_x: list[float] | None
    ess_logpi: float | None
    burn_in_fraction: float
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def min_ess_x_per_1000(self) -> float | None:
        if self.min_ess_x is None:
            return None
        return 1000.0 * self.min_ess_x / self.iterations

    @property
    def ess_logpi_per_1000(self) -> float | None:
        if self.ess_logpi is None:
            return None
        return 1000.0 * self.ess_logpi / self.iterations

    @property
    def min_ess_x_per_sec(self) -> float | None:
        if self.min_ess_x is None or self.wall_time <= 0:
            return None
        return self.min_ess_x / self.wall_time

    @property
    def ess_logpi_per_sec(self) -> float | None:
        if self.ess_logpi is None or self.wall_time <= 0:
            return None
        return self.ess_logpi / self.wall_time

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "wall_time": self.wall_time,
            "acceptance": {k: v for k, v in self.acceptance.items()},
            "min_ess_x": self.min_ess_x,
            "ess_x": self.ess_x,
            "ess_logpi": self.ess_logpi,
            "min_ess_x_per_1000": self.min_ess_x_per_1000,
            "ess_logpi_per_1000": self.ess_logpi_per_1000,
            "min_ess_x_per_sec": self.min_ess_x_per_sec,
            "ess_logpi_per_sec": self.ess_logpi_per_sec,
            "burn_in_fraction": self.burn_in_fraction,
            "degenerate": self.degenerate,
            "notes": list(self.notes),
        }


def summarize_run(trace: Trace) -> RunSummary:
    """Compute the efficiency summary for a recorded trace.

    Degenerate series (an all-reject chain, a constant component) set the
    ``degenerate`` flag and leave the affected entries as None instead of
    raising.  ESS values refer to the recorded (post burn-in, thinned)
    iterations.
    """
    n = trace.n_recorded
    if n == 0:
        raise ValueError("empty trace")

    acceptance = {
        name: float(np.mean(flags)) for name, flags in trace.accept.items()
    }
    notes: list[str] = []
    degenerate = False

    ess_logpi = None
    try:
        ess_logpi = ess(trace.log_target)
    except DegenerateSeriesError as exc:
        degenerate = True
        notes.append(f"log-target series degenerate: {exc}")

    ess_x = None
    min_ess_x = None
    if trace.positions is not None:
        ess_x = []
        for j in range(trace.positions.shape[1]):
            try:
                ess_x.append(ess(trace.positions[:, j]))
            except DegenerateSeriesError as exc:
                degenerate = True
                notes.append(f"component {j} degenerate: {exc}")
                ess_x.append(np.nan)
        finite = [v for v in ess_x if np.isfinite(v)]
        min_ess_x = float(min(finite)) if finite else None

    return RunSummary(
        iterations=n * max(1, int(trace.thin)),
        wall_time=trace.wall_time,
        acceptance=acceptance,
        min_ess_x=min_ess_x,
        ess_x=ess_x,
        ess_logpi=ess_logpi,
        burn_in_fraction=trace.burn_in_fraction,
        degenerate=degenerate,
        notes=notes,
    )

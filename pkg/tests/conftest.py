"""Shared oracles and helpers for the test-suite."""

import numpy as np
import pytest


def fd_gradient(f, x, step=None):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = step if step is not None else 1e-5 * (1.0 + np.linalg.norm(x))
    grad = np.zeros_like(x)
    for i in range(x.size):
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (f(up) - f(down)) / (2.0 * h)
    return grad


def fd_jacobian(f, x, step=None):
    """Central finite-difference Jacobian of a vector function."""
    x = np.asarray(x, dtype=float)
    h = step if step is not None else 1e-5 * (1.0 + np.linalg.norm(x))
    cols = []
    for i in range(x.size):
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        cols.append((np.asarray(f(up)) - np.asarray(f(down))) / (2.0 * h))
    return np.column_stack(cols)


def rel_err(approx, exact):
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    return np.max(np.abs(approx - exact)) / (1.0 + np.max(np.abs(exact)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

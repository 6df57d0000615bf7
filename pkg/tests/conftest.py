"""Shared fixtures: the expensive reference solves are session-scoped so
unit tests and acceptance criteria reuse them instead of re-integrating."""

import numpy as np
import pytest

from blowup_lab.pde import ModelParams, solve_to_blowup


@pytest.fixture(scope="session")
def solve_fine():
    """Reference solve at alpha=1, epsilon=0.001 (the singularity-track and
    profile parameter point)."""
    params = ModelParams(alpha=1.0, epsilon=0.001)
    traj, rep = solve_to_blowup(params)
    return params, traj, rep


@pytest.fixture(scope="session")
def solve_mid():
    """Reference solve at alpha=1, epsilon=0.01 (the coefficient-decay
    parameter point)."""
    params = ModelParams(alpha=1.0, epsilon=0.01)
    traj, rep = solve_to_blowup(params)
    return params, traj, rep


@pytest.fixture(scope="session")
def solve_small():
    """Reference solve at alpha=0.25, epsilon=0.1 (the continuation
    parameter point)."""
    params = ModelParams(alpha=0.25, epsilon=0.1)
    traj, rep = solve_to_blowup(params, with_estimates=False)
    return params, traj, rep

"""Shared fixtures: unit-coefficient physics and the smoke problem."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from poromoist.config import build_setup
from poromoist.discretization import Field, Grid
from poromoist.model import PhysicalParams, PowerLawSaturation
from poromoist.stepper import RegularizationParams, State, StepConfig, run

REPO_ROOT = Path(__file__).resolve().parents[1]

UNIT_PHYSICAL = dict(
    sigma=1.0, lam=1.0, kappa1=1.0, kappa2=1.0,
    alpha0=1.0, alpha1=1.0, beta0=1.0, beta1=1.0,
    rho_bar0=1.0, rho_bar1=1.0, theta_bar0=1.0, theta_bar1=1.0,
    t_end=1.0,
)


def make_params(**overrides) -> PhysicalParams:
    return PhysicalParams(**{**UNIT_PHYSICAL, **overrides})


@pytest.fixture(scope="session")
def unit_params() -> PhysicalParams:
    return make_params()


@pytest.fixture(scope="session")
def cubic_model() -> PowerLawSaturation:
    # p_s(1) = 1, so rho = theta = 1 with unit ambients is an equilibrium
    return PowerLawSaturation(c=1.0, q=3.0, eta=1.0)


@pytest.fixture(scope="session")
def smoke_config() -> dict:
    with open(REPO_ROOT / "configs" / "smoke.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def smoke_result(smoke_config):
    setup = build_setup(smoke_config)
    return run(setup.initial, setup.step, setup.reg, setup.params,
               setup.model, setup.grid, t_end=setup.params.t_end)


def equilibrium_state(grid: Grid) -> State:
    ones = np.ones(grid.n)
    return State(Field(ones.copy(), grid), Field(ones.copy(), grid), 0.0)


def run_equilibrium(params, model, n=32, dt=1e-3, steps=100,
                    eps=1e-2, nu=5e-3):
    grid = Grid(n)
    cfg = StepConfig(dt=dt)
    reg = RegularizationParams(eps=eps, nu=nu)
    return run(None, cfg, reg, params, model, grid, t_end=steps * dt,
               initial_state=equilibrium_state(grid), keep_step_records=True)

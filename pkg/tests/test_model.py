"""Material laws: saturation curves, phase change, conductivity, velocity."""
from __future__ import annotations

import numpy as np
import pytest

from poromoist.discretization import Field, Grid
from poromoist.errors import ConfigError, ModelInvalid
from poromoist.model import (ExponentialSaturation, InitialData,
                             PhysicalParams, PowerLawSaturation,
                             SaturationModel, conductivity, darcy_velocity,
                             phase_change_rate, saturation_pressure,
                             validate_saturation_assumptions)
from poromoist.stepper import State
from tests.conftest import UNIT_PHYSICAL, make_params


def test_physical_params_reject_nonpositive_fields():
    with pytest.raises(ConfigError, match="sigma"):
        make_params(sigma=-1.0)
    with pytest.raises(ConfigError, match="beta1"):
        make_params(beta1=0.0)


def test_ambient_min():
    params = make_params(rho_bar0=0.3, theta_bar1=0.2)
    assert params.ambient_min == 0.2


def test_power_law_pressure_values(cubic_model):
    assert saturation_pressure(cubic_model, 2.0) == pytest.approx(8.0)
    assert saturation_pressure(cubic_model, 0.0) == 0.0
    assert saturation_pressure(cubic_model, -3.0) == 0.0
    assert isinstance(saturation_pressure(cubic_model, 1.0), float)
    np.testing.assert_allclose(
        saturation_pressure(cubic_model, np.array([1.0, 2.0, -1.0])),
        [1.0, 8.0, 0.0])


def test_exponential_pressure_values():
    model = ExponentialSaturation(a=2.0, b=1.0)
    assert saturation_pressure(model, 1.0) == pytest.approx(2.0 * np.exp(-1.0))
    assert saturation_pressure(model, 0.0) == 0.0
    assert saturation_pressure(model, -1.0) == 0.0


@pytest.mark.parametrize("make", [
    lambda: PowerLawSaturation(c=0.0, q=3.0),
    lambda: PowerLawSaturation(c=-1.0, q=3.0),
    lambda: PowerLawSaturation(c=1.0, q=1.0),
    lambda: PowerLawSaturation(c=1.0, q=3.0, eta=0.0),
    lambda: ExponentialSaturation(a=0.0, b=1.0),
    lambda: ExponentialSaturation(a=1.0, b=-2.0),
])
def test_saturation_constructor_validation(make):
    with pytest.raises(ConfigError):
        make()


def test_phase_change_rate(cubic_model):
    # rho sqrt(theta) - p_s: 2*2 - 64
    assert phase_change_rate(2.0, 4.0, cubic_model) == pytest.approx(-60.0)
    assert phase_change_rate(1.0, 1.0, cubic_model) == 0.0
    assert phase_change_rate(1.0, -1.0, cubic_model) == 0.0
    np.testing.assert_allclose(
        phase_change_rate(np.array([1.0, 2.0]), np.array([1.0, 1.0]),
                          cubic_model), [0.0, 1.0])


def test_conductivity():
    params = make_params(kappa1=1.0, kappa2=3.0)
    assert conductivity(2.0, params) == pytest.approx(13.0)
    np.testing.assert_allclose(conductivity(np.array([0.0, 1.0]), params),
                               [1.0, 4.0])


def test_initial_data_validation():
    good = InitialData(np.ones(4), np.ones(4), theta_floor=0.5)
    assert good.theta_floor == 0.5
    cases = [
        dict(rho0=[-0.1, 1, 1, 1], theta0=[1, 1, 1, 1], theta_floor=0.5),
        dict(rho0=[1, 1, 1, 1], theta0=[0.4, 1, 1, 1], theta_floor=0.5),
        dict(rho0=[1, 1, 1], theta0=[1, 1, 1, 1], theta_floor=0.5),
        dict(rho0=[1, np.nan, 1, 1], theta0=[1, 1, 1, 1], theta_floor=0.5),
        dict(rho0=[1, 1, 1, 1], theta0=[1, 1, 1, 1], theta_floor=0.0),
    ]
    for kwargs in cases:
        with pytest.raises(ConfigError, match="invalid initial data"):
            InitialData(**kwargs)


def test_cubic_curve_passes_both_limits(cubic_model):
    report = validate_saturation_assumptions(cubic_model)
    assert report.passed
    assert report.zero_limit_pass and report.infinity_limit_pass
    # p_s/theta decays toward theta=0, p_s/theta^2 grows toward infinity
    assert report.small_ratios[0] < report.small_ratios[-1]
    assert report.small_ratios[0] < 1e-11
    assert report.large_ratios[-1] > report.large_ratios[0]


def test_subcritical_power_law_fails_growth():
    report = validate_saturation_assumptions(PowerLawSaturation(c=1.0, q=1.5))
    assert report.zero_limit_pass
    assert not report.infinity_limit_pass
    assert not report.passed


def test_exponential_fails_growth_only():
    report = validate_saturation_assumptions(ExponentialSaturation(a=2.0, b=1.0))
    assert report.zero_limit_pass
    assert not report.infinity_limit_pass
    assert report.summary()["passed"] is False


class NegativeCurve(SaturationModel):
    def pressure(self, theta):
        return -np.asarray(theta, dtype=float)


class WigglyCurve(SaturationModel):
    def pressure(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.clip(theta, 0, None) ** 2 * (1.1 + np.sin(3.0 * np.log(
            np.where(theta > 0, theta, 1.0))))


@pytest.mark.parametrize("curve", [NegativeCurve(eta=1.0), WigglyCurve(eta=1.0)])
def test_structurally_invalid_curves_raise(curve):
    with pytest.raises(ModelInvalid):
        validate_saturation_assumptions(curve)


def test_darcy_velocity_interior_and_walls():
    grid = Grid(8)
    rho = Field(np.full(grid.n, 2.0), grid)
    theta = Field(1.0 + grid.centers, grid)
    state = State(rho, theta, 0.0)
    u = darcy_velocity(state)
    # pressure 2(1+x) has slope 2, interior velocity -2, walls default 0
    np.testing.assert_allclose(u.values[1:-1], -2.0, rtol=1e-13)
    assert u.values[0] == 0.0 and u.values[-1] == 0.0

    params = make_params()
    uw = darcy_velocity(state, params=params, s=1.0)
    # left: flux alpha*(trace - ambient) = 1 outward, donor is the trace 2
    assert uw.values[0] == pytest.approx(-0.5)
    # right: outflow q = alpha*(trace - ambient) = 1, donor is the trace 2
    assert uw.values[-1] == pytest.approx(0.5)
    np.testing.assert_allclose(uw.values[1:-1], u.values[1:-1])

"""Certification diagnostics for simulated trajectories.

Every estimate the solver is supposed to respect is checked here by an
independent computation:

* per-step mass balance, exact up to solver roundoff because the vapor
  rows are flux differences that telescope;
* per-step energy balance in conservative form, whose only defect is the
  discrete product-rule commutator (rho jump times theta jump over dt),
  so it shrinks linearly under refinement and vanishes at steady states;
* a growth envelope for the combined mass/heat functional
  integral(lam rho + rho theta + sigma theta) driven by the recorded
  max-temperature history;
* the discrete max-temperature envelope maintained by the stepper;
* entropy integral(rho ln rho) with its gradient dissipation;
* a running fourth-power norm accumulator;
* weak residuals of the unregularized integral identities against a
  basis of space-time test functions.

All checks read the trajectory (and the per-step records the stepper
froze); none of them re-runs the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .discretization import Grid
from .errors import EnvelopeViolation
from .model import PhysicalParams, phase_change_rate, saturation_pressure
from .stepper import PicardReport, RunResult, State, StepRecord, _boundary_traces

__all__ = [
    "DiagnosticsRecord",
    "initial_record",
    "step_record",
    "mass_balance_residual",
    "energy_balance_residual",
    "EnvelopeReport",
    "mass_energy_envelope_check",
    "EntropyReport",
    "entropy_monitor",
    "SpaceShape",
    "default_test_functions",
    "WeakResidualReport",
    "weak_residual",
    "CertificationReport",
    "certify_run",
]

RECORD_FIELDS = (
    "t", "total_mass", "mass_energy", "entropy", "min_rho", "min_theta",
    "max_theta", "mass_balance_residual", "energy_balance_residual",
    "l4_accumulator", "picard_iterations",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Scalar health summary of one time level."""

    t: float
    total_mass: float
    mass_energy: float
    entropy: float
    min_rho: float
    min_theta: float
    max_theta: float
    mass_balance_residual: float
    energy_balance_residual: float
    l4_accumulator: float
    picard_iterations: int


def _entropy_value(rho: np.ndarray, h: float) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(rho > 0, rho * np.log(np.where(rho > 0, rho, 1.0)), 0.0)
    return float(h * np.sum(terms))


def initial_record(state: State, grid: Grid, params: PhysicalParams) -> DiagnosticsRecord:
    rho, theta = state.rho.values, state.theta.values
    h = grid.h
    return DiagnosticsRecord(
        t=state.t,
        total_mass=float(h * np.sum(rho)),
        mass_energy=float(h * np.sum(params.lam * rho + rho * theta + params.sigma * theta)),
        entropy=_entropy_value(rho, h),
        min_rho=float(np.min(rho)),
        min_theta=float(np.min(theta)),
        max_theta=float(np.max(theta)),
        mass_balance_residual=0.0,
        energy_balance_residual=0.0,
        l4_accumulator=0.0,
        picard_iterations=0,
    )


def mass_balance_residual(srec: StepRecord, grid: Grid) -> float:
    """Defect of the summed vapor rows against the wall fluxes.

    The interior rows are exact flux differences, so up to linear-solver
    roundoff this is zero regardless of resolution.
    """
    h = grid.h
    rho_new = srec.new.rho.values
    drho = h * np.sum(rho_new - srec.prev.rho.values) / srec.dt
    reaction = h * srec.s * np.sum(srec.chi_sqrt * rho_new - srec.chi_ps)
    source = h * np.sum(srec.src_rho) if srec.src_rho is not None else 0.0
    boundary = srec.mass_flux[-1] - srec.mass_flux[0]
    return float(abs(drho + reaction - source - boundary))


def energy_balance_residual(srec: StepRecord, grid: Grid, params: PhysicalParams) -> float:
    """Defect of the conservative heat balance over one step.

    Both flux groups telescope exactly, and the frozen reaction terms are
    accounted for verbatim, so the remainder is the time commutator
    sum h (rho_new - rho_prev)(theta_new - theta_prev) / dt.  It is first
    order in dt on smooth runs and vanishes at fixed points.
    """
    h = grid.h
    rho_new, theta_new = srec.new.rho.values, srec.new.theta.values
    rho_prev, theta_prev = srec.prev.rho.values, srec.prev.theta.values
    e_new = h * np.sum(rho_new * theta_new + params.sigma * theta_new)
    e_prev = h * np.sum(rho_prev * theta_prev + params.sigma * theta_prev)

    boundary = (srec.cond_flux_right + srec.mass_flux[-1] * srec.theta_trace_right
                - srec.cond_flux_left - srec.mass_flux[0] * srec.theta_trace_left)
    gamma = rho_new * srec.chi_sqrt - srec.chi_ps
    lag_defect = srec.s * ((params.lam + theta_new) * srec.chi_ps
                           - (params.lam + srec.theta_iter) * srec.ps_iter)
    interior = h * np.sum(srec.s * params.lam * gamma + lag_defect)
    source = 0.0
    if srec.src_theta is not None:
        source += h * np.sum(srec.src_theta)
    if srec.src_rho is not None:
        source += h * np.sum(theta_new * srec.src_rho)
    return float(abs((e_new - e_prev) / srec.dt - boundary - interior - source))


def step_record(srec: StepRecord, report: PicardReport, grid: Grid,
                params: PhysicalParams, prev_l4: float) -> DiagnosticsRecord:
    rho, theta = srec.new.rho.values, srec.new.theta.values
    h = grid.h
    return DiagnosticsRecord(
        t=srec.new.t,
        total_mass=float(h * np.sum(rho)),
        mass_energy=float(h * np.sum(params.lam * rho + rho * theta + params.sigma * theta)),
        entropy=_entropy_value(rho, h),
        min_rho=float(np.min(rho)),
        min_theta=float(np.min(theta)),
        max_theta=float(np.max(theta)),
        mass_balance_residual=mass_balance_residual(srec, grid),
        energy_balance_residual=energy_balance_residual(srec, grid, params),
        l4_accumulator=prev_l4 + srec.dt * float(h * np.sum(srec.prev.rho.values**4)),
        picard_iterations=report.iterations,
    )


@dataclass(frozen=True)
class EnvelopeReport:
    """Outcome of the combined mass/heat growth-envelope check."""

    ok: bool
    c_init: float
    c_rate: float
    values: np.ndarray
    bounds: np.ndarray
    first_violation_t: float | None
    min_slack: float


def mass_energy_envelope_check(result: RunResult, tol: float = 1e-9,
                               raise_on_violation: bool = False) -> EnvelopeReport:
    """Check integral(lam rho + rho theta + sigma theta) against its envelope.

    The admissible envelope is an affine functional of the run's own
    max-temperature history: a startup budget built from the initial norms
    plus the ambient exchange capacity over the full horizon, growing at
    rate (alpha1 rho_bar1 + alpha0 rho_bar0) times the running integral of
    max theta.  Everything is computed from the recorded diagnostics.
    """
    p = result.params
    recs = result.records
    values = np.array([r.mass_energy for r in recs])
    max_theta = np.array([r.max_theta for r in recs])
    mass0 = recs[0].total_mass
    theta0_max = recs[0].max_theta
    horizon = max(result.t_end, recs[-1].t)
    c_init = ((p.lam + theta0_max) * mass0 + p.sigma * theta0_max
              + (p.lam * (p.alpha1 * p.rho_bar1 + p.alpha0 * p.rho_bar0)
                 + p.beta1 * p.theta_bar1 + p.beta0 * p.theta_bar0) * horizon)
    c_rate = p.alpha1 * p.rho_bar1 + p.alpha0 * p.rho_bar0
    dt = result.cfg.dt
    integral = np.concatenate(([0.0], np.cumsum(max_theta[:-1]) * dt))
    bounds = c_init + c_rate * integral
    slack = bounds + tol * np.maximum(1.0, np.abs(bounds)) - values
    bad = np.nonzero(slack < 0)[0]
    first_t = float(recs[bad[0]].t) if bad.size else None
    report = EnvelopeReport(bad.size == 0, float(c_init), float(c_rate),
                            values, bounds, first_t, float(np.min(slack)))
    if raise_on_violation and not report.ok:
        raise EnvelopeViolation(
            f"mass/heat functional exceeds its envelope by {-report.min_slack:.3e}",
            t=first_t)
    return report


@dataclass(frozen=True)
class EntropyReport:
    max_entropy: float
    dissipation: float
    series: np.ndarray


def entropy_monitor(result: RunResult) -> EntropyReport:
    """Track integral(rho ln rho) and its gradient dissipation integral.

    The dissipation is the time integral of sum_faces h theta (drho/dx)^2
    evaluated at the end-of-step states; together with the entropy series
    it certifies that the degenerate diffusion keeps doing work.
    """
    h = result.grid.h
    series = np.array([r.entropy for r in result.records])
    dt = result.cfg.dt
    dissipation = 0.0
    for state in result.states[1:]:
        rho, theta = state.rho.values, state.theta.values
        grad = np.diff(rho) / h
        theta_face = 0.5 * (theta[:-1] + theta[1:])
        dissipation += dt * float(h * np.sum(theta_face * grad**2))
    return EntropyReport(float(np.max(series)), dissipation, series)


@dataclass(frozen=True)
class SpaceShape:
    """Spatial test-function factor with its exact derivative."""

    name: str
    value: Callable
    slope: Callable


def default_test_functions() -> tuple[SpaceShape, ...]:
    shapes = [
        SpaceShape("one", lambda x: np.ones_like(x), lambda x: np.zeros_like(x)),
        SpaceShape("x", lambda x: x, lambda x: np.ones_like(x)),
        SpaceShape("1-x", lambda x: 1.0 - x, lambda x: -np.ones_like(x)),
        SpaceShape("x^2", lambda x: x**2, lambda x: 2.0 * x),
        SpaceShape("x^3", lambda x: x**3, lambda x: 3.0 * x**2),
        SpaceShape("x(1-x)", lambda x: x * (1.0 - x), lambda x: 1.0 - 2.0 * x),
    ]
    for k in (1, 2, 3):
        w = k * np.pi
        shapes.append(SpaceShape(f"sin{k}", lambda x, w=w: np.sin(w * x),
                                 lambda x, w=w: w * np.cos(w * x)))
        shapes.append(SpaceShape(f"cos{k}", lambda x, w=w: np.cos(w * x),
                                 lambda x, w=w: -w * np.sin(w * x)))
    return tuple(shapes)


def _time_window(t_end: float) -> tuple[Callable, Callable]:
    """Smooth bump equal to 1 at t=0 and flat-zero at t=t_end."""
    tt = t_end * t_end

    def zeta(t: float) -> float:
        if t >= t_end * (1.0 - 1e-12):
            return 0.0
        return float(np.exp(-t * t / (tt - t * t)))

    def zeta_prime(t: float) -> float:
        if t >= t_end * (1.0 - 1e-12):
            return 0.0
        den = tt - t * t
        return float(-2.0 * t * tt / den**2 * np.exp(-t * t / den))

    return zeta, zeta_prime


@dataclass(frozen=True)
class WeakResidualReport:
    shape_names: tuple
    mass_residuals: np.ndarray
    heat_residuals: np.ndarray

    @property
    def max_mass(self) -> float:
        return float(np.max(np.abs(self.mass_residuals)))

    @property
    def max_heat(self) -> float:
        return float(np.max(np.abs(self.heat_residuals)))


def weak_residual(result: RunResult,
                  shapes: Sequence[SpaceShape] | None = None) -> WeakResidualReport:
    """Test the trajectory against the unregularized integral identities.

    For each test function phi = T(x) zeta(t), with zeta vanishing at the
    final time, the mass identity accumulates

        -int rho phi_t - int rho(0) phi(0) + int flux T'(x) zeta
        - [wall flux * phi] + int gamma phi

    and the heat identity its conservative counterpart, with all fluxes,
    wall exchanges, and the phase-change rate rebuilt from the states with
    no cutoff, no mollifier, and no eps lift.  Midpoint quadrature pairs
    the averaged states with phi_t; everything else is sampled at the end
    of each step, matching the implicit scheme's first-order accuracy.
    Forcing corrections are not included, so use unforced runs.
    """
    if shapes is None:
        shapes = default_test_functions()
    grid, p = result.grid, result.params
    s, model = result.reg.s, result.model
    h, dt = grid.h, result.cfg.dt
    x, xf = grid.centers, grid.faces[1:-1]
    t_final = result.states[-1].t
    zeta, zeta_prime = _time_window(t_final)

    tvals = np.array([sh.value(x) for sh in shapes])           # (m, n)
    tslopes = np.array([sh.slope(xf) for sh in shapes])        # (m, n-1)
    t_left = np.array([float(sh.value(np.array([0.0]))[0]) for sh in shapes])
    t_right = np.array([float(sh.value(np.array([1.0]))[0]) for sh in shapes])

    mass_res = np.zeros(len(shapes))
    heat_res = np.zeros(len(shapes))

    rho0, theta0 = result.states[0].rho.values, result.states[0].theta.values
    e0 = rho0 * theta0 + p.sigma * theta0
    mass_res -= h * (tvals @ rho0) * zeta(0.0)
    heat_res -= h * (tvals @ e0) * zeta(0.0)

    for prev, new in zip(result.states[:-1], result.states[1:]):
        r0, th0 = prev.rho.values, prev.theta.values
        r1, th1 = new.rho.values, new.theta.values
        zp_mid = zeta_prime(prev.t + 0.5 * dt)
        z1 = zeta(new.t)

        mass_res -= dt * h * (tvals @ (0.5 * (r0 + r1))) * zp_mid
        e_mid = 0.5 * ((r0 * th0 + p.sigma * th0) + (r1 * th1 + p.sigma * th1))
        heat_res -= dt * h * (tvals @ e_mid) * zp_mid
        if z1 == 0.0:
            continue

        pressure = r1 * th1
        flux = 0.5 * (r1[:-1] + r1[1:]) * np.diff(pressure) / h
        theta_face = 0.5 * (th1[:-1] + th1[1:])
        kappa_face = p.kappa1 + 0.5 * p.kappa2 * (r1[:-1]**2 + r1[1:]**2)
        heat_flux = flux * theta_face + kappa_face * np.diff(th1) / h

        rho_l, rho_r = _boundary_traces(r1)
        th_l, th_r = _boundary_traces(th1)
        f_left = p.alpha0 * (rho_l - s * p.rho_bar0)
        f_right = p.alpha1 * (s * p.rho_bar1 - rho_r)
        g_left = p.beta0 * (th_l - s * p.theta_bar0)
        g_right = p.beta1 * (s * p.theta_bar1 - th_r)

        gamma = phase_change_rate(r1, th1, model)

        mass_res += dt * z1 * (
            h * (tslopes @ flux)
            - (f_right * t_right - f_left * t_left)
            + h * (tvals @ gamma))
        heat_res += dt * z1 * (
            h * (tslopes @ heat_flux)
            - ((f_right * th_r + g_right) * t_right
               - (f_left * th_l + g_left) * t_left)
            - p.lam * h * (tvals @ gamma))

    return WeakResidualReport(tuple(sh.name for sh in shapes), mass_res, heat_res)


@dataclass(frozen=True)
class CertificationReport:
    """Aggregate verdict over every per-run certification."""

    passed: bool
    failures: tuple
    max_mass_residual: float
    max_energy_residual: float
    envelope: EnvelopeReport
    theta_envelope_ok: bool
    min_rho: float
    min_theta: float
    entropy: EntropyReport

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "failures": list(self.failures),
            "max_mass_residual": self.max_mass_residual,
            "max_energy_residual": self.max_energy_residual,
            "envelope_ok": self.envelope.ok,
            "envelope_min_slack": self.envelope.min_slack,
            "theta_envelope_ok": self.theta_envelope_ok,
            "min_rho": self.min_rho,
            "min_theta": self.min_theta,
            "max_entropy": self.entropy.max_entropy,
            "entropy_dissipation": self.entropy.dissipation,
        }


def certify_run(result: RunResult, mass_tol: float = 1e-10,
                envelope_tol: float = 1e-9) -> CertificationReport:
    """Run every certification that has a sharp expected outcome.

    Mass balance must sit at solver roundoff, both envelopes must hold,
    and the fields must stay in the admissible cone.  The energy residual
    has no universal threshold (it is first order in dt), so it is
    reported but only checked for finiteness.
    """
    failures = []
    recs = result.records
    max_mass = max(r.mass_balance_residual for r in recs)
    max_energy = max(r.energy_balance_residual for r in recs)
    if max_mass > mass_tol:
        failures.append(f"mass balance residual {max_mass:.3e} exceeds {mass_tol:.1e}")
    if not np.isfinite(max_energy):
        failures.append("energy balance residual is not finite")
    envelope = mass_energy_envelope_check(result, tol=envelope_tol)
    if not envelope.ok:
        failures.append(
            f"mass/heat envelope violated at t={envelope.first_violation_t} "
            f"(excess {-envelope.min_slack:.3e})")
    if not result.theta_envelope_ok:
        failures.append("max-temperature envelope violated")
    min_rho = min(r.min_rho for r in recs)
    min_theta = min(r.min_theta for r in recs)
    if min_rho < 0:
        failures.append(f"negative vapor density {min_rho:.3e}")
    if min_theta <= 0:
        failures.append(f"nonpositive temperature {min_theta:.3e}")
    entropy = entropy_monitor(result)
    for name, value in (("entropy", entropy.max_entropy),
                        ("entropy dissipation", entropy.dissipation),
                        ("l4 accumulator", recs[-1].l4_accumulator)):
        if not np.isfinite(value):
            failures.append(f"{name} is not finite")
    return CertificationReport(
        passed=not failures, failures=tuple(failures),
        max_mass_residual=float(max_mass), max_energy_residual=float(max_energy),
        envelope=envelope, theta_envelope_ok=result.theta_envelope_ok,
        min_rho=float(min_rho), min_theta=float(min_theta), entropy=entropy)

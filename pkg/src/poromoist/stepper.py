"""Implicit time stepping for the coupled vapor/heat system.

Each backward-Euler step solves the regularized coupled system

    rho_t - ((eps + m_nu(rho theta)) rho_x)_x - (rho * m_eps(m_eps(rho) theta_x))_x
          + s rho X(sqrt(theta)) = s X(p_s(theta))

    (rho + sigma) theta_t - ((kappa1 + kappa2 m_eps(rho)^2) theta_x)_x
          - F theta_x - s rho X(sqrt(theta)) theta + s (lam + theta) p_s(theta)
          = s lam rho X(sqrt(theta))

where m_mu is the mollifier, X the cutoff at level 1/eps, F the total mass
flux (the expression under the divergence of the vapor equation), and
s in [0, 1] the coupling strength used for continuation.  Robin exchange
conditions close both equations, with ambient values scaled by s.

The two equations are solved alternately inside a per-step fixed-point
loop: coefficients and the lagged saturation term are frozen at the
current iterate, each sweep solves two tridiagonal systems, and the loop
ends when the combined relative update falls below picard_tol.  If the
full-strength problem refuses to converge, the step is retried along a
ramp of s values, warm-starting each stage (homotopy_solve).

Spatial discretization is a conservative finite-volume scheme: the heat
equation's convective face coefficients are literally the vapor
equation's mass fluxes evaluated at the fresh vapor solution, so the
energy carried by convection is consistent with the mass actually moving.
Boundary traces use second-order extrapolation (3 v[0] - v[1]) / 2; a
first-order trace would cap the observable spatial order at one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .discretization import Field, Grid, cutoff, mollify, _mollify_values
from .errors import (
    ConfigError,
    DominanceViolation,
    NonfiniteIterate,
    PicardDivergence,
)
from .linalg import TridiagonalSystem, solve_thomas
from .model import InitialData, PhysicalParams, SaturationModel, saturation_pressure

__all__ = [
    "RegularizationParams",
    "State",
    "StepConfig",
    "PicardReport",
    "Forcing",
    "StepRecord",
    "RunResult",
    "mollified_initial_data",
    "assemble_rho_system",
    "assemble_theta_system",
    "picard_step",
    "homotopy_solve",
    "run",
]

UPDATE_FLOOR = 1e-30


@dataclass(frozen=True)
class RegularizationParams:
    """Cutoff level 1/eps, mollifier radii (eps outer, nu inner), coupling s."""

    eps: float
    nu: float
    s: float = 1.0

    def __post_init__(self):
        if not (0 < self.nu < self.eps <= 1):
            raise ConfigError(
                f"regularization requires 0 < nu < eps <= 1, got eps={self.eps}, nu={self.nu}"
            )
        if not (0 <= self.s <= 1):
            raise ConfigError(f"coupling strength must lie in [0, 1], got {self.s}")

    def validate_against(self, params: PhysicalParams) -> None:
        limit = min(params.ambient_min, 1.0)
        if self.eps > limit:
            raise ConfigError(
                f"eps={self.eps} exceeds min(ambient values, 1) = {limit}; "
                "the cutoff would clip ambient data"
            )


@dataclass(frozen=True)
class State:
    """Nonnegative vapor density and positive temperature at one time."""

    rho: Field
    theta: Field
    t: float

    def __post_init__(self):
        if self.rho.grid != self.theta.grid:
            raise ConfigError("rho and theta live on different grids")
        if np.any(self.rho.values < 0):
            raise ConfigError(f"negative vapor density at t={self.t}")
        if np.any(self.theta.values <= 0):
            raise ConfigError(f"nonpositive temperature at t={self.t}")

    @property
    def grid(self) -> Grid:
        return self.rho.grid


@dataclass(frozen=True)
class StepConfig:
    dt: float
    picard_tol: float = 1e-10
    max_picard: int = 50
    s_ramp_steps: int = 8
    advection: str = "upwind"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.picard_tol > 0:
            raise ConfigError("picard_tol must be positive")
        if self.max_picard < 1 or self.s_ramp_steps < 1:
            raise ConfigError("max_picard and s_ramp_steps must be at least 1")
        if self.advection not in ("upwind", "central"):
            raise ConfigError(
                f"advection must be 'upwind' or 'central', got {self.advection!r}"
            )


@dataclass(frozen=True)
class PicardReport:
    """Trace of the fixed-point solve for one accepted step."""

    iterations: int
    final_update: float
    s_path: tuple
    converged: bool


@dataclass(frozen=True)
class Forcing:
    """Optional manufactured sources and boundary-flux corrections.

    Sources are added to the right-hand sides; flux corrections are added
    to the Robin face fluxes.  Used by the manufactured-solution studies;
    production runs leave everything None.
    """

    rho_source: Callable | None = None
    theta_source: Callable | None = None
    rho_flux_left: Callable | None = None
    rho_flux_right: Callable | None = None
    theta_flux_left: Callable | None = None
    theta_flux_right: Callable | None = None

    def rho_corrections(self, t: float) -> tuple[float, float]:
        g0 = self.rho_flux_left(t) if self.rho_flux_left else 0.0
        g1 = self.rho_flux_right(t) if self.rho_flux_right else 0.0
        return g0, g1

    def theta_corrections(self, t: float) -> tuple[float, float]:
        g0 = self.theta_flux_left(t) if self.theta_flux_left else 0.0
        g1 = self.theta_flux_right(t) if self.theta_flux_right else 0.0
        return g0, g1


@dataclass
class FluxCoefficients:
    """Frozen face data shared by both assemblies within one sweep.

    Interior face j (j = 1..n-1) of the vapor flux is
    F_j = A[j-1] rho[j-1] + B[j-1] rho[j]; dface/vface are the diffusion
    and drift face coefficients, wm/wp the donor weights of the advected
    density.
    """

    dface: np.ndarray
    vface: np.ndarray
    wm: np.ndarray
    wp: np.ndarray
    A: np.ndarray
    B: np.ndarray
    chi_sqrt: np.ndarray
    chi_ps: np.ndarray
    ps_iter: np.ndarray
    theta_iter: np.ndarray


@dataclass
class StepRecord:
    """Everything the balance diagnostics need about one accepted step."""

    prev: State
    new: State
    s: float
    dt: float
    chi_sqrt: np.ndarray
    chi_ps: np.ndarray
    ps_iter: np.ndarray
    theta_iter: np.ndarray
    mass_flux: np.ndarray          # n+1 face values at the accepted solution
    cond_flux_left: float          # conductive wall fluxes at the accepted theta
    cond_flux_right: float
    theta_trace_left: float
    theta_trace_right: float
    src_rho: np.ndarray | None
    src_theta: np.ndarray | None
    coeffs: FluxCoefficients
    kappa_face: np.ndarray


@dataclass
class RunResult:
    """Trajectory plus per-step diagnostics for one simulation."""

    states: list
    records: list
    theta_envelope: list
    theta_envelope_ok: bool
    params: PhysicalParams
    reg: RegularizationParams
    cfg: StepConfig
    grid: Grid
    model: SaturationModel
    t_end: float
    step_records: list = field(default_factory=list)


def mollified_initial_data(data: InitialData, reg: RegularizationParams,
                           grid: Grid) -> State:
    """Smooth the initial samples over radius eps and lift rho by eps.

    The lift keeps the vapor density strictly positive so the degenerate
    diffusion coefficient starts away from zero.
    """
    if data.rho0.shape != (grid.n,):
        raise ConfigError(
            f"initial data has {data.rho0.shape[0]} samples for an n={grid.n} grid"
        )
    rho = _mollify_values(data.rho0, reg.eps, grid.h) + reg.eps
    theta = _mollify_values(data.theta0, reg.eps, grid.h)
    return State(Field(rho, grid), Field(theta, grid), 0.0)


def _cell_gradient(values: np.ndarray, h: float) -> np.ndarray:
    """Centered interior differences with one-sided closures at the walls."""
    g = np.empty_like(values)
    g[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    g[0] = (values[1] - values[0]) / h
    g[-1] = (values[-1] - values[-2]) / h
    return g


def _donor_weights(face_speed: np.ndarray, scheme: str) -> tuple[np.ndarray, np.ndarray]:
    """Face weights (left cell, right cell) of the advected quantity.

    The flux term +V q transports q toward decreasing x when V > 0, so the
    donor cell sits on the right of the face.
    """
    if scheme == "central":
        wp = np.full_like(face_speed, 0.5)
    else:
        wp = np.where(face_speed > 0, 1.0, np.where(face_speed < 0, 0.0, 0.5))
    return 1.0 - wp, wp


def _check_dominance(name: str, lower: np.ndarray, diag: np.ndarray,
                     upper: np.ndarray) -> None:
    off = np.zeros_like(diag)
    off[1:] += np.abs(lower)
    off[:-1] += np.abs(upper)
    margin = np.abs(diag) - off
    worst = int(np.argmin(margin))
    if margin[worst] <= 0:
        raise DominanceViolation(name, worst, float(margin[worst]))


def compute_flux_coefficients(rho_iter: np.ndarray, theta_iter: np.ndarray,
                              reg: RegularizationParams, grid: Grid,
                              model: SaturationModel,
                              scheme: str) -> FluxCoefficients:
    """Freeze the face coefficients and reaction factors at one iterate."""
    h = grid.h
    dcell = _mollify_values(rho_iter * theta_iter, reg.nu, h)
    dface = reg.eps + 0.5 * (dcell[:-1] + dcell[1:])
    rho_sm = _mollify_values(rho_iter, reg.eps, h)
    vcell = _mollify_values(rho_sm * _cell_gradient(theta_iter, h), reg.eps, h)
    vface = 0.5 * (vcell[:-1] + vcell[1:])
    wm, wp = _donor_weights(vface, scheme)
    A = -dface / h + vface * wm
    B = dface / h + vface * wp
    chi_sqrt = cutoff(np.sqrt(np.clip(theta_iter, 0.0, None)), reg.eps)
    ps_iter = saturation_pressure(model, theta_iter)
    chi_ps = cutoff(ps_iter, reg.eps)
    return FluxCoefficients(dface, vface, wm, wp, A, B, chi_sqrt, chi_ps,
                            ps_iter, theta_iter.copy())


def _boundary_traces(values: np.ndarray) -> tuple[float, float]:
    return 1.5 * values[0] - 0.5 * values[1], 1.5 * values[-1] - 0.5 * values[-2]


def assemble_rho_system(prev: State, rho_iter: np.ndarray, theta_iter: np.ndarray,
                        s: float, reg: RegularizationParams, params: PhysicalParams,
                        model: SaturationModel, grid: Grid, dt: float,
                        scheme: str = "upwind", forcing: Forcing | None = None,
                        coeffs: FluxCoefficients | None = None,
                        ) -> tuple[TridiagonalSystem, FluxCoefficients]:
    """Backward-Euler rows for the vapor density with frozen coefficients.

    Interior rows are exact flux differences, so summing the equations
    telescopes to the two wall fluxes; the mass-balance diagnostic relies
    on this.  Wall rows replace the face flux with the Robin exchange
    expression evaluated at the extrapolated trace.
    """
    n, h = grid.n, grid.h
    if coeffs is None:
        coeffs = compute_flux_coefficients(rho_iter, theta_iter, reg, grid, model, scheme)

    diag = 1.0 / dt + s * coeffs.chi_sqrt
    diag = np.array(diag)  # chi_sqrt may broadcast from a scalar cutoff
    diag[:-1] -= coeffs.A / h
    diag[1:] += coeffs.B / h
    upper = -coeffs.B / h
    lower = coeffs.A / h

    rhs = prev.rho.values / dt + s * coeffs.chi_ps
    t_new = prev.t + dt
    src = None
    if forcing is not None and forcing.rho_source is not None:
        src = np.asarray(forcing.rho_source(grid.centers, t_new), dtype=float)
        rhs = rhs + src
    g0, g1 = forcing.rho_corrections(t_new) if forcing else (0.0, 0.0)

    upper = np.array(upper)
    lower = np.array(lower)
    diag[0] += 1.5 * params.alpha0 / h
    upper[0] -= 0.5 * params.alpha0 / h
    diag[-1] += 1.5 * params.alpha1 / h
    lower[-1] -= 0.5 * params.alpha1 / h
    rhs = np.array(rhs)
    rhs[0] += (params.alpha0 * s * params.rho_bar0 - g0) / h
    rhs[-1] += (params.alpha1 * s * params.rho_bar1 + g1) / h

    _check_dominance("vapor", lower, diag, upper)
    return TridiagonalSystem(lower, diag, upper, rhs), coeffs


def evaluate_mass_flux(rho_new: np.ndarray, coeffs: FluxCoefficients, s: float,
                       params: PhysicalParams, grid: Grid,
                       forcing: Forcing | None, t_new: float) -> np.ndarray:
    """All n+1 face values of the vapor flux at the fresh solution.

    Uses exactly the assembled coefficient arrays, so these numbers are the
    fluxes the solved rows actually contained.
    """
    flux = np.empty(grid.n + 1)
    flux[1:-1] = coeffs.A * rho_new[:-1] + coeffs.B * rho_new[1:]
    trace_l, trace_r = _boundary_traces(rho_new)
    g0, g1 = forcing.rho_corrections(t_new) if forcing else (0.0, 0.0)
    flux[0] = params.alpha0 * (trace_l - s * params.rho_bar0) + g0
    flux[-1] = params.alpha1 * (s * params.rho_bar1 - trace_r) + g1
    return flux


def assemble_theta_system(prev: State, rho_new: np.ndarray, theta_iter: np.ndarray,
                          s: float, reg: RegularizationParams, params: PhysicalParams,
                          model: SaturationModel, grid: Grid, dt: float,
                          coeffs: FluxCoefficients, scheme: str = "upwind",
                          forcing: Forcing | None = None,
                          ) -> tuple[TridiagonalSystem, np.ndarray, np.ndarray]:
    """Backward-Euler rows for the temperature given the fresh vapor field.

    The convective term -F theta_x is assembled face by face in the
    product-rule form -(1/h)[F_{j+1}(that_{j+1} - th_i) - F_j(that_j - th_i)]
    so each face carries exactly the vapor mass flux F as its convective
    coefficient; that_j is the donor-weighted face temperature.  The
    saturation sink s (lam + theta) p_s(theta) is lagged at the iterate and
    sits on the right-hand side.

    Returns the system, the face mass-flux array, and the face conductivity.
    """
    n, h = grid.n, grid.h
    t_new = prev.t + dt

    kcell = params.kappa1 + params.kappa2 * _mollify_values(rho_new, reg.eps, h) ** 2
    kface = 0.5 * (kcell[:-1] + kcell[1:])
    mass_flux = evaluate_mass_flux(rho_new, coeffs, s, params, grid, forcing, t_new)
    fint = mass_flux[1:-1]
    um, up = _donor_weights(fint, scheme)

    diag = (rho_new + params.sigma) / dt - s * rho_new * coeffs.chi_sqrt
    diag[:-1] += kface / h**2 + fint * up / h
    diag[1:] += kface / h**2 - fint * um / h
    upper = -kface / h**2 - fint * up / h
    lower = -kface / h**2 + fint * um / h

    rhs = ((rho_new + params.sigma) * prev.theta.values / dt
           + s * params.lam * rho_new * coeffs.chi_sqrt
           - s * (params.lam + theta_iter) * coeffs.ps_iter)
    if forcing is not None and forcing.theta_source is not None:
        rhs = rhs + np.asarray(forcing.theta_source(grid.centers, t_new), dtype=float)

    g0, g1 = forcing.theta_corrections(t_new) if forcing else (0.0, 0.0)
    diag[0] += 1.5 * params.beta0 / h + 0.5 * mass_flux[0] / h
    upper[0] += -0.5 * params.beta0 / h - 0.5 * mass_flux[0] / h
    diag[-1] += 1.5 * params.beta1 / h - 0.5 * mass_flux[-1] / h
    lower[-1] += -0.5 * params.beta1 / h + 0.5 * mass_flux[-1] / h
    rhs[0] += (params.beta0 * s * params.theta_bar0 - g0) / h
    rhs[-1] += (params.beta1 * s * params.theta_bar1 + g1) / h

    _check_dominance("heat", lower, diag, upper)
    return TridiagonalSystem(lower, diag, upper, rhs), mass_flux, kface


def _build_record(prev: State, rho_new: np.ndarray, theta_new: np.ndarray,
                  s: float, dt: float, coeffs: FluxCoefficients,
                  mass_flux: np.ndarray, kface: np.ndarray,
                  params: PhysicalParams, grid: Grid,
                  forcing: Forcing | None) -> StepRecord:
    t_new = prev.t + dt
    gth0, gth1 = forcing.theta_corrections(t_new) if forcing else (0.0, 0.0)
    th_l, th_r = _boundary_traces(theta_new)
    cond_l = params.beta0 * (th_l - s * params.theta_bar0) + gth0
    cond_r = params.beta1 * (s * params.theta_bar1 - th_r) + gth1
    src_rho = src_theta = None
    if forcing is not None:
        if forcing.rho_source is not None:
            src_rho = np.asarray(forcing.rho_source(grid.centers, t_new), dtype=float)
        if forcing.theta_source is not None:
            src_theta = np.asarray(forcing.theta_source(grid.centers, t_new), dtype=float)
    new = State(Field(rho_new, grid), Field(theta_new, grid), t_new)
    return StepRecord(
        prev=prev, new=new, s=s, dt=dt,
        chi_sqrt=np.broadcast_to(coeffs.chi_sqrt, (grid.n,)).copy(),
        chi_ps=np.broadcast_to(coeffs.chi_ps, (grid.n,)).copy(),
        ps_iter=coeffs.ps_iter, theta_iter=coeffs.theta_iter,
        mass_flux=mass_flux, cond_flux_left=cond_l, cond_flux_right=cond_r,
        theta_trace_left=th_l, theta_trace_right=th_r,
        src_rho=src_rho, src_theta=src_theta, coeffs=coeffs, kappa_face=kface,
    )


def _picard_sweeps(prev: State, cfg: StepConfig, reg: RegularizationParams,
                   params: PhysicalParams, model: SaturationModel, grid: Grid,
                   s: float, forcing: Forcing | None,
                   start: tuple[np.ndarray, np.ndarray]):
    """Run fixed-point sweeps at fixed s until converged or budget spent.

    Returns (rho, theta, iterations, final_update, converged, record_parts).
    Never raises on nonconvergence; raises NonfiniteIterate on NaN/Inf.
    """
    rho_it, theta_it = start
    update = np.inf
    parts = None
    for k in range(1, cfg.max_picard + 1):
        rho_sys, coeffs = assemble_rho_system(
            prev, rho_it, theta_it, s, reg, params, model, grid, cfg.dt,
            cfg.advection, forcing)
        rho_new = solve_thomas(rho_sys)
        theta_sys, mass_flux, kface = assemble_theta_system(
            prev, rho_new, theta_it, s, reg, params, model, grid, cfg.dt,
            coeffs, cfg.advection, forcing)
        theta_new = solve_thomas(theta_sys)
        if not (np.all(np.isfinite(rho_new)) and np.all(np.isfinite(theta_new))):
            exc = NonfiniteIterate(f"nonfinite iterate at s={s}, sweep {k}, t={prev.t + cfg.dt}")
            exc.sweeps = k
            raise exc
        dn2 = float(np.sum((rho_new - rho_it) ** 2) + np.sum((theta_new - theta_it) ** 2))
        base = float(np.sum(rho_it**2) + np.sum(theta_it**2))
        update = np.sqrt(dn2) / max(np.sqrt(base), UPDATE_FLOOR)
        rho_it, theta_it = rho_new, theta_new
        parts = (coeffs, mass_flux, kface)
        if update < cfg.picard_tol:
            return rho_it, theta_it, k, update, True, parts
    return rho_it, theta_it, cfg.max_picard, update, False, parts


def picard_step(prev: State, cfg: StepConfig, reg: RegularizationParams,
                params: PhysicalParams, model: SaturationModel, grid: Grid,
                forcing: Forcing | None = None, s: float | None = None,
                ) -> tuple[State, PicardReport, StepRecord]:
    """Advance one step by fixed-point iteration at a single coupling s."""
    s = reg.s if s is None else s
    start = (prev.rho.values, prev.theta.values)
    rho, theta, iters, update, ok, parts = _picard_sweeps(
        prev, cfg, reg, params, model, grid, s, forcing, start)
    report = PicardReport(iters, update, (s,), ok)
    if not ok:
        raise PicardDivergence(
            f"no convergence in {cfg.max_picard} sweeps at s={s} "
            f"(last update {update:.3e})", report=report)
    coeffs, mass_flux, kface = parts
    record = _build_record(prev, rho, theta, s, cfg.dt, coeffs, mass_flux,
                           kface, params, grid, forcing)
    return record.new, report, record


def homotopy_solve(prev: State, cfg: StepConfig, reg: RegularizationParams,
                   params: PhysicalParams, model: SaturationModel, grid: Grid,
                   forcing: Forcing | None = None,
                   ) -> tuple[State, PicardReport, StepRecord]:
    """Advance one step, falling back to an s-ramp when the direct solve fails.

    The ramp retries the step at s = k/s_ramp_steps * s_target, warm-starting
    every stage from the previous stage's result.  Intermediate stages are
    best-effort; only the final full-strength stage must converge.
    """
    try:
        return picard_step(prev, cfg, reg, params, model, grid, forcing)
    except PicardDivergence as exc:
        spent = exc.report.iterations if exc.report else cfg.max_picard
    except NonfiniteIterate as exc:
        spent = getattr(exc, "sweeps", cfg.max_picard)

    s_path = [reg.s]
    total = spent
    iterate = (prev.rho.values, prev.theta.values)
    update = np.inf
    parts = None
    for k in range(1, cfg.s_ramp_steps + 1):
        s_k = reg.s * k / cfg.s_ramp_steps
        rho, theta, iters, update, ok, parts = _picard_sweeps(
            prev, cfg, reg, params, model, grid, s_k, forcing, iterate)
        total += iters
        s_path.append(s_k)
        iterate = (rho, theta)
        if k == cfg.s_ramp_steps and not ok:
            report = PicardReport(total, update, tuple(s_path), False)
            raise PicardDivergence(
                f"ramp exhausted: final stage s={s_k} not converged "
                f"(last update {update:.3e})", report=report)
    report = PicardReport(total, update, tuple(s_path), True)
    coeffs, mass_flux, kface = parts
    record = _build_record(prev, iterate[0], iterate[1], reg.s, cfg.dt, coeffs,
                           mass_flux, kface, params, grid, forcing)
    return record.new, report, record


def _step_count(t_end: float, dt: float) -> int:
    steps = int(round(t_end / dt))
    if abs(steps * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ConfigError(f"t_end={t_end} is not an integer number of steps of dt={dt}")
    return steps


def run(initial: InitialData | None, cfg: StepConfig, reg: RegularizationParams,
        params: PhysicalParams, model: SaturationModel, grid: Grid,
        t_end: float | None = None, forcing: Forcing | None = None,
        initial_state: State | None = None,
        keep_step_records: bool = False) -> RunResult:
    """March the coupled system from t=0 to t_end with per-step diagnostics.

    The start state is the mollified initial data unless an explicit
    initial_state is supplied (equilibrium studies need a start that does
    not depend on the mollifier radius).  Deterministic: identical inputs
    produce bit-identical trajectories.
    """
    from . import diagnostics

    reg.validate_against(params)
    if t_end is None:
        t_end = params.t_end
    if t_end < 0:
        raise ConfigError(f"t_end must be nonnegative, got {t_end}")
    steps = _step_count(t_end, cfg.dt) if t_end > 0 else 0

    if initial_state is not None:
        state = initial_state
    else:
        if initial is None:
            raise ConfigError("either initial data or an initial state is required")
        state = mollified_initial_data(initial, reg, grid)

    states = [state]
    records = [diagnostics.initial_record(state, grid, params)]
    # Discrete growth envelope for max theta: walls pull toward the ambient
    # values and the only interior source is latent heating, whose rate per
    # unit heat capacity is bounded by r below.
    env = max(float(np.max(state.theta.values)), params.theta_bar0, params.theta_bar1)
    envelope = [env]
    env_ok = True
    result = RunResult([], [], [], True, params, reg, cfg, grid, model, t_end)

    for _ in range(steps):
        state, report, srec = homotopy_solve(prev=state, cfg=cfg, reg=reg,
                                             params=params, model=model,
                                             grid=grid, forcing=forcing)
        rec = diagnostics.step_record(srec, report, grid, params,
                                      prev_l4=records[-1].l4_accumulator)
        states.append(state)
        records.append(rec)
        if keep_step_records:
            result.step_records.append(srec)
        rate = float(np.max(srec.s * state.rho.values * srec.chi_sqrt
                            / (state.rho.values + params.sigma)))
        env = (env + cfg.dt * params.lam * rate) * (1.0 + cfg.dt * rate)
        env = max(env, params.theta_bar0, params.theta_bar1)
        envelope.append(env)
        if rec.max_theta > env + 1e-9:
            env_ok = False

    result.states = states
    result.records = records
    result.theta_envelope = envelope
    result.theta_envelope_ok = env_ok
    return result

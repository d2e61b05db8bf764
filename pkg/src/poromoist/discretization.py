"""Uniform cell-centered grid, smoothing and difference operators.

The domain (0, 1) is split into n equal cells of width h = 1/n with
unknowns stored at cell centers (i + 1/2) h.  Face-indexed arrays carry
fluxes: face j sits at x = j h between cells j-1 and j.

Smoothing uses a discrete compactly supported bump kernel with mirror
extension outside the domain, so constants pass through unchanged and wall
cells are never artificially damped.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DimensionMismatch, NonPositiveRadius

__all__ = [
    "Grid",
    "Field",
    "FaceField",
    "mollify",
    "cutoff",
    "face_gradient",
    "divergence",
    "robin_mass_flux",
]


@dataclass(frozen=True)
class Grid:
    """Uniform subdivision of (0, 1) into n >= 4 cells."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 4:
            raise ConfigError(f"grid needs at least 4 cells, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h


@dataclass
class Field:
    """Cell-centered values bound to a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise DimensionMismatch(
                f"field has {self.values.shape} values for an n={self.grid.n} grid"
            )
        if not np.all(np.isfinite(self.values)):
            raise DimensionMismatch("field contains nonfinite values")


@dataclass
class FaceField:
    """Face values (length n+1) bound to a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n + 1,):
            raise DimensionMismatch(
                f"face field has {self.values.shape} values for an n={self.grid.n} grid"
            )
        if not np.all(np.isfinite(self.values)):
            raise DimensionMismatch("face field contains nonfinite values")


@lru_cache(maxsize=64)
def _kernel(mu: float, h: float) -> np.ndarray:
    """Sampled bump kernel exp(-1/(1-(d/mu)^2)) at cell offsets, sum-normalized.

    Support strictly inside radius mu; when mu <= h only the center sample
    survives and the kernel is the identity weight.
    """
    half = int(np.floor(mu / h))
    while half > 0 and half * h >= mu:
        half -= 1
    d = np.arange(-half, half + 1) * h
    w = np.exp(-1.0 / (1.0 - (d / mu) ** 2))
    return w / w.sum()


def _mollify_values(values: np.ndarray, mu: float, h: float) -> np.ndarray:
    """Convolve with the bump kernel, mirroring cell values at the walls."""
    if mu <= 0:
        raise NonPositiveRadius(f"mollifier radius must be positive, got {mu}")
    w = _kernel(float(mu), float(h))
    half = (w.shape[0] - 1) // 2
    if half == 0:
        return np.array(values, dtype=float)
    padded = np.pad(np.asarray(values, dtype=float), half, mode="symmetric")
    return np.convolve(padded, w, mode="valid")


def mollify(f: Field, mu: float) -> Field:
    """Smooth a cell field over radius mu (mirror extension at the walls).

    Linear in f, preserves constants and nonnegativity, nonexpansive in
    the max norm, and the identity whenever the kernel support fits inside
    one cell.  Zero extension is deliberately avoided: it would carve
    artificial layers into wall cells whenever the radius exceeds the cell
    width, and those layers steepen the advective drift instead of
    smoothing it.
    """
    return Field(_mollify_values(f.values, mu, f.grid.h), f.grid)


def cutoff(hval, eps: float):
    """Clamp at level 1/eps: returns hval where |hval| <= 1/eps, else 1/eps.

    The clamp is one-sided by definition: magnitudes at or beyond 1/eps map
    to +1/eps regardless of sign.  Callers only ever pass nonnegative
    quantities, so the negative branch is unreachable in practice but kept
    literal.
    """
    if eps <= 0:
        raise ValueError(f"cutoff level requires eps > 0, got {eps}")
    level = 1.0 / eps
    hval = np.asarray(hval, dtype=float)
    out = np.where(np.abs(hval) <= level, hval, level)
    return float(out) if out.ndim == 0 else out


def face_gradient(f: Field, grid: Grid | None = None) -> FaceField:
    """Difference quotient (f[j] - f[j-1])/h at interior faces, 0 at the walls.

    Wall entries are placeholders; boundary fluxes are always closed by the
    Robin data, never by one-sided gradients.
    """
    if grid is not None and grid is not f.grid and grid != f.grid:
        raise DimensionMismatch("field is bound to a different grid")
    g = f.grid
    out = np.zeros(g.n + 1)
    out[1:-1] = np.diff(f.values) / g.h
    return FaceField(out, g)


def divergence(flux: FaceField, grid: Grid | None = None) -> Field:
    """Cellwise flux difference (flux[j+1] - flux[j])/h.

    Telescopes exactly: h * sum(divergence) == flux[n] - flux[0].
    """
    if grid is not None and grid is not flux.grid and grid != flux.grid:
        raise DimensionMismatch("face field is bound to a different grid")
    g = flux.grid
    return Field(np.diff(flux.values) / g.h, g)


def robin_mass_flux(boundary_value: float, side: str, s: float, params) -> float:
    """Mass flux prescribed at a wall by the exchange condition.

    Returns the face value of the flux function that sits inside the
    divergence of the vapor equation: at the right wall
    alpha1 * (s * ambient - trace), at the left wall
    alpha0 * (trace - s * ambient).  Positive values add vapor to the
    neighboring cell at the right wall and remove it at the left wall.
    """
    if side == "left":
        return params.alpha0 * (boundary_value - s * params.rho_bar0)
    if side == "right":
        return params.alpha1 * (s * params.rho_bar1 - boundary_value)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")

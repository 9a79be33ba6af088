"""
PDE Solver Module
=================

Handles:
- Polar finite-difference grids on the disk, optionally graded toward the
  boundary by equal increments of ψ(U(r))
- Damped Newton iteration for Δu = f(u) with Dirichlet data
  M·(1 + eps_b·cos(m(θ - phase)))
- Symmetry diagnostics: angular defect, moving-plane minima, slab
  containment, radial comparison and the tangential/radial gradient trend

Every trend in the truncation level M is an exploratory numerical
diagnostic of truncated problems, not a statement about blow-up solutions.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import interpolate, optimize, sparse
from scipy.sparse import linalg as sparse_linalg

from .asymptotics import GrowthProfile
from .errors import ConvergenceError, DomainError, PreconditionError
from .maxprinciple_lab import LensWidthTable
from .radial_solver import RadialSolution

logger = logging.getLogger(__name__)

DAMPING_FLOOR = 2.0 ** -20
EXPLORATORY = 'exploratory: trends across truncation levels M of perturbed truncated problems'


@dataclass
class PolarGrid:
    """
    Radial nodes r_0 = 0 < ... < r_{n_r} = radius and n_theta uniform angles

    Row 0 is the center (one shared unknown), row n_r the Dirichlet ring.
    """

    n_r: int
    n_theta: int
    radius: float
    r: np.ndarray
    theta: np.ndarray
    grading: float = 0.0

    @classmethod
    def build(cls, n_r: int, n_theta: int, radius: float = 1.0, grading: float = 0.0,
              radial: Optional[RadialSolution] = None) -> 'PolarGrid':
        """
        Args:
            n_r: Number of radial intervals
            n_theta: Number of angles
            radius: Disk radius (≤ 1)
            grading: Blend weight w ∈ [0, 1) of the ψ-scale map
            radial: Radial solution defining the ψ-scale (required when grading > 0)
        """
        if n_r < 3 or n_theta < 4:
            raise PreconditionError(f"Grid too small: n_r={n_r}, n_theta={n_theta}")
        if not 0.0 < radius <= 1.0:
            raise PreconditionError(f"Disk radius must lie in (0, 1], got {radius}")
        if not 0.0 <= grading < 1.0:
            raise PreconditionError(f"Grading weight must lie in [0, 1), got {grading}")

        xi = np.linspace(0.0, 1.0, n_r + 1)
        if grading > 0.0:
            if radial is None:
                raise PreconditionError("A graded grid needs the radial solution")
            r = cls._graded_nodes(xi, radius, grading, radial)
        else:
            r = xi * radius
        r[0] = 0.0
        r[-1] = radius

        theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
        return cls(n_r=n_r, n_theta=n_theta, radius=radius, r=r, theta=theta, grading=grading)

    @staticmethod
    def _graded_nodes(xi: np.ndarray, radius: float, grading: float, radial: RadialSolution) -> np.ndarray:
        gp = radial.profile
        fine = np.linspace(0.0, radius, 2001)
        top = min(radius, 1.0 - max(radial.d_nodes[-1], 1e-12))
        fine = fine[fine <= top]
        U = np.maximum(np.asarray(radial.value(fine), dtype=float), gp.t0)
        psi = gp.psi_many(U)
        scale = (psi[0] - psi) / (psi[0] - psi[-1]) if psi[0] > psi[-1] else fine / fine[-1]
        mapped = (1.0 - grading) * fine / fine[-1] + grading * scale
        mapped = np.maximum.accumulate(mapped)
        return np.interp(xi, mapped, fine) * (radius / fine[-1])

    @property
    def unknowns(self) -> int:
        return 1 + (self.n_r - 1) * self.n_theta

    def index(self, i: int, j: int) -> int:
        return 1 + (i - 1) * self.n_theta + (j % self.n_theta)


class PolarLaplacian:
    """Sparse discrete Laplacian on the interior unknowns and its boundary coupling"""

    def __init__(self, grid: PolarGrid):
        self.grid = grid
        n_r, n_t = grid.n_r, grid.n_theta
        r = grid.r
        dtheta = 2.0 * math.pi / n_t

        rows, cols, vals = [], [], []
        boundary_rows, boundary_cols, boundary_vals = [], [], []

        r1 = r[1]
        rows.append(0)
        cols.append(0)
        vals.append(-4.0 / r1 ** 2)
        for j in range(n_t):
            rows.append(0)
            cols.append(grid.index(1, j))
            vals.append(4.0 / (r1 ** 2 * n_t))

        j = np.arange(n_t)
        for i in range(1, n_r):
            h_minus = r[i] - r[i - 1]
            h_plus = r[i + 1] - r[i]
            denom = h_minus * h_plus * (h_minus + h_plus)
            a_plus = (2.0 * h_minus + h_minus ** 2 / r[i]) / denom
            a_minus = (2.0 * h_plus - h_plus ** 2 / r[i]) / denom
            a_mid = (-2.0 * (h_minus + h_plus) + (h_plus ** 2 - h_minus ** 2) / r[i]) / denom
            a_theta = 1.0 / (r[i] ** 2 * dtheta ** 2)

            idx = 1 + (i - 1) * n_t + j
            rows.extend(idx)
            cols.extend(idx)
            vals.extend(np.full(n_t, a_mid - 2.0 * a_theta))

            rows.extend(idx)
            cols.extend(1 + (i - 1) * n_t + (j + 1) % n_t)
            vals.extend(np.full(n_t, a_theta))
            rows.extend(idx)
            cols.extend(1 + (i - 1) * n_t + (j - 1) % n_t)
            vals.extend(np.full(n_t, a_theta))

            if i == 1:
                rows.extend(idx)
                cols.extend(np.zeros(n_t, dtype=int))
                vals.extend(np.full(n_t, a_minus))
            else:
                rows.extend(idx)
                cols.extend(idx - n_t)
                vals.extend(np.full(n_t, a_minus))

            if i == n_r - 1:
                boundary_rows.extend(idx)
                boundary_cols.extend(j)
                boundary_vals.extend(np.full(n_t, a_plus))
            else:
                rows.extend(idx)
                cols.extend(idx + n_t)
                vals.extend(np.full(n_t, a_plus))

        n = grid.unknowns
        self.matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
        self.boundary = sparse.csr_matrix((boundary_vals, (boundary_rows, boundary_cols)), shape=(n, n_t))


@dataclass
class DiskSolution:
    """Converged polar-grid solution with its boundary data"""

    grid: PolarGrid
    values: np.ndarray
    boundary_level: float
    eps_b: float
    m: int
    newton_residual: float
    profile: Optional[GrowthProfile] = None
    phase: float = 0.0
    iterations: int = 0
    residual_history: List[float] = field(default_factory=list)
    tolerance: float = 0.0

    @classmethod
    def from_radial(cls, radial: RadialSolution, grid: PolarGrid) -> 'DiskSolution':
        """The radial profile sampled on the disk grid (grid radius below 1)"""
        if grid.radius >= 1.0:
            raise PreconditionError("The radial profile is infinite on the unit circle")
        U = np.asarray(radial.value(grid.r), dtype=float)
        values = np.repeat(U[:, None], grid.n_theta, axis=1)
        return cls(grid=grid, values=values, boundary_level=float(U[-1]), eps_b=0.0, m=0,
                   newton_residual=0.0, profile=radial.profile)

    def to_frame(self) -> pd.DataFrame:
        """Table behind disk_solution.csv; the center appears once at θ = 0"""
        g = self.grid
        R, T = np.meshgrid(g.r[1:], g.theta, indexing='ij')
        return pd.DataFrame({
            'r': np.concatenate(([0.0], R.ravel())),
            'theta': np.concatenate(([0.0], T.ravel())),
            'u': np.concatenate(([self.values[0, 0]], self.values[1:].ravel())),
        })

    def interpolator(self) -> interpolate.RectBivariateSpline:
        """Bicubic spline in (r, θ) with three periodic columns of padding on each side"""
        g = self.grid
        pad = 3
        theta = np.concatenate((g.theta[-pad:] - 2.0 * math.pi, g.theta, g.theta[:pad] + 2.0 * math.pi))
        values = np.concatenate((self.values[:, -pad:], self.values, self.values[:, :pad]), axis=1)
        return interpolate.RectBivariateSpline(g.r, theta, values, kx=3, ky=3)

    def evaluate(self, x1: np.ndarray, x2: np.ndarray, spline=None) -> np.ndarray:
        if spline is None:
            spline = self.interpolator()
        r = np.hypot(x1, x2)
        if np.any(r > self.grid.radius * (1.0 + 1e-12)):
            raise DomainError("Point outside the disk")
        theta = np.mod(np.arctan2(x2, x1), 2.0 * math.pi)
        return spline.ev(np.minimum(r, self.grid.radius), theta)


def boundary_data(grid: PolarGrid, M: float, eps_b: float, m: int, phase: float = 0.0) -> np.ndarray:
    return M * (1.0 + eps_b * np.cos(m * (grid.theta - phase)))


def _initial_guess(grid: PolarGrid, M: float, eps_b: float, m: int, phase: float,
                   radial: Optional[RadialSolution]) -> np.ndarray:
    guess = np.full((grid.n_r + 1, grid.n_theta), float(M))
    if radial is not None and M > radial.center_value:
        top = 1.0 - max(radial.d_nodes[-1], 1e-12)
        if radial.value(top) > M:
            r_M = optimize.brentq(lambda r: radial.value(r) - M, 0.0, top, xtol=1e-14)
            U = np.asarray(radial.value(grid.r * (r_M / grid.radius)), dtype=float)
            guess = np.repeat(U[:, None], grid.n_theta, axis=1)
    ring = (grid.r / grid.radius) ** max(m, 0)
    guess = guess + M * eps_b * ring[:, None] * np.cos(m * (grid.theta[None, :] - phase))
    return guess


def solve_disk(
    gp: GrowthProfile,
    M: float,
    eps_b: float,
    m: int,
    grid: PolarGrid,
    radial: Optional[RadialSolution] = None,
    phase: float = 0.0,
    boundary: Optional[np.ndarray] = None,
    rel_tol: float = 1e-10,
    max_iter: int = 60,
) -> DiskSolution:
    """
    Damped Newton iteration for Δu = f(u) on the polar grid

    Stops when max |Δ_h u - f(u)| ≤ rel_tol·max(1, f(M)). Each step halves
    the damping until the residual norm decreases; reaching 2^-20 is a
    stagnation failure.

    Args:
        gp: GrowthProfile
        M: Boundary level
        eps_b: Relative amplitude of the boundary perturbation
        m: Angular mode of the perturbation
        grid: PolarGrid
        radial: Radial solution for the initial guess (constant M guess without it)
        phase: Rotation of the perturbation
        boundary: Explicit Dirichlet values on the outer ring (overrides M, eps_b, m)

    Returns:
        DiskSolution
    """
    f = gp.f
    if not M > gp.threshold:
        raise PreconditionError(f"Boundary level M={M} must exceed the positivity threshold {gp.threshold}")

    g = boundary_data(grid, M, eps_b, m, phase) if boundary is None else np.asarray(boundary, dtype=float)
    laplacian = PolarLaplacian(grid)
    rhs = laplacian.boundary @ g
    tol = rel_tol * max(1.0, abs(float(f.value(max(M, float(np.max(g)))))))

    full = _initial_guess(grid, M, eps_b, m, phase, radial)
    u = np.concatenate(([full[0].mean()], full[1:grid.n_r].ravel()))

    def residual(v: np.ndarray) -> Optional[np.ndarray]:
        try:
            with np.errstate(over='ignore', invalid='ignore'):
                res = laplacian.matrix @ v + rhs - np.asarray(f.value(v), dtype=float)
        except DomainError:
            return None
        return res if np.all(np.isfinite(res)) else None

    res = residual(u)
    if res is None:
        raise ConvergenceError("Initial guess leaves the domain of f")
    history = [float(np.max(np.abs(res)))]

    iteration = 0
    while history[-1] > tol:
        if iteration >= max_iter:
            raise ConvergenceError(f"Newton did not converge in {max_iter} iterations", history)
        iteration += 1

        jacobian = (laplacian.matrix - sparse.diags(np.asarray(f.derivative(u), dtype=float))).tocsc()
        step = sparse_linalg.spsolve(jacobian, -res)
        linear = np.max(np.abs(jacobian @ step + res)) / max(history[-1], 1e-300)
        if linear > 1e-12:
            logger.debug("linear solve relative residual %.2e", linear)

        damping = 1.0
        while damping >= DAMPING_FLOOR:
            trial = u + damping * step
            trial_res = residual(trial)
            if trial_res is not None and np.max(np.abs(trial_res)) < (1.0 - 1e-4 * damping) * history[-1]:
                break
            damping *= 0.5
        else:
            raise ConvergenceError("Newton damping reached its floor", history)

        u, res = trial, trial_res
        history.append(float(np.max(np.abs(res))))
        logger.debug("newton %d: damping %.3g residual %.3e", iteration, damping, history[-1])

    values = np.empty((grid.n_r + 1, grid.n_theta))
    values[0] = u[0]
    values[1:grid.n_r] = u[1:].reshape(grid.n_r - 1, grid.n_theta)
    values[grid.n_r] = g

    logger.info("disk solve M=%g eps_b=%g m=%d: %d iterations, residual %.3e", M, eps_b, m, iteration, history[-1])
    return DiskSolution(
        grid=grid, values=values, boundary_level=float(M), eps_b=float(eps_b), m=int(m),
        newton_residual=history[-1], profile=gp, phase=float(phase), iterations=iteration,
        residual_history=history, tolerance=tol,
    )


def solve_truncation_sequence(
    gp: GrowthProfile,
    Ms: Sequence[float],
    eps_b: float,
    m: int,
    grid: PolarGrid,
    radial: Optional[RadialSolution] = None,
    threads: int = 1,
    phase: float = 0.0,
) -> List[DiskSolution]:
    """Independent solves at several truncation levels, returned in the order of Ms"""
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        futures = [executor.submit(solve_disk, gp, M, eps_b, m, grid, radial, phase) for M in Ms]
        return [future.result() for future in futures]


# ----------------------------------------------------------------------
# Diagnostics
# ----------------------------------------------------------------------

def symmetry_defect(sol: DiskSolution, interior: float = 0.9) -> Tuple[List[Tuple[float, float]], float]:
    """
    Angular oscillation max_j u_ij - min_j u_ij per ring

    Returns:
        Tuple (defect by radius, maximum over rings with r ≤ interior·radius)
    """
    g = sol.grid
    defect = np.max(sol.values, axis=1) - np.min(sol.values, axis=1)
    by_radius = [(float(r), float(d)) for r, d in zip(g.r, defect)]
    mask = g.r <= interior * g.radius
    return by_radius, float(np.max(defect[mask]))


def _cap_samples(sol: DiskSolution, lam: float, refine: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """Cartesian samples of Σ_λ = {x in the disk : x₁ > λ} at refine × grid resolution"""
    g = sol.grid
    spacing = g.radius / (refine * g.n_r)
    x1 = np.arange(lam + spacing, g.radius, spacing)
    x2 = np.arange(-g.radius, g.radius + 0.5 * spacing, spacing)
    X1, X2 = np.meshgrid(x1, x2, indexing='ij')
    inside = X1 ** 2 + X2 ** 2 <= g.radius ** 2
    return X1[inside], X2[inside]


def moving_plane_min(sol: DiskSolution, lambdas: Sequence[float], refine: int = 2) -> List[Tuple[float, float]]:
    """
    min over Σ_λ of u(x) - u(x_λ) for each λ

    u is read from the bicubic (r, θ) spline at Cartesian samples of Σ_λ;
    an empty cap reports 0.
    """
    spline = sol.interpolator()
    out = []
    for lam in lambdas:
        x1, x2 = _cap_samples(sol, lam, refine)
        if len(x1) == 0:
            out.append((float(lam), 0.0))
            continue
        diff = sol.evaluate(x1, x2, spline) - sol.evaluate(2.0 * lam - x1, x2, spline)
        out.append((float(lam), float(np.min(diff))))
    return out


def moving_plane_tolerance(sol: DiskSolution, lambdas: Sequence[float], refine: int = 2) -> Dict:
    """
    Error budget of moving_plane_min

    The Newton part bounds the nodal error by the maximum principle for
    Δ - f'(u) with f' ≥ 0: |e| ≤ max|residual|·radius²/4, counted twice
    for the difference u - u_λ. The interpolation part is the largest change
    of the cap minimum when the sampling is refined by a factor of two.

    Returns:
        Dict with newton_bound, interpolation_bound, tolerance, refine and
        by_lambda rows [λ, min at refine, min at 2·refine]
    """
    coarse = moving_plane_min(sol, lambdas, refine)
    fine = moving_plane_min(sol, lambdas, 2 * refine)
    interpolation = max((abs(a - b) for (_, a), (_, b) in zip(coarse, fine)), default=0.0)
    newton = 2.0 * sol.newton_residual * sol.grid.radius ** 2 / 4.0
    return {
        'newton_bound': newton,
        'interpolation_bound': interpolation,
        'tolerance': newton + interpolation,
        'refine': refine,
        'by_lambda': [[lam, a, b] for (lam, a), (_, b) in zip(coarse, fine)],
    }


@dataclass
class SlabReport:
    """Points of D_λ = {u < u_λ} against the slab λ < x₁ < λ + C·H(x)"""

    lam: float
    C: float
    points: int
    violations: int
    worst_margin: float
    empirical_C: float

    def to_dict(self) -> Dict:
        return {
            'lambda': self.lam,
            'C': self.C,
            'points_in_D_lambda': self.points,
            'violations': self.violations,
            'worst_margin': self.worst_margin,
            'empirical_C': self.empirical_C,
        }


def slab_containment(
    sol: DiskSolution,
    radial: RadialSolution,
    lam: float,
    C: float,
    table: Optional[LensWidthTable] = None,
    refine: int = 2,
    tol: float = 1e-9,
) -> SlabReport:
    """
    Test x₁ - λ ≤ C·H(x) at every sample of Σ_λ where u < u_λ

    worst_margin is the smallest C·H - (x₁ - λ) (0 when D_λ is empty);
    empirical_C the largest (x₁ - λ)/H.
    """
    if not 0.0 < lam < 1.0:
        raise PreconditionError(f"λ must lie in (0, 1), got {lam}")
    x1, x2 = _cap_samples(sol, lam, refine)
    if len(x1) == 0:
        return SlabReport(lam=lam, C=C, points=0, violations=0, worst_margin=0.0, empirical_C=0.0)

    spline = sol.interpolator()
    diff = sol.evaluate(x1, x2, spline) - sol.evaluate(2.0 * lam - x1, x2, spline)
    below = diff < -tol * max(1.0, sol.boundary_level)
    if not np.any(below):
        return SlabReport(lam=lam, C=C, points=0, violations=0, worst_margin=0.0, empirical_C=0.0)

    table = table or LensWidthTable(radial)
    rho = np.minimum(np.hypot(2.0 * lam - x1[below], x2[below]), 1.0 - table.d_min)
    H = np.asarray(table(rho), dtype=float)
    depth = x1[below] - lam
    margin = C * H - depth
    return SlabReport(
        lam=lam,
        C=C,
        points=int(np.sum(below)),
        violations=int(np.sum(margin < 0)),
        worst_margin=float(np.min(margin)),
        empirical_C=float(np.max(depth / H)),
    )


@dataclass
class ComparisonReport:
    """(U - u)/φ(U) over the interior of a solve whose data lies below U's trace"""

    samples: List[Tuple[float, float]]
    empirical_C: float
    max_excess: float
    comparison_holds: bool
    tolerance: float

    def to_dict(self) -> Dict:
        return {
            'ratio_by_radius': [[r, v] for r, v in self.samples],
            'empirical_C': self.empirical_C,
            'max_excess_over_U': self.max_excess,
            'comparison_holds': self.comparison_holds,
            'tolerance': self.tolerance,
        }


def radial_comparison(sol: DiskSolution, radial: RadialSolution, tol: Optional[float] = None) -> ComparisonReport:
    """
    Tabulate (U - u)/φ(U) per ring and check u ≤ U + tol everywhere

    Raises:
        PreconditionError: the grid reaches the unit circle or the boundary data exceeds U's trace
    """
    g = sol.grid
    if g.radius >= 1.0:
        raise PreconditionError("Comparison needs a disk of radius below 1")
    trace = radial.value(g.radius)
    if np.max(sol.values[-1]) > trace * (1.0 + 1e-12):
        raise PreconditionError(
            f"Boundary data max {np.max(sol.values[-1]):.6g} exceeds the radial trace {trace:.6g}"
        )

    gp = radial.profile
    U = np.asarray(radial.value(g.r), dtype=float)
    log_phi = gp.log_phi_many(U)
    gap = U[:, None] - sol.values
    ratio = gap * np.exp(-log_phi)[:, None]

    tol = 1e-4 * max(1.0, sol.boundary_level) if tol is None else tol
    max_excess = float(np.max(-gap))
    per_ring = np.max(ratio[:-1], axis=1)
    return ComparisonReport(
        samples=[(float(r), float(v)) for r, v in zip(g.r[:-1], per_ring)],
        empirical_C=float(np.max(ratio[:-1])),
        max_excess=max_excess,
        comparison_holds=max_excess <= tol,
        tolerance=tol,
    )


def _gradients(sol: DiskSolution) -> Tuple[np.ndarray, np.ndarray]:
    """Tangential |∂_θ u|/r and radial ∂_r u on the interior rings, centered differences"""
    g = sol.grid
    u = sol.values
    r = g.r
    dtheta = 2.0 * math.pi / g.n_theta
    i = np.arange(1, g.n_r)

    tangential = np.abs(np.roll(u[i], -1, axis=1) - np.roll(u[i], 1, axis=1)) / (2.0 * dtheta * r[i][:, None])

    h_minus = (r[i] - r[i - 1])[:, None]
    h_plus = (r[i + 1] - r[i])[:, None]
    radial = (h_minus ** 2 * u[i + 1] - h_plus ** 2 * u[i - 1] + (h_plus ** 2 - h_minus ** 2) * u[i]) / (
        h_minus * h_plus * (h_minus + h_plus)
    )
    return tangential, radial


def tangential_radial_diagnostic(sol: DiskSolution) -> List[Tuple[float, float, float]]:
    """(d, max_j |∇_T u|, min_j ∂_r u) per interior ring, d = 1 - r"""
    tangential, radial = _gradients(sol)
    r = sol.grid.r[1:sol.grid.n_r]
    return [
        (float(1.0 - ri), float(t), float(s))
        for ri, t, s in zip(r, np.max(tangential, axis=1), np.min(radial, axis=1))
    ]


def radial_monotonicity_min(sol: DiskSolution, lo: float = 0.05, hi: float = 0.95) -> float:
    """min of ∂_r u over rings with lo·radius < r < hi·radius"""
    _, radial = _gradients(sol)
    r = sol.grid.r[1:sol.grid.n_r]
    mask = (r > lo * sol.grid.radius) & (r < hi * sol.grid.radius)
    return float(np.min(radial[mask]))


def gradient_trend(solutions: Sequence[DiskSolution], r_probe: float = 0.9) -> List[Dict]:
    """
    Tangential and radial gradient at a probe radius across truncation levels

    max |∇_T u| is taken over rings with r ≤ r_probe; ∂_r u and the ratio at
    the ring closest to r_probe.
    """
    trend = []
    for sol in solutions:
        tangential, radial = _gradients(sol)
        r = sol.grid.r[1:sol.grid.n_r]
        probe = int(np.argmin(np.abs(r - r_probe)))
        tangential_max = float(np.max(tangential[r <= r_probe + 1e-12]))
        radial_min = float(np.min(radial[probe]))
        probe_tangential = float(np.max(tangential[probe]))
        trend.append({
            'M': sol.boundary_level,
            'r_probe': float(r[probe]),
            'tangential_max': tangential_max,
            'radial_min_at_probe': radial_min,
            'ratio_at_probe': probe_tangential / radial_min if radial_min > 0 else math.inf,
        })
    return trend


@dataclass
class SymmetryReport:
    """All symmetry diagnostics of one disk solution"""

    defect_by_radius: List[Tuple[float, float]]
    global_defect: float
    movingplane_min: List[Tuple[float, float]]
    movingplane_tolerance: Dict
    radial_monotonicity_min: float
    lemma22_ratio: List[Tuple[float, float]]
    gradient_diag: List[Tuple[float, float, float]]
    boundary_level: float = 0.0
    eps_b: float = 0.0
    m: int = 0
    slab: Optional[SlabReport] = None
    comparison: Optional[ComparisonReport] = None
    trend: List[Dict] = field(default_factory=list)
    label: str = EXPLORATORY

    def to_dict(self) -> Dict:
        return {
            'boundary_level': self.boundary_level,
            'eps_b': self.eps_b,
            'm': self.m,
            'defect_by_radius': [list(x) for x in self.defect_by_radius],
            'global_defect': self.global_defect,
            'movingplane_min': [list(x) for x in self.movingplane_min],
            'movingplane_tolerance': self.movingplane_tolerance,
            'radial_monotonicity_min': self.radial_monotonicity_min,
            'lemma22_ratio': [list(x) for x in self.lemma22_ratio],
            'gradient_diag': [list(x) for x in self.gradient_diag],
            'slab_containment': self.slab.to_dict() if self.slab else None,
            'radial_comparison': self.comparison.to_dict() if self.comparison else None,
            'truncation_trend': self.trend,
            'label': self.label,
        }


def symmetry_report(
    sol: DiskSolution,
    radial: RadialSolution,
    lambdas: Sequence[float],
    slab_lambda: Optional[float] = None,
    slab_C: float = 10.0,
    comparison: Optional[DiskSolution] = None,
    trend_solutions: Optional[Sequence[DiskSolution]] = None,
) -> SymmetryReport:
    """
    Assemble the SymmetryReport of a disk solution

    comparison is a separate solve on a disk of radius below 1 with data
    under U's trace; the radial-comparison ratio is taken from it.
    """
    by_radius, global_defect = symmetry_defect(sol)
    compare = radial_comparison(comparison, radial) if comparison is not None else None
    slab = slab_containment(sol, radial, slab_lambda, slab_C) if slab_lambda is not None else None
    return SymmetryReport(
        defect_by_radius=by_radius,
        global_defect=global_defect,
        movingplane_min=moving_plane_min(sol, lambdas),
        movingplane_tolerance=moving_plane_tolerance(sol, lambdas),
        radial_monotonicity_min=radial_monotonicity_min(sol),
        lemma22_ratio=compare.samples if compare else [],
        gradient_diag=tangential_radial_diagnostic(sol),
        boundary_level=sol.boundary_level,
        eps_b=sol.eps_b,
        m=sol.m,
        slab=slab,
        comparison=compare,
        trend=gradient_trend(trend_solutions) if trend_solutions else [],
    )

"""
Maximum Principle Lab Module
============================

Handles:
- Lens width H(x) = φ(U_λ(x))/√F(U_λ(x)) near the reflected boundary
- Barrier ω = cos(μ·U_λ^{(p-1)/2}·(x₁ - λ)) on the lens and the sign of
  Δω + C0·U_λ^e·ω (e = p - 1 by default)
- The Euler equation u'' + C0·x^{-2}·u = 0 on (0, 1) and the zeros of its
  oscillating solution
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import interpolate

from .asymptotics import GrowthProfile
from .errors import DomainError, PreconditionError
from .radial_solver import RadialSolution

logger = logging.getLogger(__name__)

MARGIN = 0.1
MAX_DOUBLINGS = 40
QUARTER_PI = math.pi / 4.0


@dataclass
class LensSpec:
    """The lens {x ∈ B : λ < x₁ < λ + C_H·H(x)} and its sampling window"""

    lam: float
    radial: RadialSolution
    C_H: float = 1.0
    d_min: float = 1e-5
    d_max: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise PreconditionError(f"λ must lie in (0, 1), got {self.lam}")
        if not self.C_H > 0:
            raise PreconditionError(f"C_H must be positive, got {self.C_H}")
        if self.d_max is None:
            self.d_max = 1.0 - self.lam

    def reflect(self, x: Sequence[float]) -> np.ndarray:
        """x_λ = (2λ - x₁, x')"""
        point = np.array(x, dtype=float)
        point[0] = 2.0 * self.lam - point[0]
        return point


class LensWidthTable:
    """
    H tabulated against ρ = |x_λ| on [0, 1)

    Uniform in ρ on the interior and log-spaced in d = 1 - ρ near the
    boundary; log H is interpolated in log d with a PCHIP spline.
    """

    def __init__(self, radial: RadialSolution, d_min: float = 1e-8, points: int = 240):
        gp = radial.profile
        d_interior = 1.0 - np.linspace(0.0, 0.9, points // 2, endpoint=False)
        d_layer = np.geomspace(0.1, d_min, points - points // 2)
        d = np.unique(np.concatenate((d_interior, d_layer)))

        U = np.asarray(radial.value(1.0 - d), dtype=float)
        log_H = gp.log_phi_many(U) - 0.5 * np.asarray(gp.log_F(U))
        self.d_min = float(d[0])
        self._spline = interpolate.PchipInterpolator(np.log(d), log_H)

    def log_H(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0) or np.any(1.0 - rho < self.d_min):
            raise DomainError(f"|x_λ| outside the tabulated range [0, 1 - {self.d_min:g}]")
        return self._spline(np.log(1.0 - rho))

    def __call__(self, rho):
        out = np.exp(self.log_H(rho))
        return float(out) if np.ndim(rho) == 0 else out


def lens_width(ls: LensSpec, x: Sequence[float]) -> float:
    """
    H(x) = φ(U(|x_λ|))/√F(U(|x_λ|))

    Raises:
        DomainError: the reflected point is outside the ball
    """
    rho = float(np.linalg.norm(ls.reflect(x)))
    if rho >= 1.0:
        raise DomainError(f"Reflected point |x_λ|={rho:g} lies outside the unit ball")
    gp = ls.radial.profile
    U = ls.radial.value(rho)
    return math.exp(gp.log_phi(U) - 0.5 * float(gp.log_F(U)))


@dataclass
class BarrierReport:
    """Sampled barrier verdict on one lens"""

    mu: float
    C0: float
    p: float
    exponent: float
    lam: float
    C_H: float
    samples: List[Tuple[float, float, float, float, float]]
    verdict: bool
    operator_ok: bool
    requirement_ok: bool
    worst_operator: float
    worst_point: Tuple[float, float]
    max_requirement: float
    min_omega: float
    refined_verdict: Optional[bool] = None
    mu_doublings: int = 0
    note: str = ''

    def to_dict(self) -> Dict:
        return {
            'mu': self.mu,
            'C0': self.C0,
            'p': self.p,
            'operator_exponent': self.exponent,
            'lambda': self.lam,
            'C_H': self.C_H,
            'verdict': self.verdict,
            'operator_negative': self.operator_ok,
            'requirement_within_quarter_pi': self.requirement_ok,
            'worst_normalized_operator': self.worst_operator,
            'worst_point': list(self.worst_point),
            'max_requirement_lhs': self.max_requirement,
            'min_omega': self.min_omega,
            'refined_verdict': self.refined_verdict,
            'mu_doublings': self.mu_doublings,
            'note': self.note,
            'samples': [list(s) for s in self.samples],
        }


class LensSampler:
    """Graded (d, t) samples of a lens with the radial data the barrier needs"""

    def __init__(self, ls: LensSpec, table: LensWidthTable):
        self.ls = ls
        self.table = table

    def sample(self, n_d: int, n_t: int) -> Dict[str, np.ndarray]:
        ls = self.ls
        lam = ls.lam
        radial = ls.radial
        d = np.geomspace(ls.d_min, ls.d_max, n_d)
        t = np.linspace(0.0, 1.0, n_t)
        D, T = np.meshgrid(d, t, indexing='ij')
        rho = 1.0 - D

        delta = T * ls.C_H * np.asarray(self.table(rho.ravel())).reshape(rho.shape)
        x_perp_sq = rho ** 2 - (lam - delta) ** 2
        x1 = lam + delta
        inside = (x_perp_sq >= 0.0) & (x1 ** 2 + np.maximum(x_perp_sq, 0.0) < 1.0)

        rho_in = rho[inside]
        U = np.asarray(radial.value(rho_in), dtype=float)
        dU = np.asarray(radial.derivative(rho_in), dtype=float)
        fU = np.asarray(radial.f.value(U), dtype=float) * radial.blowup_radius_raw ** 2
        return {
            'x1': x1[inside],
            'x2': np.sqrt(np.maximum(x_perp_sq[inside], 0.0)),
            'rho': rho_in,
            'delta': delta[inside],
            'U': U,
            'dU': dU,
            'fU': fU,
            'd': d,
            't': t,
            'mask': inside,
        }


def barrier_operator(samples: Dict[str, np.ndarray], mu: float, C0: float, p: float,
                     exponent: float, lam: float) -> Dict[str, np.ndarray]:
    """
    ω and Δω + C0·U_λ^exponent·ω at every lens sample

    With g = U_λ^a·(x₁ - λ), a = (p-1)/2 and r = |x_λ|:
        |∇g|² = a²U^{2a-2}U'²δ² + 2aU^{2a-1}U'δ·∂₁r + U^{2a}
        Δg    = [a(a-1)U^{a-2}U'² + aU^{a-1}ΔU]·δ + 2aU^{a-1}U'·∂₁r
    where ΔU = f(U) for the radial solution and ∂₁r = -(λ - δ)/r.
    """
    a = 0.5 * (p - 1.0)
    U, dU, fU = samples['U'], samples['dU'], samples['fU']
    delta = samples['delta']
    d1r = -(lam - delta) / samples['rho']

    g = U ** a * delta
    grad_sq = a * a * U ** (2 * a - 2) * dU ** 2 * delta ** 2 + 2 * a * U ** (2 * a - 1) * dU * delta * d1r + U ** (2 * a)
    lap_g = (a * (a - 1) * U ** (a - 2) * dU ** 2 + a * U ** (a - 1) * fU) * delta + 2 * a * U ** (a - 1) * dU * d1r

    omega = np.cos(mu * g)
    lap_omega = -mu * mu * omega * grad_sq - mu * np.sin(mu * g) * lap_g
    weight = U ** exponent
    operator = lap_omega + C0 * weight * omega
    return {
        'omega': omega,
        'operator': operator,
        'normalized': operator / (max(C0, 1.0) * weight),
        'requirement': mu * g,
    }


def _evaluate(samples, mu, C0, p, exponent, lam):
    values = barrier_operator(samples, mu, C0, p, exponent, lam)
    worst = int(np.argmax(values['normalized']))
    return values, worst


def barrier_report(
    gp: GrowthProfile,
    radial: RadialSolution,
    p: float,
    lam: float,
    C0: float,
    C_H: float = 1.0,
    exponent: Optional[float] = None,
    samples: int = 64,
    refine: bool = True,
    table: Optional[LensWidthTable] = None,
) -> BarrierReport:
    """
    Choose μ and check the barrier inequality on the lens

    μ starts at 2√(C0 + 1) and doubles until the largest operator value,
    normalized by max(C0, 1)·U^e, is at most -0.1; then every sample must
    have a negative operator and μ·U^{(p-1)/2}·(x₁ - λ) ≤ π/4.

    Args:
        gp: GrowthProfile
        radial: Unit-ball radial solution
        p: Power in the barrier phase U^{(p-1)/2}
        lam: Plane position λ ∈ (0, 1)
        C0: Zeroth-order coefficient
        C_H: Multiplier on the lens width
        exponent: Exponent of U in the zeroth-order term (default p - 1)
        samples: Lens samples per direction; refinement doubles it

    Returns:
        BarrierReport
    """
    if not p > 1:
        raise PreconditionError(f"Barrier needs p > 1, got {p}")
    exponent = p - 1.0 if exponent is None else float(exponent)
    ls = LensSpec(lam=lam, radial=radial, C_H=C_H)
    table = table or LensWidthTable(radial, d_min=min(ls.d_min, 1e-8))
    sampler = LensSampler(ls, table)
    coarse = sampler.sample(samples, samples)

    mu = 2.0 * math.sqrt(C0 + 1.0)
    doublings = 0
    values, worst = _evaluate(coarse, mu, C0, p, exponent, lam)
    while values['normalized'][worst] > -MARGIN and doublings < MAX_DOUBLINGS:
        mu *= 2.0
        doublings += 1
        values, worst = _evaluate(coarse, mu, C0, p, exponent, lam)

    operator_ok = bool(np.all(values['operator'] < 0))
    requirement_ok = bool(np.all(values['requirement'] <= QUARTER_PI))
    verdict = operator_ok and requirement_ok

    refined_verdict = None
    if refine:
        fine = sampler.sample(2 * samples, 2 * samples)
        fine_values, _ = _evaluate(fine, mu, C0, p, exponent, lam)
        refined_verdict = bool(np.all(fine_values['operator'] < 0) and np.all(fine_values['requirement'] <= QUARTER_PI))

    note = (f"zeroth-order term uses U^{exponent:g}; the stated inequality prints U^((p-1)/2) "
            f"= U^{0.5 * (p - 1):g} while the barrier computation needs U^(p-1)")
    report = BarrierReport(
        mu=mu,
        C0=C0,
        p=p,
        exponent=exponent,
        lam=lam,
        C_H=C_H,
        samples=[
            (float(a), float(b), float(w), float(o), float(q))
            for a, b, w, o, q in zip(coarse['x1'], coarse['x2'], values['omega'], values['operator'], values['requirement'])
        ],
        verdict=verdict and (refined_verdict is not False),
        operator_ok=operator_ok,
        requirement_ok=requirement_ok,
        worst_operator=float(values['normalized'][worst]),
        worst_point=(float(coarse['x1'][worst]), float(coarse['x2'][worst])),
        max_requirement=float(np.max(values['requirement'])),
        min_omega=float(np.min(values['omega'])),
        refined_verdict=refined_verdict,
        mu_doublings=doublings,
        note=note,
    )
    logger.info("barrier at lambda=%g: mu=%g verdict=%s", lam, mu, report.verdict)
    return report


def operator_map(radial: RadialSolution, report: BarrierReport, samples: int = 64,
                 table: Optional[LensWidthTable] = None) -> Dict[str, np.ndarray]:
    """
    Normalized barrier operator on the (d, t) sampling grid of a lens

    Uses the μ chosen by barrier_report. Grid cells whose point falls
    outside the ball are NaN.

    Returns:
        {'d': (n,), 't': (n,), 'normalized': (n, n)} indexed [d, t]
    """
    ls = LensSpec(lam=report.lam, radial=radial, C_H=report.C_H)
    table = table or LensWidthTable(radial, d_min=min(ls.d_min, 1e-8))
    grid = LensSampler(ls, table).sample(samples, samples)
    values = barrier_operator(grid, report.mu, report.C0, report.p, report.exponent, report.lam)
    normalized = np.full(grid['mask'].shape, np.nan)
    normalized[grid['mask']] = values['normalized']
    return {'d': grid['d'], 't': grid['t'], 'normalized': normalized}


# ----------------------------------------------------------------------
# Euler equation u'' + C0·x^{-2}·u = 0
# ----------------------------------------------------------------------

def _frequency(C0: float) -> float:
    return 0.5 * math.sqrt(4.0 * C0 - 1.0)


def indicial_exponents(C0: float) -> Tuple[float, float]:
    """Real roots s± = (1 ± √(1 - 4C0))/2 of s(s - 1) + C0 = 0 (C0 ≤ 1/4)"""
    if C0 > 0.25:
        raise PreconditionError("Indicial exponents are complex for C0 > 1/4")
    root = math.sqrt(1.0 - 4.0 * C0)
    return 0.5 * (1.0 - root), 0.5 * (1.0 + root)


def euler_solution(C0: float, x):
    """
    x^{1/2}·cos(A·ln x), A = √(4C0 - 1)/2, for C0 > 1/4; x^{s+} otherwise
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("Euler solution is defined for x > 0")
    if C0 > 0.25:
        out = np.sqrt(arr) * np.cos(_frequency(C0) * np.log(arr))
    else:
        out = arr ** indicial_exponents(C0)[1]
    return float(out) if np.ndim(x) == 0 else out


def euler_residual(C0: float, x) -> np.ndarray:
    """
    Relative residual |u'' + C0·x^{-2}·u| / (|u''| + C0·x^{-2}·|u|)

    u'' is evaluated from its own closed form, -(A² + 1/4)·x^{-3/2}·cos(A ln x)
    (or s+(s+ - 1)·x^{s+ - 2} on the real branch).
    """
    arr = np.asarray(x, dtype=float)
    u = np.asarray(euler_solution(C0, arr), dtype=float)
    if C0 > 0.25:
        A = _frequency(C0)
        second = -(A * A + 0.25) * arr ** -1.5 * np.cos(A * np.log(arr))
    else:
        s = indicial_exponents(C0)[1]
        second = s * (s - 1.0) * arr ** (s - 2.0)
    potential = C0 * u / arr ** 2
    scale = np.abs(second) + np.abs(potential)
    return np.abs(second + potential) / np.where(scale > 0, scale, 1.0)


@dataclass
class EulerZeros:
    """Zeros of the oscillating solution in an interval, or the real exponents"""

    C0: float
    interval: Tuple[float, float]
    zeros: List[float] = field(default_factory=list)
    exponents: Optional[Tuple[float, float]] = None
    ratio: Optional[float] = None

    def __len__(self) -> int:
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    def to_rows(self) -> List[Dict]:
        return [{'k': k, 'x_k': x} for k, x in self.indexed()]

    def indexed(self) -> List[Tuple[int, float]]:
        if not self.zeros:
            return []
        A = _frequency(self.C0)
        return [(int(round(-math.log(x) * A / math.pi - 0.5)), x) for x in self.zeros]


def euler_zeros(C0: float, interval: Tuple[float, float]) -> EulerZeros:
    """
    Zeros x_k = exp(-(π/2 + kπ)/A) of x^{1/2}cos(A ln x) inside (a, b), ascending

    For C0 ≤ 1/4 there are none; the real indicial exponents are returned instead.
    """
    a, b = interval
    if not 0.0 < a < b <= 1.0:
        raise PreconditionError(f"Interval must satisfy 0 < a < b ≤ 1, got {interval}")

    if C0 <= 0.25:
        return EulerZeros(C0=C0, interval=(a, b), exponents=indicial_exponents(C0))

    A = _frequency(C0)
    k_lo = max(0, math.ceil(-A * math.log(b) / math.pi - 0.5))
    k_hi = math.floor(-A * math.log(a) / math.pi - 0.5)
    zeros = []
    for k in range(k_hi, k_lo - 1, -1):
        x = math.exp(-(0.5 * math.pi + k * math.pi) / A)
        if a < x < b:
            zeros.append(x)
    return EulerZeros(C0=C0, interval=(a, b), zeros=zeros, ratio=math.exp(-math.pi / A))


def euler_zero_count(C0: float, interval: Tuple[float, float]) -> int:
    return len(euler_zeros(C0, interval))

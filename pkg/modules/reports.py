"""
Reports Module
==============

Handles:
- HypothesisReport: every growth hypothesis of the symmetry theorem for one
  nonlinearity, with the applicability conjunction
- MaxPrincipleReport: barrier verdict plus the Euler zero count
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

from .asymptotics import (
    GrowthProfile,
    LimitEstimate,
    check_condition_exp,
    check_condition_h2,
    check_gamma_conditions,
    check_phi_psi_inequality,
    keller_osserman,
)
from .maxprinciple_lab import BarrierReport, barrier_report, euler_zero_count
from .nonlinearity import DEFAULT_WINDOW, MonotonicityVerdict, check_shift_monotone
from .radial_solver import RadialSolution

logger = logging.getLogger(__name__)


@dataclass
class HypothesisReport:
    ko: LimitEstimate
    shift_monotone: MonotonicityVerdict
    h2: Optional[LimitEstimate]
    threshold: float
    t0: float
    exp_variant: Optional[LimitEstimate] = None
    gamma_conditions: Optional[Tuple[LimitEstimate, LimitEstimate, LimitEstimate]] = None
    phi_psi_inequality: Optional[Dict] = None
    nonlinearity: Dict = field(default_factory=dict)

    @property
    def theorem_applicable(self) -> bool:
        """Keller-Osserman ∧ shifted monotonicity ∧ the φ/√F growth condition"""
        return bool(self.ko.passed and self.shift_monotone.holds and self.h2 is not None and self.h2.passed)

    def to_dict(self) -> Dict:
        return {
            'nonlinearity': self.nonlinearity,
            'positivity_threshold': self.threshold,
            't0': self.t0,
            'ko': self.ko.to_dict(),
            'shift_monotone': self.shift_monotone.to_dict(),
            'h2': self.h2.to_dict() if self.h2 else None,
            'exp_variant': self.exp_variant.to_dict() if self.exp_variant else None,
            'gamma_conditions': [c.to_dict() for c in self.gamma_conditions] if self.gamma_conditions else None,
            'phi_psi_inequality': self.phi_psi_inequality,
            'theorem_applicable': self.theorem_applicable,
        }


def hypothesis_report(
    gp: GrowthProfile,
    K: float = 1.0,
    shift_p: float = 5.0,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    shift: str = 'power',
    condition_p: float = 5.0,
    alpha: Optional[float] = None,
    gamma: Optional[float] = None,
    inequality_points: Sequence[float] = (1e1, 1e2, 1e3, 1e4, 1e5),
) -> HypothesisReport:
    """
    Run every hypothesis check on one growth profile

    The φ-based checks need ∫^∞ ds/F, which is only finite when
    Keller-Osserman holds; they are skipped when it fails.

    Args:
        gp: GrowthProfile
        K, shift_p, window, shift: Shifted-monotonicity parameters
        condition_p: p of the t^{(p-1)/2}·φ/√F condition
        alpha: Exponential-variant rate (defaults to the family rate for exponential families)
        gamma: γ of the three γ-conditions (skipped when None)
        inequality_points: Sample points of φ ≤ √(2/F)·ψ

    Returns:
        HypothesisReport
    """
    f = gp.f
    alpha = alpha if alpha is not None else f.exponential_rate

    ko = keller_osserman(gp)
    monotone = check_shift_monotone(f, K, shift_p, window=tuple(window), shift=shift,
                                    alpha=alpha if shift == 'exponential' else None)

    h2 = exp_variant = gamma_conditions = inequality = None
    if ko.passed:
        h2 = check_condition_h2(gp, condition_p)
        if alpha:
            exp_variant = check_condition_exp(gp, alpha)
        if gamma is not None:
            gamma_conditions = check_gamma_conditions(gp, gamma)
        points = [t for t in inequality_points if t > gp.t0]
        if points:
            inequality = check_phi_psi_inequality(gp, points)
    else:
        logger.info("Keller-Osserman fails for %s; φ-based checks skipped", f.label)

    report = HypothesisReport(
        ko=ko,
        shift_monotone=monotone,
        h2=h2,
        threshold=gp.threshold,
        t0=gp.t0,
        exp_variant=exp_variant,
        gamma_conditions=gamma_conditions,
        phi_psi_inequality=inequality,
        nonlinearity=f.to_dict(),
    )
    logger.info("hypotheses for %s: applicable=%s", f.label, report.theorem_applicable)
    return report


@dataclass
class MaxPrincipleReport:
    barrier: BarrierReport
    euler_zero_count: int
    parameters: Dict

    def to_dict(self) -> Dict:
        return {
            'barrier': self.barrier.to_dict(),
            'euler_zero_count': self.euler_zero_count,
            'parameters': self.parameters,
        }


def maxprinciple_report(
    gp: GrowthProfile,
    radial: RadialSolution,
    p: float,
    lam: float,
    C0: float,
    C_H: float = 1.0,
    exponent: Optional[float] = None,
    samples: int = 64,
    euler_C0: Optional[float] = None,
    euler_interval: Tuple[float, float] = (1e-6, 0.5),
) -> MaxPrincipleReport:
    barrier = barrier_report(gp, radial, p, lam, C0, C_H=C_H, exponent=exponent, samples=samples)
    euler_C0 = C0 if euler_C0 is None else euler_C0
    count = euler_zero_count(euler_C0, tuple(euler_interval))
    return MaxPrincipleReport(
        barrier=barrier,
        euler_zero_count=count,
        parameters={
            'p': p,
            'lambda': lam,
            'C0': C0,
            'C_H': C_H,
            'exponent': barrier.exponent,
            'samples': samples,
            'euler_C0': euler_C0,
            'euler_interval': list(euler_interval),
            'N': radial.N,
        },
    )

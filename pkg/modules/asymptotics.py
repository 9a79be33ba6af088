"""
Asymptotics Module
==================

Handles:
- ψ(t) = (1/√2) ∫_t^∞ ds/√F(s) and φ(t) = ∫_t^∞ ds/F(s)
- Keller-Osserman classification
- Growth conditions: the power-weighted and exponential-weighted
  φ/√F limits and the three γ-conditions
- ψ-inversion for boundary-layer work

All improper integrals are computed in log space: the integrand F^{-p} is
scaled by F(t)^{-p} at the lower limit, integrated on doubling segments and
closed by a power-fit tail once the truncation point reaches tail_cap.
Oscillatory families switch to a per-period Gauss-Legendre rule on long
segments and close the range from their period-averaged envelope once
the oscillation has decayed below the error budget.
"""

import logging
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate, interpolate, optimize, special

from .errors import (
    DivergenceError,
    DomainError,
    InconclusiveError,
    LabError,
    PreconditionError,
    QuadratureError,
)
from .nonlinearity import Nonlinearity, lipschitz_profile, positivity_threshold

logger = logging.getLogger(__name__)

PSI_POWER = 0.5
PHI_POWER = 1.0

# Integrand decays by at most e^{-SEGMENT_DECAY} across one segment of the
# exponential families
SEGMENT_DECAY = 30.0
PER_DECADE = 10
MEMO_LIMIT = 200_000

# Oscillatory segments with more interior multiples of π than this switch
# from adaptive quadrature to the per-interval Gauss-Legendre rule
PERIOD_BREAKPOINTS = 100
PERIOD_BLOCK = 4096
ENVELOPE_START = PERIOD_BREAKPOINTS * math.pi
_GAUSS_FINE = np.polynomial.legendre.leggauss(8)
_GAUSS_COARSE = np.polynomial.legendre.leggauss(6)


@dataclass
class LimitEstimate:
    """
    Numerical verdict on a limit or limsup along t → ∞

    verdict is one of converges_to_zero, converges_positive, bounded,
    diverges, inconclusive. Values are kept in log space as well because the
    exponential families under- and overflow in linear space.
    """

    verdict: str
    samples: List[Tuple[float, float]]
    fitted_slope: float
    log_values: List[float] = field(default_factory=list)
    threshold: Optional[float] = None
    window: Tuple[float, float] = (0.0, 0.0)
    value: Optional[float] = None
    passed: bool = False
    criterion: str = ''

    def to_dict(self) -> Dict:
        return {
            'verdict': self.verdict,
            'passed': self.passed,
            'fitted_slope': self.fitted_slope,
            'threshold': self.threshold,
            'window': list(self.window),
            'value': self.value,
            'criterion': self.criterion,
            'samples': [[t, v] for t, v in self.samples],
            'log_values': list(self.log_values),
        }


class GrowthProfile:
    """
    Cached asymptotic calculus of a nonlinearity

    Memoizes every directly computed ψ/φ integral in a lock-protected table;
    the batched evaluators (psi_many, phi_many) never write to it, so values
    do not depend on evaluation order.
    """

    def __init__(
        self,
        f: Nonlinearity,
        t0: Optional[float] = None,
        quad_rel_tol: float = 1e-9,
        tail_cap: float = 1e8,
        sample_cap: float = 1e6,
        exp_span: float = 400.0,
    ):
        """
        Args:
            f: Nonlinearity
            t0: Lower threshold of the ψ/φ calculus (default 10 × positivity threshold)
            quad_rel_tol: Relative tolerance of every improper integral
            tail_cap: Truncation point before tail extrapolation
            sample_cap: Largest t sampled by the limit checks
            exp_span: Length of the linear grid of the exponential-weight check, in units of 1/α
        """
        if not quad_rel_tol > 0:
            raise PreconditionError(f"quad_rel_tol must be positive, got {quad_rel_tol}")
        if not tail_cap > 0 or not sample_cap > 0:
            raise PreconditionError("tail_cap and sample_cap must be positive")

        self.f = f
        self.quad_rel_tol = float(quad_rel_tol)
        self.tail_cap = float(tail_cap)
        self.exp_span = float(exp_span)
        self.threshold = positivity_threshold(f)

        if t0 is None:
            t0 = 10.0 * self.threshold
            if f.family == 'tabulated':
                t0 = min(t0, f.domain[1])
        if not t0 > self.threshold and not (f.family == 'tabulated' and t0 >= self.threshold):
            raise PreconditionError(f"t0={t0} must exceed the positivity threshold {self.threshold}")
        self.t0 = float(t0)

        if f.family == 'tabulated':
            sample_cap = min(sample_cap, f.domain[1])
        self.sample_cap = float(sample_cap)

        self._memo: Dict[Tuple[float, float], Dict] = {}
        self._lock = threading.Lock()

        if f.missing_mass:
            logger.warning("%s starts at t=%g; F omits the mass on [0, t_min]", f.label, f.domain[0])

    def to_dict(self) -> Dict:
        return {
            'nonlinearity': self.f.to_dict(),
            't0': self.t0,
            'positivity_threshold': self.threshold,
            'quad_rel_tol': self.quad_rel_tol,
            'tail_cap': self.tail_cap,
            'sample_cap': self.sample_cap,
        }

    # ------------------------------------------------------------------
    # log F with power extrapolation past the end of a table
    # ------------------------------------------------------------------

    def log_F(self, t):
        hi = self.f.domain[1]
        if self.f.family != 'tabulated' or np.all(np.asarray(t) <= hi):
            return self.f.log_antiderivative(t)

        arr = np.asarray(t, dtype=float)
        inside = np.minimum(arr, hi)
        values = np.asarray(self.f.log_antiderivative(inside), dtype=float)
        slope = self._table_end_slope()
        with np.errstate(divide='ignore'):
            values = np.where(arr > hi, values + slope * np.log(arr / hi), values)
        return float(values) if np.ndim(t) == 0 else values

    def _table_end_slope(self) -> float:
        lo, hi = self.f.domain
        start = max(hi / 10.0, 0.5 * (lo + hi), self.threshold)
        return float((self.f.log_antiderivative(hi) - self.f.log_antiderivative(start)) / math.log(hi / start))

    def F(self, t):
        return self.f.antiderivative(t)

    # ------------------------------------------------------------------
    # Segment quadrature
    # ------------------------------------------------------------------

    def _step(self, x: float, p: float) -> float:
        width = x
        rate = self.f.exponential_rate
        if rate:
            width = min(width, SEGMENT_DECAY / (p * rate))
        return width

    def _log_integrand(self, s: np.ndarray, p: float, anchor: float) -> np.ndarray:
        return -p * (np.asarray(self.log_F(s), dtype=float) - anchor)

    def _segment(self, a: float, b: float, p: float, anchor: float, abs_floor: float) -> Tuple[float, float]:
        log_F = self.log_F

        def integrand(s):
            return math.exp(-p * (float(log_F(s)) - anchor))

        points = None
        limit = 200
        if self.f.is_oscillatory:
            k0, k1 = math.floor(a / math.pi) + 1, math.ceil(b / math.pi) - 1
            if k1 - k0 + 1 > PERIOD_BREAKPOINTS:
                value, error = self._period_rule(a, b, p, anchor)
                self._check_segment(a, b, p, value, error, abs_floor)
                return value, error
            if k1 >= k0:
                points = [k * math.pi for k in range(k0, k1 + 1)]
                limit = max(limit, 4 * len(points) + 50)

        with warnings.catch_warnings():
            warnings.simplefilter('ignore', integrate.IntegrationWarning)
            value, error = integrate.quad(
                integrand, a, b,
                epsabs=abs_floor, epsrel=0.1 * self.quad_rel_tol,
                limit=limit, points=points,
            )
        self._check_segment(a, b, p, value, error, abs_floor)
        return value, error

    def _check_segment(self, a: float, b: float, p: float, value: float, error: float, abs_floor: float):
        allowed = 10.0 * max(abs_floor, 0.1 * self.quad_rel_tol * abs(value))
        if not math.isfinite(value) or error > allowed:
            raise QuadratureError(f"Segment [{a:.6g}, {b:.6g}] of ∫F^-{p:g} did not converge", value, error)

    def _period_rule(self, a: float, b: float, p: float, anchor: float) -> Tuple[float, float]:
        """
        Gauss-Legendre on every interval between consecutive multiples of π

        Two rule orders per interval; the error estimate is the summed
        difference. Blocks are summed in a fixed order.
        """
        k0, k1 = math.floor(a / math.pi) + 1, math.ceil(b / math.pi) - 1
        knots = np.concatenate(([a], math.pi * np.arange(k0, k1 + 1, dtype=float), [b]))
        value = 0.0
        error = 0.0
        for start in range(0, len(knots) - 1, PERIOD_BLOCK):
            lo = knots[start:start + PERIOD_BLOCK]
            hi = knots[start + 1:start + PERIOD_BLOCK + 1]
            lo = lo[:len(hi)]
            mid = 0.5 * (hi + lo)[:, None]
            half = 0.5 * (hi - lo)
            fine = np.exp(self._log_integrand(mid + half[:, None] * _GAUSS_FINE[0], p, anchor)) @ _GAUSS_FINE[1]
            coarse = np.exp(self._log_integrand(mid + half[:, None] * _GAUSS_COARSE[0], p, anchor)) @ _GAUSS_COARSE[1]
            value += float(np.sum(half * fine))
            error += float(np.sum(half * np.abs(fine - coarse)))
        return value, error

    def _envelope_rest(self, x: float, p: float, anchor: float) -> Optional[Tuple[float, float]]:
        """
        ∫_x^∞ from the period-averaged integrand of an oscillatory family

        Averages the integrand over full 2π windows centred at x, √2·x and
        2x, fits a power law through the averages and integrates it. The
        uncertainty adds the spread of the two fitted exponents, the
        oscillation over the partial period at x and the offset between a
        window mean and the smooth envelope at its centre.

        Returns:
            Tuple (rest, uncertainty), or None when the averages do not decay
            faster than 1/s
        """
        centers = np.array([x, math.sqrt(2.0) * x, 2.0 * x])
        nodes = np.concatenate([
            (centers[:, None] + shift) + math.pi / 2.0 * (1.0 + _GAUSS_FINE[0])[None, :]
            for shift in (-math.pi, 0.0)
        ], axis=1)
        weights = 0.5 * np.concatenate([_GAUSS_FINE[1], _GAUSS_FINE[1]])

        log_g = self._log_integrand(nodes, p, anchor)
        if not np.all(np.isfinite(log_g)):
            return None
        log_mean = special.logsumexp(log_g, b=weights / 2.0, axis=1)

        steps = np.log(centers[1:] / centers[:-1])
        m_near, m_far = -np.diff(log_mean) / steps
        if min(m_near, m_far) <= 1.0 + 1e-3:
            return None

        mean_x = math.exp(log_mean[0])
        rest = mean_x * x / (m_near - 1.0)
        other = mean_x * x / (m_far - 1.0)
        window = np.exp(log_g[0])
        spread = math.pi * float(np.max(window) - np.min(window))
        offset = rest * math.pi ** 2 / 6.0 * m_near * (m_near + 1.0) / x ** 2
        return rest, abs(rest - other) + spread + offset

    def _remaining(self, a: float, b: float, p: float, anchor: float) -> float:
        """Power-fit estimate of ∫_b^∞ F^{-p} in units of F(anchor point)^{-p}"""
        m = (float(self.log_F(b)) - float(self.log_F(a))) / math.log(b / a)
        if p * m - 1.0 <= 0.0:
            return math.inf
        return math.exp(-p * (float(self.log_F(b)) - anchor)) * b / (p * m - 1.0)

    def _envelope_close(self, x: float, b: float, p: float, anchor: float, total: float,
                        extrapolate: bool) -> Optional[Tuple[float, float]]:
        if not self.f.is_oscillatory or x < ENVELOPE_START:
            return None
        near = self._envelope_rest(x, p, anchor)
        if near is None:
            return None
        rest, uncertainty = near
        if not extrapolate:
            far = self._envelope_rest(b, p, anchor)
            if far is None:
                return None
            rest, uncertainty = rest - far[0], uncertainty + far[1]
            if rest <= 0.0:
                return None
        if uncertainty <= 0.1 * self.quad_rel_tol * (total + rest):
            return rest, uncertainty
        return None

    def _accumulate(self, a: float, b: float, p: float, anchor: float,
                    extrapolate: bool = False) -> Tuple[float, float, float, float]:
        """
        ∫_a^b exp(-p(log F(s) - anchor)) ds on doubling segments

        Stops early once the rest of the range is negligible. Oscillatory
        families also close the range from the period-averaged envelope as
        soon as its uncertainty fits the error budget; with extrapolate the
        envelope covers [x, ∞) and is returned as the skipped rest, otherwise
        it covers [x, b] and is added to the value.

        Returns:
            Tuple (value, error estimate, end point reached, estimate of the skipped rest)
        """
        total = 0.0
        error = 0.0
        x = a
        while x < b:
            closed = self._envelope_close(x, b, p, anchor, total, extrapolate)
            if closed is not None:
                piece, piece_error = closed
                if extrapolate:
                    return total, error + piece_error, x, piece
                return total + piece, error + piece_error, b, 0.0

            y = min(b, x + self._step(x, p))
            floor = 1e-3 * self.quad_rel_tol * total
            piece, piece_error = self._segment(x, y, p, anchor, floor)
            total += piece
            error += piece_error
            if y < b:
                rest = self._remaining(x, y, p, anchor)
                if rest <= 1e-3 * self.quad_rel_tol * total:
                    return total, error, y, rest
            x = y
        return total, error, b, 0.0

    def log_span(self, a: float, b: float, p: float) -> float:
        """log ∫_a^b F(s)^{-p} ds"""
        anchor = float(self.log_F(a))
        piece = self._accumulate(a, b, p, anchor)[0]
        if piece <= 0.0:
            return -math.inf
        return -p * anchor + math.log(piece)

    def _decade_slope(self, t: float) -> float:
        return (float(self.log_F(t)) - float(self.log_F(t / 10.0))) / math.log(10.0)

    def _log_tail_at(self, t: float, p: float, slope: float) -> float:
        if p * slope <= 1.0 + 1e-3:
            raise DivergenceError(
                f"∫^∞ F^-{p:g} diverges for {self.f.label} (local growth exponent {slope:.4g})"
            )
        return -p * float(self.log_F(t)) + math.log(t) - math.log(p * slope - 1.0)

    def _log_integral(self, t: float, p: float) -> Dict:
        key = (p, float(t))
        with self._lock:
            cached = self._memo.get(key)
        if cached is not None:
            return cached

        if t >= self.tail_cap:
            log_value = self._log_tail_at(t, p, self._decade_slope(t))
            detail = {'log_value': log_value, 'raw': 0.0, 'tail': 1.0, 'error': 0.0, 'end': t}
        else:
            anchor = float(self.log_F(t))
            raw, error, end, rest = self._accumulate(t, self.tail_cap, p, anchor, extrapolate=True)

            if end < self.tail_cap:
                tail = rest
            else:
                last = self._decade_slope(end)
                previous = self._decade_slope(end / 10.0)
                tail = math.exp(self._log_tail_at(end, p, last) + p * anchor)
                try:
                    tail_second = math.exp(self._log_tail_at(end, p, previous) + p * anchor)
                except DivergenceError:
                    tail_second = math.inf
                if abs(tail - tail_second) > self.quad_rel_tol * (raw + tail):
                    scale = math.exp(-p * anchor)
                    raise InconclusiveError(
                        f"Tail fits of ∫F^-{p:g} from t={t:g} disagree",
                        (raw + tail) * scale,
                        (raw + tail_second) * scale,
                    )

            log_value = -p * anchor + math.log(raw + tail)
            detail = {'log_value': log_value, 'raw': raw, 'tail': tail, 'error': error, 'end': end,
                      'scale_log': -p * anchor}

        with self._lock:
            if len(self._memo) >= MEMO_LIMIT:
                self._memo.clear()
            self._memo[key] = detail
        return detail

    # ------------------------------------------------------------------
    # ψ and φ
    # ------------------------------------------------------------------

    def log_psi(self, t: float) -> float:
        if t < self.t0:
            raise DomainError(f"ψ is defined for t ≥ t0={self.t0:g}, got {t}")
        return self._log_integral(t, PSI_POWER)['log_value'] - 0.5 * math.log(2.0)

    def log_phi(self, t: float) -> float:
        return self._log_integral(max(t, self.t0), PHI_POWER)['log_value']

    def psi(self, t: float) -> float:
        return math.exp(self.log_psi(t))

    def phi(self, t: float) -> float:
        return math.exp(self.log_phi(t))

    def psi_detail(self, t: float) -> Dict:
        """Raw truncated integral, tail estimate and corrected ψ(t)"""
        if t < self.t0:
            raise DomainError(f"ψ is defined for t ≥ t0={self.t0:g}, got {t}")
        detail = self._log_integral(t, PSI_POWER)
        scale = math.exp(detail.get('scale_log', 0.0)) / math.sqrt(2.0)
        return {
            't': t,
            'raw': detail['raw'] * scale,
            'tail': detail['tail'] * scale,
            'value': math.exp(detail['log_value']) / math.sqrt(2.0),
            'error_estimate': detail['error'] * scale,
            'truncated_at': detail['end'],
        }

    def _log_many(self, ts: Sequence[float], p: float) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        order = np.argsort(ts)
        sorted_ts = ts[order]
        out = np.empty(len(ts))

        current = self._log_integral(float(sorted_ts[-1]), p)['log_value']
        out[order[-1]] = current
        for i in range(len(sorted_ts) - 2, -1, -1):
            a, b = float(sorted_ts[i]), float(sorted_ts[i + 1])
            if b > a:
                current = np.logaddexp(current, self.log_span(a, b, p))
            out[order[i]] = current
        return out

    def log_psi_many(self, ts: Sequence[float]) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < self.t0):
            raise DomainError(f"ψ is defined for t ≥ t0={self.t0:g}")
        return self._log_many(ts, PSI_POWER) - 0.5 * math.log(2.0)

    def log_phi_many(self, ts: Sequence[float]) -> np.ndarray:
        return self._log_many(np.maximum(np.asarray(ts, dtype=float), self.t0), PHI_POWER)

    def psi_many(self, ts: Sequence[float]) -> np.ndarray:
        return np.exp(self.log_psi_many(ts))

    def phi_many(self, ts: Sequence[float]) -> np.ndarray:
        return np.exp(self.log_phi_many(ts))


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------

def psi(gp: GrowthProfile, t: float) -> float:
    return gp.psi(t)


def phi(gp: GrowthProfile, t: float) -> float:
    return gp.phi(t)


def psi_inverse(gp: GrowthProfile, d: float) -> float:
    """
    Solve ψ(t) = d for t

    Brent's method on log t against log ψ, which is strictly decreasing.

    Args:
        gp: GrowthProfile
        d: Target value in (0, ψ(t0)]

    Returns:
        t with |ψ(t) - d| ≤ 1e-10·d
    """
    if not d > 0:
        raise DomainError(f"ψ-inversion needs d > 0, got {d}")

    top = gp.log_psi(gp.t0)
    target = math.log(d)
    if target > top + 1e-12:
        raise DomainError(f"d={d:g} exceeds ψ(t0)={math.exp(top):g}")
    if target >= top:
        return gp.t0

    lo = math.log(gp.t0)
    hi = lo + 1.0
    while gp.log_psi(math.exp(hi)) > target:
        lo, hi = hi, hi + 2.0 * (hi - lo)
        if hi > 690.0:
            raise DomainError(f"ψ does not reach d={d:g} before t=e^690")

    root = optimize.brentq(
        lambda x: gp.log_psi(math.exp(x)) - target,
        lo, hi, xtol=1e-14, rtol=4.0 * np.finfo(float).eps, maxiter=200,
    )
    return math.exp(root)


def _geometric(lo: float, hi: float, per_decade: int = PER_DECADE) -> np.ndarray:
    count = max(int(math.ceil(per_decade * math.log10(hi / lo))) + 1, 3)
    return np.geomspace(lo, hi, count)


def _fit(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(x, y, 1)[0])


def keller_osserman(gp: GrowthProfile, doublings: int = 24, window: int = 8) -> LimitEstimate:
    """
    Classify convergence of ∫^∞ ds/√F

    Integrates over doubling intervals [T, 2T] and fits the geometric decay
    ratio of the last increments: below 0.97 converges, 0.99 or above
    diverges, in between inconclusive.
    """
    start = max(gp.t0, 1.0)
    knots = start * 2.0 ** np.arange(doublings + 1)
    log_increments = []
    for a, b in zip(knots[:-1], knots[1:]):
        log_increments.append(gp.log_span(float(a), float(b), PSI_POWER))

    log_increments = np.array(log_increments)
    tail = log_increments[-window:]
    if np.all(np.isfinite(tail)):
        mean_step = float(np.mean(np.diff(tail)))
    else:
        mean_step = -math.inf
    ratio = math.exp(mean_step)

    value = None
    if ratio < 0.97:
        verdict = 'converges_positive'
        try:
            value = math.sqrt(2.0) * gp.psi(gp.t0)
        except LabError as exc:
            logger.warning("KO increments decay but ψ(t0) failed: %s", exc)
            verdict = 'inconclusive'
    elif ratio >= 0.99:
        verdict = 'diverges'
    else:
        verdict = 'inconclusive'

    estimate = LimitEstimate(
        verdict=verdict,
        samples=[(float(b), float(np.exp(v))) for b, v in zip(knots[1:], log_increments)],
        log_values=[float(v) for v in log_increments],
        fitted_slope=mean_step / math.log(2.0) if math.isfinite(mean_step) else -math.inf,
        threshold=0.97,
        window=(float(knots[0]), float(knots[-1])),
        value=value,
        passed=verdict == 'converges_positive',
        criterion='geometric ratio of doubling increments < 0.97 converges, >= 0.99 diverges',
    )
    logger.info("Keller-Osserman for %s: %s (ratio %.4g)", gp.f.label, verdict, ratio)
    return estimate


def _decay_verdict(log_x: np.ndarray, log_q: np.ndarray, last: np.ndarray, flat: float) -> Tuple[str, float]:
    slope = _fit(log_x[last], log_q[last])
    decreasing = bool(np.all(np.diff(log_q[last]) < 0))
    increasing = bool(np.all(np.diff(log_q[last]) > 0))
    if slope < -flat and decreasing:
        return 'converges_to_zero', slope
    if slope > flat and increasing:
        return 'diverges', slope
    if abs(slope) <= flat:
        return 'converges_positive', slope
    return 'inconclusive', slope


def check_condition_h2(gp: GrowthProfile, p: float) -> LimitEstimate:
    """
    Q(t) = t^{(p-1)/2}·φ(t)/√F(t) → 0 ?

    Samples Q on a geometric grid up to sample_cap and fits the log-log
    slope over the last decade.
    """
    if not p > 1:
        raise PreconditionError(f"Condition needs p > 1, got {p}")

    ts = _geometric(max(gp.t0, 1.0), gp.sample_cap)
    log_q = 0.5 * (p - 1.0) * np.log(ts) + gp.log_phi_many(ts) - 0.5 * np.asarray(gp.log_F(ts))
    last = ts >= ts[-1] / 10.0
    verdict, slope = _decay_verdict(np.log(ts), log_q, last, flat=0.05)

    threshold = float(np.max(log_q)) + math.log(1e-2)
    if verdict == 'converges_to_zero' and log_q[-1] > threshold:
        verdict = 'inconclusive'

    estimate = LimitEstimate(
        verdict=verdict,
        samples=[(float(t), float(np.exp(v))) for t, v in zip(ts, log_q)],
        log_values=[float(v) for v in log_q],
        fitted_slope=slope,
        threshold=float(np.exp(threshold)),
        window=(float(ts[0]), float(ts[-1])),
        passed=verdict == 'converges_to_zero',
        criterion='log-log slope over last decade < -0.05, decreasing, last value below 1% of the maximum',
    )
    logger.info("power-weighted condition (p=%g) for %s: %s, slope %.4g", p, gp.f.label, verdict, slope)
    return estimate


def check_condition_exp(gp: GrowthProfile, alpha: float, points: int = 201) -> LimitEstimate:
    """
    Q(t) = e^{αt/2}·φ(t)/√F(t) → 0 ?

    Linear grid in t over exp_span/α; the slope of log Q is fitted against t.
    """
    if not alpha > 0:
        raise PreconditionError(f"Condition needs alpha > 0, got {alpha}")

    start = max(gp.t0, 1.0)
    stop = start + gp.exp_span / alpha
    if gp.f.family == 'tabulated':
        stop = min(stop, gp.sample_cap)
    ts = np.linspace(start, stop, points)
    log_q = 0.5 * alpha * ts + gp.log_phi_many(ts) - 0.5 * np.asarray(gp.log_F(ts))
    last = ts >= stop - 0.1 * (stop - start)
    verdict, slope = _decay_verdict(ts, log_q, last, flat=1e-2 * alpha)

    threshold = float(np.max(log_q)) + math.log(1e-2)
    if verdict == 'converges_to_zero' and log_q[-1] > threshold:
        verdict = 'inconclusive'

    with np.errstate(over='ignore', under='ignore'):
        values = np.exp(log_q)
    estimate = LimitEstimate(
        verdict=verdict,
        samples=[(float(t), float(v)) for t, v in zip(ts, values)],
        log_values=[float(v) for v in log_q],
        fitted_slope=slope,
        threshold=float(np.exp(threshold)),
        window=(float(start), float(stop)),
        passed=verdict == 'converges_to_zero',
        criterion='slope of log Q in t over last tenth of span < -0.01·alpha, decreasing',
    )
    logger.info("exponential-weighted condition (alpha=%g) for %s: %s", alpha, gp.f.label, verdict)
    return estimate


def _bounded_estimate(ts: np.ndarray, log_a: np.ndarray, criterion: str) -> LimitEstimate:
    running = np.maximum.accumulate(log_a)
    reference = running[ts <= ts[-1] / 100.0]
    growth = running[-1] - (reference[-1] if len(reference) else running[0])
    last = ts >= ts[-1] / 10.0
    slope = _fit(np.log(ts[last]), log_a[last])

    if growth < math.log(1.01):
        verdict = 'bounded'
    elif slope > 0.05:
        verdict = 'diverges'
    else:
        verdict = 'inconclusive'

    with np.errstate(over='ignore', under='ignore'):
        values = np.exp(log_a)
    return LimitEstimate(
        verdict=verdict,
        samples=[(float(t), float(v)) for t, v in zip(ts, values)],
        log_values=[float(v) for v in log_a],
        fitted_slope=slope,
        threshold=1.01,
        window=(float(ts[0]), float(ts[-1])),
        value=float(np.exp(running[-1])) if running[-1] < 700 else math.inf,
        passed=verdict == 'bounded',
        criterion=criterion,
    )


def check_gamma_conditions(gp: GrowthProfile, gamma: float) -> Tuple[LimitEstimate, LimitEstimate, LimitEstimate]:
    """
    The three γ-conditions

    c1: limsup ψ^{-γ}·φ < ∞
    c2: limsup φ·ψ^{2-γ}·L < ∞, L the Lipschitz envelope of f on [t0, t]
    c3: ψ^{2(1-γ)}·F → ∞

    A limsup is declared bounded when the running maximum grows by less
    than 1% over the last two decades of the sample grid.
    """
    ts = _geometric(max(gp.t0, 1.0), gp.sample_cap)
    log_psi = gp.log_psi_many(ts)
    log_phi = gp.log_phi_many(ts)
    log_F = np.asarray(gp.log_F(ts))
    log_L = lipschitz_profile(gp.f, gp.t0, ts)

    c1 = _bounded_estimate(ts, -gamma * log_psi + log_phi, 'running max of psi^-gamma phi grows < 1% over last two decades')
    c2 = _bounded_estimate(ts, log_phi + (2.0 - gamma) * log_psi + log_L,
                           'running max of phi psi^(2-gamma) L grows < 1% over last two decades')

    log_b = 2.0 * (1.0 - gamma) * log_psi + log_F
    last = ts >= ts[-1] / 10.0
    slope = _fit(np.log(ts[last]), log_b[last])
    increasing = bool(np.all(np.diff(log_b[last]) > 0))
    verdict = 'diverges' if slope > 0.05 and increasing else ('converges_positive' if abs(slope) <= 0.05 else 'inconclusive')
    with np.errstate(over='ignore', under='ignore'):
        values = np.exp(log_b)
    c3 = LimitEstimate(
        verdict=verdict,
        samples=[(float(t), float(v)) for t, v in zip(ts, values)],
        log_values=[float(v) for v in log_b],
        fitted_slope=slope,
        window=(float(ts[0]), float(ts[-1])),
        passed=verdict == 'diverges',
        criterion='log-log slope of psi^(2(1-gamma)) F over last decade > 0.05, increasing',
    )

    logger.info("gamma=%g conditions for %s: %s %s %s", gamma, gp.f.label, c1.verdict, c2.verdict, c3.verdict)
    return c1, c2, c3


def check_phi_psi_inequality(gp: GrowthProfile, ts: Sequence[float]) -> Dict:
    """
    φ(t) ≤ √(2/F(t))·ψ(t) at every sampled t > t0

    Holds wherever F is nondecreasing beyond t.
    """
    ts = np.asarray([t for t in ts if t > gp.t0], dtype=float)
    if len(ts) == 0:
        raise PreconditionError("No sample above t0")
    log_lhs = gp.log_phi_many(ts)
    log_rhs = 0.5 * (math.log(2.0) - np.asarray(gp.log_F(ts))) + gp.log_psi_many(ts)
    log_ratio = log_lhs - log_rhs
    return {
        'holds': bool(np.all(log_ratio <= 1e-9)),
        'worst_ratio': float(np.exp(np.max(log_ratio))),
        'worst_t': float(ts[int(np.argmax(log_ratio))]),
        'samples': len(ts),
    }


def asymptotics_table(gp: GrowthProfile, ts: Sequence[float], p: float,
                      alpha: Optional[float] = None) -> pd.DataFrame:
    """
    Table behind asymptotics.csv

    Columns: t, F, psi, phi, Q_h2, Q_exp (Q_exp empty without alpha).
    """
    ts = np.asarray(ts, dtype=float)
    log_F = np.asarray(gp.log_F(ts))
    log_phi = gp.log_phi_many(ts)
    with np.errstate(over='ignore', under='ignore'):
        q_h2 = np.exp(0.5 * (p - 1.0) * np.log(ts) + log_phi - 0.5 * log_F)
        q_exp = np.exp(0.5 * alpha * ts + log_phi - 0.5 * log_F) if alpha else np.full(len(ts), np.nan)
        return pd.DataFrame({
            't': ts,
            'F': np.exp(log_F),
            'psi': gp.psi_many(ts),
            'phi': np.exp(log_phi),
            'Q_h2': q_h2,
            'Q_exp': q_exp,
        })


class InverseTable:
    """
    Monotone interpolant of ψ^{-1} on [d_min, ψ(t_lo)]

    Tabulates log ψ on a geometric t grid with one sweep of log_psi_many and
    interpolates log t against log ψ with a PCHIP spline.
    """

    def __init__(self, gp: GrowthProfile, t_lo: float, d_min: float = 1e-12, per_decade: int = 100):
        t_lo = max(float(t_lo), gp.t0)
        t_hi = 2.0 * t_lo
        for _ in range(400):
            if gp.log_psi(t_hi) <= math.log(d_min):
                break
            t_hi *= 2.0
        else:
            raise DomainError(f"ψ does not fall below d={d_min:g}")

        ts = _geometric(t_lo, t_hi, per_decade)
        log_psi = gp.log_psi_many(ts)
        self._spline = interpolate.PchipInterpolator(log_psi[::-1], np.log(ts[::-1]))
        self.d_range = (float(np.exp(log_psi[-1])), float(np.exp(log_psi[0])))

    def __call__(self, d):
        arr = np.asarray(d, dtype=float)
        lo, hi = self.d_range
        if np.any(arr < lo * (1 - 1e-12)) or np.any(arr > hi * (1 + 1e-12)):
            raise DomainError(f"d outside the tabulated range [{lo:.3g}, {hi:.3g}]")
        out = np.exp(self._spline(np.log(arr)))
        return float(out) if np.ndim(d) == 0 else out

"""
Nonlinearity Module
===================

Handles:
- The right-hand side f of Δu = f(u): powers, exponentials, their
  (1 + sin t) modulated variants and tabulated data
- Derivative f' and antiderivative F(t) = ∫_0^t f(s) ds
- Positivity threshold scan
- Shifted-monotonicity checks (f + K t^p or f + K e^{αt} nondecreasing)
- Lipschitz envelope of f on [t0, t]
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate, special

from .errors import DomainError, PreconditionError, QuadratureError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

FAMILIES = (
    'power',
    'oscillatory_power',
    'exponential',
    'oscillatory_exponential',
    'tabulated',
)

# Sampling defaults shared by every scan in this module
GRID_RATIO = 1.0 + 1e-3
POINTS_PER_PERIOD = 64
MAX_CHUNK_POINTS = 1_000_000
DEFAULT_WINDOW = (1e2, 1e6)

# Below this t the sine moment is summed from its Taylor series
_SERIES_CUTOFF = 2.0
_SERIES_TERMS = 30


@dataclass(frozen=True)
class Nonlinearity:
    """
    The function f together with derivative and antiderivative access

    Build instances through the classmethods (``Nonlinearity.power(3)``...)
    so that parameters are validated once.
    """

    family: str
    q: Optional[float] = None
    alpha: Optional[float] = None
    table: Optional[Tuple[Tuple[float, float], ...]] = None
    derivative_mode: str = 'closed_form'
    table_path: Optional[str] = None
    _table_cache: Dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PreconditionError(f"Unknown nonlinearity family '{self.family}'")

        if self.derivative_mode not in ('closed_form', 'finite_difference'):
            raise PreconditionError(f"Unknown derivative mode '{self.derivative_mode}'")

        if self.family in ('power', 'oscillatory_power'):
            if self.q is None or not self.q > 0:
                raise PreconditionError(f"{self.family} needs q > 0, got {self.q}")

        if self.family in ('exponential', 'oscillatory_exponential'):
            if self.alpha is None or not self.alpha > 0:
                raise PreconditionError(f"{self.family} needs alpha > 0, got {self.alpha}")

        if self.family == 'tabulated':
            if not self.table or len(self.table) < 2:
                raise PreconditionError("Tabulated nonlinearity needs at least two points")
            ts = np.array([p[0] for p in self.table], dtype=float)
            fs = np.array([p[1] for p in self.table], dtype=float)
            if np.any(np.diff(ts) <= 0):
                raise PreconditionError("Tabulated points must be strictly increasing in t")

            # Trapezoid of the piecewise-linear interpolant, anchored at t_min
            cumulative = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(ts) * (fs[1:] + fs[:-1]))))
            self._table_cache.update({'t': ts, 'f': fs, 'F': cumulative})

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def power(cls, q: float, **kwargs) -> 'Nonlinearity':
        return cls(family='power', q=float(q), **kwargs)

    @classmethod
    def oscillatory_power(cls, q: float, **kwargs) -> 'Nonlinearity':
        return cls(family='oscillatory_power', q=float(q), **kwargs)

    @classmethod
    def exponential(cls, alpha: float, **kwargs) -> 'Nonlinearity':
        return cls(family='exponential', alpha=float(alpha), **kwargs)

    @classmethod
    def oscillatory_exponential(cls, alpha: float, **kwargs) -> 'Nonlinearity':
        return cls(family='oscillatory_exponential', alpha=float(alpha), **kwargs)

    @classmethod
    def tabulated(cls, points: Sequence[Tuple[float, float]], table_path: Optional[str] = None) -> 'Nonlinearity':
        return cls(
            family='tabulated',
            table=tuple((float(t), float(v)) for t, v in points),
            derivative_mode='finite_difference',
            table_path=table_path,
        )

    @classmethod
    def from_csv(cls, path: str) -> 'Nonlinearity':
        """Load a tabulated nonlinearity from a two-column CSV with header ``t,f``"""
        return cls.tabulated(load_table(path), table_path=str(path))

    # ------------------------------------------------------------------
    # Descriptive properties
    # ------------------------------------------------------------------

    @property
    def is_oscillatory(self) -> bool:
        return self.family in ('oscillatory_power', 'oscillatory_exponential')

    @property
    def exponential_rate(self) -> Optional[float]:
        """α for the exponential families, None otherwise"""
        if self.family in ('exponential', 'oscillatory_exponential'):
            return self.alpha
        return None

    @property
    def domain(self) -> Tuple[float, float]:
        if self.family in ('power', 'oscillatory_power'):
            return 0.0, math.inf
        if self.family == 'tabulated':
            ts = self._table_cache['t']
            return float(ts[0]), float(ts[-1])
        return -math.inf, math.inf

    @property
    def missing_mass(self) -> bool:
        """True when F misses ∫_0^{t_min} f because the table starts above 0"""
        return self.family == 'tabulated' and self.domain[0] > 0.0

    @property
    def label(self) -> str:
        names = {
            'power': 'Power',
            'oscillatory_power': 'OscillatoryPower',
            'exponential': 'Exponential',
            'oscillatory_exponential': 'OscillatoryExponential',
            'tabulated': 'Tabulated',
        }
        if self.family in ('power', 'oscillatory_power'):
            return f"{names[self.family]}(q={self.q:g})"
        if self.family == 'tabulated':
            return f"Tabulated({len(self.table)} points)"
        return f"{names[self.family]}(alpha={self.alpha:g})"

    def to_dict(self) -> Dict:
        data = {'family': self.family, 'derivative_mode': self.derivative_mode}
        if self.q is not None:
            data['q'] = self.q
        if self.alpha is not None:
            data['alpha'] = self.alpha
        if self.family == 'tabulated':
            data['table_path'] = self.table_path
            data['points'] = len(self.table)
            data['missing_mass_below_table'] = self.missing_mass
        return data

    # ------------------------------------------------------------------
    # Pointwise evaluation (scalars or arrays)
    # ------------------------------------------------------------------

    def _check_domain(self, t: ArrayLike) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        lo, hi = self.domain
        if np.any(np.isnan(arr)) or np.any(arr < lo) or np.any(arr > hi):
            bad = arr[(arr < lo) | (arr > hi) | np.isnan(arr)]
            raise DomainError(f"{self.label} evaluated outside its domain [{lo}, {hi}] at t={bad.flat[0]!r}")
        return arr

    @staticmethod
    def _shape_like(t: ArrayLike, values: np.ndarray) -> ArrayLike:
        if np.ndim(t) == 0:
            return float(values)
        return values

    def value(self, t: ArrayLike) -> ArrayLike:
        x = self._check_domain(t)
        with np.errstate(over='ignore', invalid='ignore'):
            if self.family == 'power':
                out = x ** self.q
            elif self.family == 'oscillatory_power':
                out = x ** self.q * (1.0 + np.sin(x))
            elif self.family == 'exponential':
                out = np.exp(self.alpha * x)
            elif self.family == 'oscillatory_exponential':
                out = np.exp(self.alpha * x) * (1.0 + np.sin(x))
            else:
                out = np.interp(x, self._table_cache['t'], self._table_cache['f'])
        return self._shape_like(t, out)

    def derivative(self, t: ArrayLike) -> ArrayLike:
        x = self._check_domain(t)
        if self.derivative_mode == 'finite_difference' or self.family == 'tabulated':
            return self._shape_like(t, self._central_difference(x))

        scaled, scale = self._scaled_derivative_closed(x)
        with np.errstate(over='ignore', invalid='ignore'):
            out = scaled * np.exp(scale)
        return self._shape_like(t, out)

    def scaled_derivative(self, t: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """
        f'(t) split as (f'(t)·e^{-s(t)}, s(t)) so signs survive overflow

        s(t) = αt for the exponential families and 0 otherwise.
        """
        x = self._check_domain(t)
        if self.derivative_mode == 'finite_difference' or self.family == 'tabulated':
            scale = np.zeros_like(x) if self.exponential_rate is None else self.exponential_rate * x
            with np.errstate(over='ignore', invalid='ignore'):
                return self._central_difference(x) * np.exp(-scale), scale
        return self._scaled_derivative_closed(x)

    def _scaled_derivative_closed(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        zero = np.zeros_like(x)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            if self.family == 'power':
                return self.q * x ** (self.q - 1.0), zero
            if self.family == 'oscillatory_power':
                return self.q * x ** (self.q - 1.0) * (1.0 + np.sin(x)) + x ** self.q * np.cos(x), zero
            if self.family == 'exponential':
                return np.full_like(x, self.alpha), self.alpha * x
            if self.family == 'oscillatory_exponential':
                return self.alpha * (1.0 + np.sin(x)) + np.cos(x), self.alpha * x
        raise PreconditionError(f"No closed-form derivative for {self.label}")

    def _central_difference(self, x: np.ndarray) -> np.ndarray:
        h = np.maximum(1e-6, 1e-8 * np.abs(x))
        lo, hi = self.domain
        right = np.minimum(x + h, hi)
        left = np.maximum(x - h, lo)
        with np.errstate(over='ignore', invalid='ignore'):
            return (self._raw_value(right) - self._raw_value(left)) / (right - left)

    def _raw_value(self, x: np.ndarray) -> np.ndarray:
        # value() without the domain check, for stencils clipped to the domain
        with np.errstate(over='ignore', invalid='ignore'):
            if self.family == 'tabulated':
                return np.interp(x, self._table_cache['t'], self._table_cache['f'])
            if self.family == 'power':
                return x ** self.q
            if self.family == 'oscillatory_power':
                return x ** self.q * (1.0 + np.sin(x))
            if self.family == 'exponential':
                return np.exp(self.alpha * x)
            return np.exp(self.alpha * x) * (1.0 + np.sin(x))

    def antiderivative(self, t: ArrayLike) -> ArrayLike:
        x = self._check_domain(t)
        with np.errstate(over='ignore', invalid='ignore'):
            if self.family == 'power':
                out = x ** (self.q + 1.0) / (self.q + 1.0)
            elif self.family == 'oscillatory_power':
                out = x ** (self.q + 1.0) / (self.q + 1.0) + sine_moment(self.q, x)
            elif self.family == 'exponential':
                out = np.expm1(self.alpha * x) / self.alpha
            elif self.family == 'oscillatory_exponential':
                a = self.alpha
                out = np.expm1(a * x) / a + (np.exp(a * x) * (a * np.sin(x) - np.cos(x)) + 1.0) / (a * a + 1.0)
            else:
                out = self._table_antiderivative(x)
        return self._shape_like(t, out)

    def log_antiderivative(self, t: ArrayLike) -> ArrayLike:
        """log F(t), evaluated without overflow for the exponential families"""
        x = self._check_domain(t)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            if self.family == 'power':
                out = (self.q + 1.0) * np.log(x) - math.log(self.q + 1.0)
            elif self.family == 'oscillatory_power':
                ratio = sine_moment(self.q, x) / x ** (self.q + 1.0)
                out = (self.q + 1.0) * np.log(x) + np.log(1.0 / (self.q + 1.0) + ratio)
            elif self.family == 'exponential':
                a = self.alpha
                large = a * x > 30.0
                small_part = np.log(np.expm1(np.where(large, 1.0, a * x)) / a)
                large_part = a * x - math.log(a) + np.log1p(-np.exp(-np.where(large, a * x, 30.0)))
                out = np.where(large, large_part, small_part)
            elif self.family == 'oscillatory_exponential':
                a = self.alpha
                # F = e^{αt}·bracket; only meaningful for t > 0
                ax = np.maximum(a * x, 0.0)
                bracket = -np.expm1(-ax) / a + (a * np.sin(x) - np.cos(x) + np.exp(-ax)) / (a * a + 1.0)
                out = np.where(x > 0.0, ax + np.log(bracket), -np.inf)
            else:
                out = np.log(self._table_antiderivative(x))
        return self._shape_like(t, out)

    def log_abs_derivative(self, t: ArrayLike) -> ArrayLike:
        """log |f'(t)|; -inf where f' vanishes"""
        scaled, scale = self.scaled_derivative(t)
        with np.errstate(divide='ignore'):
            out = np.log(np.abs(scaled)) + scale
        return self._shape_like(t, out)

    def _table_antiderivative(self, x: np.ndarray) -> np.ndarray:
        ts = self._table_cache['t']
        fs = self._table_cache['f']
        cumulative = self._table_cache['F']
        idx = np.clip(np.searchsorted(ts, x, side='right') - 1, 0, len(ts) - 2)
        fx = np.interp(x, ts, fs)
        return cumulative[idx] + 0.5 * (x - ts[idx]) * (fs[idx] + fx)

    def table_error_bound(self, t: float) -> float:
        """Trapezoid error bound Σ h³/12·|f''| on [t_min, t] from second divided differences"""
        if self.family != 'tabulated':
            return 0.0
        self._check_domain(t)
        ts = self._table_cache['t']
        fs = self._table_cache['f']
        if len(ts) < 3:
            return 0.0
        slopes = np.diff(fs) / np.diff(ts)
        second = np.abs(np.diff(slopes)) / (0.5 * (ts[2:] - ts[:-2]))
        curvature = np.concatenate(([second[0]], np.maximum(second[:-1], second[1:]), [second[-1]]))
        h = np.diff(ts)
        covered = ts[1:] <= t
        return float(np.sum(h[covered] ** 3 / 12.0 * curvature[covered]))


# ----------------------------------------------------------------------
# Sine moment ∫_0^t s^q sin s ds
# ----------------------------------------------------------------------

def sine_moment(q: float, t: ArrayLike) -> np.ndarray:
    """
    ∫_0^t s^q sin(s) ds for q > 0 and t ≥ 0

    Taylor series for small t; for larger t the upward integration-by-parts
    recurrence from a base exponent in (-1, 0], whose moments come from the
    closed form (exponent 0) or from Fourier tail integrals.
    """
    x = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(x)

    small = x <= _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        total = np.zeros_like(xs)
        for k in range(_SERIES_TERMS):
            power = q + 2 * k + 2
            total += (-1) ** k * xs ** power / (math.factorial(2 * k + 1) * power)
        out[small] = total

    large = ~small
    if np.any(large):
        out[large] = _sine_moment_recurrence(q, x[large])

    if np.ndim(t) == 0:
        return out[0]
    return out


def _sine_moment_recurrence(q: float, x: np.ndarray) -> np.ndarray:
    steps = int(math.ceil(q - 1e-12))
    base = q - steps
    if abs(base) < 1e-12:
        base = 0.0

    if base == 0.0:
        sin_part = 1.0 - np.cos(x)
        cos_part = np.sin(x)
    else:
        nu = base + 1.0
        gamma = special.gamma(nu)
        sin_part = np.empty_like(x)
        cos_part = np.empty_like(x)
        for i, xi in enumerate(x):
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', integrate.IntegrationWarning)
                tail_sin, _ = integrate.quad(lambda s: s ** base, xi, np.inf, weight='sin', wvar=1.0)
                tail_cos, _ = integrate.quad(lambda s: s ** base, xi, np.inf, weight='cos', wvar=1.0)
            sin_part[i] = gamma * math.sin(math.pi * nu / 2.0) - tail_sin
            cos_part[i] = gamma * math.cos(math.pi * nu / 2.0) - tail_cos

    exponent = base
    for _ in range(steps):
        exponent += 1.0
        power = x ** exponent
        sin_part, cos_part = (
            -power * np.cos(x) + exponent * cos_part,
            power * np.sin(x) - exponent * sin_part,
        )
    return sin_part


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------

def evaluate(f: Nonlinearity, t: float) -> Tuple[float, float, float]:
    """
    Evaluate f, f' and F at t

    Args:
        f: Nonlinearity
        t: Point in the domain of f

    Returns:
        Tuple (f(t), f'(t), F(t))
    """
    return float(f.value(t)), float(f.derivative(t)), float(f.antiderivative(t))


def antiderivative_by_quadrature(f: Nonlinearity, t: float, rel_tol: float = 1e-11) -> Tuple[float, float]:
    """
    Adaptive quadrature of f from the left end of its domain (0 or t_min) to t

    Oscillatory families get breakpoints at the multiples of π.

    Returns:
        Tuple (value, error estimate)
    """
    f._check_domain(t)
    lower = max(0.0, f.domain[0])
    if t == lower:
        return 0.0, 0.0

    points = None
    limit = 200
    if f.is_oscillatory:
        multiples = np.arange(math.ceil(lower / math.pi), math.floor(t / math.pi) + 1) * math.pi
        multiples = multiples[(multiples > lower) & (multiples < t)]
        if len(multiples):
            points = multiples
            limit = max(limit, 4 * len(multiples) + 50)
    elif f.family == 'tabulated':
        knots = f._table_cache['t']
        inside = knots[(knots > lower) & (knots < t)]
        if len(inside):
            points = inside
            limit = max(limit, 4 * len(inside) + 50)

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        value, error = integrate.quad(
            lambda s: float(f.value(s)), lower, t,
            epsabs=0.0, epsrel=rel_tol, limit=limit, points=points,
        )

    if not np.isfinite(value) or error > max(100.0 * rel_tol * abs(value), 1e-300):
        raise QuadratureError(f"Quadrature of {f.label} on [{lower}, {t}] did not converge", value, error)
    return value, error


def sampling_chunks(
    f: Nonlinearity,
    lo: float,
    hi: float,
    ratio: float = GRID_RATIO,
    per_period: int = POINTS_PER_PERIOD,
    max_points: int = MAX_CHUNK_POINTS,
) -> Iterator[np.ndarray]:
    """
    Yield sorted sample chunks covering [lo, hi], endpoints included

    Geometric spacing with the given ratio; oscillatory families add a
    uniform grid with per_period points per 2π. Chunks are bounded in size.
    """
    if not hi > lo:
        raise PreconditionError(f"Empty sampling window ({lo}, {hi})")

    spacing = 2.0 * math.pi / per_period if f.is_oscillatory else None
    width = spacing * max_points if spacing else math.inf

    a = lo
    while a < hi:
        b = min(hi, a + width)
        if a > 0.0:
            count = int(math.ceil(math.log(b / a) / math.log(ratio))) + 1
            chunk = np.geomspace(a, b, max(count, 2))
        else:
            chunk = np.linspace(a, b, 4097)
        if spacing:
            chunk = np.union1d(chunk, np.arange(a, b, spacing))
        chunk[-1] = b
        yield chunk
        a = b


def positivity_threshold(f: Nonlinearity, scan_start: float = 1e-3, scan_cap: float = 1e4) -> float:
    """
    Smallest sampled a with f(a) > 0 and f ≥ 0 at every later sample

    The value is a grid surrogate: it depends on the resolution of the scan.

    Raises:
        DomainError: sign changes persist into the last decade of the scan
    """
    if f.family == 'tabulated':
        chunks = [f._table_cache['t']]
        cap = float(f._table_cache['t'][-1])
    else:
        start = max(scan_start, f.domain[0]) if f.domain[0] > -math.inf else scan_start
        chunks = sampling_chunks(f, start, scan_cap)
        cap = scan_cap

    last_negative = None
    candidate = None
    for chunk in chunks:
        values = np.asarray(f.value(chunk))
        negative = np.nonzero(values < 0.0)[0]
        if len(negative):
            last_negative = float(chunk[negative[-1]])
            after = np.nonzero(values[negative[-1] + 1:] > 0.0)[0]
            candidate = float(chunk[negative[-1] + 1 + after[0]]) if len(after) else None
        elif candidate is None:
            positive = np.nonzero(values > 0.0)[0]
            if len(positive):
                candidate = float(chunk[positive[0]])

    persistent = last_negative is not None and (
        last_negative >= cap / 10.0 if f.family != 'tabulated' else last_negative >= cap
    )
    if candidate is None or persistent:
        raise DomainError(f"{f.label} is not positive for large values at this resolution")

    logger.debug("positivity threshold of %s: %g", f.label, candidate)
    return candidate


@dataclass
class MonotonicityVerdict:
    """Outcome of a discrete check that f + shift is nondecreasing on a window"""

    holds: bool
    shift_K: float
    shift_p: float
    witness: Optional[float]
    window: Tuple[float, float]
    shift: str = 'power'
    shift_alpha: Optional[float] = None
    tol_slope: float = 0.0
    min_slope: float = 0.0

    def to_dict(self) -> Dict:
        return {
            'holds': self.holds,
            'shift': self.shift,
            'shift_K': self.shift_K,
            'shift_p': self.shift_p,
            'shift_alpha': self.shift_alpha,
            'witness': self.witness,
            'window': list(self.window),
            'tol_slope': self.tol_slope,
            'min_slope': self.min_slope,
        }


def _shifted_slope(f: Nonlinearity, chunk: np.ndarray, K: float, p: float,
                   shift: str, alpha: Optional[float]) -> np.ndarray:
    scaled, scale = f.scaled_derivative(chunk)
    with np.errstate(over='ignore', under='ignore'):
        if shift == 'power':
            extra = K * p * chunk ** (p - 1.0) * np.exp(-scale)
        else:
            extra = K * alpha * np.exp(alpha * chunk - scale)
    return scaled + extra


def check_shift_monotone(
    f: Nonlinearity,
    K: float,
    p: float = 1.0,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    shift: str = 'power',
    alpha: Optional[float] = None,
    rel_tol: float = 1e-12,
) -> MonotonicityVerdict:
    """
    Check that g(t) = f(t) + K·t^p (or f(t) + K·e^{αt}) is nondecreasing on window

    Samples g' on the dense grid of sampling_chunks. For the exponential
    families g' is scaled by e^{-αt}, which keeps its sign. The slope
    tolerance is rel_tol times the largest sampled |g'|.

    Args:
        f: Nonlinearity
        K: Shift coefficient (≥ 0)
        p: Power of the shift (≥ 1), ignored for the exponential shift
        window: (t_lo, t_hi) with t_lo > 0
        shift: 'power' or 'exponential'
        alpha: Rate of the exponential shift

    Returns:
        MonotonicityVerdict
    """
    t_lo, t_hi = window
    if not t_lo > 0 or not t_hi > t_lo:
        raise PreconditionError(f"Monotonicity window must satisfy 0 < t_lo < t_hi, got {window}")
    if K < 0:
        raise PreconditionError(f"Shift coefficient K must be nonnegative, got {K}")
    if shift == 'power' and p < 1:
        raise PreconditionError(f"Shift power p must be at least 1, got {p}")
    if shift == 'exponential' and not (alpha and alpha > 0):
        raise PreconditionError("Exponential shift needs alpha > 0")
    if shift not in ('power', 'exponential'):
        raise PreconditionError(f"Unknown shift '{shift}'")

    largest = 0.0
    for chunk in sampling_chunks(f, t_lo, t_hi):
        slopes = _shifted_slope(f, chunk, K, p, shift, alpha)
        largest = max(largest, float(np.max(np.abs(slopes))))
    tol = rel_tol * largest

    witness = None
    min_slope = math.inf
    for chunk in sampling_chunks(f, t_lo, t_hi):
        slopes = _shifted_slope(f, chunk, K, p, shift, alpha)
        min_slope = min(min_slope, float(np.min(slopes)))
        if witness is None:
            violated = np.nonzero(slopes < -tol)[0]
            if len(violated):
                witness = float(chunk[violated[0]])

    verdict = MonotonicityVerdict(
        holds=witness is None,
        shift_K=float(K),
        shift_p=float(p),
        witness=witness,
        window=(float(t_lo), float(t_hi)),
        shift=shift,
        shift_alpha=alpha,
        tol_slope=tol,
        min_slope=min_slope,
    )
    logger.info("shift monotonicity of %s (K=%g, p=%g, %s): %s", f.label, K, p, shift, verdict.holds)
    return verdict


def lipschitz_envelope(f: Nonlinearity, t0: float, t: float) -> float:
    """
    Largest |f'| over a dense sample of [t0, t]

    Nondecreasing in t by construction. Overflows to inf for exponential
    families at large t; use lipschitz_profile for log-space values.
    """
    if not t >= t0:
        raise PreconditionError(f"Lipschitz envelope needs t ≥ t0, got t0={t0}, t={t}")
    if t == t0:
        return float(abs(f.derivative(t0)))
    return float(np.exp(lipschitz_profile(f, t0, np.array([t]))[0]))


def lipschitz_profile(f: Nonlinearity, t0: float, ts: np.ndarray) -> np.ndarray:
    """
    log of the running maximum of |f'| on [t0, t] for every t in ts

    One dense pass from t0 to max(ts); ts need not be sorted.
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < t0):
        raise PreconditionError("Every upper limit must be at least t0")

    order = np.argsort(ts)
    sorted_ts = ts[order]
    result = np.full(len(ts), -np.inf)

    top = float(sorted_ts[-1])
    if top == t0:
        result[:] = f.log_abs_derivative(np.full(len(ts), t0))
        return result

    running = -np.inf
    cursor = 0
    for chunk in sampling_chunks(f, t0, top):
        logs = np.asarray(f.log_abs_derivative(chunk))
        cumulative = np.maximum.accumulate(np.maximum(logs, running))
        while cursor < len(sorted_ts) and sorted_ts[cursor] <= chunk[-1]:
            target = sorted_ts[cursor]
            idx = int(np.searchsorted(chunk, target, side='right')) - 1
            best = cumulative[idx] if idx >= 0 else running
            result[order[cursor]] = max(best, float(f.log_abs_derivative(target)))
            cursor += 1
        running = float(cumulative[-1])
    return result


def load_table(path: str) -> Sequence[Tuple[float, float]]:
    """
    Read a two-column CSV (header ``t,f``) into (t, f) pairs

    Args:
        path: CSV file path

    Returns:
        List of (t, f) tuples in file order
    """
    df = pd.read_csv(path)
    missing = {'t', 'f'} - set(df.columns)
    if missing:
        raise PreconditionError(f"Table {path} lacks column(s): {', '.join(sorted(missing))}")
    numeric = df[['t', 'f']].apply(pd.to_numeric, errors='coerce')
    bad = numeric.isna().any(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise PreconditionError(
            f"Table {path} has a non-numeric entry in data row {row + 1}: "
            f"t={df['t'].iloc[row]!r}, f={df['f'].iloc[row]!r}"
        )
    return list(zip(numeric['t'].astype(float), numeric['f'].astype(float)))

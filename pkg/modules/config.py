"""
Configuration Module
====================

Handles:
- ExperimentConfig: one JSON file with sections nonlinearity, quadrature,
  hypotheses, radial, pde, maxprinciple and a top-level output_dir
- Defaults for every key (a file only names what it changes)
- --override section.key=value patches
- Thread count from BLOWUP_LAB_THREADS (.env aware)
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv

from .asymptotics import GrowthProfile
from .errors import ConfigError, LabError
from .nonlinearity import FAMILIES, Nonlinearity
from .radial_solver import RadialSettings

THREADS_ENV = 'BLOWUP_LAB_THREADS'
MAX_DEFAULT_THREADS = 8


@dataclass
class NonlinearityConfig:
    family: str = 'power'
    q: float = 3.0
    alpha: Optional[float] = None
    table_path: Optional[str] = None
    derivative_mode: str = 'closed_form'


@dataclass
class QuadratureConfig:
    rel_tol: float = 1e-9
    tail_cap: float = 1e8
    sample_cap: float = 1e6
    t0: Optional[float] = None
    exp_span: float = 400.0


@dataclass
class HypothesesConfig:
    shift: str = 'power'
    K: float = 1.0
    p: float = 5.0
    window: List[float] = field(default_factory=lambda: [1e2, 1e6])
    condition_p: float = 5.0
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    table_points: List[float] = field(default_factory=lambda: [1e1, 1e2, 1e3, 1e4, 1e5])


@dataclass
class RadialConfig:
    N: int = 2
    eps_R: float = 1e-6
    switch_s: float = 1e-3
    r_max: float = 1e3
    rtol: float = 1e-11
    max_oscillations: int = 200
    boundary_window: float = 1e-2


@dataclass
class PdeConfig:
    n_r: int = 64
    n_theta: int = 64
    grading: float = 0.0
    M_sequence: List[float] = field(default_factory=lambda: [20.0, 40.0, 80.0])
    eps_b: float = 0.1
    m: int = 1
    phase: float = 0.0
    lambdas: List[float] = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    slab_lambda: float = 0.8
    slab_C: float = 10.0
    restriction_h: float = 0.05
    r_probe: float = 0.9


@dataclass
class MaxPrincipleConfig:
    p: float = 4.0
    C0: float = 1.0
    lam: float = 0.95
    C_H: float = 1.0
    exponent: Optional[float] = None
    samples: int = 64
    euler_C0: float = 1.0
    euler_interval: List[float] = field(default_factory=lambda: [1e-6, 0.5])


SECTIONS = {
    'nonlinearity': NonlinearityConfig,
    'quadrature': QuadratureConfig,
    'hypotheses': HypothesesConfig,
    'radial': RadialConfig,
    'pde': PdeConfig,
    'maxprinciple': MaxPrincipleConfig,
}


@dataclass
class ExperimentConfig:
    """Complete experiment configuration"""

    nonlinearity: NonlinearityConfig = field(default_factory=NonlinearityConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    hypotheses: HypothesesConfig = field(default_factory=HypothesesConfig)
    radial: RadialConfig = field(default_factory=RadialConfig)
    pde: PdeConfig = field(default_factory=PdeConfig)
    maxprinciple: MaxPrincipleConfig = field(default_factory=MaxPrincipleConfig)
    output_dir: str = 'output'

    @classmethod
    def from_dict(cls, data: Dict) -> 'ExperimentConfig':
        """
        Build a config from a (partial) dict

        Raises:
            ConfigError: unknown section or key, or a value failing validation
        """
        if not isinstance(data, dict):
            raise ConfigError("Config must be a JSON object")

        kwargs = {}
        for key, value in data.items():
            if key == 'output_dir':
                kwargs[key] = str(value)
                continue
            if key not in SECTIONS:
                raise ConfigError(f"Unknown config section '{key}'")
            if not isinstance(value, dict):
                raise ConfigError(f"Config section '{key}' must be an object")
            section_cls = SECTIONS[key]
            known = {f.name for f in fields(section_cls)}
            unknown = sorted(set(value) - known)
            if unknown:
                raise ConfigError(f"Unknown key(s) in section '{key}': {', '.join(unknown)}")
            kwargs[key] = section_cls(**value)

        config = cls(**kwargs)
        config.validate()
        return config

    def to_dict(self) -> Dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def validate(self):
        """Raise ConfigError on the first invalid value"""
        nl = self.nonlinearity
        if nl.family not in FAMILIES:
            raise ConfigError(f"Unknown family '{nl.family}' (expected one of {', '.join(FAMILIES)})")
        if nl.family in ('power', 'oscillatory_power') and not _positive(nl.q):
            raise ConfigError(f"nonlinearity.q must be positive, got {nl.q}")
        if nl.family in ('exponential', 'oscillatory_exponential') and not _positive(nl.alpha):
            raise ConfigError(f"nonlinearity.alpha must be positive for {nl.family}, got {nl.alpha}")
        if nl.family == 'tabulated':
            if not nl.table_path:
                raise ConfigError("nonlinearity.table_path is required for the tabulated family")
            if not Path(nl.table_path).is_file():
                raise ConfigError(f"Table file not readable: {nl.table_path}")

        quad = self.quadrature
        for name in ('rel_tol', 'tail_cap', 'sample_cap', 'exp_span'):
            if not _positive(getattr(quad, name)):
                raise ConfigError(f"quadrature.{name} must be positive, got {getattr(quad, name)}")

        hyp = self.hypotheses
        if hyp.shift not in ('power', 'exponential'):
            raise ConfigError(f"hypotheses.shift must be 'power' or 'exponential', got {hyp.shift!r}")
        if len(hyp.window) != 2 or not 0 < hyp.window[0] < hyp.window[1]:
            raise ConfigError(f"hypotheses.window must be [t_lo, t_hi] with 0 < t_lo < t_hi, got {hyp.window}")
        if hyp.K < 0 or hyp.p < 1:
            raise ConfigError("hypotheses.K must be ≥ 0 and hypotheses.p ≥ 1")

        rad = self.radial
        if not isinstance(rad.N, int) or rad.N < 1:
            raise ConfigError(f"radial.N must be a positive integer, got {rad.N}")
        for name in ('eps_R', 'switch_s', 'r_max', 'rtol', 'boundary_window'):
            if not _positive(getattr(rad, name)):
                raise ConfigError(f"radial.{name} must be positive, got {getattr(rad, name)}")

        pde = self.pde
        if pde.n_r < 3 or pde.n_theta < 4:
            raise ConfigError("pde grid needs n_r ≥ 3 and n_theta ≥ 4")
        if not pde.M_sequence or not all(_positive(M) for M in pde.M_sequence):
            raise ConfigError("pde.M_sequence must be a non-empty list of positive levels")
        if not 0 <= pde.grading < 1:
            raise ConfigError(f"pde.grading must lie in [0, 1), got {pde.grading}")
        if not all(0 < lam < 1 for lam in pde.lambdas) or not 0 < pde.slab_lambda < 1:
            raise ConfigError("pde λ values must lie in (0, 1)")
        if not 0 < pde.restriction_h < 1:
            raise ConfigError(f"pde.restriction_h must lie in (0, 1), got {pde.restriction_h}")

        mp = self.maxprinciple
        if not 0 < mp.lam < 1:
            raise ConfigError(f"maxprinciple.lam must lie in (0, 1), got {mp.lam}")
        if not _positive(mp.C_H) or mp.C0 < 0 or mp.samples < 4:
            raise ConfigError("maxprinciple needs C_H > 0, C0 ≥ 0 and samples ≥ 4")
        if len(mp.euler_interval) != 2 or not 0 < mp.euler_interval[0] < mp.euler_interval[1]:
            raise ConfigError(f"maxprinciple.euler_interval must satisfy 0 < a < b, got {mp.euler_interval}")

    # ------------------------------------------------------------------
    # Builders
    # ------------------------------------------------------------------

    def build_nonlinearity(self) -> Nonlinearity:
        nl = self.nonlinearity
        try:
            if nl.family == 'tabulated':
                return Nonlinearity.from_csv(nl.table_path)
            if nl.family in ('power', 'oscillatory_power'):
                return Nonlinearity(family=nl.family, q=float(nl.q), derivative_mode=nl.derivative_mode)
            return Nonlinearity(family=nl.family, alpha=float(nl.alpha), derivative_mode=nl.derivative_mode)
        except LabError as e:
            raise ConfigError(f"Invalid nonlinearity: {e}") from e

    def build_profile(self) -> GrowthProfile:
        quad = self.quadrature
        return GrowthProfile(
            self.build_nonlinearity(),
            t0=quad.t0,
            quad_rel_tol=quad.rel_tol,
            tail_cap=quad.tail_cap,
            sample_cap=quad.sample_cap,
            exp_span=quad.exp_span,
        )

    def radial_settings(self, threads: int = 1) -> RadialSettings:
        rad = self.radial
        return RadialSettings(
            eps_R=rad.eps_R,
            switch_s=rad.switch_s,
            r_max=rad.r_max,
            rtol=rad.rtol,
            max_oscillations=rad.max_oscillations,
            threads=threads,
        )


def _positive(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0


def load_config(path: Optional[str] = None) -> ExperimentConfig:
    """
    Load a config file (defaults only when path is None)

    Raises:
        ConfigError: missing file, JSON syntax error (with line/column) or invalid content
    """
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    except TypeError as e:
        raise ConfigError(f"{path}: {e}") from e
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as e:
        raise ConfigError(f"{path}: {e}") from e


def parse_override(text: str):
    """'section.key=value' → (section, key, value); value parsed as JSON or kept as a string"""
    if '=' not in text:
        raise ConfigError(f"Override must look like section.key=value, got {text!r}")
    target, raw = text.split('=', 1)
    if target == 'output_dir':
        return None, 'output_dir', raw
    if target.count('.') != 1:
        raise ConfigError(f"Override target must be section.key, got {target!r}")
    section, key = target.split('.')
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return section, key, value


def apply_overrides(config: ExperimentConfig, overrides: Sequence[str]) -> ExperimentConfig:
    """Return a new config with every override applied, validated"""
    data = config.to_dict()
    for text in overrides or ():
        section, key, value = parse_override(text)
        if section is None:
            data[key] = value
            continue
        if section not in SECTIONS:
            raise ConfigError(f"Unknown config section '{section}'")
        data[section][key] = value
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def resolve_threads(cli_value: Optional[int] = None) -> int:
    """--threads, then BLOWUP_LAB_THREADS (after loading .env), then min(cpu count, 8)"""
    if cli_value is not None:
        if cli_value < 1:
            raise ConfigError(f"--threads must be positive, got {cli_value}")
        return int(cli_value)

    load_dotenv()
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from e
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return value
    return min(os.cpu_count() or 1, MAX_DEFAULT_THREADS)

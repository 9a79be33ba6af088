"""
Blow-up Lab Modules
===================

This package contains the core modules for blowup-lab:

- nonlinearity: Nonlinearity families, antiderivatives, monotonicity checks
- asymptotics: ψ/φ integrals and the growth-hypothesis limit checks
- radial_solver: Radial large solutions on the unit ball by shooting
- pde_solver: Truncated problems on the disk and symmetry diagnostics
- maxprinciple_lab: Lens width, barrier verification, Euler counterexample
- reports: Hypothesis and maximum-principle reports
- config: Experiment configuration
- utils: Export functions and helpers
"""

from .errors import LabError, ConfigError
from .nonlinearity import Nonlinearity
from .asymptotics import GrowthProfile
from .radial_solver import RadialSettings, RadialSolution, solve_unit_ball
from .pde_solver import PolarGrid, DiskSolution, solve_disk
from .config import ExperimentConfig, load_config
from .utils import (
    ArtifactWriter,
    export_to_json,
    export_to_csv,
)

__all__ = [
    'LabError',
    'ConfigError',
    'Nonlinearity',
    'GrowthProfile',
    'RadialSettings',
    'RadialSolution',
    'solve_unit_ball',
    'PolarGrid',
    'DiskSolution',
    'solve_disk',
    'ExperimentConfig',
    'load_config',
    'ArtifactWriter',
    'export_to_json',
    'export_to_csv',
]

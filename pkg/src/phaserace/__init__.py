"""Static data race detection for OpenMP kernels by phase interval analysis."""

from .pia import PhaseInterval, run_pia
from .pipeline import Analysis, analyze, analyze_file

__all__ = ["Analysis", "PhaseInterval", "analyze", "analyze_file", "run_pia"]
__version__ = "0.1.0"

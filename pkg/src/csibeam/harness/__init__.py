from .config import ExperimentConfig, preset
from .experiments import compare_schemes, run_sweep

__all__ = ['ExperimentConfig', 'preset', 'compare_schemes', 'run_sweep']

"""Robust beamforming codebooks from a historical CSI database."""

from .database import CsiDatabase, generate_database
from .errors import (ConfigurationError, ConvergenceError, CsibeamError, DimensionError,
                     EmptyNeighborhoodError, SolverError)
from .neighborhood import NeighborhoodParams, build_neighborhood, closeness
from .optimizer import (Codebook, SolverConfig, ebf_codebook, min_sum_gain, mrt_codebook,
                        sca_design)

__version__ = '0.1.0'

__all__ = ['CsiDatabase', 'generate_database', 'CsibeamError', 'ConfigurationError',
           'ConvergenceError', 'DimensionError', 'EmptyNeighborhoodError', 'SolverError',
           'NeighborhoodParams', 'build_neighborhood', 'closeness', 'Codebook', 'SolverConfig',
           'ebf_codebook', 'min_sum_gain', 'mrt_codebook', 'sca_design', '__version__']

from .baselines import ebf_codebook, mrt_baseline_gain, mrt_beamformer, mrt_codebook
from .gains import Codebook, min_sum_gain, sum_gains, taylor_minorant, to_db
from .oracle import brute_force_oracle
from .sca import SolverConfig, SolverReport, sca_design
from .subproblem import SubproblemResult, solve_subproblem

__all__ = ['Codebook', 'min_sum_gain', 'sum_gains', 'taylor_minorant', 'to_db',
           'mrt_beamformer', 'mrt_codebook', 'mrt_baseline_gain', 'ebf_codebook',
           'solve_subproblem', 'SubproblemResult', 'SolverConfig', 'SolverReport',
           'sca_design', 'brute_force_oracle']

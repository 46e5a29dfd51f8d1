"""Secrecy-rate simulation and optimization for a RIS-aided mmWave
downlink with low-resolution DACs."""

from .ao import AOResult, SchemeKind, ao_optimize, mrt_beamformer, run_scheme
from .channel import (gen_channels, gen_direct_channels, path_loss_db,
                      steering_vector)
from .experiments import (ExperimentConfig, TrialRecord, derive_seed, emit_csv,
                          emit_convergence_trace, load_experiment,
                          run_monte_carlo)
from .model import (BeamformerState, ChannelSet, Geometry, PhaseVector,
                    SystemConfig, build_codebook, load_config, validate_config)
from .pga import pga_baseline
from .phases import (BCDCoefficients, PhaseProblem, bcd_coefficients, bcd_sweep,
                     exhaustive_phase_search, project_discrete, ratio_objective,
                     solve_theorem1)
from .quantization import (QuantizationModel, distortion_factor,
                           quant_covariance, transmit_power)
from .rates import (EffectiveLinks, effective_links, eve_rate, secrecy_rate,
                    user_rate)
from .sca import SCAAnchors, ConicSubproblem, build_subproblem, sca_solve, solve_subproblem

__all__ = [name for name in dir() if not name.startswith("_")]

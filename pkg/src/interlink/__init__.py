"""Algebraic connectivity of two-layer networks with budgeted interlinks."""

from .closed_form import (RegularityWitness, SuperdiffusionReport, ThresholdReport, ktok_threshold_bounds,
                          layer_fiedler_bounds, regular_threshold_bracket, regularity_pattern_feasible,
                          regularity_witness, superdiffusion_window, thresholds_allpairs, uniform_allpairs_spectrum,
                          uniform_lambda2, upper_bound_F)
from .core import (InterlayerPattern, LayerGraph, MultilayerNetwork, SupraLaplacian, WeightAssignment,
                   build_supra_laplacian, network_from_layers, uniform_assignment, validate_assignment)
from .design import (GreedyPlan, PerturbationInput, average_laplacian_condition, greedy_interlinks,
                     perturbation_matrix, post_threshold_increment, rayleigh_increment)
from .diffusion import DiffusionTrajectory, balance_interlinks, estimate_rate, simulate
from .embedding import (EmbeddingSolution, clumped_embedding, embedding_dimension, recover_embedding,
                        scale_solution, verify_embedding)
from .formats import format_network, parse_network, parse_parameters
from .spectra import FiedlerData, Spectrum, algebraic_connectivity, fiedler, full_spectrum, specific_connectivity
from .weight_opt import (OptimizationResult, SolverOptions, detect_threshold_numeric, maximize_lambda2,
                         oracle_grid_optimum, sweep_budget)

__version__ = "0.1.0"

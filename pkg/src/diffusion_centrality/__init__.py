"""Conservative and non-conservative diffusion centralities on sparse graphs."""

__version__ = "0.1.0"

from .approx import approximate_centrality, rms_error_vs_exact, verify_loop_invariant
from .centrality import (CentralityConfig, CentralityResult, alpha_centrality,
                         dense_steady_state_oracle, normalized_alpha_centrality, pagerank)
from .diffusion import (DiffusionConfig, conservative_step, nonconservative_step,
                        run_conservative, run_nonconservative)
from .epidemic import EpidemicParams, sis_deterministic, sis_montecarlo, threshold_experiment
from .graph import Graph, degrees, load_edge_list, transpose
from .influence import (correlation_sweep, extract_cascade, influence_estimates,
                        load_activity_log, pearson_rank_correlation)
from .spectral import (epidemic_threshold, expected_path_length_asymptotic, path_series,
                       spectral_radius)

__all__ = [
    "CentralityConfig", "CentralityResult", "DiffusionConfig", "EpidemicParams", "Graph",
    "alpha_centrality", "approximate_centrality", "conservative_step", "correlation_sweep",
    "degrees", "dense_steady_state_oracle", "epidemic_threshold",
    "expected_path_length_asymptotic", "extract_cascade", "influence_estimates",
    "load_activity_log", "load_edge_list", "nonconservative_step",
    "normalized_alpha_centrality", "pagerank", "path_series", "pearson_rank_correlation",
    "rms_error_vs_exact", "run_conservative", "run_nonconservative", "sis_deterministic",
    "sis_montecarlo", "spectral_radius", "threshold_experiment", "transpose",
    "verify_loop_invariant",
]

"""Profiles of the joint probability distribution of discrete factored models."""
from .enumeration import (
    CapExceededError,
    HistogramSpec,
    MassProfile,
    coverage_at_mass,
    enumerate_log_probs,
    enumerate_profile,
    top_k_exact,
)
from .fit import ThresholdResult, epsilon_rank_estimate, fit_normal, mass_threshold
from .formats import ParseError, parse_bif, parse_native, read_network, write_native
from .generators import GenSpec, corpus, generate, parse_gen_spec
from .moments import (
    LiapounovReport,
    LogMoments,
    NormalModel,
    binary_log_moments,
    clt_report,
    contribution_log,
    density_log,
    liapounov_ratio,
    skewness,
    theoretical_normal,
    variable_log_moments,
)
from .network import (
    DegenerateDistributionError,
    Network,
    NetworkError,
    Variable,
    assignment_to_index,
    index_to_assignment,
    state_log_prob,
    state_prob,
)
from .sampling import SampleSummary, draw_state, sample_summary
from .search import StopRule, search_top_states, verify_against_enumeration

__version__ = "0.1.0"

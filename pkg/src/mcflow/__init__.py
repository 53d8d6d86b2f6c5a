"""Analytical and simulated first-hitting-time channel models for
flow-driven molecular communication with mobile transceivers, plus the OOK
link analysis built on top of them."""

__version__ = "0.1.0"

from .scenario import (
    ChannelConfig,
    DistanceLaw,
    MobilityCase,
    DegenerateVarianceError,
    distance_law,
    distance_pdf,
)
from .numerics import (
    AccuracyError,
    IntegrandError,
    QuadratureSpec,
    RandomStream,
    DEFAULT_QUADRATURE,
    erf,
    erfc,
    exp_times_erfc_scaled,
    gaussian_tail_q,
    integrate,
)
from .hitting_time import (
    ArrivalTable,
    HittingTimePdf,
    NonpositiveDistanceError,
    arrival_probability,
    arrival_table,
    fht_pdf,
    fht_pdf_numeric,
    hitting_time_pdf,
    ig_pdf,
    levy_pdf,
)
from .particle_sim import (
    EmptySampleError,
    HitSample,
    SimSpec,
    default_sim_spec,
    empirical_pdf,
    simulate_hits,
)
from .link import (
    HypothesisStats,
    LinkParams,
    LinkSimResult,
    NegativeGammaError,
    Threshold,
    average_detection,
    capacity,
    constant_arrivals,
    detect,
    detection_probs,
    error_probability,
    hypothesis_stats,
    link_params_from_config,
    mutual_information,
    negative_branch_mass,
    optimal_threshold,
    optimal_thresholds,
    roc_sweep,
    simulate_link,
    slot_error_sweep,
    validity_advisories,
)

__all__ = [
    "__version__",
    "ChannelConfig", "DistanceLaw", "MobilityCase", "DegenerateVarianceError",
    "distance_law", "distance_pdf",
    "AccuracyError", "IntegrandError", "QuadratureSpec", "RandomStream",
    "DEFAULT_QUADRATURE", "erf", "erfc", "exp_times_erfc_scaled",
    "gaussian_tail_q", "integrate",
    "ArrivalTable", "HittingTimePdf", "NonpositiveDistanceError",
    "arrival_probability", "arrival_table", "fht_pdf", "fht_pdf_numeric",
    "hitting_time_pdf", "ig_pdf", "levy_pdf",
    "EmptySampleError", "HitSample", "SimSpec", "default_sim_spec",
    "empirical_pdf", "simulate_hits",
    "HypothesisStats", "LinkParams", "LinkSimResult", "NegativeGammaError",
    "Threshold", "average_detection", "capacity", "constant_arrivals",
    "detect", "detection_probs", "error_probability", "hypothesis_stats",
    "link_params_from_config", "mutual_information", "negative_branch_mass",
    "optimal_threshold", "optimal_thresholds", "roc_sweep", "simulate_link",
    "slot_error_sweep", "validity_advisories",
]

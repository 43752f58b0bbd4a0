from .outcome import (
    Classification,
    DiagnosticsTable,
    RunOutcome,
    Snapshot,
    classify,
    front_positions,
)
from .energy import EnergyBreakdown, EnergyDecayReport, energy, energy_decay_check
from .heat import (
    HeatSolution,
    heat_evolve,
    heat_kernel,
    kernel_norm,
    kernel_norm_quadrature,
    self_similarity_gap,
)
from .claim1 import Claim1Report, claim1_profile, claim1_scan, cubic_term_limit, cutoff
from .comparison import ComparisonReport, comparison_bound_check

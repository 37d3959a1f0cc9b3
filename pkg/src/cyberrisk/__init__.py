"""Deterministic Monte Carlo engine for IoT cyber-risk loss quantification."""

from .distributions import (
    CountDistributionParams,
    DiscreteTable,
    Fixed,
    Lognormal,
    Pareto,
    SeverityDistribution,
    compound_count_pmf,
    pareto_density,
    poisson_pmf,
    sample_compound_count,
    sample_exponential,
    sample_poisson,
    sample_severity,
)
from .engine import RiskReport, SimulationSpec, run_simulation, summarize_level
from .loss_model import (
    AggregateLossParams,
    DeviceParameters,
    DeviceOutcome,
    PremiumSchedule,
    discount_factor,
    portfolio_loss,
    premium_schedule,
    simulate_aggregate_loss,
    simulate_device,
)
from .risk_measures import (
    EmpiricalDistribution,
    RiskMetrics,
    conditional_tail_expectation,
    expected_shortfall,
    risk_margin_ratio,
    shortfall_probability,
    value_at_risk,
)
from .scenario import (
    RiskLevel,
    ScenarioConfig,
    attacks_per_year,
    baseline_proportion,
    decompose_intensity,
    level_parameters,
    thin_intensity,
)
from .streams import RandomStream, derive_stream

__version__ = "0.1.0"

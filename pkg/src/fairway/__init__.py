"""Distributive-fairness metrics and trade-off analysis for traffic control.

Two case studies share one metrics core: a signalized grid whose signal plans
allocate delay, and a two-route pricing model whose toll allocates travel
costs across users with different values of time.
"""

__version__ = "0.1.0"

from .analysis import (
    Dendrogram,
    MetricMatrix,
    alpha_efficient_set,
    cluster_metrics,
    convexity_ratio,
    goal_conflict,
)
from .errors import (
    ConfigError,
    DegenerateEfficiency,
    DegenerateMean,
    DegenerateMetric,
    EmptyAllocation,
    FairwayError,
    InvalidFlow,
    InvalidSpec,
    InvalidValue,
    NoConvergence,
    UnknownMetric,
)
from .metrics import (
    Allocation,
    DispersionKind,
    DispersionMetric,
    Ideology,
    ResourceKind,
    dispersion,
    fairness_profile,
    perceived_delay,
    welfare,
)
from .routing import (
    PricingScenario,
    RouteSpec,
    VotDistribution,
    equilibrium_split,
    fairness_optimal_split,
    price_sweep,
    system_optimal_split,
    travel_time,
)

__all__ = [
    "Allocation",
    "ConfigError",
    "Dendrogram",
    "DegenerateEfficiency",
    "DegenerateMean",
    "DegenerateMetric",
    "DispersionKind",
    "DispersionMetric",
    "EmptyAllocation",
    "FairwayError",
    "Ideology",
    "InvalidFlow",
    "InvalidSpec",
    "InvalidValue",
    "MetricMatrix",
    "NoConvergence",
    "PricingScenario",
    "ResourceKind",
    "RouteSpec",
    "UnknownMetric",
    "VotDistribution",
    "alpha_efficient_set",
    "cluster_metrics",
    "convexity_ratio",
    "dispersion",
    "equilibrium_split",
    "fairness_optimal_split",
    "fairness_profile",
    "goal_conflict",
    "perceived_delay",
    "price_sweep",
    "system_optimal_split",
    "travel_time",
    "welfare",
]

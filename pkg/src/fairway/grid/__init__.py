"""Signalized Manhattan-grid case study: network, signal plans and simulation."""

from .kernel import HAVE_EXTENSION, default_backend
from .network import EW, NS, GridSpec, Network, Route, build_network
from .signals import GREEN_MAX_S, GREEN_MIN_S, Phase, SignalPlan, phase_at
from .sim import DemandSpec, SimulationResult, VehicleRecords, result_metrics, run, sweep

__all__ = [
    "EW",
    "GREEN_MAX_S",
    "GREEN_MIN_S",
    "HAVE_EXTENSION",
    "NS",
    "DemandSpec",
    "GridSpec",
    "Network",
    "Phase",
    "Route",
    "SignalPlan",
    "SimulationResult",
    "VehicleRecords",
    "build_network",
    "default_backend",
    "phase_at",
    "result_metrics",
    "run",
    "sweep",
]

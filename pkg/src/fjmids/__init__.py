"""Multidimensional Friedkin-Johnsen opinion dynamics with issue coupling."""

__version__ = "0.1.0"

from .model import NetworkModel, OpinionState, normalize_model, validate_model, load_model  # noqa: E402
from .graph import AgentClassification, AgentStatus, build_graph, classify_agents  # noqa: E402
from .spectra import SpectralReport, analyze_spectrum, spectral_radius  # noqa: E402
from .dynamics import Trajectory, limit_opinion, simulate, step  # noqa: E402

__all__ = [
    "NetworkModel", "OpinionState", "normalize_model", "validate_model", "load_model",
    "AgentClassification", "AgentStatus", "build_graph", "classify_agents",
    "SpectralReport", "analyze_spectrum", "spectral_radius",
    "Trajectory", "limit_opinion", "simulate", "step",
]

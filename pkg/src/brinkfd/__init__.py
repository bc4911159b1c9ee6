"""Divergence-free fictitious-domain Navier-Stokes solver with nonlinear Brinkman penalization."""
from .timeloop import REFERENCE_PRESET, RunConfig, SweepRecord, run

__all__ = ["REFERENCE_PRESET", "RunConfig", "SweepRecord", "run"]
__version__ = "0.1.0"

"""torusflow: pseudo-spectral torus flows and blow-up diagnostics."""

__version__ = "0.1.0"

from .grid import Field, Grid, Spectrum
from .models import FlowState, Model, StepperConfig
from .series import DiagnosticSample, DiagnosticSeries, SeriesParams
from .synth import SyntheticProfile

__all__ = [
    "Field",
    "Grid",
    "Spectrum",
    "FlowState",
    "Model",
    "StepperConfig",
    "DiagnosticSample",
    "DiagnosticSeries",
    "SeriesParams",
    "SyntheticProfile",
    "__version__",
]

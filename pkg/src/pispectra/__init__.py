"""Eigenvalue analysis and simulation of cascaded pi-section lines energized by inverters."""
from .dynamics import (
    FreqResponse,
    Ramp,
    SignalSpec,
    SimResult,
    Tone,
    frequency_response,
    simulate,
    thd,
)
from .line import (
    ConfigError,
    ControlGains,
    LineParams,
    SectionParams,
    StateSpaceModel,
    apply_gains,
    build_open_loop,
    closed_loop_model,
    load_config,
    section_params,
)
from .modes import Mode, Spectrum
from .network import NetworkSpec, assemble, energize, load_network, wscc9_spec
from .oracle import NumericalError, OracleReport, compare, numeric_spectrum, poly_roots
from .spectrum import (
    analytic_spectrum,
    char_poly,
    chebyshev_u,
    dtheta_dkv,
    ki_sensitivity,
    open_loop_spectrum,
    spectrum_cross_current,
    spectrum_virtual_resistance,
    spectrum_voltage_control,
    theta_roots_voltage,
)

__all__ = [
    "FreqResponse",
    "Ramp",
    "SignalSpec",
    "SimResult",
    "Tone",
    "frequency_response",
    "simulate",
    "thd",
    "ConfigError",
    "ControlGains",
    "LineParams",
    "SectionParams",
    "StateSpaceModel",
    "apply_gains",
    "build_open_loop",
    "closed_loop_model",
    "load_config",
    "section_params",
    "Mode",
    "Spectrum",
    "NetworkSpec",
    "assemble",
    "energize",
    "load_network",
    "wscc9_spec",
    "NumericalError",
    "OracleReport",
    "compare",
    "numeric_spectrum",
    "poly_roots",
    "analytic_spectrum",
    "char_poly",
    "chebyshev_u",
    "dtheta_dkv",
    "ki_sensitivity",
    "open_loop_spectrum",
    "spectrum_cross_current",
    "spectrum_virtual_resistance",
    "spectrum_voltage_control",
    "theta_roots_voltage",
]

__version__ = "0.1.0"

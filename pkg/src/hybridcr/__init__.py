"""Hybrid analog/digital precoding for underlay cognitive-radio MIMO links.

Three transmitter designs share one scenario model:

* :func:`solve_digital_precoder` - capacity-optimal fully digital benchmark,
* :func:`solve_hybrid_mi` - ADMM on the mutual information,
* :func:`solve_hybrid_frobenius` - ADMM on the distance to the digital optimum,

plus the hybrid MMSE receiver :func:`solve_hybrid_postcoder` and the sweep
harness behind the ``hybridcr`` command.
"""
__version__ = "0.1.0"

from .channel import SystemConfig, ScenarioChannels, build_scenario, snr_to_noise
from .diagnostics import AdmmTrace, ConvergenceAudit, audit_convergence
from .digital import DigitalSolution, digital_mmse_postcoder, solve_digital_precoder
from .errors import (ConfigurationError, DimensionError, DomainError, HybridCRError,
                     NumericalError, SingularityError)
from .hybrid_frob import FrobConfig, solve_hybrid_frobenius
from .hybrid_mi import AdmmConfig, HybridPrecoder, solve_hybrid_mi
from .hybrid_rx import HybridPostcoder, closed_form_mse, solve_hybrid_postcoder
from .metrics import LinkReport, audit, spectral_efficiency

__all__ = [
    "AdmmConfig", "AdmmTrace", "ConfigurationError", "ConvergenceAudit", "DigitalSolution",
    "DimensionError", "DomainError", "FrobConfig", "HybridCRError", "HybridPostcoder",
    "HybridPrecoder", "LinkReport", "NumericalError", "ScenarioChannels", "SingularityError",
    "SystemConfig", "audit", "audit_convergence", "build_scenario", "closed_form_mse",
    "digital_mmse_postcoder", "snr_to_noise", "solve_digital_precoder",
    "solve_hybrid_frobenius", "solve_hybrid_mi", "solve_hybrid_postcoder",
    "spectral_efficiency",
]

"""Multiphoton resonances of the coherently driven Jaynes-Cummings model.

Subpackages by concern: `hilbert` (operators and states on the truncated
cavity-atom space), `liouville` (Lindblad generator, steady states,
propagation, photon correlations), `dressed` (the six-level secular model
and its closed forms), `wigner` (phase-space distributions), `qsd`
(quantum-state-diffusion trajectories), `kerr` (the driven Kerr
comparison oscillator) and `cli` (experiment runner).
"""

from . import dressed, hilbert, kerr, liouville, qsd, wigner
from .errors import (
    ConfigError,
    DegenerateKernel,
    JcsimError,
    NormCollapse,
    StepFailure,
    TruncationWarning,
    ZeroIntensity,
)

__version__ = "0.1.0"

__all__ = [
    "hilbert", "liouville", "dressed", "wigner", "qsd", "kerr",
    "JcsimError", "DegenerateKernel", "StepFailure", "ZeroIntensity",
    "NormCollapse", "ConfigError", "TruncationWarning",
    "__version__",
]

"""Randomized benchmarking simulator for microwave-driven qubits in a 2D array.

Submodules:
    su2       exact detuned-pulse SU(2) propagators and fidelity averages
    clifford  the 24-element single-qubit group as microwave pulse tables
    noise     coherence budget, quasi-static detuning, timing, SPAM models
    rb        sequence generation, Monte Carlo shots, decay fitting
    fitting   deterministic weighted least squares for decay curves
    sites     array geometry, addressing beam, crosstalk, loading, readout
    config    the JSON run-configuration document
    cli       batch front-end (``rbsim`` console script)
"""

__version__ = "0.1.0"

from .clifford import load_group, verify_group
from .config import RunConfig, default_config, load_config
from .fitting import DecayFit, fit_survival
from .noise import NoiseParams, SpamParams, analytic_budget, coherence_alpha
from .rb import RBDataset, fit_decay, generate_sequences, run_rb
from .sites import (
    ArrayGeometry,
    DriveParams,
    ReadoutModel,
    StarkBeam,
    crosstalk_error,
    detuning_scan,
    effective_detunings,
    load_array,
    optimal_detuning,
    site_selected_rb,
)
from .su2 import PulseSpec, bloch_avg_fidelity, detuned_pulse, transfer_probability

__all__ = [
    "__version__",
    "load_group",
    "verify_group",
    "RunConfig",
    "default_config",
    "load_config",
    "DecayFit",
    "fit_survival",
    "NoiseParams",
    "SpamParams",
    "analytic_budget",
    "coherence_alpha",
    "RBDataset",
    "fit_decay",
    "generate_sequences",
    "run_rb",
    "ArrayGeometry",
    "DriveParams",
    "ReadoutModel",
    "StarkBeam",
    "crosstalk_error",
    "detuning_scan",
    "effective_detunings",
    "load_array",
    "optimal_detuning",
    "site_selected_rb",
    "PulseSpec",
    "bloch_avg_fidelity",
    "detuned_pulse",
    "transfer_probability",
]

"""Certify quantum memory in non-Markovian qubit dynamics from local channel data."""

from .qcore import (
    Dynamics,
    QuantumChannel,
    compose_maps,
    invert_map,
    kraus_to_choi,
    choi_to_kraus,
    qubit_affine_form,
    trace_distance,
    validate_cpt,
)
from .entanglement import concurrence, concurrence_of_assistance, coa_oracle
from .families import (
    ThermalADParams,
    ToyModelParams,
    damping_channel,
    dephasing_channel,
    thermal_ad_channel,
    toy_dilation_dynamics,
)

__version__ = "0.1.0"

__all__ = [
    "Dynamics",
    "QuantumChannel",
    "compose_maps",
    "invert_map",
    "kraus_to_choi",
    "choi_to_kraus",
    "qubit_affine_form",
    "trace_distance",
    "validate_cpt",
    "concurrence",
    "concurrence_of_assistance",
    "coa_oracle",
    "ToyModelParams",
    "ThermalADParams",
    "dephasing_channel",
    "damping_channel",
    "thermal_ad_channel",
    "toy_dilation_dynamics",
    "__version__",
]

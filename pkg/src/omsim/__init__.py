"""Mean-field and linear-response model of a driven double cavity with two
movable mirrors coupled by photon tunnelling."""
from .errors import (
    NoConvergence,
    NumericalError,
    OmsimError,
    ParameterError,
    PoleEncountered,
    SingularSystem,
)
from .params import SystemParams, drive_amplitude, from_config, reference_params, validate

__all__ = [
    "NoConvergence",
    "NumericalError",
    "OmsimError",
    "ParameterError",
    "PoleEncountered",
    "SingularSystem",
    "SystemParams",
    "drive_amplitude",
    "from_config",
    "reference_params",
    "validate",
]

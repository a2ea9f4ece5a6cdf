"""Two-branch relativistic probability-amplitude field toolkit."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .dispersion import Branch, group_velocity, omega_branch, series_coeff, truncated_symbol
from .errors import ConfigError, DomainError, RelwaveError, ResourceError, StateError
from .grid import ComplexField, SpectralGrid
from .units import NATURAL, PhysicalParams, make_params, make_scaling
from .wavefield import InitialData, ModeAmplitudes, gaussian_packet, plane_wave, random_state, reconstruct, split

__all__ = [
    "Branch",
    "ComplexField",
    "ConfigError",
    "DomainError",
    "InitialData",
    "ModeAmplitudes",
    "NATURAL",
    "PhysicalParams",
    "RelwaveError",
    "ResourceError",
    "SpectralGrid",
    "StateError",
    "gaussian_packet",
    "group_velocity",
    "make_params",
    "make_scaling",
    "omega_branch",
    "plane_wave",
    "random_state",
    "reconstruct",
    "series_coeff",
    "split",
    "truncated_symbol",
]

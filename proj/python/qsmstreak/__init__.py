"""Split dipole inversion for susceptibility mapping, with streak suppression.

Volumes are float64 arrays of shape (n1, n2, n3); axis 2 is the main field.
"""

from ._core import (
    ArgumentError,
    ConfigError,
    ConsistencyError,
    FormatError,
    IoError,
    NumericError,
    QsmError,
    SymbolDomainError,
    SymmetryError,
    default_spike_amplitude,
    forward,
    g_kernel_oracle,
    metrics,
    perturb,
    phantom,
    read_volume,
    reconstruct,
    run_experiment,
    selftest,
    write_volume,
)

METHODS = ("naive", "tkd-classic", "tkd-smooth", "r-reg", "t-enhanced")

__all__ = [
    "ArgumentError",
    "ConfigError",
    "ConsistencyError",
    "FormatError",
    "IoError",
    "METHODS",
    "NumericError",
    "QsmError",
    "SymbolDomainError",
    "SymmetryError",
    "default_spike_amplitude",
    "forward",
    "g_kernel_oracle",
    "metrics",
    "perturb",
    "phantom",
    "read_volume",
    "reconstruct",
    "run_experiment",
    "selftest",
    "write_volume",
]

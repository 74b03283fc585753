"""Atoms in an optical lattice inside a linear or ring cavity: mean-field and
transfer-matrix spectra, Bloch-oscillation monitoring and parameter scans."""

__version__ = "0.1.0"

from .params import ConfigError, Geometry, PhysParams, derive  # noqa: E402

__all__ = ["ConfigError", "Geometry", "PhysParams", "derive", "__version__"]

"""Local parametric estimation of integrated time-varying parameters."""

__version__ = "0.1.0"

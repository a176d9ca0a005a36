"""Universal Cover - approximation algorithms for universal stochastic covering problems."""

__version__ = "1.0.0"

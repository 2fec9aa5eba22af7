"""Resource estimation and desk-scale verification for qubitized QPE of plane-wave/PAW Hamiltonians."""

__version__ = "0.1.0"

"""Segal-Bargmann projection coefficients by quadrature and by simulated photon counting."""

__version__ = "0.1.0"

"""Spectral simulation and invariant checks for f_t = Hf f_x - f Lambda f on the torus."""
__version__ = "0.1.0"

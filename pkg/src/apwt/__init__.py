"""Affine Poincare wavelet transform for boundary data of the 2+1D wave equation."""
__version__ = "0.1.0"

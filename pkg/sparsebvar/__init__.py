"""Sparsified conjugate Minnesota BVARs: estimation, simulation study, forecasting and evaluation"""

__version__ = "0.1.0"

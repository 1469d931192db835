"""Wave propagator kernels for the Laplacian with an Aharonov-Bohm potential in 2D.

Modules
-------
specfun     complex-order Bessel functions, Gamma, remainder W
spectrum    angular eigenbasis, flux fields, polar grids, Hankel transforms
kernel      closed-form G + D kernels of f_{w,t}(L_A) and sin(t sqrt L_A)/sqrt L_A
modesum     independent eigenfunction-expansion oracle and Macdonald formula
propagate   applying propagators to fields, L^p norms, Schur integrals
multiplier  Mikhlin, decay and Hoelder checks on 1D symbols
verify      verification suites
cli         command-line interface
"""
from __future__ import annotations

from .kernel import KernelDecomposition, KernelPoint, kernel_fwt, kernel_sine
from .modesum import kernel_modesum, mode_kernel
from .propagate import PropagationRequest, apply_propagator
from .spectrum import FluxField, PolarField

__version__ = "0.1.0"

__all__ = [
    "FluxField",
    "PolarField",
    "KernelPoint",
    "KernelDecomposition",
    "kernel_fwt",
    "kernel_sine",
    "kernel_modesum",
    "mode_kernel",
    "PropagationRequest",
    "apply_propagator",
]

"""Normalized ground states of -Delta u + lambda u = g(u) with mass constraint
|u|_2^2 = rho^2, for strongly sublinear nonlinearities (g(s)/s -> -infinity at 0).

The energy is regularized near s = 0 with a ramp cutoff, minimized over the
L2 disc by projected gradient descent, and the regularization is driven to
zero by continuation.
"""

__version__ = "0.1.0"

from . import diagnostics, grid, minimizer, nonlinearity, orlicz

__all__ = ["diagnostics", "grid", "minimizer", "nonlinearity", "orlicz", "__version__"]

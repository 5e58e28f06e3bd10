"""Steady states and Lagrangian finite-difference dynamics for the 1D
vacuum free-boundary Navier-Stokes-Riesz system."""

import os as _os

# Cap BLAS/OpenMP pools before numpy loads; only effective on first import.
_threads = _os.environ.get("RIESZ_STAR_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .kernel import RegimeError, RieszParams  # noqa: E402

__version__ = "0.1.0"

__all__ = ["RegimeError", "RieszParams", "__version__"]

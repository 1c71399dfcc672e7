"""Backend selection for the numerical kernels.

The ``GRINGOTTS_BACKEND`` environment variable picks the implementation:

* unset or ``"numba"`` — jit-compiled kernels (unset falls back to numpy
  with a warning if numba cannot be imported);
* ``"numpy"`` — pure numpy/scipy, no compilation step.

``benchmarks/compare_backends.py`` times one against the other.
"""

import os
import warnings

_CHOICE = os.environ.get("GRINGOTTS_BACKEND", "").strip().lower()

if _CHOICE not in ("", "numba", "numpy"):
    raise ImportError(
        f"GRINGOTTS_BACKEND must be 'numba' or 'numpy', got {_CHOICE!r}")

if _CHOICE == "numpy":
    from . import _kernels_numpy as _impl
elif _CHOICE == "numba":
    from . import _kernels_numba as _impl
else:
    try:
        from . import _kernels_numba as _impl
    except ImportError:  # pragma: no cover - environment without numba
        warnings.warn("numba unavailable; falling back to the numpy kernel backend")
        from . import _kernels_numpy as _impl

BACKEND_NAME = _impl.BACKEND_NAME
uniform_stream = _impl.uniform_stream
normal_cdf = _impl.normal_cdf
normal_icdf = _impl.normal_icdf
beta_cdf = _impl.beta_cdf
beta_icdf = _impl.beta_icdf
sample_multipliers = _impl.sample_multipliers
fd_clear_batch = _impl.fd_clear_batch
picard_clear_batch = _impl.picard_clear_batch

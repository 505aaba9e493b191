"""Backend selection for the sequential banded kernels.

The compiled extension ``_ckernels`` is used when importable. Setting the
environment variable ``WAVERAY_PURE_PYTHON=1`` forces the pure-Python
fallback, which is also used automatically if the extension was not built.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("WAVERAY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

gs_sweep = _impl.gs_sweep
kaczmarz_sweep = _impl.kaczmarz_sweep
band_solve = _impl.band_solve

__all__ = ["BACKEND", "gs_sweep", "kaczmarz_sweep", "band_solve"]

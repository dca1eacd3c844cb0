"""Hot-loop kernels with backend selection at import time.

Prefers the compiled extension and falls back to pure numpy when it is not
built. Set RADCOMOPT_PURE_PYTHON=1 to force the fallback (used by the
benchmark and the backend-equivalence tests).
"""

import os

from . import fallback

if os.environ.get("RADCOMOPT_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = fallback
        BACKEND = "python"

mm_inner = _impl.mm_inner
admm_linear_fixed_diag = _impl.admm_linear_fixed_diag

__all__ = ["BACKEND", "mm_inner", "admm_linear_fixed_diag", "fallback"]

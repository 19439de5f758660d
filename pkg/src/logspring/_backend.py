"""Import-time selection between the compiled and pure numerical kernels.

The compiled extension is preferred when it imported cleanly; setting the
environment variable LOGSPRING_PURE=1 forces the NumPy fallback (useful for
benchmarking and for testing both code paths).
"""

import os

from . import _kernels_py

if os.environ.get("LOGSPRING_PURE") == "1":
    kernels = _kernels_py
    BACKEND = "pure"
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "pure"


def compiled_kernels():
    """Return the compiled kernel module, or None when unavailable."""
    try:
        from . import _kernels_cy

        return _kernels_cy
    except ImportError:
        return None

"""Select the compiled kernels when available, else the pure-Python ones.

Set ``BELLSPEC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
kernels = _fallback

if not os.environ.get("BELLSPEC_PURE_PYTHON"):
    try:
        from . import _kernels as kernels  # noqa: F811
    except ImportError:
        pass
    else:
        BACKEND = "cython"

MODES = kernels.MODES
contract = kernels.contract
objective = kernels.objective
multistart = kernels.multistart

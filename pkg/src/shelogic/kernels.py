"""Backend selection for the combinatorial kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the pure-Python ``_pykernels`` module is loaded.  Setting the environment
variable ``SHELOGIC_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from shelogic import _pykernels

python_backend: ModuleType = _pykernels
compiled_backend: ModuleType | None

try:
    from shelogic import _ckernels as compiled_backend  # type: ignore[no-redef]
except ImportError:
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("SHELOGIC_PURE_PYTHON"):
    backend: ModuleType = compiled_backend
    BACKEND = "cython"
else:
    backend = _pykernels
    BACKEND = "python"

compose_table = backend.compose_table
close = backend.close
she_filter = backend.she_filter
shop_code = backend.shop_code

__all__ = [
    "BACKEND",
    "backend",
    "close",
    "compiled_backend",
    "compose_table",
    "python_backend",
    "she_filter",
    "shop_code",
]

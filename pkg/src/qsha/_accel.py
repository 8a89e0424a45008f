"""Select the compiled kernel module, falling back to pure Python.

Set ``QSHA_PURE_PYTHON=1`` to force the fallback.
"""
import os

from qsha import _pykernels

python = _pykernels
compiled = None

if os.environ.get("QSHA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from qsha import _kernels as compiled
    except ImportError:
        compiled = None

kernels = compiled if compiled is not None else python
IMPLEMENTATION = kernels.IMPLEMENTATION

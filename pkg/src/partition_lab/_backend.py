"""Select the counting kernel at import time.

The compiled core is used when it was built and ``PARTITION_LAB_PURE_PYTHON``
is not set to ``1``; otherwise the pure-Python twin is used. Both expose the
same ``at_most_rows`` signature and return identical exact integers.
"""

import os

from . import _kernel_py

if os.environ.get("PARTITION_LAB_PURE_PYTHON") == "1":
    kernel = _kernel_py
else:
    try:
        from . import _kernel as kernel
    except ImportError:
        kernel = _kernel_py

BACKEND = kernel.NAME

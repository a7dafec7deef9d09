"""Pick the batch kernel at import: compiled if available, else pure Python.

Set ``EVFUSION_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernel_py

if os.environ.get("EVFUSION_PURE_PYTHON"):
    _kernel = None
else:
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:
        _kernel = None

if _kernel is not None:
    fuse_batch = _kernel.fuse_batch
    BACKEND = "compiled"
else:
    fuse_batch = _kernel_py.fuse_batch
    BACKEND = "python"

OK = _kernel_py.OK
TOTAL_CONFLICT = _kernel_py.TOTAL_CONFLICT
DEGENERATE_CERTAINTY = _kernel_py.DEGENERATE_CERTAINTY
NO_MODALITIES = _kernel_py.NO_MODALITIES

STATUS_MESSAGES = {
    TOTAL_CONFLICT: "total conflict",
    DEGENERATE_CERTAINTY: "degenerate certainty",
    NO_MODALITIES: "no modalities",
}

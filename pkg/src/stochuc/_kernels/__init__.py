"""Hot-kernel selection: compiled extension when available, NumPy otherwise.

Set ``STOCHUC_PURE=1`` to force the NumPy fallback (useful for benchmarking
and for debugging kernel discrepancies).
"""

from __future__ import annotations

import os

from . import pure

KIND_LEAVE_LOWER = pure.KIND_LEAVE_LOWER
KIND_LEAVE_UPPER = pure.KIND_LEAVE_UPPER
KIND_BOUND_FLIP = pure.KIND_BOUND_FLIP
KIND_UNBOUNDED = pure.KIND_UNBOUNDED

if os.environ.get("STOCHUC_PURE", "") not in ("", "0"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _simplex_ext as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

apply_etas_forward = _impl.apply_etas_forward
apply_etas_transposed = _impl.apply_etas_transposed
ratio_test = _impl.ratio_test
update_basics = _impl.update_basics

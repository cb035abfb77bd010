"""Select the compiled kernels when available, else the numpy fallback.

Set ``DPPMLE_PURE=1`` in the environment to force the fallback.
"""
import os

from dppmle import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("DPPMLE_PURE", "") not in ("1", "true", "yes"):
    try:
        from dppmle import _core as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _fallback

masked_abs_dets = _impl.masked_abs_dets
bordered_abs_dets = _impl.bordered_abs_dets
sphere_min_sin2 = _impl.sphere_min_sin2

__all__ = ["BACKEND", "masked_abs_dets", "bordered_abs_dets", "sphere_min_sin2"]
